//! JSON and CSV suite reports.

use std::path::Path;

use serde::Serialize;

use super::{HarnessError, Mode, RunConfig, SuiteMetrics};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfigEcho {
    pub mode: Mode,
    pub canonize: bool,
    pub bloom_bits: usize,
    pub o1: bool,
    pub o2: bool,
    pub o3: bool,
    pub lookup_timeout_ms: u128,
    pub audit: bool,
    /// Solver command or oracle manifest path.
    pub solver: String,
}

impl ConfigEcho {
    pub fn new(cfg: &RunConfig, solver: impl Into<String>) -> ConfigEcho {
        let s = &cfg.strategy;
        ConfigEcho {
            mode: cfg.mode,
            canonize: s.canonize,
            bloom_bits: s.bloom_bits,
            o1: s.o1,
            o2: s.o2,
            o3: s.o3,
            lookup_timeout_ms: s.lookup_deadline.as_millis(),
            audit: cfg.audit,
            solver: solver.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    #[serde(flatten)]
    pub metrics: SuiteMetrics,
    pub config: ConfigEcho,
}

/// Column order of CSV reports; empty cells mean "not measured".
pub const CSV_HEADER: [&str; 27] = [
    "suite_id",
    "formula_count",
    "sat_count",
    "unsat_count",
    "unknown_count",
    "cache_hits",
    "timeout_misses",
    "candidates_selected",
    "candidates_tested",
    "cores_stored",
    "unsat_reuse_ratio",
    "all_formula_reuse_ratio",
    "lookup_overhead_nanos",
    "solver_nanos",
    "unsat_solver_nanos",
    "time_saved_nanos",
    "time_saved_on_unsat_ratio",
    "unsound_hits",
    "mode",
    "canonize",
    "bloom_bits",
    "o1",
    "o2",
    "o3",
    "lookup_timeout_ms",
    "audit",
    "solver",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_row(r: &SuiteReport) -> [String; 27] {
    let (m, c) = (&r.metrics, &r.config);
    [
        m.suite_id.clone(),
        m.formula_count.to_string(),
        m.sat_count.to_string(),
        m.unsat_count.to_string(),
        m.unknown_count.to_string(),
        m.cache_hits.to_string(),
        m.timeout_misses.to_string(),
        m.candidates_selected.to_string(),
        m.candidates_tested.to_string(),
        m.cores_stored.to_string(),
        m.unsat_reuse_ratio.to_string(),
        m.all_formula_reuse_ratio.to_string(),
        m.lookup_overhead_nanos.to_string(),
        m.solver_nanos.to_string(),
        m.unsat_solver_nanos.to_string(),
        opt(m.time_saved_nanos),
        opt(m.time_saved_on_unsat_ratio),
        m.unsound_hits.to_string(),
        c.mode.label().to_string(),
        c.canonize.to_string(),
        c.bloom_bits.to_string(),
        c.o1.to_string(),
        c.o2.to_string(),
        c.o3.to_string(),
        c.lookup_timeout_ms.to_string(),
        c.audit.to_string(),
        c.solver.clone(),
    ]
}

pub fn render_report(reports: &[SuiteReport], format: ReportFormat) -> Result<String, HarnessError> {
    let err = |e: &dyn std::fmt::Display| HarnessError::Report(e.to_string());
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(reports).map(|s| s + "\n").map_err(|e| err(&e)),
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER).map_err(|e| err(&e))?;
            for r in reports {
                w.write_record(csv_row(r)).map_err(|e| err(&e))?;
            }
            let bytes = w.into_inner().map_err(|e| err(&e))?;
            String::from_utf8(bytes).map_err(|e| err(&e))
        }
    }
}

pub fn emit_report(reports: &[SuiteReport], format: ReportFormat, path: &Path) -> Result<(), HarnessError> {
    let text = render_report(reports, format)?;
    std::fs::write(path, text).map_err(|source| HarnessError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(id: &str) -> SuiteReport {
        let cfg = RunConfig::new(Mode::Cachealot);
        SuiteReport {
            metrics: SuiteMetrics { suite_id: id.into(), formula_count: 2, cache_hits: 1, unsat_reuse_ratio: 50.0, ..Default::default() },
            config: ConfigEcho::new(&cfg, "z3 -in"),
        }
    }

    #[test]
    fn json_has_every_field() {
        let text = render_report(&[report("s")], ReportFormat::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let obj = v.as_array().unwrap()[0].as_object().unwrap();
        for col in &CSV_HEADER[..18] {
            assert!(obj.contains_key(*col), "missing {col}");
        }
        assert_eq!(obj["config"]["mode"], "cachealot");
        assert_eq!(obj["time_saved_nanos"], serde_json::Value::Null);
    }

    #[test]
    fn csv_shape() {
        let text = render_report(&[report("a"), report("b")], ReportFormat::Csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[1].starts_with("a,2,0,0,0,1,"));
        let mut r = csv::Reader::from_reader(text.as_bytes());
        assert!(r.records().all(|rec| rec.unwrap().len() == CSV_HEADER.len()));
    }

    #[test]
    fn writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        emit_report(&[report("s")], ReportFormat::Json, &path).unwrap();
        assert!(std::fs::read_to_string(&path).unwrap().starts_with('['));
        assert!(emit_report(&[], ReportFormat::Csv, &dir.path().join("missing/r.csv")).is_err());
    }
}
