//! S-expression reader with source positions.

use super::SmtError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom {
    Symbol(String),
    Keyword(String),
    Numeral(String),
    Decimal(String),
    /// `#b...` digits.
    Binary(String),
    /// `#x...` digits.
    Hex(String),
    Str(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExp {
    Atom(Atom, Pos),
    List(Vec<SExp>, Pos),
}

impl SExp {
    pub fn pos(&self) -> Pos {
        match self {
            SExp::Atom(_, p) | SExp::List(_, p) => *p,
        }
    }

    pub fn symbol(&self) -> Option<&str> {
        match self {
            SExp::Atom(Atom::Symbol(s), _) => Some(s),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[SExp]> {
        match self {
            SExp::List(items, _) => Some(items),
            _ => None,
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Reader<'a> {
    fn pos(&self) -> Pos {
        Pos { line: self.line, column: self.column }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn error(&self, pos: Pos, message: impl Into<String>) -> SmtError {
        SmtError::Parse { line: pos.line, column: pos.column, message: message.into() }
    }

    fn read(&mut self) -> Result<Option<SExp>, SmtError> {
        self.skip_trivia();
        let start = self.pos();
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => return Err(self.error(start, "unclosed parenthesis")),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(SExp::List(items, start)));
                        }
                        Some(_) => items.push(self.read()?.expect("input is non-empty")),
                    }
                }
            }
            ')' => Err(self.error(start, "unexpected `)`")),
            '|' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.error(start, "unterminated quoted symbol")),
                        Some('|') => break,
                        Some('\\') => return Err(self.error(start, "backslash in quoted symbol")),
                        Some(c) => s.push(c),
                    }
                }
                Ok(Some(SExp::Atom(Atom::Symbol(s), start)))
            }
            '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.error(start, "unterminated string literal")),
                        Some('"') => {
                            if self.chars.peek() == Some(&'"') {
                                self.bump();
                                s.push('"');
                            } else {
                                break;
                            }
                        }
                        Some(c) => s.push(c),
                    }
                }
                Ok(Some(SExp::Atom(Atom::Str(s), start)))
            }
            _ => {
                let mut token = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | ';' | '|' | '"') {
                        break;
                    }
                    token.push(c);
                    self.bump();
                }
                classify(token).map(|a| Some(SExp::Atom(a, start))).map_err(|m| self.error(start, m))
            }
        }
    }
}

fn classify(token: String) -> Result<Atom, String> {
    if let Some(rest) = token.strip_prefix("#b") {
        if !rest.is_empty() && rest.chars().all(|c| c == '0' || c == '1') {
            return Ok(Atom::Binary(rest.to_string()));
        }
        return Err(format!("malformed binary literal `{token}`"));
    }
    if let Some(rest) = token.strip_prefix("#x") {
        if !rest.is_empty() && rest.chars().all(|c| c.is_ascii_hexdigit()) {
            return Ok(Atom::Hex(rest.to_string()));
        }
        return Err(format!("malformed hexadecimal literal `{token}`"));
    }
    if let Some(rest) = token.strip_prefix(':') {
        return Ok(Atom::Keyword(rest.to_string()));
    }
    if token.starts_with(|c: char| c.is_ascii_digit()) {
        if token.chars().all(|c| c.is_ascii_digit()) {
            return Ok(Atom::Numeral(token));
        }
        if let Some((int, frac)) = token.split_once('.') {
            if !int.is_empty()
                && !frac.is_empty()
                && int.chars().all(|c| c.is_ascii_digit())
                && frac.chars().all(|c| c.is_ascii_digit())
            {
                return Ok(Atom::Decimal(token));
            }
        }
        return Err(format!("malformed numeric literal `{token}`"));
    }
    Ok(Atom::Symbol(token))
}

/// Reads every top-level s-expression in `text`.
pub fn read_all(text: &str) -> Result<Vec<SExp>, SmtError> {
    let mut reader = Reader { chars: text.chars().peekable(), line: 1, column: 1 };
    let mut out = Vec::new();
    while let Some(e) = reader.read()? {
        out.push(e);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_atoms_and_lists() {
        let es = read_all("(assert (> x 10)) ; comment\n(check-sat) |a b| #b101 #xFF 1.5 :named").unwrap();
        assert_eq!(es.len(), 7);
        assert_eq!(es[1].pos(), Pos { line: 2, column: 1 });
        assert_eq!(es[2], SExp::Atom(Atom::Symbol("a b".into()), Pos { line: 2, column: 13 }));
        assert!(matches!(es[3], SExp::Atom(Atom::Binary(ref b), _) if b == "101"));
        assert!(matches!(es[4], SExp::Atom(Atom::Hex(ref b), _) if b == "FF"));
        assert!(matches!(es[5], SExp::Atom(Atom::Decimal(_), _)));
        assert!(matches!(es[6], SExp::Atom(Atom::Keyword(ref k), _) if k == "named"));
    }

    #[test]
    fn reports_positions_of_errors() {
        match read_all("(assert\n  (> x y)") {
            Err(SmtError::Parse { line, column, .. }) => assert_eq!((line, column), (1, 1)),
            other => panic!("unexpected {other:?}"),
        }
        match read_all("(a))") {
            Err(SmtError::Parse { line, column, .. }) => assert_eq!((line, column), (1, 4)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(read_all("#b102").is_err());
        assert!(read_all("12ab").is_err());
    }
}
