use super::{ParseError, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LBrace,
    RBrace,
    Semi,
    Comma,
    Dot,
    Arrow,
    Colon,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer {n}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    file: &'a str,
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span(&self, line: usize, col: usize, length: usize) -> SourceSpan {
        SourceSpan { file: self.file.to_owned(), line, column: col, length }
    }
}

/// Splits `text` into tokens. Stops at the first lexical error.
pub(crate) fn tokenize(file: &str, text: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { file, chars: text.chars().peekable(), line: 1, col: 1 };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let (line, col) = (cur.line, cur.col);
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while cur.peek().is_some_and(|c| c != '\n') {
                cur.bump();
            }
            continue;
        }
        let single = match c {
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ';' => Some(Tok::Semi),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            ':' => Some(Tok::Colon),
            _ => None,
        };
        if let Some(tok) = single {
            cur.bump();
            out.push(Token { tok, span: cur.span(line, col, 1) });
            continue;
        }
        if c == '-' {
            cur.bump();
            if cur.peek() == Some('>') {
                cur.bump();
                out.push(Token { tok: Tok::Arrow, span: cur.span(line, col, 2) });
                continue;
            }
            return Err(ParseError::new(cur.span(line, col, 1), "stray `-`", vec!["`->`".into()]));
        }
        if c.is_ascii_alphabetic() {
            let mut s = String::new();
            while let Some(c) = cur.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
                s.push(c);
                cur.bump();
            }
            let len = s.len();
            out.push(Token { tok: Tok::Ident(s), span: cur.span(line, col, len) });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
                s.push(c);
                cur.bump();
            }
            let span = cur.span(line, col, s.len());
            let n = s
                .parse::<i64>()
                .map_err(|_| ParseError::new(span.clone(), format!("integer `{s}` is out of range"), vec![]))?;
            out.push(Token { tok: Tok::Int(n), span });
            continue;
        }
        if c == '"' {
            cur.bump();
            let mut s = String::new();
            let mut width = 1;
            loop {
                match cur.bump() {
                    None | Some('\n') => {
                        return Err(ParseError::new(cur.span(line, col, 1), "unterminated string", vec!["`\"`".into()]))
                    }
                    Some('"') => {
                        width += 1;
                        break;
                    }
                    Some('\\') => {
                        let esc = cur.bump();
                        width += 1 + esc.map_or(0, |_| 1);
                        match esc {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            _ => {
                                return Err(ParseError::new(
                                    cur.span(line, col, 1),
                                    "unknown escape in string",
                                    vec!["`\\\"`".into(), "`\\\\`".into(), "`\\n`".into()],
                                ))
                            }
                        }
                    }
                    Some(c) => {
                        width += 1;
                        s.push(c);
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), span: cur.span(line, col, width) });
            continue;
        }
        return Err(ParseError::new(cur.span(line, col, 1), format!("unexpected character {c:?}"), vec![]));
    }
    let (line, col) = (cur.line, cur.col);
    out.push(Token { tok: Tok::Eof, span: cur.span(line, col, 0) });
    Ok(out)
}
