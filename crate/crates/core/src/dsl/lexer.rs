use std::fmt;

/// 1-based line and column (columns count characters, not bytes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Equals,
    Colon,
    Newline,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Number(n) => format!("number `{n}`"),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::LBracket => "`[`".into(),
            TokenKind::RBracket => "`]`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Equals => "`=`".into(),
            TokenKind::Colon => "`:`".into(),
            TokenKind::Newline => "end of line".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Position,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexError {
    pub pos: Position,
    pub found: char,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    while i < chars.len() {
        let c = chars[i];
        let pos = Position { line, column: col };
        let single = match c {
            '{' => Some(TokenKind::LBrace),
            '}' => Some(TokenKind::RBrace),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            '[' => Some(TokenKind::LBracket),
            ']' => Some(TokenKind::RBracket),
            ',' => Some(TokenKind::Comma),
            '=' => Some(TokenKind::Equals),
            ':' => Some(TokenKind::Colon),
            _ => None,
        };
        if let Some(kind) = single {
            tokens.push(Token { kind, pos });
            i += 1;
            col += 1;
            continue;
        }
        if c == '\n' {
            tokens.push(Token {
                kind: TokenKind::Newline,
                pos,
            });
            i += 1;
            line += 1;
            col = 1;
        } else if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
        } else if c.is_whitespace() {
            i += 1;
            col += 1;
        } else if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_continue(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            tokens.push(Token {
                kind: TokenKind::Ident(word),
                pos,
            });
        } else if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' {
            let start = i;
            if c == '-' || c == '+' {
                i += 1;
            }
            let digits_start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut had_digits = i > digits_start;
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                let frac_start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                had_digits |= i > frac_start;
            }
            if !had_digits {
                return Err(LexError { pos, found: c });
            }
            let raw: String = chars[start..i].iter().collect();
            col += i - start;
            let value = raw.parse::<f64>().map_err(|_| LexError { pos, found: c })?;
            tokens.push(Token {
                kind: TokenKind::Number(value),
                pos,
            });
        } else {
            return Err(LexError { pos, found: c });
        }
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        pos: Position { line, column: col },
    });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        tokenize(text).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn numbers_and_identifiers() {
        assert_eq!(
            kinds("low=(0,-1.5,3.,5) # trailing"),
            vec![
                TokenKind::Ident("low".into()),
                TokenKind::Equals,
                TokenKind::LParen,
                TokenKind::Number(0.0),
                TokenKind::Comma,
                TokenKind::Number(-1.5),
                TokenKind::Comma,
                TokenKind::Number(3.0),
                TokenKind::Comma,
                TokenKind::Number(5.0),
                TokenKind::RParen,
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn positions_track_lines_and_columns() {
        let toks = tokenize("a\n  bc").unwrap();
        assert_eq!(toks[0].pos, Position { line: 1, column: 1 });
        assert_eq!(toks[1].kind, TokenKind::Newline);
        assert_eq!(toks[2].pos, Position { line: 2, column: 3 });
    }

    #[test]
    fn rejects_stray_characters() {
        let err = tokenize("a ; b").unwrap_err();
        assert_eq!(err.pos, Position { line: 1, column: 3 });
        assert_eq!(err.found, ';');
        assert!(tokenize("-").is_err());
        assert!(tokenize(".").is_err());
    }
}
