use super::{ParseError, ParseErrorCode, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    /// Raw numeric text; the parser decides between integer and real.
    Num(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Assign,
    Eq,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Arrow,
    Plus,
    Minus,
    Star,
    DotDot,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Num(s) => format!("number `{s}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub(crate) fn symbol(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Assign => ":=",
            Tok::Eq => "=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
            Tok::Arrow => "->",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::DotDot => "..",
            Tok::Ident(_) | Tok::Num(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// Splits `text` into tokens. Unknown characters are reported and skipped;
/// the token list always ends with `Eof`.
pub(crate) fn lex(text: &str) -> (Vec<Token>, Vec<ParseError>) {
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let end_offset = text.len();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    let offset_at = |k: usize| chars.get(k).map_or(end_offset, |c| c.0);

    while i < chars.len() {
        let (off, c) = chars[i];
        let start = (line, col, off);
        let take = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            take(1, &mut i, &mut col);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i].1 != '\n' {
                take(1, &mut i, &mut col);
            }
            continue;
        }
        let next = chars.get(i + 1).map(|x| x.1);
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                take(1, &mut i, &mut col);
            }
            Tok::Ident(text[off..offset_at(i)].to_string())
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                take(1, &mut i, &mut col);
            }
            if i < chars.len() && chars[i].1 == '.' && chars.get(i + 1).is_some_and(|x| x.1.is_ascii_digit()) {
                take(1, &mut i, &mut col);
                while i < chars.len() && chars[i].1.is_ascii_digit() {
                    take(1, &mut i, &mut col);
                }
            }
            if i < chars.len() && matches!(chars[i].1, 'e' | 'E') {
                let mut j = i + 1;
                if j < chars.len() && matches!(chars[j].1, '+' | '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].1.is_ascii_digit() {
                    let n = j - i;
                    take(n, &mut i, &mut col);
                    while i < chars.len() && chars[i].1.is_ascii_digit() {
                        take(1, &mut i, &mut col);
                    }
                }
            }
            // A letter glued to a number, as in `1x` or `0x1f`.
            let glued = |k: usize| {
                chars.get(k).is_some_and(|x| x.1.is_ascii_alphanumeric() || x.1 == '_' || x.1 == '.' && chars.get(k + 1).is_none_or(|y| y.1 != '.'))
            };
            if glued(i) {
                while glued(i) {
                    take(1, &mut i, &mut col);
                }
                let bad = &text[off..offset_at(i)];
                errors.push(ParseError::new(
                    ParseErrorCode::BadLiteral,
                    format!("malformed number `{bad}`"),
                    SourceSpan::new(start.0, start.1, start.2, offset_at(i) - off),
                ));
                continue;
            }
            Tok::Num(text[off..offset_at(i)].to_string())
        } else {
            let two = |a: char, b: char| c == a && next == Some(b);
            let (tok, n) = if two(':', '=') {
                (Tok::Assign, 2)
            } else if two('=', '=') {
                (Tok::EqEq, 2)
            } else if two('!', '=') {
                (Tok::Ne, 2)
            } else if two('<', '=') {
                (Tok::Le, 2)
            } else if two('>', '=') {
                (Tok::Ge, 2)
            } else if two('&', '&') {
                (Tok::AndAnd, 2)
            } else if two('|', '|') {
                (Tok::OrOr, 2)
            } else if two('-', '>') {
                (Tok::Arrow, 2)
            } else if two('.', '.') {
                (Tok::DotDot, 2)
            } else {
                let single = match c {
                    '{' => Some(Tok::LBrace),
                    '}' => Some(Tok::RBrace),
                    '(' => Some(Tok::LParen),
                    ')' => Some(Tok::RParen),
                    '[' => Some(Tok::LBracket),
                    ']' => Some(Tok::RBracket),
                    ',' => Some(Tok::Comma),
                    ';' => Some(Tok::Semi),
                    ':' => Some(Tok::Colon),
                    '=' => Some(Tok::Eq),
                    '<' => Some(Tok::Lt),
                    '>' => Some(Tok::Gt),
                    '!' => Some(Tok::Bang),
                    '+' => Some(Tok::Plus),
                    '-' => Some(Tok::Minus),
                    '*' => Some(Tok::Star),
                    _ => None,
                };
                match single {
                    Some(t) => (t, 1),
                    None => {
                        errors.push(ParseError::new(
                            ParseErrorCode::UnexpectedToken,
                            format!("unexpected character {c:?}"),
                            SourceSpan::new(line, col, off, c.len_utf8()),
                        ));
                        take(1, &mut i, &mut col);
                        continue;
                    }
                }
            };
            take(n, &mut i, &mut col);
            tok
        };
        tokens.push(Token {
            tok,
            span: SourceSpan::new(start.0, start.1, start.2, offset_at(i) - start.2),
        });
    }
    tokens.push(Token {
        tok: Tok::Eof,
        span: SourceSpan::new(line, col, end_offset, 0),
    });
    (tokens, errors)
}
