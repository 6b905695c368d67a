use super::ExprError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Number,
    Identifier,
    Operator,
    LParen,
    RParen,
    Comma,
    Eof,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Byte offset of the first character.
    pub offset: usize,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = text[pos..].chars().next().expect("pos is on a char boundary");
        if c.is_whitespace() {
            pos += c.len_utf8();
            continue;
        }
        let start = pos;
        let kind = match c {
            '0'..='9' | '.' => {
                pos = scan_number(bytes, pos)?;
                TokenKind::Number
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                    pos += 1;
                }
                TokenKind::Identifier
            }
            '+' | '-' | '*' | '/' | '^' => {
                pos += 1;
                TokenKind::Operator
            }
            '(' => {
                pos += 1;
                TokenKind::LParen
            }
            ')' => {
                pos += 1;
                TokenKind::RParen
            }
            ',' => {
                pos += 1;
                TokenKind::Comma
            }
            other => {
                return Err(ExprError::Syntax { offset: start, message: format!("unexpected character '{other}'") })
            }
        };
        tokens.push(Token { kind, text: text[start..pos].to_string(), offset: start });
    }
    tokens.push(Token { kind: TokenKind::Eof, text: String::new(), offset: bytes.len() });
    Ok(tokens)
}

fn scan_number(bytes: &[u8], start: usize) -> Result<usize, ExprError> {
    let digits = |mut p: usize| {
        while p < bytes.len() && bytes[p].is_ascii_digit() {
            p += 1;
        }
        p
    };
    let mut pos = digits(start);
    let int_len = pos - start;
    let mut frac_len = 0;
    if pos < bytes.len() && bytes[pos] == b'.' {
        let after = digits(pos + 1);
        frac_len = after - pos - 1;
        pos = after;
    }
    if int_len == 0 && frac_len == 0 {
        return Err(ExprError::Syntax { offset: start, message: "expected digits in number".into() });
    }
    if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
        let mut p = pos + 1;
        if p < bytes.len() && (bytes[p] == b'+' || bytes[p] == b'-') {
            p += 1;
        }
        let end = digits(p);
        if end == p {
            return Err(ExprError::Syntax { offset: p.min(bytes.len()), message: "expected exponent digits".into() });
        }
        pos = end;
    }
    Ok(pos)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_increase() {
        let toks = tokenize(" 1.5e-3*sin( x ) ,y").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::Number,
                TokenKind::Operator,
                TokenKind::Identifier,
                TokenKind::LParen,
                TokenKind::Identifier,
                TokenKind::RParen,
                TokenKind::Comma,
                TokenKind::Identifier,
                TokenKind::Eof
            ]
        );
        assert_eq!(toks[0].text, "1.5e-3");
        assert!(toks.windows(2).all(|w| w[0].offset < w[1].offset));
    }

    #[test]
    fn rejects_bad_exponent_and_chars() {
        assert_eq!(tokenize("1e+").unwrap_err().offset(), Some(3));
        assert_eq!(tokenize("x $ y").unwrap_err().offset(), Some(2));
        assert_eq!(tokenize(".").unwrap_err().offset(), Some(0));
    }
}
