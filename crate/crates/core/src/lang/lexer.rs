use num_bigint::BigInt;

use super::ParseError;
use crate::Rational;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    /// Unsigned decimal literal.
    Num(Rational),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// Byte offsets, used to detect `1/3` written without spaces.
    pub start: usize,
    pub end: usize,
}

const SYMBOLS: &[&str] = &[
    ":=", "!=", "<=", ">=", "->", "=>", "++", "'", "=", "<", ">", "+", "-", "*", "/", "^", "(", ")", "[", "]",
    ",", ";", ":", ".", "&", "?",
];

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut line_start) = (0usize, 1usize, 0usize);
    while i < bytes.len() {
        let c = bytes[i];
        let col = i - line_start + 1;
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Ident(src[start..i].to_string())
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let int_end = i;
            let mut frac = "";
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                let fs = i + 1;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                frac = &src[fs..i];
            }
            let digits = format!("{}{frac}", &src[start..int_end]);
            let num: BigInt = digits.parse().expect("ascii digits");
            let den = BigInt::from(10).pow(frac.len() as u32);
            Tok::Num(Rational::new(num, den))
        } else {
            let rest = &src[i..];
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    i += s.len();
                    Tok::Sym(s)
                }
                None => {
                    let ch = rest.chars().next().expect("non-empty");
                    return Err(ParseError::new(line, col, format!("unexpected character `{ch}`")));
                }
            }
        };
        out.push(Token {
            tok,
            line,
            col,
            start,
            end: i,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col: bytes.len() - line_start + 1,
        start: bytes.len(),
        end: bytes.len(),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        let toks = lex("0.125 x' := -3").unwrap();
        assert_eq!(toks[0].tok, Tok::Num(Rational::new(1.into(), 8.into())));
        assert_eq!(toks[1].tok, Tok::Ident("x".into()));
        assert_eq!(toks[2].tok, Tok::Sym("'"));
        assert_eq!(toks[3].tok, Tok::Sym(":="));
        assert_eq!(toks[4].tok, Tok::Sym("-"));
    }

    #[test]
    fn comments_and_positions() {
        let toks = lex("# note\n  skip").unwrap();
        assert_eq!((toks[0].line, toks[0].col), (2, 3));
        assert!(lex("x $ y").is_err());
    }
}
