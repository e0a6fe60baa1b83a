use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Int(i64),
    Ident(String),
    /// Body of a `/*@ ... @*/` annotation, trimmed.
    Annot(String),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

// Longest first so that `<=` wins over `<`.
const PUNCTS: &[&str] = &[
    "++", "--", "+=", "-=", "*=", "==", "!=", "<=", ">=", "&&", "||", "+", "-", "*", "/", "%", "<", ">", "=", "!", "(",
    ")", "{", "}", "[", "]", ";", ",", "?", ":",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut pos, mut line, mut col) = (0usize, 1u32, 1u32);
    let mut at_line_start = true;

    macro_rules! advance {
        ($n:expr) => {{
            for _ in 0..$n {
                if bytes[pos] == b'\n' {
                    line += 1;
                    col = 1;
                    at_line_start = true;
                } else {
                    col += 1;
                }
                pos += 1;
            }
        }};
    }

    while pos < bytes.len() {
        let c = bytes[pos];
        if c == b'\n' || c.is_ascii_whitespace() {
            advance!(1);
            continue;
        }
        // Preprocessor lines are skipped wholesale.
        if c == b'#' && at_line_start {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                advance!(1);
            }
            continue;
        }
        at_line_start = false;
        let rest = &src[pos..];
        if rest.starts_with("//") {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                advance!(1);
            }
            continue;
        }
        if rest.starts_with("/*@") {
            let (l, c0) = (line, col);
            let Some(end) = rest.find("@*/") else {
                return Err(ParseError::new(l, c0, "unterminated annotation"));
            };
            let body = rest[3..end].trim().to_string();
            advance!(end + 3);
            out.push(Token { tok: Tok::Annot(body), line: l, col: c0 });
            continue;
        }
        if rest.starts_with("/*") {
            let Some(end) = rest.find("*/") else {
                return Err(ParseError::new(line, col, "unterminated comment"));
            };
            advance!(end + 2);
            continue;
        }
        let (l, c0) = (line, col);
        if c.is_ascii_digit() {
            let len = rest.bytes().take_while(u8::is_ascii_digit).count();
            let value: i64 = rest[..len].parse().map_err(|_| ParseError::new(l, c0, "integer literal out of range"))?;
            advance!(len);
            // Tolerate C integer suffixes.
            while pos < bytes.len() && matches!(bytes[pos], b'u' | b'U' | b'l' | b'L') {
                advance!(1);
            }
            out.push(Token { tok: Tok::Int(value), line: l, col: c0 });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let len = rest.bytes().take_while(|b| b.is_ascii_alphanumeric() || *b == b'_').count();
            out.push(Token { tok: Tok::Ident(rest[..len].to_string()), line: l, col: c0 });
            advance!(len);
            continue;
        }
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                out.push(Token { tok: Tok::Punct(p), line: l, col: c0 });
                advance!(p.len());
            }
            None => {
                let ch = rest.chars().next().unwrap_or('?');
                return Err(ParseError::new(l, c0, alloc::format!("unexpected character `{ch}`")));
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn longest_punct_wins() {
        assert_eq!(kinds("i<=3"), alloc::vec![Tok::Ident("i".into()), Tok::Punct("<="), Tok::Int(3), Tok::Eof]);
    }

    #[test]
    fn comments_and_preprocessor_are_skipped() {
        let toks = kinds("#include <assert.h>\n// hi\n/* there */ x /*@ witness_var(a) @*/");
        assert_eq!(toks, alloc::vec![Tok::Ident("x".into()), Tok::Annot("witness_var(a)".into()), Tok::Eof]);
    }

    #[test]
    fn positions_are_one_based() {
        let toks = tokenize("int\n  x;").unwrap();
        assert_eq!((toks[1].line, toks[1].col), (2, 3));
    }

    #[test]
    fn stray_character_is_reported() {
        let err = tokenize("x = 1 @ 2;").unwrap_err();
        assert_eq!((err.line, err.col), (1, 7));
    }
}
