//! Lexer for `.moo` sources. Whitespace and `//` line comments separate
//! tokens; the output always ends with a single `Eof` token so the parser
//! never has to special-case running off the end.

use crate::span::Span;
use std::fmt;
use std::sync::Arc;

pub const KEYWORDS: &[&str] = &[
    "assert", "bool", "class", "cons", "constref", "else", "export", "false", "friend", "head",
    "if", "int", "is_nil", "let", "list", "new", "nil", "private", "public", "ref", "return",
    "tail", "true", "unit", "virtual", "while",
];

/// Multi-character operators first so maximal munch falls out of order.
const PUNCT: &[&str] = &[
    "==", "!=", "<=", ">=", "&&", "||", "{", "}", "(", ")", ";", ":", ",", ".", "=", "+", "-", "*",
    "/", "%", "<", ">", "!",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Ident,
    IntLit,
    StrLit,
    Punct,
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: lex error: {}", self.span, self.message)
    }
}

impl std::error::Error for LexError {}

struct Lexer<'s> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    file: Arc<str>,
    _source: &'s str,
}

impl<'s> Lexer<'s> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span_here(&self, len: u32) -> Span {
        Span::new(self.file.clone(), self.line, self.col, len)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.peek2() == Some('/') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Tokenize one source file. `file` is the name recorded in spans, normally
/// the path the text was read from.
pub fn tokenize(source: &str, file: &str) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        file: Arc::from(file),
        _source: source,
    };
    let mut out = Vec::new();
    loop {
        lx.skip_trivia();
        let Some(c) = lx.peek() else { break };
        if is_ident_start(c) {
            let span = lx.span_here(1);
            let mut text = String::new();
            while let Some(c) = lx.peek() {
                if !is_ident_continue(c) {
                    break;
                }
                text.push(c);
                lx.bump();
            }
            let kind = if KEYWORDS.contains(&text.as_str()) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            };
            let len = text.chars().count() as u32;
            out.push(Token { kind, text, span: Span { len, ..span } });
        } else if c.is_ascii_digit() {
            let span = lx.span_here(1);
            let mut text = String::new();
            while let Some(c) = lx.peek() {
                if !c.is_ascii_digit() {
                    break;
                }
                text.push(c);
                lx.bump();
            }
            let len = text.len() as u32;
            out.push(Token { kind: TokenKind::IntLit, text, span: Span { len, ..span } });
        } else if c == '"' {
            let span = lx.span_here(1);
            lx.bump();
            let mut text = String::new();
            loop {
                match lx.peek() {
                    None | Some('\n') => {
                        return Err(LexError {
                            span,
                            message: "unterminated string literal".into(),
                        })
                    }
                    Some('"') => {
                        lx.bump();
                        break;
                    }
                    Some(c) => {
                        text.push(c);
                        lx.bump();
                    }
                }
            }
            let len = text.chars().count() as u32 + 2;
            out.push(Token { kind: TokenKind::StrLit, text, span: Span { len, ..span } });
        } else {
            let two: String = [c, lx.peek2().unwrap_or(' ')].iter().collect();
            let hit = PUNCT
                .iter()
                .find(|p| **p == two.as_str() || (p.len() == 1 && p.chars().next() == Some(c)));
            match hit {
                Some(p) => {
                    let span = lx.span_here(p.len() as u32);
                    for _ in 0..p.len() {
                        lx.bump();
                    }
                    out.push(Token { kind: TokenKind::Punct, text: p.to_string(), span });
                }
                None => {
                    return Err(LexError {
                        span: lx.span_here(1),
                        message: format!("unexpected character `{c}`"),
                    })
                }
            }
        }
    }
    out.push(Token { kind: TokenKind::Eof, text: String::new(), span: lx.span_here(1) });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src, "t.moo").unwrap().into_iter().map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn classifies_keywords_idents_and_punct() {
        let ts = kinds("class C { }");
        assert_eq!(
            ts,
            vec![
                (TokenKind::Keyword, "class".into()),
                (TokenKind::Ident, "C".into()),
                (TokenKind::Punct, "{".into()),
                (TokenKind::Punct, "}".into()),
                (TokenKind::Eof, "".into()),
            ]
        );
    }

    #[test]
    fn maximal_munch_on_operators() {
        let ts = kinds("a==b != c <= >= && || = < > !");
        let ops: Vec<&str> =
            ts.iter().filter(|(k, _)| *k == TokenKind::Punct).map(|(_, t)| t.as_str()).collect();
        assert_eq!(ops, vec!["==", "!=", "<=", ">=", "&&", "||", "=", "<", ">", "!"]);
    }

    #[test]
    fn comments_and_whitespace_are_trivia() {
        let ts = kinds("let x // all of this vanishes\n = 1;");
        let texts: Vec<&str> = ts.iter().map(|(_, t)| t.as_str()).collect();
        assert_eq!(texts, vec!["let", "x", "=", "1", ";", ""]);
    }

    #[test]
    fn spans_are_one_based_and_count_chars() {
        let ts = tokenize("let xy = 7;", "t.moo").unwrap();
        assert_eq!((ts[0].span.line, ts[0].span.col, ts[0].span.len), (1, 1, 3));
        assert_eq!((ts[1].span.line, ts[1].span.col, ts[1].span.len), (1, 5, 2));
        assert_eq!((ts[3].span.line, ts[3].span.col), (1, 10));
    }

    #[test]
    fn always_ends_with_eof() {
        let ts = tokenize("", "t.moo").unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].kind, TokenKind::Eof);
    }

    #[test]
    fn unknown_character_is_an_error() {
        let err = tokenize("let @ = 1;", "t.moo").unwrap_err();
        assert!(err.message.contains('@'));
        assert_eq!((err.span.line, err.span.col), (1, 5));
    }

    #[test]
    fn string_literals_lex_but_strings_are_not_values() {
        let ts = kinds("\"hi\"");
        assert_eq!(ts[0], (TokenKind::StrLit, "hi".into()));
    }

    #[test]
    fn unterminated_string_is_an_error() {
        assert!(tokenize("\"oops", "t.moo").is_err());
    }
}
