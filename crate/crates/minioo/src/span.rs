//! Source positions. Every token, AST node and diagnostic carries one of
//! these; lines and columns are 1-based and columns count characters, not
//! bytes. Spans order by (file, line, col), which is exactly the order
//! diagnostics are reported in.

use std::fmt;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub file: Arc<str>,
    pub line: u32,
    pub col: u32,
    pub len: u32,
}

impl Span {
    pub fn new(file: Arc<str>, line: u32, col: u32, len: u32) -> Span {
        debug_assert!(line >= 1 && col >= 1 && len >= 1);
        Span { file, line, col, len }
    }

    /// A span for synthesized constructs (implicit base-constructor calls,
    /// host-initiated calls). Points at the start of the named file.
    pub fn synthetic(file: &str) -> Span {
        Span { file: Arc::from(file), line: 1, col: 1, len: 1 }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_is_file_line_col() {
        let s = Span::new(Arc::from("a.moo"), 3, 7, 2);
        assert_eq!(s.to_string(), "a.moo:3:7");
    }

    #[test]
    fn ordering_is_file_then_line_then_col() {
        let f: Arc<str> = Arc::from("a.moo");
        let s1 = Span::new(f.clone(), 1, 9, 1);
        let s2 = Span::new(f.clone(), 2, 1, 1);
        let s3 = Span::new(Arc::from("b.moo"), 1, 1, 1);
        assert!(s1 < s2 && s2 < s3);
    }
}
