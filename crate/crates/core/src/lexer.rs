//! Light-weight scanning of guest source text.
//!
//! The guest language is line oriented with `#` comments, single/double
//! quoted strings, triple-quoted strings and bracket continuation. This is
//! not a grammar: it only answers "is this character code?" and "does this
//! physical line start a new logical statement?", which is all the program
//! model and the call-graph builder need.

use alloc::string::String;
use alloc::vec::Vec;

/// Result of scanning a source text.
#[derive(Debug, Clone)]
pub struct Scan {
    /// Source with every comment and string literal replaced by spaces.
    /// Newlines are kept, so byte offsets and line numbers line up with the
    /// original text.
    pub stripped: String,
    /// Per physical line: whether the line begins a fresh logical line
    /// (outside any string, bracket or backslash continuation).
    pub clean_start: Vec<bool>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Code,
    Comment,
    Str { quote: u8, triple: bool },
}

pub fn scan(text: &str) -> Scan {
    let bytes = text.as_bytes();
    let mut out: Vec<u8> = Vec::with_capacity(bytes.len());
    let mut clean_start = Vec::new();
    let mut state = State::Code;
    let mut depth: i32 = 0;
    let mut continued = false;
    let mut at_line_start = true;
    let mut i = 0;
    while i < bytes.len() {
        if at_line_start {
            clean_start.push(state == State::Code && depth <= 0 && !continued);
            continued = false;
            at_line_start = false;
        }
        let b = bytes[i];
        match state {
            State::Code => match b {
                b'#' => {
                    state = State::Comment;
                    out.push(b' ');
                }
                b'\'' | b'"' => {
                    let triple = i + 2 < bytes.len() && bytes[i + 1] == b && bytes[i + 2] == b;
                    state = State::Str { quote: b, triple };
                    if triple {
                        out.extend_from_slice(b"   ");
                        i += 3;
                        continue;
                    }
                    out.push(b' ');
                }
                b'(' | b'[' | b'{' => {
                    depth += 1;
                    out.push(b);
                }
                b')' | b']' | b'}' => {
                    depth -= 1;
                    out.push(b);
                }
                b'\\' if i + 1 < bytes.len() && bytes[i + 1] == b'\n' => {
                    continued = true;
                    out.push(b' ');
                }
                b'\n' => {
                    out.push(b'\n');
                    at_line_start = true;
                }
                _ => out.push(b),
            },
            State::Comment => {
                if b == b'\n' {
                    state = State::Code;
                    out.push(b'\n');
                    at_line_start = true;
                } else {
                    out.push(if b.is_ascii() { b' ' } else { b });
                }
            }
            State::Str { quote, triple } => {
                if b == b'\\' && i + 1 < bytes.len() {
                    // escaped character, including an escaped newline
                    out.push(b' ');
                    if bytes[i + 1] == b'\n' {
                        out.push(b'\n');
                        at_line_start = true;
                    } else {
                        out.push(if bytes[i + 1].is_ascii() { b' ' } else { bytes[i + 1] });
                    }
                    i += 2;
                    continue;
                }
                if b == b'\n' {
                    out.push(b'\n');
                    at_line_start = true;
                    if !triple {
                        // unterminated single-line string: recover at end of line
                        state = State::Code;
                    }
                } else if b == quote {
                    if triple {
                        if i + 2 < bytes.len() && bytes[i + 1] == quote && bytes[i + 2] == quote {
                            out.extend_from_slice(b"   ");
                            state = State::Code;
                            i += 3;
                            continue;
                        }
                        out.push(b' ');
                    } else {
                        out.push(b' ');
                        state = State::Code;
                    }
                } else {
                    out.push(if b.is_ascii() { b' ' } else { b });
                }
            }
        }
        i += 1;
    }
    if at_line_start {
        clean_start.push(state == State::Code && depth <= 0 && !continued);
    }
    // Non-ASCII bytes are copied through unchanged, so the output is valid UTF-8.
    let stripped = String::from_utf8(out).unwrap_or_default();
    Scan { stripped, clean_start }
}

pub fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

pub fn is_ident_char(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

/// Token of a stripped code line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Token<'a> {
    Ident(&'a str),
    Punct(char),
}

/// Splits a stripped line into identifiers and single-character punctuation.
/// Numbers are dropped; whitespace separates tokens.
pub fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some((start, c)) = chars.next() {
        if is_ident_start(c) {
            let mut end = start + c.len_utf8();
            while let Some(&(j, d)) = chars.peek() {
                if is_ident_char(d) {
                    end = j + d.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(Token::Ident(&line[start..end]));
        } else if c.is_ascii_digit() {
            while let Some(&(_, d)) = chars.peek() {
                if is_ident_char(d) || d == '.' {
                    chars.next();
                } else {
                    break;
                }
            }
        } else if !c.is_whitespace() {
            out.push(Token::Punct(c));
        }
    }
    out
}

/// Leading whitespace width of a line (tabs count as one column).
pub fn indentation(line: &str) -> usize {
    line.len() - line.trim_start().len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_comments_and_strings() {
        let s = scan("x = f('a(b)')  # call g(1)\ny = 2\n");
        assert!(!s.stripped.contains("g(1)"));
        assert!(!s.stripped.contains("a(b)"));
        assert!(s.stripped.contains("x = f("));
        assert_eq!(s.stripped.len(), "x = f('a(b)')  # call g(1)\ny = 2\n".len());
    }

    #[test]
    fn triple_quoted_lines_are_not_clean_starts() {
        let text = "def f():\n    \"\"\"doc\ndef fake():\n\"\"\"\n    return 1\n";
        let s = scan(text);
        assert_eq!(s.clean_start, vec![true, true, false, false, true, true]);
        assert!(!s.stripped.contains("fake"));
    }

    #[test]
    fn bracket_continuation() {
        let s = scan("x = [\n1,\n]\ny = 1");
        assert_eq!(s.clean_start, vec![true, false, false, true]);
    }

    #[test]
    fn backslash_continuation() {
        let s = scan("x = 1 + \\\n2\ny = 3\n");
        assert_eq!(s.clean_start[..3], [true, false, true]);
    }

    #[test]
    fn tokenizes_identifiers() {
        let t = tokens("a = foo(b.c, 12.5e3)");
        assert_eq!(
            t,
            vec![
                Token::Ident("a"),
                Token::Punct('='),
                Token::Ident("foo"),
                Token::Punct('('),
                Token::Ident("b"),
                Token::Punct('.'),
                Token::Ident("c"),
                Token::Punct(','),
                Token::Punct(')'),
            ]
        );
    }
}
