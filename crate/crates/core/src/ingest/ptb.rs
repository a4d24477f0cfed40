use std::fmt;

use thiserror::Error;

use super::{DisfluencyTag, TaggedUtterance};
use crate::tokenizer::TokenSeq;

/// A bracketed constituency tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseTree {
    Leaf(String),
    Node { label: String, children: Vec<ParseTree> },
}

impl ParseTree {
    pub fn node(label: impl Into<String>, children: Vec<ParseTree>) -> Self {
        ParseTree::Node {
            label: label.into(),
            children,
        }
    }

    pub fn leaf(token: impl Into<String>) -> Self {
        ParseTree::Leaf(token.into())
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            ParseTree::Leaf(_) => None,
            ParseTree::Node { label, .. } => Some(label),
        }
    }

    /// Leaf tokens in left-to-right order.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk_leaves(&mut |leaf| out.push(leaf));
        out
    }

    fn walk_leaves<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            ParseTree::Leaf(tok) => f(tok),
            ParseTree::Node { children, .. } => {
                for child in children {
                    child.walk_leaves(f);
                }
            }
        }
    }
}

/// Single-line bracketed rendering; `parse_ptb` reads it back unchanged.
impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseTree::Leaf(tok) => f.write_str(tok),
            ParseTree::Node { label, children } => {
                f.write_str("(")?;
                f.write_str(label)?;
                for child in children {
                    f.write_str(" ")?;
                    child.fmt(f)?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedEof,
    UnexpectedClose,
    StrayAtom(String),
    EmptyNode,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedEof => f.write_str("unbalanced brackets: unexpected end of input"),
            ParseErrorKind::UnexpectedClose => f.write_str("unbalanced brackets: unexpected ')'"),
            ParseErrorKind::StrayAtom(a) => write!(f, "token {a:?} outside any bracket"),
            ParseErrorKind::EmptyNode => f.write_str("empty node"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Lexeme<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn lex(source: &str) -> impl Iterator<Item = (usize, Lexeme<'_>)> + '_ {
    let bytes = source.as_bytes();
    let mut pos = 0;
    std::iter::from_fn(move || {
        while pos < bytes.len() {
            // Treebank file headers such as "*x* ... *x*" are comment lines.
            let at_line_start = pos == 0 || bytes[pos - 1] == b'\n';
            if at_line_start && source[pos..].trim_start_matches([' ', '\t']).starts_with("*x*") {
                pos = source[pos..].find('\n').map_or(bytes.len(), |n| pos + n + 1);
                continue;
            }
            let c = bytes[pos];
            if c.is_ascii_whitespace() {
                pos += 1;
                continue;
            }
            let start = pos;
            return Some(match c {
                b'(' => {
                    pos += 1;
                    (start, Lexeme::Open)
                }
                b')' => {
                    pos += 1;
                    (start, Lexeme::Close)
                }
                _ => {
                    while pos < bytes.len()
                        && !bytes[pos].is_ascii_whitespace()
                        && bytes[pos] != b'('
                        && bytes[pos] != b')'
                    {
                        pos += 1;
                    }
                    (start, Lexeme::Atom(&source[start..pos]))
                }
            });
        }
        None
    })
}

struct Frame {
    open_at: usize,
    label: Option<String>,
    children: Vec<ParseTree>,
}

/// Parses zero or more bracketed trees.
///
/// The first atom after `(` is the node label; a node that opens directly
/// with another bracket gets an empty label (the Switchboard `( (S ...) )`
/// wrapper). Every other atom is a leaf.
pub fn parse_ptb(source: &str) -> Result<Vec<ParseTree>, ParseError> {
    let mut trees = Vec::new();
    let mut stack: Vec<Frame> = Vec::new();

    for (offset, lexeme) in lex(source) {
        match lexeme {
            Lexeme::Open => {
                if let Some(top) = stack.last_mut() {
                    top.label.get_or_insert_with(String::new);
                }
                stack.push(Frame {
                    open_at: offset,
                    label: None,
                    children: Vec::new(),
                });
            }
            Lexeme::Atom(atom) => match stack.last_mut() {
                None => {
                    return Err(ParseError {
                        offset,
                        kind: ParseErrorKind::StrayAtom(atom.to_owned()),
                    })
                }
                Some(top) if top.label.is_none() => top.label = Some(atom.to_owned()),
                Some(top) => top.children.push(ParseTree::Leaf(atom.to_owned())),
            },
            Lexeme::Close => {
                let frame = stack.pop().ok_or(ParseError {
                    offset,
                    kind: ParseErrorKind::UnexpectedClose,
                })?;
                if frame.children.is_empty() {
                    return Err(ParseError {
                        offset: frame.open_at,
                        kind: ParseErrorKind::EmptyNode,
                    });
                }
                let tree = ParseTree::Node {
                    label: frame.label.unwrap_or_default(),
                    children: frame.children,
                };
                match stack.last_mut() {
                    Some(parent) => parent.children.push(tree),
                    None => trees.push(tree),
                }
            }
        }
    }

    if !stack.is_empty() {
        return Err(ParseError {
            offset: source.len(),
            kind: ParseErrorKind::UnexpectedEof,
        });
    }
    Ok(trees)
}

/// Preterminals that mark non-lexical material (traces, disfluency markup)
/// rather than spoken words.
const NON_LEXICAL: [&str; 2] = ["-NONE-", "-DFL-"];

/// Reads tokens and span tags off a tree.
///
/// Tags are assigned top-down: the outermost EDITED/INTJ/PRN ancestor of a
/// leaf determines its tag and nested disfluency nodes do not override it.
/// Leaves under `-NONE-` and `-DFL-` preterminals are skipped.
pub fn extract_tagged(id: impl Into<String>, tree: &ParseTree) -> TaggedUtterance {
    let mut tokens = Vec::new();
    let mut tags = Vec::new();
    descend(tree, DisfluencyTag::None, &mut tokens, &mut tags);
    TaggedUtterance::new(id, TokenSeq::new(tokens), tags).expect("leaves are non-empty atoms, one tag each")
}

fn descend(tree: &ParseTree, inherited: DisfluencyTag, tokens: &mut Vec<String>, tags: &mut Vec<DisfluencyTag>) {
    match tree {
        ParseTree::Leaf(tok) => {
            tokens.push(tok.clone());
            tags.push(inherited);
        }
        ParseTree::Node { label, children } => {
            if NON_LEXICAL.contains(&label.as_str()) {
                return;
            }
            let tag = if inherited.is_disfluent() {
                inherited
            } else {
                DisfluencyTag::from_node_label(label).unwrap_or(DisfluencyTag::None)
            };
            for child in children {
                descend(child, tag, tokens, tags);
            }
        }
    }
}

/// Parses a treebank file into tagged utterances with ids `{prefix}:{n}`,
/// numbering trees from zero in file order.
pub fn read_ptb_ref(source: &str, id_prefix: &str) -> Result<Vec<TaggedUtterance>, ParseError> {
    Ok(parse_ptb(source)?
        .iter()
        .enumerate()
        .map(|(n, tree)| extract_tagged(format!("{id_prefix}:{n}"), tree))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use DisfluencyTag::*;

    fn one(src: &str) -> ParseTree {
        let mut trees = parse_ptb(src).unwrap();
        assert_eq!(trees.len(), 1);
        trees.pop().unwrap()
    }

    #[test]
    fn minimal_tree() {
        let tree = one("(S (INTJ (UH um)) (NP (PRP i)))");
        assert_eq!(tree.label(), Some("S"));
        assert_eq!(tree.leaves(), ["um", "i"]);
        let utt = extract_tagged("t", &tree);
        assert_eq!(utt.tags(), [Intj, None]);
    }

    #[test]
    fn early_match_example_structure() {
        let tree = one("(S (EDITED (NP the)) (NP (DT the) (NN cat)))");
        let utt = extract_tagged("u1", &tree);
        assert_eq!(utt.tokens().as_slice(), ["the", "the", "cat"]);
        assert_eq!(utt.tags(), [Edited, None, None]);

        let flat = extract_tagged("u1", &one("(S (EDITED the) (DT the) (NN cat))"));
        assert_eq!(flat, utt);
    }

    #[test]
    fn outermost_disfluency_wins() {
        let tree = one("(S (EDITED (NP (DT the)) (INTJ (UH uh))) (NP (NN cat)))");
        let utt = extract_tagged("n", &tree);
        assert_eq!(utt.tags(), [Edited, Edited, None]);
    }

    #[test]
    fn function_tags_and_no_disfluency() {
        let utt = extract_tagged("p", &one("(S (PRN-1 (S (NP you) (VP know))) (VP go))"));
        assert_eq!(utt.tags(), [Prn, Prn, None]);
        let utt = extract_tagged("f", &one("(S (NP (DT a)) (VP (VB go)))"));
        assert!(utt.tags().iter().all(|t| *t == None));
    }

    #[test]
    fn unbalanced_input_reports_end_offset() {
        let err = parse_ptb("(S (NP").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEof);
        assert_eq!(err.offset, 6);
    }

    #[test]
    fn extra_close_and_empty_node() {
        let err = parse_ptb("(S a))").unwrap_err();
        assert_eq!(
            err,
            ParseError {
                offset: 5,
                kind: ParseErrorKind::UnexpectedClose
            }
        );
        let err = parse_ptb("(S (NP) a)").unwrap_err();
        assert_eq!(
            err,
            ParseError {
                offset: 3,
                kind: ParseErrorKind::EmptyNode
            }
        );
        let err = parse_ptb("()").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::EmptyNode);
    }

    #[test]
    fn stray_atom_outside_tree() {
        let err = parse_ptb("(S a) b").unwrap_err();
        assert_eq!(err.offset, 6);
        assert!(matches!(err.kind, ParseErrorKind::StrayAtom(_)));
    }

    #[test]
    fn switchboard_wrapper_and_empty_elements() {
        let src = "*x* header line *x*\n\
                   ( (S (EDITED (RM (-DFL- \\[) ) (NP-SBJ (PRP I)) (, ,) (IP (-DFL- \\+) ))\n\
                     (NP-SBJ (PRP I)) (VP (VBD went) (NP (-NONE- *T*-1)))\n\
                     (. .) (-DFL- E_S) ))\n\
                   ( (INTJ (UH Uh-huh) (. .) (-DFL- E_S) ))";
        let trees = parse_ptb(src).unwrap();
        assert_eq!(trees.len(), 2);
        assert_eq!(trees[0].label(), Some(""));
        let utts = read_ptb_ref(src, "sw").unwrap();
        assert_eq!(utts[0].id(), "sw:0");
        assert_eq!(utts[0].tokens().as_slice(), ["I", ",", "I", "went", "."]);
        assert_eq!(utts[0].tags(), [Edited, Edited, None, None, None]);
        assert_eq!(utts[1].tags(), [Intj, Intj]);
    }

    #[test]
    fn multiline_and_multiple_trees() {
        let trees = parse_ptb("(S\n  (NP a))\n\n(S (NP b)\n)").unwrap();
        assert_eq!(trees.len(), 2);
        assert!(parse_ptb("  \n").unwrap().is_empty());
    }

    #[test]
    fn render_round_trip() {
        let src = "(S (EDITED (NP the)) (NP (DT the) (NN cat)))";
        let tree = one(src);
        assert_eq!(tree.to_string(), src);
    }
}
