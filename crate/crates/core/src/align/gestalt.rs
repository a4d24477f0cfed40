//! Ratcliff/Obershelp ("gestalt") sequence matching.
//!
//! Finds the longest contiguous matching block, then recurses on the
//! unmatched regions to its left and right. There is no junk heuristic:
//! every element participates. Among equally long blocks the one starting
//! earliest in `a` wins, then the one starting earliest in `b`.

use std::collections::HashMap;
use std::hash::Hash;
use std::ops::Range;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Equal,
    Replace,
    Delete,
    Insert,
}

/// One edit step: `a[a_range]` relates to `b[b_range]` as described by `kind`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Opcode {
    pub kind: OpKind,
    pub a: Range<usize>,
    pub b: Range<usize>,
}

impl Opcode {
    pub fn new(kind: OpKind, a: Range<usize>, b: Range<usize>) -> Self {
        Opcode { kind, a, b }
    }
}

/// A maximal run `a[a..a+len] == b[b..b+len]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub a: usize,
    pub b: usize,
    pub len: usize,
}

struct Matcher<'s, T> {
    a: &'s [T],
    b: &'s [T],
    b_index: HashMap<&'s T, Vec<usize>>,
}

impl<'s, T: Eq + Hash> Matcher<'s, T> {
    fn new(a: &'s [T], b: &'s [T]) -> Self {
        let mut b_index: HashMap<&T, Vec<usize>> = HashMap::new();
        for (j, x) in b.iter().enumerate() {
            b_index.entry(x).or_default().push(j);
        }
        Matcher { a, b, b_index }
    }

    fn longest_match(&self, a_range: Range<usize>, b_range: Range<usize>) -> Block {
        let mut best = Block {
            a: a_range.start,
            b: b_range.start,
            len: 0,
        };
        // run[j] = length of the match ending at (i - 1, j)
        let mut run: HashMap<usize, usize> = HashMap::new();
        for i in a_range {
            let mut next_run = HashMap::new();
            if let Some(js) = self.b_index.get(&self.a[i]) {
                for &j in js {
                    if j < b_range.start {
                        continue;
                    }
                    if j >= b_range.end {
                        break;
                    }
                    let k = j.checked_sub(1).and_then(|p| run.get(&p)).copied().unwrap_or(0) + 1;
                    next_run.insert(j, k);
                    if k > best.len {
                        best = Block {
                            a: i + 1 - k,
                            b: j + 1 - k,
                            len: k,
                        };
                    }
                }
            }
            run = next_run;
        }
        best
    }

    fn matching_blocks(&self) -> Vec<Block> {
        let mut pending = vec![(0..self.a.len(), 0..self.b.len())];
        let mut blocks = Vec::new();
        while let Some((ar, br)) = pending.pop() {
            let m = self.longest_match(ar.clone(), br.clone());
            if m.len == 0 {
                continue;
            }
            blocks.push(m);
            if ar.start < m.a && br.start < m.b {
                pending.push((ar.start..m.a, br.start..m.b));
            }
            if m.a + m.len < ar.end && m.b + m.len < br.end {
                pending.push((m.a + m.len..ar.end, m.b + m.len..br.end));
            }
        }
        blocks.sort_by_key(|m| (m.a, m.b));

        let mut merged: Vec<Block> = Vec::with_capacity(blocks.len());
        for m in blocks {
            match merged.last_mut() {
                Some(prev) if prev.a + prev.len == m.a && prev.b + prev.len == m.b => {
                    prev.len += m.len;
                }
                _ => merged.push(m),
            }
        }
        merged
    }
}

/// Matching blocks in increasing order, adjacent blocks merged.
pub fn matching_blocks<T: Eq + Hash>(a: &[T], b: &[T]) -> Vec<Block> {
    Matcher::new(a, b).matching_blocks()
}

/// Opcodes that partition both sequences, in order.
pub fn gestalt_opcodes<T: Eq + Hash>(a: &[T], b: &[T]) -> Vec<Opcode> {
    let mut ops = Vec::new();
    let (mut i, mut j) = (0, 0);
    let sentinel = Block {
        a: a.len(),
        b: b.len(),
        len: 0,
    };
    for m in matching_blocks(a, b).into_iter().chain(std::iter::once(sentinel)) {
        let kind = match (i < m.a, j < m.b) {
            (true, true) => Some(OpKind::Replace),
            (true, false) => Some(OpKind::Delete),
            (false, true) => Some(OpKind::Insert),
            (false, false) => None,
        };
        if let Some(kind) = kind {
            ops.push(Opcode::new(kind, i..m.a, j..m.b));
        }
        if m.len > 0 {
            ops.push(Opcode::new(OpKind::Equal, m.a..m.a + m.len, m.b..m.b + m.len));
        }
        i = m.a + m.len;
        j = m.b + m.len;
    }
    ops
}

#[cfg(test)]
mod tests {
    use super::*;
    use OpKind::*;

    fn ops(a: &[&str], b: &[&str]) -> Vec<Opcode> {
        gestalt_opcodes(a, b)
    }

    #[test]
    fn identity() {
        assert_eq!(ops(&["x", "y"], &["x", "y"]), [Opcode::new(Equal, 0..2, 0..2)]);
    }

    #[test]
    fn early_matching() {
        assert_eq!(
            ops(&["the", "the", "cat"], &["the"]),
            [Opcode::new(Equal, 0..1, 0..1), Opcode::new(Delete, 1..3, 1..1)]
        );
    }

    #[test]
    fn empty_sides() {
        assert_eq!(ops(&[], &["w"]), [Opcode::new(Insert, 0..0, 0..1)]);
        assert_eq!(ops(&["w"], &[]), [Opcode::new(Delete, 0..1, 0..0)]);
        assert!(ops(&[], &[]).is_empty());
    }

    #[test]
    fn replace_between_blocks() {
        assert_eq!(
            ops(&["a", "x", "b"], &["a", "y", "z", "b"]),
            [
                Opcode::new(Equal, 0..1, 0..1),
                Opcode::new(Replace, 1..2, 1..3),
                Opcode::new(Equal, 2..3, 3..4),
            ]
        );
    }

    #[test]
    fn longest_block_first() {
        // "b c d" beats the earlier single "a".
        let blocks = matching_blocks(&["a", "b", "c", "d"], &["b", "c", "d", "a"]);
        assert_eq!(blocks, [Block { a: 1, b: 0, len: 3 }]);
    }

    #[test]
    fn ties_prefer_earliest_in_a_then_b() {
        let blocks = matching_blocks(&["q", "p"], &["p", "q"]);
        assert_eq!(blocks, [Block { a: 0, b: 1, len: 1 }]);
        let blocks = matching_blocks(&["p"], &["p", "p"]);
        assert_eq!(blocks, [Block { a: 0, b: 0, len: 1 }]);
    }
}
