//! Shared helpers for the integration tests: random instance generators and
//! an exhaustive reference matcher.

#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use zscore::{AlignmentRow, AlignmentTable, DisfluencyTag, Hypothesis, TaggedUtterance, TokenSeq};

pub const TAGS: [DisfluencyTag; 4] = [
    DisfluencyTag::Edited,
    DisfluencyTag::Intj,
    DisfluencyTag::Prn,
    DisfluencyTag::None,
];

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("data")
        .join(name)
}

pub fn utterance(id: &str, pairs: &[(&str, DisfluencyTag)]) -> TaggedUtterance {
    TaggedUtterance::from_pairs(id, pairs.iter().copied())
}

pub fn hypothesis(id: &str, tokens: &[&str]) -> Hypothesis {
    Hypothesis::new(id, TokenSeq::new(tokens.iter().copied()))
}

/// Small-alphabet instance: reference and hypothesis of length `0..=max_len`
/// drawn from `vocab`, tags uniform.
pub fn small_instance<R: Rng>(rng: &mut R, vocab: &[&str], max_len: usize) -> (TaggedUtterance, Hypothesis) {
    let n = rng.gen_range(0..=max_len);
    let m = rng.gen_range(0..=max_len);
    let gt: Vec<(&str, DisfluencyTag)> = (0..n)
        .map(|_| (*vocab.choose(rng).unwrap(), *TAGS.choose(rng).unwrap()))
        .collect();
    let hyp: Vec<&str> = (0..m).map(|_| *vocab.choose(rng).unwrap()).collect();
    (utterance("x", &gt), hypothesis("x", &hyp))
}

const WORDS: [&str; 24] = [
    "i", "we", "the", "a", "was", "is", "to", "and", "go", "went", "store", "car", "really", "like", "know", "mean",
    "so", "uh", "um", "that", "it", "of", "home", "then",
];

/// A speech-like utterance where roughly a third of the tokens are disfluent,
/// paired with a system output that removes most disfluent tokens and a few
/// fluent ones.
pub fn realistic_instance<R: Rng>(rng: &mut R, id: &str) -> (TaggedUtterance, Hypothesis) {
    let n = rng.gen_range(3..=16);
    let gt: Vec<(&str, DisfluencyTag)> = (0..n)
        .map(|_| {
            let tag = if rng.gen_bool(0.65) {
                DisfluencyTag::None
            } else {
                *TAGS[..3].choose(rng).unwrap()
            };
            (*WORDS.choose(rng).unwrap(), tag)
        })
        .collect();
    let hyp: Vec<&str> = gt
        .iter()
        .filter(|(_, tag)| {
            let p_keep = if tag.is_disfluent() { 0.25 } else { 0.9 };
            rng.gen_bool(p_keep)
        })
        .map(|(t, _)| *t)
        .collect();
    (utterance(id, &gt), hypothesis(id, &hyp))
}

/// Inserts `k` tokens that occur in no reference at random positions.
pub fn inject_oov<R: Rng>(rng: &mut R, hyp: &Hypothesis, k: usize) -> Hypothesis {
    let mut tokens: Vec<String> = hyp.tokens.iter().cloned().collect();
    for i in 0..k {
        let pos = rng.gen_range(0..=tokens.len());
        tokens.insert(pos, format!("oov{}x{}", rng.gen_range(0..1000), i));
    }
    Hypothesis::new(hyp.id.clone(), TokenSeq::new(tokens))
}

/// Largest number of NONE reference tokens any order-preserving one-to-one
/// matching of equal tokens can bind. Enumerates every subset of NONE
/// positions and keeps those that embed in the hypothesis as a subsequence.
pub fn oracle_none_matches(gt: &[(&str, DisfluencyTag)], hyp: &[&str]) -> usize {
    let none: Vec<&str> = gt
        .iter()
        .filter(|(_, t)| *t == DisfluencyTag::None)
        .map(|(w, _)| *w)
        .collect();
    let mut best = 0;
    for mask in 0u32..(1 << none.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let picked = none
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, w)| *w);
        let mut rest = hyp.iter();
        if picked.into_iter().all(|w| rest.any(|h| *h == w)) {
            best = size;
        }
    }
    best
}

pub fn matched_none(table: &AlignmentTable) -> usize {
    table
        .rows
        .iter()
        .filter(|r| {
            matches!(
                r,
                AlignmentRow::Reference {
                    tag: DisfluencyTag::None,
                    hyp: Some(_),
                    ..
                }
            )
        })
        .count()
}

/// Structural checks every alignment must satisfy. Returns a description of
/// the first violation.
pub fn partition_violation(utt: &TaggedUtterance, hyp: &Hypothesis, table: &AlignmentTable) -> Option<String> {
    let reference: Vec<(&str, DisfluencyTag)> = table.reference().collect();
    let expected: Vec<(&str, DisfluencyTag)> = utt.pairs().collect();
    if reference != expected {
        return Some(format!("reference column {reference:?} != {expected:?}"));
    }
    let generated: Vec<&str> = table.hypothesis().collect();
    let expected: Vec<&str> = hyp.tokens.iter().map(String::as_str).collect();
    if generated != expected {
        return Some(format!("hypothesis column {generated:?} != {expected:?}"));
    }
    for row in &table.rows {
        if let AlignmentRow::Reference {
            token, hyp: Some(h), ..
        } = row
        {
            if token != h {
                return Some(format!("row pairs unequal tokens {token:?} / {h:?}"));
            }
        }
    }
    None
}
