//! Alignment of generated text against a tagged disfluent transcript.
//!
//! A plain gestalt matcher binds a generated token to the first identical
//! reference token, which is often the disfluent copy of a repaired word
//! ("the the cat" → "the" keeps the EDITED "the"). To prevent that, every
//! disfluent reference token is decorated with a separator and its tag
//! (`the§EDITED`) before matching. Decorated tokens cannot take part in an
//! equal block, so they always land in delete or replace regions. Replace
//! regions are then resolved by [`resolve_replace`], which prefers fluent
//! reference tokens and only then lets a generated token bind to a disfluent
//! one (meaning the model kept it).
//!
//! Generated tokens whose surface form occurs nowhere in the reference are
//! set aside before matching and re-inserted afterwards as hallucination
//! rows. They could never match anyway; leaving them in would let them split
//! an otherwise contiguous block and change which copy of a repeated word the
//! matcher picks.

mod gestalt;
mod replace;

use std::collections::HashSet;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::ingest::{DisfluencyTag, Hypothesis, TaggedUtterance};
use crate::tokenizer::TokenSeq;

pub use gestalt::{gestalt_opcodes, matching_blocks, Block, OpKind, Opcode};
pub use replace::resolve_replace;

pub const DEFAULT_SEPARATOR: &str = "§";

/// Token comparison mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseMode {
    #[default]
    Sensitive,
    Insensitive,
}

impl CaseMode {
    pub(crate) fn key(self, token: &str) -> String {
        match self {
            CaseMode::Sensitive => token.to_owned(),
            CaseMode::Insensitive => token.to_lowercase(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlignConfig {
    pub separator: String,
    pub case: CaseMode,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            separator: DEFAULT_SEPARATOR.to_owned(),
            case: CaseMode::Sensitive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignError {
    #[error("reference id {reference:?} does not match hypothesis id {hypothesis:?}")]
    IdMismatch { reference: String, hypothesis: String },
    #[error("separator {separator:?} occurs in token {token:?}; choose another separator")]
    SeparatorCollision { separator: String, token: String },
    #[error("separator must not be empty")]
    EmptySeparator,
}

/// Fails if `separator` is empty or occurs inside any of `tokens`.
pub fn check_separator<'a>(separator: &str, tokens: impl IntoIterator<Item = &'a String>) -> Result<(), AlignError> {
    if separator.is_empty() {
        return Err(AlignError::EmptySeparator);
    }
    match tokens.into_iter().find(|t| t.contains(separator)) {
        Some(t) => Err(AlignError::SeparatorCollision {
            separator: separator.to_owned(),
            token: t.clone(),
        }),
        None => Ok(()),
    }
}

fn decorate_one(token: &str, tag: DisfluencyTag, separator: &str) -> String {
    if tag.is_disfluent() {
        format!("{token}{separator}{tag}")
    } else {
        token.to_owned()
    }
}

/// Appends `separator` and the tag name to every disfluent token.
pub fn decorate(utt: &TaggedUtterance, separator: &str) -> Result<TokenSeq, AlignError> {
    check_separator(separator, utt.tokens())?;
    Ok(utt.pairs().map(|(t, g)| decorate_one(t, g, separator)).collect())
}

/// One line of an alignment table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlignmentRow {
    /// A reference token with its tag; `hyp` is `None` when the model
    /// dropped it.
    Reference {
        token: String,
        tag: DisfluencyTag,
        hyp: Option<String>,
    },
    /// A generated token with no reference counterpart.
    Hallucination { hyp: String },
}

impl AlignmentRow {
    pub fn is_hallucination(&self) -> bool {
        matches!(self, AlignmentRow::Hallucination { .. })
    }

    pub fn gt_token(&self) -> Option<&str> {
        match self {
            AlignmentRow::Reference { token, .. } => Some(token),
            AlignmentRow::Hallucination { .. } => None,
        }
    }

    pub fn tag(&self) -> Option<DisfluencyTag> {
        match self {
            AlignmentRow::Reference { tag, .. } => Some(*tag),
            AlignmentRow::Hallucination { .. } => None,
        }
    }

    pub fn hyp_token(&self) -> Option<&str> {
        match self {
            AlignmentRow::Reference { hyp, .. } => hyp.as_deref(),
            AlignmentRow::Hallucination { hyp } => Some(hyp),
        }
    }
}

impl Serialize for AlignmentRow {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("AlignmentRow", 4)?;
        s.serialize_field("gt_token", &self.gt_token())?;
        s.serialize_field("tag", &self.tag())?;
        s.serialize_field("hyp_token", &self.hyp_token())?;
        s.serialize_field("hallucinated", &self.is_hallucination())?;
        s.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlignmentTable {
    pub id: String,
    pub rows: Vec<AlignmentRow>,
}

impl AlignmentTable {
    pub fn hallucination_count(&self) -> usize {
        self.rows.iter().filter(|r| r.is_hallucination()).count()
    }

    /// Reference `(token, tag)` pairs in order, skipping hallucinations.
    pub fn reference(&self) -> impl Iterator<Item = (&str, DisfluencyTag)> + '_ {
        self.rows.iter().filter_map(|r| match r {
            AlignmentRow::Reference { token, tag, .. } => Some((token.as_str(), *tag)),
            AlignmentRow::Hallucination { .. } => None,
        })
    }

    /// Every generated token in order, hallucinations included.
    pub fn hypothesis(&self) -> impl Iterator<Item = &str> + '_ {
        self.rows.iter().filter_map(AlignmentRow::hyp_token)
    }
}

/// Fixed-width rendering with hallucination rows shown as `- - token *`.
impl fmt::Display for AlignmentTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<[String; 3]> = self
            .rows
            .iter()
            .map(|r| match r {
                AlignmentRow::Reference { token, tag, hyp } => [
                    token.clone(),
                    tag.to_string(),
                    hyp.clone().unwrap_or_else(|| "∅".into()),
                ],
                AlignmentRow::Hallucination { hyp } => ["-".into(), "-".into(), format!("{hyp} *")],
            })
            .collect();
        let header = ["t_disfluent", "t_tag", "t_hyp"];
        let mut widths = header.map(|h| h.chars().count());
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |f: &mut fmt::Formatter<'_>, row: &[String; 3]| -> fmt::Result {
            writeln!(
                f,
                "{:<w0$}  {:<w1$}  {}",
                row[0],
                row[1],
                row[2],
                w0 = widths[0],
                w1 = widths[1]
            )
        };
        line(f, &header.map(String::from))?;
        for row in &cells {
            line(f, row)?;
        }
        Ok(())
    }
}

fn reference_pairs(utt: &TaggedUtterance) -> Vec<(&str, DisfluencyTag)> {
    utt.pairs().collect()
}

/// Aligns a hypothesis against its tagged reference.
pub fn align(utt: &TaggedUtterance, hyp: &Hypothesis, config: &AlignConfig) -> Result<AlignmentTable, AlignError> {
    if utt.id() != hyp.id {
        return Err(AlignError::IdMismatch {
            reference: utt.id().to_owned(),
            hypothesis: hyp.id.clone(),
        });
    }
    check_separator(&config.separator, utt.tokens().iter().chain(&hyp.tokens))?;

    let case = config.case;
    let gt_keys: Vec<String> = utt.tokens().iter().map(|t| case.key(t)).collect();
    let hyp_keys: Vec<String> = hyp.tokens.iter().map(|t| case.key(t)).collect();

    let vocab: HashSet<&str> = gt_keys.iter().map(String::as_str).collect();
    let candidates: Vec<usize> = (0..hyp_keys.len())
        .filter(|&j| vocab.contains(hyp_keys[j].as_str()))
        .collect();
    let cand_keys: Vec<&str> = candidates.iter().map(|&j| hyp_keys[j].as_str()).collect();

    let decorated: Vec<String> = gt_keys
        .iter()
        .zip(utt.tags())
        .map(|(k, &g)| decorate_one(k, g, &config.separator))
        .collect();
    let decorated: Vec<&str> = decorated.iter().map(String::as_str).collect();

    let gt_key_refs: Vec<&str> = gt_keys.iter().map(String::as_str).collect();
    let mut pairs = Vec::new();
    for op in gestalt_opcodes(&decorated, &cand_keys) {
        match op.kind {
            OpKind::Equal => pairs.extend(op.a.clone().zip(op.b.clone())),
            OpKind::Replace => {
                let local = replace::replace_matches(
                    &gt_key_refs[op.a.clone()],
                    &utt.tags()[op.a.clone()],
                    &cand_keys[op.b.clone()],
                );
                pairs.extend(local.into_iter().map(|(g, h)| (op.a.start + g, op.b.start + h)));
            }
            OpKind::Delete | OpKind::Insert => {}
        }
    }
    let pairs: Vec<(usize, usize)> = pairs.into_iter().map(|(g, h)| (g, candidates[h])).collect();

    Ok(AlignmentTable {
        id: utt.id().to_owned(),
        rows: replace::emit_rows(&reference_pairs(utt), &hyp.tokens, &pairs),
    })
}

/// The unmodified matcher: gestalt over raw tokens with no decoration, no
/// replace resolution and no hallucination pre-pass. Kept as a baseline to
/// show the early-matching failure the decoration step corrects.
pub fn align_plain(utt: &TaggedUtterance, hyp: &Hypothesis, case: CaseMode) -> AlignmentTable {
    let gt_keys: Vec<String> = utt.tokens().iter().map(|t| case.key(t)).collect();
    let hyp_keys: Vec<String> = hyp.tokens.iter().map(|t| case.key(t)).collect();
    let pairs: Vec<(usize, usize)> = matching_blocks(&gt_keys, &hyp_keys)
        .iter()
        .flat_map(|m| (m.a..m.a + m.len).zip(m.b..m.b + m.len))
        .collect();
    AlignmentTable {
        id: utt.id().to_owned(),
        rows: replace::emit_rows(&reference_pairs(utt), &hyp.tokens, &pairs),
    }
}

/// Drops hallucination rows, returning them separately in order.
pub fn filter_hallucinations(table: &AlignmentTable) -> (AlignmentTable, Vec<String>) {
    let mut rows = Vec::with_capacity(table.rows.len());
    let mut hallucinated = Vec::new();
    for row in &table.rows {
        match row {
            AlignmentRow::Hallucination { hyp } => hallucinated.push(hyp.clone()),
            r => rows.push(r.clone()),
        }
    }
    (
        AlignmentTable {
            id: table.id.clone(),
            rows,
        },
        hallucinated,
    )
}

/// The cleaned output with hallucinated tokens removed.
pub fn emit_clean(table: &AlignmentTable) -> TokenSeq {
    table
        .rows
        .iter()
        .filter_map(|r| match r {
            AlignmentRow::Reference { hyp, .. } => hyp.clone(),
            AlignmentRow::Hallucination { .. } => None,
        })
        .collect()
}
