//! Ground-truth and hypothesis loading.
//!
//! References come either from bracketed Penn Treebank trees, where the
//! disfluency tag of each leaf is read off its ancestors, or from flat JSONL
//! records that already carry one tag per token. Hypotheses are JSONL.

mod jsonl;
mod ptb;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenizer::TokenSeq;

pub use jsonl::{read_hyp, read_jsonl_ref, HypMode};
pub use ptb::{extract_tagged, parse_ptb, read_ptb_ref, ParseError, ParseTree};

/// Shriberg disfluency category of a single token, or `None` for fluent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DisfluencyTag {
    Edited,
    Intj,
    Prn,
    None,
}

impl DisfluencyTag {
    /// The three categories that should be removed, in report order.
    pub const DISFLUENT: [DisfluencyTag; 3] = [DisfluencyTag::Edited, DisfluencyTag::Intj, DisfluencyTag::Prn];

    pub fn as_str(self) -> &'static str {
        match self {
            DisfluencyTag::Edited => "EDITED",
            DisfluencyTag::Intj => "INTJ",
            DisfluencyTag::Prn => "PRN",
            DisfluencyTag::None => "NONE",
        }
    }

    pub fn is_disfluent(self) -> bool {
        self != DisfluencyTag::None
    }

    /// Maps a treebank node label to a disfluency category.
    ///
    /// Function tags after `-` or `=` are stripped first, so `PRN-1` and
    /// `INTJ=2` match. Anything else is not a disfluency label.
    pub fn from_node_label(label: &str) -> Option<DisfluencyTag> {
        let base = label.split(['-', '=']).next().unwrap_or("");
        match base {
            "EDITED" => Some(DisfluencyTag::Edited),
            "INTJ" => Some(DisfluencyTag::Intj),
            "PRN" => Some(DisfluencyTag::Prn),
            _ => None,
        }
    }
}

impl fmt::Display for DisfluencyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown disfluency tag {0:?} (expected EDITED, INTJ, PRN or NONE)")]
pub struct UnknownTag(pub String);

impl FromStr for DisfluencyTag {
    type Err = UnknownTag;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "EDITED" => Ok(DisfluencyTag::Edited),
            "INTJ" => Ok(DisfluencyTag::Intj),
            "PRN" => Ok(DisfluencyTag::Prn),
            "NONE" => Ok(DisfluencyTag::None),
            _ => Err(UnknownTag(s.to_owned())),
        }
    }
}

/// A disfluent transcript with one tag per token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaggedUtterance {
    id: String,
    tokens: TokenSeq,
    tags: Vec<DisfluencyTag>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("utterance {id:?}: {tokens} tokens but {tags} tags")]
pub struct LengthMismatch {
    pub id: String,
    pub tokens: usize,
    pub tags: usize,
}

impl TaggedUtterance {
    pub fn new(id: impl Into<String>, tokens: TokenSeq, tags: Vec<DisfluencyTag>) -> Result<Self, LengthMismatch> {
        let id = id.into();
        if tokens.len() != tags.len() {
            return Err(LengthMismatch {
                id,
                tokens: tokens.len(),
                tags: tags.len(),
            });
        }
        Ok(TaggedUtterance { id, tokens, tags })
    }

    /// Convenience constructor from `(token, tag)` pairs.
    pub fn from_pairs<S: Into<String>>(
        id: impl Into<String>,
        pairs: impl IntoIterator<Item = (S, DisfluencyTag)>,
    ) -> Self {
        let (tokens, tags): (Vec<String>, Vec<DisfluencyTag>) = pairs.into_iter().map(|(t, g)| (t.into(), g)).unzip();
        let tokens = TokenSeq::new(tokens);
        TaggedUtterance::new(id, tokens, tags).expect("pairs with empty tokens")
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tokens(&self) -> &TokenSeq {
        &self.tokens
    }

    pub fn tags(&self) -> &[DisfluencyTag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    /// Empty references parse fine but cannot be scored meaningfully.
    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, DisfluencyTag)> + '_ {
        self.tokens.iter().map(String::as_str).zip(self.tags.iter().copied())
    }

    /// Keeps only the tokens for which `keep` returns true.
    pub fn retain_tokens(&self, mut keep: impl FnMut(&str) -> bool) -> TaggedUtterance {
        let (tokens, tags): (Vec<String>, Vec<DisfluencyTag>) = self
            .pairs()
            .filter(|(t, _)| keep(t))
            .map(|(t, g)| (t.to_owned(), g))
            .unzip();
        TaggedUtterance {
            id: self.id.clone(),
            tokens: TokenSeq::new(tokens),
            tags,
        }
    }
}

/// Model output for one utterance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hypothesis {
    pub id: String,
    pub tokens: TokenSeq,
}

impl Hypothesis {
    pub fn new(id: impl Into<String>, tokens: TokenSeq) -> Self {
        Hypothesis { id: id.into(), tokens }
    }

    /// Tokenizes raw text into a hypothesis.
    pub fn from_text(id: impl Into<String>, text: &str) -> Self {
        Hypothesis::new(id, crate::tokenizer::tokenize(text))
    }

    pub fn retain_tokens(&self, mut keep: impl FnMut(&str) -> bool) -> Hypothesis {
        Hypothesis {
            id: self.id.clone(),
            tokens: self.tokens.iter().filter(|t| keep(t)).cloned().collect(),
        }
    }
}

/// One bad line in a JSONL input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}{}: {message}", .id.as_deref().map(|id| format!(" (id {id:?})")).unwrap_or_default())]
pub struct RecordError {
    pub line: usize,
    pub id: Option<String>,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{} invalid record(s): {}", .0.len(), join_display(.0))]
    Records(Vec<RecordError>),
    #[error("duplicate utterance id(s): {}", .0.join(", "))]
    DuplicateIds(Vec<String>),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

fn join_display<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Returns every id that occurs more than once, in first-seen order.
pub(crate) fn duplicate_ids<'a>(ids: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut seen = std::collections::HashMap::new();
    let mut dups = Vec::new();
    for id in ids {
        let count = seen.entry(id).or_insert(0usize);
        *count += 1;
        if *count == 2 {
            dups.push(id.to_owned());
        }
    }
    dups
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_parse_case_insensitively() {
        assert_eq!("edited".parse::<DisfluencyTag>(), Ok(DisfluencyTag::Edited));
        assert_eq!("Intj".parse::<DisfluencyTag>(), Ok(DisfluencyTag::Intj));
        assert_eq!("NONE".parse::<DisfluencyTag>(), Ok(DisfluencyTag::None));
        assert!("UH".parse::<DisfluencyTag>().is_err());
    }

    #[test]
    fn node_labels_strip_function_tags() {
        assert_eq!(DisfluencyTag::from_node_label("PRN-2"), Some(DisfluencyTag::Prn));
        assert_eq!(DisfluencyTag::from_node_label("INTJ=1"), Some(DisfluencyTag::Intj));
        assert_eq!(DisfluencyTag::from_node_label("EDITED"), Some(DisfluencyTag::Edited));
        assert_eq!(DisfluencyTag::from_node_label("-NONE-"), None);
        assert_eq!(DisfluencyTag::from_node_label("UH"), None);
        assert_eq!(DisfluencyTag::from_node_label("PRNX"), None);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let err = TaggedUtterance::new(
            "u2",
            TokenSeq::new(["hi"]),
            vec![DisfluencyTag::None, DisfluencyTag::None],
        )
        .unwrap_err();
        assert_eq!(err.id, "u2");
    }

    #[test]
    fn duplicates_reported_once() {
        assert_eq!(duplicate_ids(["a", "b", "a", "a", "b"]), ["a", "b"]);
        assert!(duplicate_ids(["a", "b"]).is_empty());
    }
}
