use std::io::BufRead;

use serde::Deserialize;

use super::{duplicate_ids, DisfluencyTag, Hypothesis, IngestError, RecordError, TaggedUtterance};
use crate::tokenizer::{tokenize, TokenSeq};

/// How hypothesis records carry their text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HypMode {
    /// `{"id", "text"}`, tokenized with the Treebank rules.
    #[default]
    Text,
    /// `{"id", "tokens"}`, taken verbatim.
    Tokens,
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    text: Option<String>,
    tokens: Option<Vec<String>>,
    tags: Option<Vec<String>>,
}

/// Yields `(line_number, parsed record)` for every non-blank line.
fn records<R: BufRead>(
    reader: R,
) -> impl Iterator<Item = Result<(usize, Result<RawRecord, RecordError>), std::io::Error>> {
    reader.lines().enumerate().filter_map(|(i, line)| {
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(e)),
        };
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() {
            return None;
        }
        let n = i + 1;
        let parsed = serde_json::from_str::<RawRecord>(trimmed).map_err(|e| RecordError {
            line: n,
            id: None,
            message: format!("invalid JSON record: {e}"),
        });
        Some(Ok((n, parsed)))
    })
}

fn require<T>(field: Option<T>, name: &str, line: usize, id: &Option<String>) -> Result<T, RecordError> {
    field.ok_or_else(|| RecordError {
        line,
        id: id.clone(),
        message: format!("missing field {name:?}"),
    })
}

fn check_tokens(tokens: &[String], line: usize, id: &str) -> Result<(), RecordError> {
    match tokens
        .iter()
        .position(|t| t.trim().is_empty() || t.chars().any(char::is_whitespace))
    {
        Some(i) => Err(RecordError {
            line,
            id: Some(id.to_owned()),
            message: format!("token {i} is empty or contains whitespace"),
        }),
        None => Ok(()),
    }
}

fn finish<T>(items: Vec<T>, errors: Vec<RecordError>, id_of: impl Fn(&T) -> &str) -> Result<Vec<T>, IngestError> {
    if !errors.is_empty() {
        return Err(IngestError::Records(errors));
    }
    let dups = duplicate_ids(items.iter().map(id_of));
    if !dups.is_empty() {
        return Err(IngestError::DuplicateIds(dups));
    }
    Ok(items)
}

fn ref_record(line: usize, raw: RawRecord) -> Result<TaggedUtterance, RecordError> {
    let id = require(raw.id.clone(), "id", line, &None)?;
    let tokens = require(raw.tokens, "tokens", line, &raw.id)?;
    let tags = require(raw.tags, "tags", line, &raw.id)?;
    check_tokens(&tokens, line, &id)?;
    let tags = tags
        .iter()
        .map(|t| t.parse::<DisfluencyTag>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| RecordError {
            line,
            id: Some(id.clone()),
            message: e.to_string(),
        })?;
    TaggedUtterance::new(id.clone(), TokenSeq::new(tokens), tags).map_err(|e| RecordError {
        line,
        id: Some(id),
        message: format!("length mismatch: {} tokens, {} tags", e.tokens, e.tags),
    })
}

/// Reads `{"id", "tokens", "tags"}` reference records.
///
/// All malformed records are collected and reported together; duplicate ids
/// are a separate, run-level failure.
pub fn read_jsonl_ref<R: BufRead>(reader: R) -> Result<Vec<TaggedUtterance>, IngestError> {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for rec in records(reader) {
        let (line, parsed) = rec?;
        match parsed.and_then(|raw| ref_record(line, raw)) {
            Ok(utt) => out.push(utt),
            Err(e) => errors.push(e),
        }
    }
    finish(out, errors, |u| u.id())
}

fn hyp_record(line: usize, raw: RawRecord, mode: HypMode) -> Result<Hypothesis, RecordError> {
    let id = require(raw.id.clone(), "id", line, &None)?;
    let tokens = match mode {
        HypMode::Text => tokenize(&require(raw.text, "text", line, &raw.id)?),
        HypMode::Tokens => {
            let tokens = require(raw.tokens, "tokens", line, &raw.id)?;
            check_tokens(&tokens, line, &id)?;
            TokenSeq::new(tokens)
        }
    };
    Ok(Hypothesis::new(id, tokens))
}

/// Reads hypothesis records in the given mode.
pub fn read_hyp<R: BufRead>(reader: R, mode: HypMode) -> Result<Vec<Hypothesis>, IngestError> {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for rec in records(reader) {
        let (line, parsed) = rec?;
        match parsed.and_then(|raw| hyp_record(line, raw, mode)) {
            Ok(h) => out.push(h),
            Err(e) => errors.push(e),
        }
    }
    finish(out, errors, |h| h.id.as_str())
}

#[cfg(test)]
mod tests {
    use super::*;
    use DisfluencyTag::*;

    fn refs(src: &str) -> Result<Vec<TaggedUtterance>, IngestError> {
        read_jsonl_ref(src.as_bytes())
    }

    #[test]
    fn reads_reference_record() {
        let utts = refs(r#"{"id":"u1","tokens":["the","the","cat"],"tags":["EDITED","NONE","NONE"]}"#).unwrap();
        assert_eq!(utts.len(), 1);
        assert_eq!(utts[0].id(), "u1");
        assert_eq!(utts[0].tags(), [Edited, None, None]);
    }

    #[test]
    fn crlf_blank_lines_and_lowercase_tags() {
        let src = "{\"id\":\"a\",\"tokens\":[\"um\"],\"tags\":[\"intj\"]}\r\n\r\n{\"id\":\"b\",\"tokens\":[\"x\"],\"tags\":[\"none\"]}\r\n";
        let utts = refs(src).unwrap();
        assert_eq!(utts[0].tags(), [Intj]);
        assert_eq!(utts[1].id(), "b");
    }

    #[test]
    fn length_mismatch_names_id() {
        let err = refs(r#"{"id":"u2","tokens":["hi"],"tags":["NONE","NONE"]}"#).unwrap_err();
        let IngestError::Records(errs) = err else {
            panic!("{err}")
        };
        assert_eq!(errs[0].id.as_deref(), Some("u2"));
        assert!(errs[0].message.contains("length mismatch"));
    }

    #[test]
    fn unknown_tag_and_bad_json_collected() {
        let src = "{\"id\":\"a\",\"tokens\":[\"x\"],\"tags\":[\"UH\"]}\nnot json\n";
        let IngestError::Records(errs) = refs(src).unwrap_err() else {
            panic!()
        };
        assert_eq!(errs.len(), 2);
        assert_eq!(errs[0].line, 1);
        assert_eq!(errs[1].line, 2);
    }

    #[test]
    fn empty_utterance_is_accepted() {
        let utts = refs(r#"{"id":"u3","tokens":[],"tags":[]}"#).unwrap();
        assert!(utts[0].is_empty());
    }

    #[test]
    fn duplicate_reference_ids() {
        let src = "{\"id\":\"a\",\"tokens\":[],\"tags\":[]}\n{\"id\":\"a\",\"tokens\":[],\"tags\":[]}\n";
        assert!(matches!(refs(src), Err(IngestError::DuplicateIds(ids)) if ids == ["a"]));
    }

    #[test]
    fn empty_token_rejected() {
        assert!(refs(r#"{"id":"a","tokens":[""],"tags":["NONE"]}"#).is_err());
    }

    #[test]
    fn hypothesis_text_mode() {
        let hyps = read_hyp(r#"{"id":"u1","text":"the cat"}"#.as_bytes(), HypMode::Text).unwrap();
        assert_eq!(hyps[0].tokens.as_slice(), ["the", "cat"]);
        let hyps = read_hyp(
            r#"{"id":"t2","text":"i mean but Luna was truly aware"}"#.as_bytes(),
            HypMode::Text,
        )
        .unwrap();
        assert_eq!(
            hyps[0].tokens.as_slice(),
            ["i", "mean", "but", "Luna", "was", "truly", "aware"]
        );
    }

    #[test]
    fn hypothesis_tokens_mode() {
        let hyps = read_hyp(r#"{"id":"u1","tokens":["do","n't"]}"#.as_bytes(), HypMode::Tokens).unwrap();
        assert_eq!(hyps[0].tokens.as_slice(), ["do", "n't"]);
    }

    #[test]
    fn hypothesis_missing_field() {
        let err = read_hyp(r#"{"id":"u9"}"#.as_bytes(), HypMode::Text).unwrap_err();
        let IngestError::Records(errs) = err else { panic!() };
        assert!(errs[0].message.contains("missing field \"text\""));
        assert!(read_hyp(r#"{"id":"u9","text":"x"}"#.as_bytes(), HypMode::Tokens).is_err());
    }

    #[test]
    fn hypothesis_duplicate_ids() {
        let src = "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}";
        assert!(matches!(
            read_hyp(src.as_bytes(), HypMode::Text),
            Err(IngestError::DuplicateIds(_))
        ));
    }
}
