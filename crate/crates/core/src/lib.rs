//! Evaluation of speech disfluency removal.
//!
//! Model output is aligned back onto a disfluent transcript whose tokens
//! carry EDITED / INTJ / PRN / NONE tags ([`align`]), then scored at the word
//! level (precision, recall, F1 over removal decisions) and per disfluency
//! category ([`score`]).
//!
//! ```
//! use zscore::{score_utterance, AlignConfig, DisfluencyTag::*, Hypothesis, TaggedUtterance};
//!
//! let reference = TaggedUtterance::from_pairs("u1", [("the", Edited), ("the", None), ("cat", None)]);
//! let hypothesis = Hypothesis::from_text("u1", "the cat");
//! let scores = score_utterance(&reference, &hypothesis, &AlignConfig::default()).unwrap();
//! assert_eq!(scores.e.f1, 100.0);
//! assert_eq!(scores.z.z_edited(), 100.0);
//! ```

pub mod align;
pub mod cli;
pub mod ingest;
pub mod report;
pub mod score;
pub mod tokenizer;

pub use align::{
    align, align_plain, decorate, emit_clean, filter_hallucinations, gestalt_opcodes, resolve_replace, AlignConfig,
    AlignError, AlignmentRow, AlignmentTable, CaseMode, OpKind, Opcode,
};
pub use ingest::{
    extract_tagged, parse_ptb, read_hyp, read_jsonl_ref, read_ptb_ref, DisfluencyTag, HypMode, Hypothesis, IngestError,
    ParseTree, TaggedUtterance,
};
pub use score::{
    aggregate, e_scores, evaluate, indicators, score_table, score_utterance, z_scores, CorpusReport, EScores,
    IndicatorRow, UtteranceScores, ZScores,
};
pub use tokenizer::{tokenize, TokenSeq};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
