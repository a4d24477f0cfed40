//! Word-level E-Scores and per-category Z-Scores.
//!
//! Both work on an alignment table with hallucination rows removed. A row
//! should be removed when its reference tag is disfluent, and was removed
//! when the model produced nothing for it. E-Scores are precision, recall
//! and F1 over those removal decisions. Z-Scores are the fraction of tokens
//! of each disfluency category that were removed, NaN when the category does
//! not occur.

mod aggregate;

use std::ops::{Add, AddAssign};

use serde::Serialize;
use thiserror::Error;

use crate::align::{align, emit_clean, filter_hallucinations, AlignConfig, AlignError, AlignmentRow, AlignmentTable};
use crate::ingest::{DisfluencyTag, Hypothesis, TaggedUtterance};
use crate::tokenizer::TokenSeq;

pub use aggregate::{aggregate, CorpusReport, MacroAggregates, MetricSummary, MicroAggregates, ReportCounts};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("row {index} is a hallucination row; filter hallucinations before scoring")]
    HallucinationRow { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    TruePositive,
    TrueNegative,
    FalsePositive,
    FalseNegative,
}

/// Removal indicators for one reference row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndicatorRow {
    /// The row should have been removed.
    pub gt: bool,
    /// The row was removed.
    pub pred: bool,
}

impl IndicatorRow {
    pub fn outcome(self) -> Outcome {
        match (self.gt, self.pred) {
            (true, true) => Outcome::TruePositive,
            (false, false) => Outcome::TrueNegative,
            (false, true) => Outcome::FalsePositive,
            (true, false) => Outcome::FalseNegative,
        }
    }

    pub fn tp(self) -> u8 {
        (self.outcome() == Outcome::TruePositive) as u8
    }

    pub fn tn(self) -> u8 {
        (self.outcome() == Outcome::TrueNegative) as u8
    }

    pub fn fp(self) -> u8 {
        (self.outcome() == Outcome::FalsePositive) as u8
    }

    pub fn fn_(self) -> u8 {
        (self.outcome() == Outcome::FalseNegative) as u8
    }
}

pub fn indicators(table: &AlignmentTable) -> Result<Vec<IndicatorRow>, ScoreError> {
    table
        .rows
        .iter()
        .enumerate()
        .map(|(index, row)| match row {
            AlignmentRow::Reference { tag, hyp, .. } => Ok(IndicatorRow {
                gt: tag.is_disfluent(),
                pred: hyp.is_none(),
            }),
            AlignmentRow::Hallucination { .. } => Err(ScoreError::HallucinationRow { index }),
        })
        .collect()
}

/// Confusion counts over removal decisions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl Counts {
    pub fn from_rows(rows: &[IndicatorRow]) -> Self {
        rows.iter().fold(Counts::default(), |mut c, r| {
            match r.outcome() {
                Outcome::TruePositive => c.tp += 1,
                Outcome::TrueNegative => c.tn += 1,
                Outcome::FalsePositive => c.fp += 1,
                Outcome::FalseNegative => c.fn_ += 1,
            }
            c
        })
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

impl Add for Counts {
    type Output = Counts;

    fn add(self, o: Counts) -> Counts {
        Counts {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

impl AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        *self = *self + o;
    }
}

/// Precision, recall and F1 as percentages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: Counts,
}

impl EScores {
    /// Applies the standard formulas with total conventions for empty
    /// denominators: nothing to remove and nothing removed scores 100 across
    /// the board; otherwise a zero denominator gives 0.
    pub fn from_counts(counts: Counts) -> Self {
        let Counts { tp, fp, fn_, .. } = counts;
        if tp + fp == 0 && tp + fn_ == 0 {
            return EScores {
                precision: 100.0,
                recall: 100.0,
                f1: 100.0,
                counts,
            };
        }
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let p = ratio(tp, tp + fp);
        let r = ratio(tp, tp + fn_);
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        EScores {
            precision: 100.0 * p,
            recall: 100.0 * r,
            f1: 100.0 * f,
            counts,
        }
    }
}

pub fn e_scores(rows: &[IndicatorRow]) -> EScores {
    EScores::from_counts(Counts::from_rows(rows))
}

/// Removed and total token counts for one disfluency category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CategoryCount {
    pub removed: u64,
    pub total: u64,
}

impl CategoryCount {
    /// Percentage removed, NaN when the category is absent.
    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            f64::NAN
        } else {
            100.0 * self.removed as f64 / self.total as f64
        }
    }
}

impl Add for CategoryCount {
    type Output = CategoryCount;

    fn add(self, o: CategoryCount) -> CategoryCount {
        CategoryCount {
            removed: self.removed + o.removed,
            total: self.total + o.total,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ZScores {
    pub edited: CategoryCount,
    pub intj: CategoryCount,
    pub prn: CategoryCount,
}

impl ZScores {
    pub fn category(&self, tag: DisfluencyTag) -> Option<CategoryCount> {
        match tag {
            DisfluencyTag::Edited => Some(self.edited),
            DisfluencyTag::Intj => Some(self.intj),
            DisfluencyTag::Prn => Some(self.prn),
            DisfluencyTag::None => None,
        }
    }

    fn category_mut(&mut self, tag: DisfluencyTag) -> Option<&mut CategoryCount> {
        match tag {
            DisfluencyTag::Edited => Some(&mut self.edited),
            DisfluencyTag::Intj => Some(&mut self.intj),
            DisfluencyTag::Prn => Some(&mut self.prn),
            DisfluencyTag::None => None,
        }
    }

    pub fn z_edited(&self) -> f64 {
        self.edited.rate()
    }

    pub fn z_intj(&self) -> f64 {
        self.intj.rate()
    }

    pub fn z_prn(&self) -> f64 {
        self.prn.rate()
    }
}

impl Add for ZScores {
    type Output = ZScores;

    fn add(self, o: ZScores) -> ZScores {
        ZScores {
            edited: self.edited + o.edited,
            intj: self.intj + o.intj,
            prn: self.prn + o.prn,
        }
    }
}

/// Per-category removal rates. Hallucination rows are ignored.
pub fn z_scores(table: &AlignmentTable) -> ZScores {
    let mut z = ZScores::default();
    for row in &table.rows {
        if let AlignmentRow::Reference { tag, hyp, .. } = row {
            if let Some(c) = z.category_mut(*tag) {
                c.total += 1;
                c.removed += hyp.is_none() as u64;
            }
        }
    }
    z
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtteranceScores {
    pub id: String,
    pub e: EScores,
    pub z: ZScores,
    pub hallucinations: usize,
    /// Reference rows scored, i.e. rows left after filtering.
    pub rows: usize,
}

/// Scores computed from an alignment table, plus the cleaned output.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub table: AlignmentTable,
    pub scores: UtteranceScores,
    pub clean: TokenSeq,
}

pub fn score_table(table: &AlignmentTable) -> UtteranceScores {
    let (filtered, hallucinated) = filter_hallucinations(table);
    let rows = indicators(&filtered).expect("filtered table has no hallucination rows");
    UtteranceScores {
        id: table.id.clone(),
        e: e_scores(&rows),
        z: z_scores(&filtered),
        hallucinations: hallucinated.len(),
        rows: rows.len(),
    }
}

/// Align, filter, and score in one step, keeping the intermediate table.
pub fn evaluate(utt: &TaggedUtterance, hyp: &Hypothesis, config: &AlignConfig) -> Result<Evaluation, AlignError> {
    let table = align(utt, hyp, config)?;
    let scores = score_table(&table);
    let clean = emit_clean(&table);
    Ok(Evaluation { table, scores, clean })
}

pub fn score_utterance(
    utt: &TaggedUtterance,
    hyp: &Hypothesis,
    config: &AlignConfig,
) -> Result<UtteranceScores, AlignError> {
    Ok(score_table(&align(utt, hyp, config)?))
}
