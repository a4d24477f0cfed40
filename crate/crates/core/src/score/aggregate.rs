use serde::Serialize;

use super::{Counts, EScores, UtteranceScores, ZScores};

/// Mean and sample standard deviation of one metric over the utterances
/// where it is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Sample (n − 1) estimator; NaN when fewer than two values are defined.
    pub std: f64,
    pub defined_n: usize,
}

impl MetricSummary {
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let defined: Vec<f64> = values.into_iter().filter(|v| !v.is_nan()).collect();
        let n = defined.len();
        if n == 0 {
            return MetricSummary {
                mean: f64::NAN,
                std: f64::NAN,
                defined_n: 0,
            };
        }
        let mean = defined.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            f64::NAN
        } else {
            let ss: f64 = defined.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        };
        MetricSummary {
            mean,
            std,
            defined_n: n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MacroAggregates {
    pub e_p: MetricSummary,
    pub e_r: MetricSummary,
    pub e_f: MetricSummary,
    pub z_edited: MetricSummary,
    pub z_intj: MetricSummary,
    pub z_prn: MetricSummary,
}

/// Scores recomputed from corpus-summed counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MicroAggregates {
    pub e: EScores,
    pub z: ZScores,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ReportCounts {
    pub utterances: usize,
    pub empty_utterances: usize,
    pub rows: usize,
    pub hallucinations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusReport {
    /// Sorted by id.
    pub utterances: Vec<UtteranceScores>,
    pub macro_avg: MacroAggregates,
    pub micro: MicroAggregates,
    pub counts: ReportCounts,
}

/// Folds per-utterance scores into corpus aggregates.
///
/// Utterances are sorted by id first, so the result does not depend on the
/// order they were scored in.
pub fn aggregate(mut per_utt: Vec<UtteranceScores>) -> CorpusReport {
    per_utt.sort_by(|a, b| a.id.cmp(&b.id));

    let summary = |f: fn(&UtteranceScores) -> f64| MetricSummary::from_values(per_utt.iter().map(f));
    let macro_avg = MacroAggregates {
        e_p: summary(|u| u.e.precision),
        e_r: summary(|u| u.e.recall),
        e_f: summary(|u| u.e.f1),
        z_edited: summary(|u| u.z.z_edited()),
        z_intj: summary(|u| u.z.z_intj()),
        z_prn: summary(|u| u.z.z_prn()),
    };

    let counts = per_utt.iter().fold(Counts::default(), |acc, u| acc + u.e.counts);
    let z = per_utt.iter().fold(ZScores::default(), |acc, u| acc + u.z);
    let micro = if per_utt.is_empty() {
        MicroAggregates {
            e: EScores {
                precision: f64::NAN,
                recall: f64::NAN,
                f1: f64::NAN,
                counts,
            },
            z,
        }
    } else {
        MicroAggregates {
            e: EScores::from_counts(counts),
            z,
        }
    };

    let counts = ReportCounts {
        utterances: per_utt.len(),
        empty_utterances: per_utt.iter().filter(|u| u.rows == 0).count(),
        rows: per_utt.iter().map(|u| u.rows).sum(),
        hallucinations: per_utt.iter().map(|u| u.hallucinations).sum(),
    };

    CorpusReport {
        utterances: per_utt,
        macro_avg,
        micro,
        counts,
    }
}
