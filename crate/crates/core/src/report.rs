//! Report serialization.
//!
//! Floats are written with exactly four decimals and NaN as `null`, so that
//! identical runs produce byte-identical JSON.

use std::fmt::Write as _;

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::align::{AlignmentRow, AlignmentTable};
use crate::score::{indicators, CorpusReport, MetricSummary, UtteranceScores};

/// A float rendered with four decimals; NaN and infinities become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixed4(pub f64);

impl Fixed4 {
    pub fn text(self) -> Option<String> {
        self.0.is_finite().then(|| format!("{:.4}", self.0))
    }
}

impl Serialize for Fixed4 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.text() {
            Some(text) => RawValue::from_string(text)
                .map_err(serde::ser::Error::custom)?
                .serialize(serializer),
            None => serializer.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AggregateMode {
    Macro,
    Micro,
    #[default]
    Both,
}

impl AggregateMode {
    fn has_macro(self) -> bool {
        self != AggregateMode::Micro
    }

    fn has_micro(self) -> bool {
        self != AggregateMode::Macro
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Flat per-utterance record shared by the JSON and CSV writers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtteranceRecord {
    pub id: String,
    pub e_p: Fixed4,
    pub e_r: Fixed4,
    pub e_f: Fixed4,
    pub z_edited: Fixed4,
    pub z_intj: Fixed4,
    pub z_prn: Fixed4,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub hallucinations: usize,
    pub rows: usize,
    pub edited_removed: u64,
    pub edited_total: u64,
    pub intj_removed: u64,
    pub intj_total: u64,
    pub prn_removed: u64,
    pub prn_total: u64,
}

impl From<&UtteranceScores> for UtteranceRecord {
    fn from(u: &UtteranceScores) -> Self {
        UtteranceRecord {
            id: u.id.clone(),
            e_p: Fixed4(u.e.precision),
            e_r: Fixed4(u.e.recall),
            e_f: Fixed4(u.e.f1),
            z_edited: Fixed4(u.z.z_edited()),
            z_intj: Fixed4(u.z.z_intj()),
            z_prn: Fixed4(u.z.z_prn()),
            tp: u.e.counts.tp,
            fp: u.e.counts.fp,
            fn_: u.e.counts.fn_,
            tn: u.e.counts.tn,
            hallucinations: u.hallucinations,
            rows: u.rows,
            edited_removed: u.z.edited.removed,
            edited_total: u.z.edited.total,
            intj_removed: u.z.intj.removed,
            intj_total: u.z.intj.total,
            prn_removed: u.z.prn.removed,
            prn_total: u.z.prn.total,
        }
    }
}

#[derive(Serialize)]
struct SummaryOut {
    mean: Fixed4,
    std: Fixed4,
    defined_n: usize,
}

impl From<MetricSummary> for SummaryOut {
    fn from(m: MetricSummary) -> Self {
        SummaryOut {
            mean: Fixed4(m.mean),
            std: Fixed4(m.std),
            defined_n: m.defined_n,
        }
    }
}

#[derive(Serialize)]
struct MacroOut {
    e_p: SummaryOut,
    e_r: SummaryOut,
    e_f: SummaryOut,
    z_edited: SummaryOut,
    z_intj: SummaryOut,
    z_prn: SummaryOut,
}

#[derive(Serialize)]
struct MicroOut {
    e_p: Fixed4,
    e_r: Fixed4,
    e_f: Fixed4,
    z_edited: Fixed4,
    z_intj: Fixed4,
    z_prn: Fixed4,
    tp: u64,
    fp: u64,
    #[serde(rename = "fn")]
    fn_: u64,
    tn: u64,
    edited_removed: u64,
    edited_total: u64,
    intj_removed: u64,
    intj_total: u64,
    prn_removed: u64,
    prn_total: u64,
}

#[derive(Serialize)]
struct CorpusOut {
    #[serde(rename = "macro", skip_serializing_if = "Option::is_none")]
    macro_avg: Option<MacroOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    micro: Option<MicroOut>,
}

/// Run metadata echoed at the top of every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub tool: &'static str,
    pub version: &'static str,
    pub std_estimator: &'static str,
    pub config: serde_json::Value,
}

impl RunMeta {
    pub fn new(config: serde_json::Value) -> Self {
        RunMeta {
            tool: "zscore",
            version: crate::VERSION,
            std_estimator: "sample (n-1)",
            config,
        }
    }
}

#[derive(Serialize)]
struct MetaOut<'a> {
    #[serde(flatten)]
    run: &'a RunMeta,
    counts: crate::score::ReportCounts,
}

#[derive(Serialize)]
struct ReportOut<'a> {
    meta: MetaOut<'a>,
    corpus: CorpusOut,
    #[serde(skip_serializing_if = "Option::is_none")]
    utterances: Option<Vec<UtteranceRecord>>,
}

fn corpus_out(report: &CorpusReport, mode: AggregateMode) -> CorpusOut {
    let m = &report.macro_avg;
    let micro = &report.micro;
    CorpusOut {
        macro_avg: mode.has_macro().then(|| MacroOut {
            e_p: m.e_p.into(),
            e_r: m.e_r.into(),
            e_f: m.e_f.into(),
            z_edited: m.z_edited.into(),
            z_intj: m.z_intj.into(),
            z_prn: m.z_prn.into(),
        }),
        micro: mode.has_micro().then(|| MicroOut {
            e_p: Fixed4(micro.e.precision),
            e_r: Fixed4(micro.e.recall),
            e_f: Fixed4(micro.e.f1),
            z_edited: Fixed4(micro.z.z_edited()),
            z_intj: Fixed4(micro.z.z_intj()),
            z_prn: Fixed4(micro.z.z_prn()),
            tp: micro.e.counts.tp,
            fp: micro.e.counts.fp,
            fn_: micro.e.counts.fn_,
            tn: micro.e.counts.tn,
            edited_removed: micro.z.edited.removed,
            edited_total: micro.z.edited.total,
            intj_removed: micro.z.intj.removed,
            intj_total: micro.z.intj.total,
            prn_removed: micro.z.prn.removed,
            prn_total: micro.z.prn.total,
        }),
    }
}

fn to_pretty_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report structs serialize");
    out.push(b'\n');
    out
}

/// `{meta, corpus: {macro, micro}, utterances: [...]}`.
pub fn write_json(report: &CorpusReport, meta: &RunMeta, mode: AggregateMode) -> Vec<u8> {
    to_pretty_json(&ReportOut {
        meta: MetaOut {
            run: meta,
            counts: report.counts,
        },
        corpus: corpus_out(report, mode),
        utterances: Some(report.utterances.iter().map(UtteranceRecord::from).collect()),
    })
}

/// The corpus-level part of the report without per-utterance records.
pub fn write_summary_json(report: &CorpusReport, meta: &RunMeta, mode: AggregateMode) -> Vec<u8> {
    to_pretty_json(&ReportOut {
        meta: MetaOut {
            run: meta,
            counts: report.counts,
        },
        corpus: corpus_out(report, mode),
        utterances: None,
    })
}

pub const CSV_COLUMNS: [&str; 12] = [
    "id",
    "e_p",
    "e_r",
    "e_f",
    "z_edited",
    "z_intj",
    "z_prn",
    "tp",
    "fp",
    "fn",
    "tn",
    "hallucinations",
];

/// One row per utterance; NaN as an empty cell. Corpus aggregates are not
/// embedded (see [`write_summary_json`]).
pub fn write_csv(report: &CorpusReport) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for u in &report.utterances {
        let r = UtteranceRecord::from(u);
        let f = |x: Fixed4| x.text().unwrap_or_default();
        w.write_record([
            r.id,
            f(r.e_p),
            f(r.e_r),
            f(r.e_f),
            f(r.z_edited),
            f(r.z_intj),
            f(r.z_prn),
            r.tp.to_string(),
            r.fp.to_string(),
            r.fn_.to_string(),
            r.tn.to_string(),
            r.hallucinations.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
}

pub fn write_report(
    report: &CorpusReport,
    meta: &RunMeta,
    mode: AggregateMode,
    format: OutputFormat,
) -> Result<Vec<u8>, csv::Error> {
    match format {
        OutputFormat::Json => Ok(write_json(report, meta, mode)),
        OutputFormat::Csv => write_csv(report),
    }
}

/// Alignment table with indicator columns. Dropped tokens show `∅`,
/// hallucination rows show `-` for the reference side and `*` indicators.
pub fn render_alignment(table: &AlignmentTable) -> String {
    let header = ["t_disfluent", "t_tag", "t_hyp", "gt", "pred", "tp", "tn", "fp", "fn"];
    let mut lines: Vec<Vec<String>> = vec![header.iter().map(|h| h.to_string()).collect()];
    for row in &table.rows {
        lines.push(match row {
            AlignmentRow::Reference { token, tag, hyp } => {
                let single = AlignmentTable {
                    id: String::new(),
                    rows: vec![row.clone()],
                };
                let ind = indicators(&single).expect("reference row")[0];
                vec![
                    token.clone(),
                    tag.to_string(),
                    hyp.clone().unwrap_or_else(|| "∅".into()),
                    (ind.gt as u8).to_string(),
                    (ind.pred as u8).to_string(),
                    ind.tp().to_string(),
                    ind.tn().to_string(),
                    ind.fp().to_string(),
                    ind.fn_().to_string(),
                ]
            }
            AlignmentRow::Hallucination { hyp } => {
                let mut cells = vec!["-".to_string(), "-".to_string(), hyp.clone()];
                cells.extend(std::iter::repeat_n("*".to_string(), 6));
                cells
            }
        });
    }
    let mut widths = vec![0; header.len()];
    for line in &lines {
        for (w, cell) in widths.iter_mut().zip(line) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for line in &lines {
        let mut text = String::new();
        for (i, (cell, w)) in line.iter().zip(&widths).enumerate() {
            if i > 0 {
                text.push_str("  ");
            }
            let _ = write!(text, "{cell:<w$}");
        }
        out.push_str(text.trim_end());
        out.push('\n');
    }
    out
}
