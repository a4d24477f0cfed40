//! Batch evaluation runner behind the `zscore` binary.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::align::{check_separator, AlignConfig, AlignError, CaseMode, DEFAULT_SEPARATOR};
use crate::ingest::{read_hyp, read_jsonl_ref, read_ptb_ref, HypMode, Hypothesis, IngestError, TaggedUtterance};
use crate::report::{render_alignment, write_report, write_summary_json, AggregateMode, OutputFormat, RunMeta};
use crate::score::{aggregate, evaluate, CorpusReport, Evaluation};
use crate::tokenizer::{is_punct, TokenSeq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RefFormat {
    Ptb,
    #[default]
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum HypModeArg {
    #[default]
    Text,
    Tokens,
}

impl From<HypModeArg> for HypMode {
    fn from(m: HypModeArg) -> Self {
        match m {
            HypModeArg::Text => HypMode::Text,
            HypModeArg::Tokens => HypMode::Tokens,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CaseArg {
    #[default]
    Sensitive,
    Insensitive,
}

impl From<CaseArg> for CaseMode {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::Sensitive => CaseMode::Sensitive,
            CaseArg::Insensitive => CaseMode::Insensitive,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "zscore",
    version,
    about = "Disfluency removal evaluation: alignment, E-Scores and Z-Scores"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Score a corpus of hypotheses against tagged references.
    Eval(EvalArgs),
    /// Print the alignment table for one utterance.
    Align(AlignArgs),
    /// Convert treebank references to reference JSONL.
    Extract(ExtractArgs),
}

/// Input options shared by `eval` and `align`.
#[derive(Args, Debug, Clone, Serialize)]
pub struct InputArgs {
    /// Reference file.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub ref_format: RefFormat,
    /// Hypothesis JSONL file.
    #[arg(long)]
    pub hyp: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub hyp_mode: HypModeArg,
    /// Marker appended to disfluent reference tokens before matching.
    #[arg(long, default_value = DEFAULT_SEPARATOR)]
    pub separator: String,
    #[arg(long = "case", value_enum, default_value_t)]
    pub case: CaseArg,
    /// Drop punctuation tokens from references and hypotheses.
    #[arg(long)]
    pub exclude_punct: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t)]
    pub aggregate: AggregateMode,
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
    /// Report destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write cleaned hypotheses (hallucinations removed) as JSONL.
    #[arg(long)]
    pub emit_clean: Option<PathBuf>,
    /// Score references without a hypothesis as if everything was removed.
    #[arg(long)]
    pub allow_missing_hyp: bool,
}

#[derive(Args, Debug, Clone)]
pub struct AlignArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Utterance to align.
    #[arg(long)]
    pub id: String,
    /// Emit the table as JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ExtractArgs {
    /// Treebank file.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Everything `run_eval` needs; mirrors the `eval` flags.
pub type RunConfig = EvalArgs;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Ingest { path: PathBuf, source: IngestError },
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error("{}", unmatched_message(.missing_hyp, .unknown_hyp))]
    UnmatchedIds {
        missing_hyp: Vec<String>,
        unknown_hyp: Vec<String>,
    },
    #[error("unknown utterance id {0:?}")]
    UnknownId(String),
    #[error("empty corpus: no reference utterances")]
    EmptyCorpus,
    #[error("cannot serialize CSV: {0}")]
    Csv(#[from] csv::Error),
}

fn unmatched_message(missing: &[String], unknown: &[String]) -> String {
    let mut parts = Vec::new();
    if !missing.is_empty() {
        parts.push(format!("no hypothesis for reference id(s): {}", missing.join(", ")));
    }
    if !unknown.is_empty() {
        parts.push(format!("no reference for hypothesis id(s): {}", unknown.join(", ")));
    }
    parts.join("; ")
}

impl EvalError {
    /// 1 for validation failures, 2 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            EvalError::Read { .. } | EvalError::Write { .. } | EvalError::Csv(_) => 2,
            EvalError::Ingest {
                source: IngestError::Io(_),
                ..
            } => 2,
            _ => 1,
        }
    }
}

fn read_file(path: &Path) -> Result<String, EvalError> {
    fs::read_to_string(path).map_err(|source| EvalError::Read {
        path: path.to_owned(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), EvalError> {
    fs::write(path, bytes).map_err(|source| EvalError::Write {
        path: path.to_owned(),
        source,
    })
}

/// Loads and validates references and hypotheses.
pub fn load_inputs(input: &InputArgs) -> Result<(Vec<TaggedUtterance>, Vec<Hypothesis>), EvalError> {
    let ref_src = read_file(&input.reference)?;
    let hyp_src = read_file(&input.hyp)?;

    let ingest_err = |path: &Path| {
        let path = path.to_owned();
        move |source: IngestError| EvalError::Ingest { path, source }
    };
    let mut refs = match input.ref_format {
        RefFormat::Jsonl => read_jsonl_ref(ref_src.as_bytes()).map_err(ingest_err(&input.reference))?,
        RefFormat::Ptb => {
            let prefix = input
                .reference
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            read_ptb_ref(&ref_src, &prefix).map_err(|e| EvalError::Ingest {
                path: input.reference.clone(),
                source: e.into(),
            })?
        }
    };
    let mut hyps = read_hyp(hyp_src.as_bytes(), input.hyp_mode.into()).map_err(ingest_err(&input.hyp))?;

    if input.exclude_punct {
        refs = refs.iter().map(|u| u.retain_tokens(|t| !is_punct(t))).collect();
        hyps = hyps.iter().map(|h| h.retain_tokens(|t| !is_punct(t))).collect();
    }

    check_separator(
        &input.separator,
        refs.iter()
            .flat_map(|u| u.tokens().iter())
            .chain(hyps.iter().flat_map(|h| h.tokens.iter())),
    )?;
    Ok((refs, hyps))
}

fn align_config(input: &InputArgs) -> AlignConfig {
    AlignConfig {
        separator: input.separator.clone(),
        case: input.case.into(),
    }
}

/// Pairs every reference with its hypothesis.
fn join(
    refs: Vec<TaggedUtterance>,
    hyps: Vec<Hypothesis>,
    allow_missing: bool,
) -> Result<Vec<(TaggedUtterance, Hypothesis)>, EvalError> {
    let mut by_id: HashMap<String, Hypothesis> = hyps.into_iter().map(|h| (h.id.clone(), h)).collect();
    let mut missing = Vec::new();
    let mut pairs = Vec::with_capacity(refs.len());
    for utt in refs {
        match by_id.remove(utt.id()) {
            Some(h) => pairs.push((utt, h)),
            None => {
                missing.push(utt.id().to_owned());
                let empty = Hypothesis::new(utt.id(), TokenSeq::default());
                pairs.push((utt, empty));
            }
        }
    }
    let mut unknown: Vec<String> = by_id.into_keys().collect();
    unknown.sort();
    missing.sort();
    if !unknown.is_empty() || (!missing.is_empty() && !allow_missing) {
        return Err(EvalError::UnmatchedIds {
            missing_hyp: if allow_missing { Vec::new() } else { missing },
            unknown_hyp: unknown,
        });
    }
    Ok(pairs)
}

/// Result of a corpus run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: CorpusReport,
    pub meta: RunMeta,
    /// Cleaned output per utterance, sorted by id.
    pub clean: Vec<(String, TokenSeq)>,
}

/// Scores a whole corpus. Utterances are evaluated in parallel and folded
/// in id order.
pub fn run_eval(config: &RunConfig) -> Result<RunOutput, EvalError> {
    let (refs, hyps) = load_inputs(&config.input)?;
    if refs.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let pairs = join(refs, hyps, config.allow_missing_hyp)?;
    let align_cfg = align_config(&config.input);

    let evaluations: Vec<Evaluation> = pairs
        .par_iter()
        .map(|(utt, hyp)| evaluate(utt, hyp, &align_cfg))
        .collect::<Result<_, _>>()?;

    let mut clean: Vec<(String, TokenSeq)> = Vec::with_capacity(evaluations.len());
    let mut scores = Vec::with_capacity(evaluations.len());
    for ev in evaluations {
        clean.push((ev.table.id.clone(), ev.clean));
        scores.push(ev.scores);
    }
    clean.sort_by(|a, b| a.0.cmp(&b.0));

    let meta = RunMeta::new(serde_json::to_value(config).expect("config serializes"));
    Ok(RunOutput {
        report: aggregate(scores),
        meta,
        clean,
    })
}

#[derive(Serialize)]
struct CleanRecord<'a> {
    id: &'a str,
    tokens: &'a TokenSeq,
}

pub fn clean_jsonl(clean: &[(String, TokenSeq)]) -> Vec<u8> {
    let mut out = Vec::new();
    for (id, tokens) in clean {
        serde_json::to_writer(&mut out, &CleanRecord { id, tokens }).expect("clean record serializes");
        out.push(b'\n');
    }
    out
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".summary.json");
    PathBuf::from(name)
}

/// `zscore eval`: runs and writes every requested output.
pub fn eval_command(config: &RunConfig, stdout: &mut dyn Write) -> Result<(), EvalError> {
    let run = run_eval(config)?;
    let bytes = write_report(&run.report, &run.meta, config.aggregate, config.format)?;
    match &config.out {
        Some(path) => {
            write_file(path, &bytes)?;
            if config.format == OutputFormat::Csv {
                let summary = write_summary_json(&run.report, &run.meta, config.aggregate);
                write_file(&sidecar_path(path), &summary)?;
            }
        }
        None => stdout.write_all(&bytes).map_err(|source| EvalError::Write {
            path: PathBuf::from("<stdout>"),
            source,
        })?,
    }
    if let Some(path) = &config.emit_clean {
        write_file(path, &clean_jsonl(&run.clean))?;
    }
    Ok(())
}

/// `zscore align`: prints one utterance's alignment table.
pub fn align_command(args: &AlignArgs, stdout: &mut dyn Write) -> Result<(), EvalError> {
    let (refs, hyps) = load_inputs(&args.input)?;
    let utt = refs
        .into_iter()
        .find(|u| u.id() == args.id)
        .ok_or_else(|| EvalError::UnknownId(args.id.clone()))?;
    let hyp = hyps
        .into_iter()
        .find(|h| h.id == args.id)
        .ok_or_else(|| EvalError::UnmatchedIds {
            missing_hyp: vec![args.id.clone()],
            unknown_hyp: Vec::new(),
        })?;
    let table = crate::align::align(&utt, &hyp, &align_config(&args.input))?;
    let text = if args.json {
        let mut s = serde_json::to_string_pretty(&table).expect("table serializes");
        s.push('\n');
        s
    } else {
        render_alignment(&table)
    };
    stdout.write_all(text.as_bytes()).map_err(|source| EvalError::Write {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

#[derive(Serialize)]
struct RefRecord<'a> {
    id: &'a str,
    tokens: &'a TokenSeq,
    tags: Vec<&'static str>,
}

/// `zscore extract`: treebank trees to reference JSONL.
pub fn extract_command(args: &ExtractArgs, stdout: &mut dyn Write) -> Result<(), EvalError> {
    let src = read_file(&args.reference)?;
    let prefix = args
        .reference
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let utts = read_ptb_ref(&src, &prefix).map_err(|e| EvalError::Ingest {
        path: args.reference.clone(),
        source: e.into(),
    })?;
    let mut out = Vec::new();
    for u in &utts {
        let rec = RefRecord {
            id: u.id(),
            tokens: u.tokens(),
            tags: u.tags().iter().map(|t| t.as_str()).collect(),
        };
        serde_json::to_writer(&mut out, &rec).expect("record serializes");
        out.push(b'\n');
    }
    match &args.out {
        Some(path) => write_file(path, &out),
        None => stdout.write_all(&out).map_err(|source| EvalError::Write {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

/// Dispatches a parsed command line. Returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let mut stdout = std::io::stdout().lock();
    let result = match &cli.command {
        Command::Eval(args) => eval_command(args, &mut stdout),
        Command::Align(args) => align_command(args, &mut stdout),
        Command::Extract(args) => extract_command(args, &mut stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("zscore: {}", error_listing(&e));
            e.exit_code()
        }
    }
}

/// Multi-line rendering for errors that carry lists.
pub fn error_listing(e: &EvalError) -> String {
    match e {
        EvalError::Ingest {
            path,
            source: IngestError::Records(records),
        } => {
            let mut s = format!("{}: {} invalid record(s)", path.display(), records.len());
            for r in records {
                s.push_str(&format!("\n  {r}"));
            }
            s
        }
        EvalError::UnmatchedIds {
            missing_hyp,
            unknown_hyp,
        } => {
            let mut groups = BTreeMap::new();
            groups.insert("missing hypothesis", missing_hyp);
            groups.insert("unknown hypothesis id", unknown_hyp);
            let mut s = String::from("reference and hypothesis ids do not match");
            for (label, ids) in groups {
                for id in ids {
                    s.push_str(&format!("\n  {label}: {id}"));
                }
            }
            s
        }
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::DisfluencyTag;

    fn utt(id: &str) -> TaggedUtterance {
        TaggedUtterance::from_pairs(id, [("a", DisfluencyTag::None)])
    }

    fn hyp(id: &str) -> Hypothesis {
        Hypothesis::new(id, TokenSeq::new(["a"]))
    }

    #[test]
    fn join_reports_both_directions() {
        let err = join(vec![utt("a"), utt("b")], vec![hyp("c"), hyp("d")], false).unwrap_err();
        let EvalError::UnmatchedIds {
            missing_hyp,
            unknown_hyp,
        } = &err
        else {
            panic!()
        };
        assert_eq!(missing_hyp, &["a", "b"]);
        assert_eq!(unknown_hyp, &["c", "d"]);
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn join_allow_missing_substitutes_empty() {
        let pairs = join(vec![utt("a"), utt("b")], vec![hyp("a")], true).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!(pairs[1].1.tokens.is_empty());
        assert!(join(vec![utt("a")], vec![hyp("a"), hyp("z")], true).is_err());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(
            sidecar_path(Path::new("out/r.csv")),
            PathBuf::from("out/r.csv.summary.json")
        );
    }

    #[test]
    fn clean_output_format() {
        let bytes = clean_jsonl(&[("u1".into(), TokenSeq::new(["i", "mean"]))]);
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "{\"id\":\"u1\",\"tokens\":[\"i\",\"mean\"]}\n"
        );
    }

    #[test]
    fn cli_parses_full_flag_set() {
        let cli = Cli::try_parse_from([
            "zscore",
            "eval",
            "--ref",
            "r.mrg",
            "--ref-format",
            "ptb",
            "--hyp",
            "h.jsonl",
            "--hyp-mode",
            "tokens",
            "--separator",
            "|",
            "--case",
            "insensitive",
            "--aggregate",
            "micro",
            "--format",
            "csv",
            "--out",
            "o.csv",
            "--emit-clean",
            "c.jsonl",
            "--allow-missing-hyp",
            "--exclude-punct",
        ])
        .unwrap();
        let Command::Eval(args) = cli.command else { panic!() };
        assert_eq!(args.input.ref_format, RefFormat::Ptb);
        assert_eq!(args.input.hyp_mode, HypModeArg::Tokens);
        assert_eq!(args.input.case, CaseArg::Insensitive);
        assert_eq!(args.aggregate, AggregateMode::Micro);
        assert_eq!(args.format, OutputFormat::Csv);
        assert!(args.allow_missing_hyp && args.input.exclude_punct);

        let cli = Cli::try_parse_from(["zscore", "align", "--ref", "r", "--hyp", "h", "--id", "u1"]).unwrap();
        let Command::Align(args) = cli.command else { panic!() };
        assert_eq!(args.input.separator, "§");
    }
}
