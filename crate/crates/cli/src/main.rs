//! `disamb`: audit a bibliometric corpus for the career-independence anomaly.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O or configuration, 3 parse-error
//! budget exceeded, 4 gender column required but missing.

mod manifest;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use disamb_core::career_metrics::{
    build_report, tti_distribution, windowed_anomaly_rate, write_histogram, write_report,
    AffiliationBasis, MetricConfig, Stratum,
};
use disamb_core::continent::ContinentMap;
use disamb_core::corpus_model::{FilterConfig, WorkRecord};
use disamb_core::gender::{annotate, GenderDictionary, Thresholds};
use disamb_core::ingest::{AuthorCareer, IngestSummary, Ingestor, LineSource};
use disamb_core::oracle::{oracle_report, OracleInputs};
use disamb_core::synth::{corpus_jsonl, generate, inject_splits, GroundTruth, SplitSpec, SynthConfig};
use disamb_core::table::{careers_tsv, read_careers, write_careers};
use disamb_core::Error;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde_json::json;

use manifest::RunManifest;

const REPORT_FILE: &str = "cohort_report.csv";
const HISTOGRAM_FILE: &str = "tti_histogram.csv";
const CAREERS_FILE: &str = "careers.tsv";
const MANIFEST_FILE: &str = "manifest.json";

#[derive(Parser, Debug)]
#[command(name = "disamb", version, about = "Career-independence anomaly auditor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the career table from JSON Lines shards (.jsonl or .jsonl.gz).
    Ingest(IngestArgs),
    /// Fill the gender column of a career table.
    Gender(GenderArgs),
    /// Cohort anomaly report and time-to-independence histogram.
    Report(ReportArgs),
    /// Generate a synthetic corpus and its ground truth.
    Synth(SynthArgs),
    /// Ingest, optionally annotate gender, and report in one run.
    Audit(AuditArgs),
    /// Naive in-memory reference outputs, for small corpora.
    Oracle(OracleArgs),
}

#[derive(Args, Debug, Clone)]
struct FilterArgs {
    /// Comma-separated level-0 concept ids defining the field.
    #[arg(long, value_delimiter = ',', default_values_t = [String::from("C86803240"), String::from("C71924100")])]
    concepts: Vec<String>,
    /// Accept biomedical concepts at any level.
    #[arg(long)]
    any_concept_level: bool,
    /// Do not treat the single author of a work as its last author.
    #[arg(long)]
    no_solo_last: bool,
    /// Careers debuting in or before this year are dropped.
    #[arg(long, default_value_t = 1999)]
    min_debut_year_exclusive: i32,
    /// Two-column country_code,continent CSV replacing the built-in table.
    #[arg(long)]
    continent_map: Option<PathBuf>,
    #[arg(long, default_value_t = default_threads())]
    threads: usize,
    /// Largest tolerated fraction of unparseable lines.
    #[arg(long, default_value_t = 0.01)]
    max_error_rate: f64,
}

#[derive(Args, Debug, Clone)]
struct MetricArgs {
    #[arg(long, default_value_t = 5)]
    window: u32,
    #[arg(long, default_value_t = 2000)]
    cohort_start: i32,
    #[arg(long, default_value_t = 2018)]
    cohort_end: i32,
    /// Comma-separated: all, affiliation, orcid, gender, continent-gender.
    #[arg(long, value_delimiter = ',', default_values_t = [String::from("all"), String::from("affiliation"), String::from("orcid")])]
    strata: Vec<String>,
    /// Count an author as affiliated on any institution, not only one with a country.
    #[arg(long)]
    affiliation_any_institution: bool,
}

#[derive(Args, Debug, Clone)]
struct GenderDictArgs {
    #[arg(long, env = "DISAMB_GENDER_DICT")]
    gender_dict: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    male_max: f64,
    #[arg(long, default_value_t = 0.8)]
    female_min: f64,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, short)]
    out: PathBuf,
    /// Defaults to `<out>.manifest.json`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    filter: FilterArgs,
}

#[derive(Args, Debug)]
struct GenderArgs {
    table: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    dict: GenderDictArgs,
}

#[derive(Args, Debug)]
struct ReportArgs {
    table: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    metrics: MetricArgs,
}

#[derive(Args, Debug, Clone)]
struct SynthModelArgs {
    #[arg(long, default_value_t = 1000)]
    n_authors: u64,
    #[arg(long, default_value_t = 0.0)]
    split_rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = SynthConfig::default().debut_first)]
    debut_first: i32,
    #[arg(long, default_value_t = SynthConfig::default().debut_last)]
    debut_last: i32,
    #[arg(long, default_value_t = SynthConfig::default().horizon_year)]
    horizon_year: i32,
    #[arg(long, default_value_t = 8.0)]
    training_mean_years: f64,
    #[arg(long, default_value_t = 2.0)]
    papers_per_year: f64,
    #[arg(long, default_value_t = 0.3)]
    pi_fraction: f64,
    #[arg(long, default_value_t = 0.01)]
    immediate_pi_rate: f64,
    #[arg(long, default_value_t = 0.8)]
    pi_last_author_share: f64,
    #[arg(long, default_value_t = 0.6)]
    affiliation_rate: f64,
    #[arg(long, default_value_t = 0.3)]
    orcid_rate: f64,
}

impl SynthModelArgs {
    fn config(&self) -> SynthConfig {
        SynthConfig {
            n_authors: self.n_authors,
            debut_first: self.debut_first,
            debut_last: self.debut_last,
            horizon_year: self.horizon_year,
            training_mean_years: self.training_mean_years,
            papers_per_year: self.papers_per_year,
            pi_fraction: self.pi_fraction,
            immediate_pi_rate: self.immediate_pi_rate,
            pi_last_author_share: self.pi_last_author_share,
            affiliation_presence_rate: self.affiliation_rate,
            orcid_presence_rate: self.orcid_rate,
            seed: self.seed,
        }
    }
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Corpus path; a `.gz` suffix writes gzip.
    #[arg(long, short)]
    out: PathBuf,
    /// Ground-truth TSV path.
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    model: SynthModelArgs,
}

#[derive(Args, Debug)]
struct AuditArgs {
    inputs: Vec<PathBuf>,
    /// Audit a freshly generated corpus instead of input files.
    #[arg(long, conflicts_with = "inputs")]
    synth: bool,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    filter: FilterArgs,
    #[command(flatten)]
    metrics: MetricArgs,
    #[command(flatten)]
    dict: GenderDictArgs,
    #[command(flatten)]
    model: SynthModelArgs,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    filter: FilterArgs,
    #[command(flatten)]
    metrics: MetricArgs,
    #[command(flatten)]
    dict: GenderDictArgs,
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// A failed command and the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    fn config(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::MissingGender => 4,
            _ => 2,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self { code: 2, message: e.to_string() }
    }
}

type CmdResult<T = ()> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Gender(a) => cmd_gender(a),
        Command::Report(a) => cmd_report(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Audit(a) => cmd_audit(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("disamb: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn filter_config(args: &FilterArgs) -> CmdResult<FilterConfig> {
    if !(0.0..=1.0).contains(&args.max_error_rate) {
        return Err(Failure::config(format!(
            "--max-error-rate must be in [0, 1], got {}",
            args.max_error_rate
        )));
    }
    let cfg = FilterConfig {
        require_level_zero: !args.any_concept_level,
        solo_counts_as_last: !args.no_solo_last,
        min_debut_year_exclusive: args.min_debut_year_exclusive,
        ..FilterConfig::default()
    };
    Ok(cfg.with_concepts(args.concepts.iter().filter(|c| !c.trim().is_empty()))?)
}

fn continent_map(args: &FilterArgs) -> CmdResult<ContinentMap> {
    Ok(match &args.continent_map {
        Some(p) => ContinentMap::load(p)?,
        None => ContinentMap::builtin(),
    })
}

fn metric_config(args: &MetricArgs) -> CmdResult<MetricConfig> {
    let mut strata = std::collections::BTreeSet::new();
    for name in &args.strata {
        let s = Stratum::parse(name.trim())
            .ok_or_else(|| Failure::usage(format!("unknown stratum {name:?}")))?;
        strata.insert(s);
    }
    let cfg = MetricConfig {
        window_years: args.window,
        cohort_start: args.cohort_start,
        cohort_end: args.cohort_end,
        strata,
        affiliation_basis: if args.affiliation_any_institution {
            AffiliationBasis::AnyInstitution
        } else {
            AffiliationBasis::CountryCode
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn load_dictionary(args: &GenderDictArgs) -> CmdResult<Option<(GenderDictionary, Thresholds)>> {
    let Some(path) = &args.gender_dict else {
        return Ok(None);
    };
    let t = Thresholds::new(args.male_max, args.female_min)?;
    let dict = GenderDictionary::load(path)?;
    if !dict.rejected.is_empty() {
        eprintln!(
            "disamb: {} dictionary rows rejected (first at line {})",
            dict.rejected.len(),
            dict.rejected[0].line
        );
    }
    Ok(Some((dict, t)))
}

fn filter_snapshot(f: &FilterArgs, cfg: &FilterConfig) -> serde_json::Value {
    json!({
        "concepts": cfg.biomedical_concepts,
        "require_level_zero": cfg.require_level_zero,
        "solo_counts_as_last": cfg.solo_counts_as_last,
        "min_debut_year_exclusive": cfg.min_debut_year_exclusive,
        "continent_map": f.continent_map,
        "threads": f.threads,
        "max_error_rate": f.max_error_rate,
    })
}

fn metric_snapshot(m: &MetricConfig) -> serde_json::Value {
    json!({
        "window": m.window_years,
        "cohort_start": m.cohort_start,
        "cohort_end": m.cohort_end,
        "strata": m.strata.iter().map(|s| s.name()).collect::<Vec<_>>(),
        "affiliation_basis": match m.affiliation_basis {
            AffiliationBasis::CountryCode => "country-code",
            AffiliationBasis::AnyInstitution => "any-institution",
        },
    })
}

fn dict_snapshot(d: &GenderDictArgs) -> serde_json::Value {
    json!({
        "gender_dict": d.gender_dict,
        "male_max": d.male_max,
        "female_min": d.female_min,
    })
}

fn synth_snapshot(cfg: &SynthConfig, split_rate: f64) -> serde_json::Value {
    json!({
        "n_authors": cfg.n_authors,
        "split_rate": split_rate,
        "seed": cfg.seed,
        "debut_first": cfg.debut_first,
        "debut_last": cfg.debut_last,
        "horizon_year": cfg.horizon_year,
        "training_mean_years": cfg.training_mean_years,
        "papers_per_year": cfg.papers_per_year,
        "pi_fraction": cfg.pi_fraction,
        "immediate_pi_rate": cfg.immediate_pi_rate,
        "pi_last_author_share": cfg.pi_last_author_share,
        "affiliation_presence_rate": cfg.affiliation_presence_rate,
        "orcid_presence_rate": cfg.orcid_presence_rate,
    })
}

fn manifest_path(explicit: &Option<PathBuf>, out: &Path) -> PathBuf {
    explicit.clone().unwrap_or_else(|| {
        let mut s = out.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    })
}

fn ensure_dir(dir: &Path) -> CmdResult {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::config(format!("cannot create {}: {e}", dir.display())))
}

fn create(path: &Path) -> CmdResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::config(format!("cannot create {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

/// Runs both ingest passes, enforcing the parse-error budget after pass A.
fn run_ingest(
    sources: &[LineSource],
    filter: &FilterConfig,
    args: &FilterArgs,
) -> CmdResult<(Vec<AuthorCareer>, IngestSummary)> {
    let continents = continent_map(args)?;
    let budget = args.max_error_rate;
    let mut over_budget = None;
    let run = Ingestor::new(filter.clone(), args.threads).run(sources, &continents, |stats| {
        let rate = stats.parse_error_rate();
        if rate > budget {
            let first = stats
                .error_samples
                .first()
                .map(|d| {
                    format!(
                        "; first at {}:{}: {}",
                        sources[d.source].display_path().display(),
                        d.line,
                        d.message
                    )
                })
                .unwrap_or_default();
            over_budget = Some(format!(
                "{} of {} lines failed to parse ({rate:.4} > {budget}){first}",
                stats.parse_errors, stats.lines_read
            ));
            return Err(Error::Config("parse-error budget exceeded".into()));
        }
        Ok(())
    });
    match run {
        Ok((finalized, summary)) => {
            eprintln!(
                "disamb: {} lines, {} parse errors, {} careers",
                summary.pass_a.lines_read, summary.pass_a.parse_errors, summary.careers_emitted
            );
            Ok((finalized.careers, summary))
        }
        Err(_) if over_budget.is_some() => Err(Failure {
            code: 3,
            message: over_budget.unwrap_or_default(),
        }),
        Err(e) => Err(e.into()),
    }
}

fn file_sources(inputs: &[PathBuf]) -> Vec<LineSource> {
    inputs.iter().cloned().map(LineSource::Path).collect()
}

fn cmd_ingest(a: IngestArgs) -> CmdResult {
    let started = Instant::now();
    let filter = filter_config(&a.filter)?;
    let mut manifest = RunManifest::new("ingest", json!({ "filter": filter_snapshot(&a.filter, &filter) }));
    manifest.add_inputs(&a.inputs)?;
    let (careers, summary) = run_ingest(&file_sources(&a.inputs), &filter, &a.filter)?;
    write_careers(&a.out, &careers)?;
    manifest.set_ingest(&summary);
    manifest.outputs.push(a.out.clone());
    manifest.finish(started, &manifest_path(&a.manifest, &a.out))
}

fn cmd_gender(a: GenderArgs) -> CmdResult {
    let started = Instant::now();
    let Some((dict, t)) = load_dictionary(&a.dict)? else {
        return Err(Failure::config("no gender dictionary: pass --gender-dict or set DISAMB_GENDER_DICT"));
    };
    let mut manifest = RunManifest::new("gender", json!({ "gender": dict_snapshot(&a.dict) }));
    manifest.add_inputs(std::slice::from_ref(&a.table))?;
    let mut careers = read_careers(&a.table)?;
    annotate(&mut careers, &dict, &t);
    write_careers(&a.out, &careers)?;
    manifest.counts.insert("careers".into(), careers.len() as u64);
    manifest.counts.insert("dictionary_entries".into(), dict.len() as u64);
    manifest.counts.insert("dictionary_rows_rejected".into(), dict.rejected.len() as u64);
    manifest.outputs.push(a.out.clone());
    manifest.finish(started, &manifest_path(&a.manifest, &a.out))
}

fn write_reports(careers: &[AuthorCareer], cfg: &MetricConfig, dir: &Path) -> CmdResult<Vec<PathBuf>> {
    let rows = build_report(careers, cfg)?;
    let dist = tti_distribution(careers);
    ensure_dir(dir)?;
    let report_path = dir.join(REPORT_FILE);
    let hist_path = dir.join(HISTOGRAM_FILE);
    let mut w = create(&report_path)?;
    write_report(&mut w, &rows)?;
    w.flush()?;
    let mut w = create(&hist_path)?;
    write_histogram(&mut w, &dist)?;
    w.flush()?;
    Ok(vec![report_path, hist_path])
}

fn cmd_report(a: ReportArgs) -> CmdResult {
    let started = Instant::now();
    let cfg = metric_config(&a.metrics)?;
    let mut manifest = RunManifest::new("report", json!({ "metrics": metric_snapshot(&cfg) }));
    manifest.add_inputs(std::slice::from_ref(&a.table))?;
    let careers = read_careers(&a.table)?;
    manifest.outputs = write_reports(&careers, &cfg, &a.out_dir)?;
    manifest.counts.insert("careers".into(), careers.len() as u64);
    manifest.finish(started, &a.manifest.unwrap_or_else(|| a.out_dir.join(MANIFEST_FILE)))
}

fn synthesize(model: &SynthModelArgs) -> CmdResult<(Vec<WorkRecord>, GroundTruth, SynthConfig)> {
    let cfg = model.config();
    let spec = SplitSpec::new(model.split_rate)?;
    let (corpus, truth) = generate(&cfg)?;
    let (corpus, truth) = inject_splits(&corpus, &truth, spec, cfg.seed);
    Ok((corpus, truth, cfg))
}

fn cmd_synth(a: SynthArgs) -> CmdResult {
    let started = Instant::now();
    let (corpus, truth, cfg) = synthesize(&a.model)?;
    let text = corpus_jsonl(&corpus);
    let gz = a.out.extension().is_some_and(|e| e == "gz");
    let mut w = create(&a.out)?;
    if gz {
        let mut enc = GzEncoder::new(&mut w, Compression::default());
        enc.write_all(text.as_bytes())?;
        enc.finish()?;
    } else {
        w.write_all(text.as_bytes())?;
    }
    w.flush()?;
    write_text(&a.truth, &truth.to_tsv())?;

    let mut manifest = RunManifest::new("synth", json!({ "synth": synth_snapshot(&cfg, a.model.split_rate) }));
    manifest.counts.insert("works".into(), corpus.len() as u64);
    manifest.counts.insert("true_authors".into(), truth.authors.len() as u64);
    manifest.counts.insert("emitted_authors".into(), truth.n_emitted() as u64);
    manifest.counts.insert("splits".into(), truth.n_splits() as u64);
    manifest.outputs = vec![a.out.clone(), a.truth.clone()];
    manifest.finish(started, &manifest_path(&a.manifest, &a.out))
}

fn cmd_audit(a: AuditArgs) -> CmdResult {
    let started = Instant::now();
    if a.inputs.is_empty() && !a.synth {
        return Err(Failure::usage("audit needs input files or --synth"));
    }
    let filter = filter_config(&a.filter)?;
    let metrics = metric_config(&a.metrics)?;
    let dict = load_dictionary(&a.dict)?;
    if dict.is_none() && metrics.strata.iter().any(|s| s.needs_gender()) {
        return Err(Failure {
            code: 4,
            message: "gender strata requested without a gender dictionary".into(),
        });
    }
    let mut config = json!({
        "filter": filter_snapshot(&a.filter, &filter),
        "metrics": metric_snapshot(&metrics),
        "gender": dict_snapshot(&a.dict),
    });
    let mut manifest;
    let sources = if a.synth {
        let (corpus, truth, cfg) = synthesize(&a.model)?;
        config["synth"] = synth_snapshot(&cfg, a.model.split_rate);
        manifest = RunManifest::new("audit", config);
        manifest.counts.insert("synthetic_splits".into(), truth.n_splits() as u64);
        vec![LineSource::memory("synthetic", corpus_jsonl(&corpus).into_bytes())]
    } else {
        manifest = RunManifest::new("audit", config);
        manifest.add_inputs(&a.inputs)?;
        file_sources(&a.inputs)
    };

    let (mut careers, summary) = run_ingest(&sources, &filter, &a.filter)?;
    if let Some((dict, t)) = &dict {
        annotate(&mut careers, dict, t);
    }
    ensure_dir(&a.out_dir)?;
    let careers_path = a.out_dir.join(CAREERS_FILE);
    write_careers(&careers_path, &careers)?;
    manifest.outputs.push(careers_path);
    manifest.outputs.extend(write_reports(&careers, &metrics, &a.out_dir)?);
    manifest.set_ingest(&summary);

    let pooled = windowed_anomaly_rate(&careers, &metrics);
    let share = tti_distribution(&careers).pooled;
    let fmt = |r: Option<f64>| r.map_or_else(|| "n/a".to_string(), |r| format!("{:.2}%", 100.0 * r));
    println!(
        "debut-year anomaly rate (W={}, cohorts {}-{}): {} ({} of {} independent within window)",
        metrics.window_years,
        metrics.cohort_start,
        metrics.cohort_end,
        fmt(pooled.anomaly_rate()),
        pooled.n_anomalous,
        pooled.n_independent_within_window
    );
    println!(
        "share of independent authors with last authorship in debut year: {} ({} of {})",
        fmt(share.debut_year_share()),
        share.counts.get(&0).copied().unwrap_or(0),
        share.independent()
    );
    manifest.headline = Some(json!({
        "n_anomalous": pooled.n_anomalous,
        "n_independent_within_window": pooled.n_independent_within_window,
        "anomaly_rate": pooled.anomaly_rate(),
        "debut_year_share": share.debut_year_share(),
    }));
    manifest.finish(started, &a.out_dir.join(MANIFEST_FILE))
}

fn cmd_oracle(a: OracleArgs) -> CmdResult {
    let started = Instant::now();
    let filter = filter_config(&a.filter)?;
    let metrics = metric_config(&a.metrics)?;
    let continents = continent_map(&a.filter)?;
    let dict = load_dictionary(&a.dict)?;
    let mut manifest = RunManifest::new(
        "oracle",
        json!({
            "filter": filter_snapshot(&a.filter, &filter),
            "metrics": metric_snapshot(&metrics),
            "gender": dict_snapshot(&a.dict),
        }),
    );
    manifest.add_inputs(&a.inputs)?;

    let mut data = Vec::new();
    for source in file_sources(&a.inputs) {
        let mut r = source.open()?;
        std::io::Read::read_to_end(&mut r, &mut data)
            .map_err(|e| Failure::config(format!("{}: {e}", source.display_path().display())))?;
        if data.last().is_some_and(|&b| b != b'\n') {
            data.push(b'\n');
        }
    }
    let mut invalid_utf8 = 0;
    let lines: Vec<&str> = data
        .split(|&b| b == b'\n')
        .filter_map(|l| {
            let s = std::str::from_utf8(l).ok();
            invalid_utf8 += u64::from(s.is_none());
            s
        })
        .collect();
    let inputs = OracleInputs {
        filter: &filter,
        metrics: &metrics,
        continents: &continents,
        gender: dict.as_ref().map(|(d, t)| (d, t)),
    };
    let mut out = oracle_report(lines, &inputs)?;
    out.parse_errors += invalid_utf8;

    ensure_dir(&a.out_dir)?;
    let careers_path = a.out_dir.join(CAREERS_FILE);
    write_text(&careers_path, &careers_tsv(&out.careers))?;
    let report_path = a.out_dir.join(REPORT_FILE);
    let mut w = create(&report_path)?;
    write_report(&mut w, &out.report)?;
    w.flush()?;
    let hist_path = a.out_dir.join(HISTOGRAM_FILE);
    let mut w = create(&hist_path)?;
    write_histogram(&mut w, &out.histogram)?;
    w.flush()?;
    manifest.outputs = vec![careers_path, report_path, hist_path];
    manifest.counts.insert("parse_errors".into(), out.parse_errors);
    manifest.counts.insert("careers".into(), out.careers.len() as u64);
    manifest.finish(started, &a.out_dir.join(MANIFEST_FILE))
}
