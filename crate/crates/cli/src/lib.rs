//! The `forge` command line: inject, validate, prompt, score, report and stats.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation failure, 3 I/O failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use forge_core::dataset::{dataset_stats, emit_jsonl, load_jsonl, validate_instance, BugInstance, DatasetError};
use forge_core::evalkit::{
    build_prompt, parse_response, score_instance, CommandOracle, ExecutionOracle, MetricRecord, ModelResponse,
    ReferenceOracle,
};
use forge_core::ingest::{apply_focus, discover_files, load_focus_sidecar, validate_manifest, FilterPolicy, RepoManifest};
use forge_core::mutators::{inject_file, Catalog, OperatorSpec};
use forge_core::report::{aggregate, render_table, Axis, BucketMode, TableFormat};
use forge_core::Language;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Validation(m) | CliError::Io(m) => m,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Write { .. } | DatasetError::Read { .. } => CliError::Io(e.to_string()),
            DatasetError::Json { .. } | DatasetError::Field { .. } => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "forge", version, about = "AST-guided bug injection and debugging-benchmark scoring")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discover sources, inject bugs, and write instances as JSONL.
    Inject(InjectArgs),
    /// Check every instance of a dataset; exits 2 on any failure.
    Validate(DatasetArgs),
    /// Write one prompt file per instance.
    Prompt(PromptArgs),
    /// Parse responses and write metric records as JSONL.
    Score(ScoreArgs),
    /// Aggregate metric records along analysis axes.
    Report(ReportArgs),
    /// Per-language sizes and per-category shares of a dataset.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct InjectArgs {
    /// Repository manifest (JSON); `root` is resolved against the manifest's directory.
    #[arg(long = "manifest", value_name = "FILE")]
    pub manifests: Vec<PathBuf>,
    /// Source directory to use without a manifest.
    #[arg(long, value_name = "DIR", conflicts_with = "manifests")]
    pub root: Option<PathBuf>,
    /// Repository name recorded for `--root`.
    #[arg(long, requires = "root")]
    pub repo: Option<String>,
    #[arg(long, short, value_name = "FILE")]
    pub out: PathBuf,
    #[arg(long, env = "FORGE_SEED")]
    pub seed: u64,
    /// Maximum instances per subtype per file.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub quota: u64,
    /// Restrict to a language (repeatable).
    #[arg(long = "lang", value_parser = parse_language)]
    pub langs: Vec<Language>,
    /// Restrict to an operator index 1-22 (repeatable).
    #[arg(long = "op", value_parser = clap::value_parser!(u8).range(1..=22))]
    pub ops: Vec<u8>,
    /// Focus sidecar: {"relative/path": [[start, end], ...]}.
    #[arg(long, value_name = "FILE")]
    pub focus: Option<PathBuf>,
    /// Worker threads; output does not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write skipped files, operators and sites as JSONL.
    #[arg(long, value_name = "FILE")]
    pub skip_log: Option<PathBuf>,
    /// Accept repositories that fail the manifest screening.
    #[arg(long)]
    pub no_filter: bool,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    #[arg(long, short, value_name = "FILE")]
    pub dataset: PathBuf,
}

#[derive(Debug, Args)]
pub struct PromptArgs {
    #[arg(long, short, value_name = "FILE")]
    pub dataset: PathBuf,
    #[arg(long, short, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long, short, value_name = "FILE")]
    pub dataset: PathBuf,
    /// Directory of `<instance id>.txt` responses; missing files score as empty answers.
    #[arg(long, short, value_name = "DIR")]
    pub responses: PathBuf,
    #[arg(long, short, value_name = "FILE")]
    pub out: PathBuf,
    /// Execution oracle `LANG=COMMAND ARGS...` (repeatable); `{file}` marks the patched file.
    #[arg(long = "oracle", value_name = "LANG=CMD")]
    pub oracles: Vec<String>,
    /// Pass@1 against the original file (patched file must equal it).
    #[arg(long, conflicts_with = "oracles")]
    pub reference_oracle: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, value_name = "FILE")]
    pub records: PathBuf,
    #[arg(long, short, value_name = "FILE")]
    pub dataset: PathBuf,
    /// Axis to report (repeatable); all axes when omitted.
    #[arg(long = "axis", value_parser = parse_axis)]
    pub axes: Vec<Axis>,
    #[arg(long, default_value = "markdown", value_parser = parse_format)]
    pub format: TableFormat,
    /// Write report.<axis>.md and report.<axis>.csv here instead of printing.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Token buckets hold every instance below their bound.
    #[arg(long)]
    pub cumulative: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long, short, value_name = "FILE")]
    pub dataset: PathBuf,
    /// markdown or json
    #[arg(long, default_value = "markdown")]
    pub format: String,
}

fn parse_language(s: &str) -> Result<Language, String> {
    s.parse().map_err(|e: forge_core::language::UnknownLanguage| e.to_string())
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<TableFormat, String> {
    s.parse()
}

/// Runs the command line; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Inject(a) => cmd_inject(&a, out, err),
        Command::Validate(a) => cmd_validate(&a, out, err),
        Command::Prompt(a) => cmd_prompt(&a, out),
        Command::Score(a) => cmd_score(&a, out, err),
        Command::Report(a) => cmd_report(&a, out),
        Command::Stats(a) => cmd_stats(&a, out),
    }
}

fn say(w: &mut dyn Write, text: impl AsRef<str>) {
    let _ = writeln!(w, "{}", text.as_ref());
}

fn create_writer(path: &Path) -> Result<BufWriter<fs::File>, CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn open_dataset(path: &Path) -> Result<Vec<BugInstance>, CliError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    load_jsonl(BufReader::new(file)).map_err(|e| match CliError::from(e) {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        CliError::Io(m) => CliError::Io(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn cmd_inject(a: &InjectArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let policy = FilterPolicy::default();
    let mut files = Vec::new();
    let mut file_skips: Vec<serde_json::Value> = Vec::new();

    let mut sources: Vec<(String, PathBuf)> = Vec::new();
    if let Some(root) = &a.root {
        let name = a.repo.clone().unwrap_or_else(|| {
            root.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "repo".into())
        });
        sources.push((name, root.clone()));
    } else if a.manifests.is_empty() {
        return Err(CliError::Usage("inject needs --manifest or --root".into()));
    }
    for path in &a.manifests {
        let manifest = RepoManifest::load(path).map_err(|e| match e {
            forge_core::ingest::IngestError::Io { .. } => CliError::Io(e.to_string()),
            other => CliError::Validation(format!("{}: {other}", path.display())),
        })?;
        let report = validate_manifest(&manifest, &policy)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        if !report.passed && !a.no_filter {
            for c in report.criteria.iter().filter(|c| !c.passed) {
                say(err, format!("skipping repository {}: {} ({})", manifest.name, c.criterion, c.detail));
                file_skips.push(serde_json::json!({
                    "repo": manifest.name, "reason": "repository_filtered",
                    "criterion": c.criterion, "detail": c.detail,
                }));
            }
            continue;
        }
        let base = path.parent().unwrap_or(Path::new("."));
        sources.push((manifest.name.clone(), base.join(&manifest.root)));
    }

    for (repo, root) in &sources {
        let discovery = discover_files(root, repo, &policy).map_err(|e| CliError::Io(e.to_string()))?;
        for s in &discovery.skipped {
            say(err, format!("skipping {repo}/{}: {}", s.path, s.reason));
            file_skips.push(serde_json::json!({"repo": repo, "relative_path": s.path, "reason": "file_skipped", "detail": s.reason}));
        }
        files.extend(discovery.files);
    }
    if !a.langs.is_empty() {
        files.retain(|f| a.langs.contains(&f.language));
    }
    if let Some(focus) = &a.focus {
        let map = load_focus_sidecar(focus).map_err(|e| match e {
            forge_core::ingest::IngestError::Io { .. } => CliError::Io(e.to_string()),
            other => CliError::Validation(other.to_string()),
        })?;
        apply_focus(&mut files, &map);
    }

    let catalog = Catalog::builtin();
    let ops: Vec<&OperatorSpec> = if a.ops.is_empty() {
        catalog.operators().iter().collect()
    } else {
        a.ops.iter().filter_map(|&i| catalog.get(i)).collect()
    };
    let quota = a.quota as usize;
    let seed = a.seed;
    let work = || -> Vec<_> {
        use rayon::prelude::*;
        files.par_iter().map(|f| inject_file(f, &ops, quota, seed)).collect()
    };
    let outcomes = match a.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?
            .install(work),
        None => work(),
    };

    let mut instances = Vec::new();
    let mut site_skips = Vec::new();
    for outcome in outcomes {
        instances.extend(outcome.instances);
        site_skips.extend(outcome.skips);
    }
    let mut sink = create_writer(&a.out)?;
    emit_jsonl(&instances, &mut sink)?;
    sink.flush().map_err(|e| io_err(&a.out, e))?;

    if let Some(path) = &a.skip_log {
        let mut log = create_writer(path)?;
        for v in &file_skips {
            writeln!(log, "{v}").map_err(|e| io_err(path, e))?;
        }
        for s in &site_skips {
            let line = serde_json::to_string(s).expect("skip records serialize");
            writeln!(log, "{line}").map_err(|e| io_err(path, e))?;
        }
        log.flush().map_err(|e| io_err(path, e))?;
    }

    let mut by_lang: BTreeMap<String, usize> = BTreeMap::new();
    let mut by_subtype: BTreeMap<u8, (String, usize)> = BTreeMap::new();
    for inst in &instances {
        *by_lang.entry(inst.language.name().to_string()).or_default() += 1;
        by_subtype.entry(inst.subtype_index).or_insert_with(|| (inst.subtype_name.clone(), 0)).1 += 1;
    }
    say(out, format!("{} instances from {} files -> {}", instances.len(), files.len(), a.out.display()));
    for (lang, n) in &by_lang {
        say(out, format!("  {lang:<12} {n}"));
    }
    for (index, (name, n)) in &by_subtype {
        say(out, format!("  {index:>2} {name:<26} {n}"));
    }
    if !file_skips.is_empty() {
        say(err, format!("{} repositories or files skipped", file_skips.len()));
    }
    Ok(EXIT_OK)
}

pub fn cmd_validate(a: &DatasetArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let text = fs::read_to_string(&a.dataset).map_err(|e| io_err(&a.dataset, e))?;
    let mut failures = 0usize;
    let mut total = 0usize;
    let mut adverse = 0usize;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        total += 1;
        let inst: BugInstance = match serde_json::from_str(line) {
            Ok(inst) => inst,
            Err(e) => {
                failures += 1;
                say(err, format!("line {}: unreadable instance: {e}", i + 1));
                continue;
            }
        };
        let outcome = validate_instance(&inst);
        if outcome.check("adverse_effect").is_some_and(|c| c.passed) {
            adverse += 1;
        }
        if !outcome.passed() {
            failures += 1;
            for c in outcome.checks.iter().filter(|c| !c.passed && !c.advisory) {
                say(err, format!("line {} ({}): {} failed: {}", i + 1, inst.id, c.name, c.detail));
            }
        }
    }
    say(out, format!("{total} instances, {} passed, {failures} failed", total - failures));
    if total > 0 {
        say(out, format!("advisory: {adverse} re-parse with an error node ({:.2}%)", 100.0 * adverse as f64 / total as f64));
    }
    Ok(if failures == 0 { EXIT_OK } else { EXIT_VALIDATION })
}

pub fn cmd_prompt(a: &PromptArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let instances = open_dataset(&a.dataset)?;
    fs::create_dir_all(&a.out).map_err(|e| io_err(&a.out, e))?;
    for inst in &instances {
        let bundle = build_prompt(inst, Catalog::builtin());
        let path = a.out.join(format!("{}.txt", inst.id));
        fs::write(&path, bundle.prompt_text).map_err(|e| io_err(&path, e))?;
    }
    say(out, format!("{} prompts -> {}", instances.len(), a.out.display()));
    Ok(EXIT_OK)
}

fn build_oracle(a: &ScoreArgs) -> Result<Option<Box<dyn ExecutionOracle>>, CliError> {
    if a.reference_oracle {
        return Ok(Some(Box::new(ReferenceOracle)));
    }
    if a.oracles.is_empty() {
        return Ok(None);
    }
    let mut oracle = CommandOracle::new();
    for spec in &a.oracles {
        let (lang, cmd) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--oracle {spec:?}: expected LANG=COMMAND")))?;
        let lang = parse_language(lang.trim()).map_err(|e| CliError::Usage(format!("--oracle: {e}")))?;
        let argv: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
        if argv.is_empty() {
            return Err(CliError::Usage(format!("--oracle {spec:?}: empty command")));
        }
        oracle.register(lang, argv);
    }
    Ok(Some(Box::new(oracle)))
}

pub fn cmd_score(a: &ScoreArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let instances = open_dataset(&a.dataset)?;
    if !a.responses.is_dir() {
        return Err(io_err(&a.responses, "not a directory"));
    }
    let oracle = build_oracle(a)?;
    let mut records: Vec<MetricRecord> = Vec::with_capacity(instances.len());
    let mut missing = 0usize;
    for inst in &instances {
        let path = a.responses.join(format!("{}.txt", inst.id));
        let resp = match fs::read_to_string(&path) {
            Ok(text) => parse_response(&text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                missing += 1;
                ModelResponse::empty()
            }
            Err(e) => return Err(io_err(&path, e)),
        };
        let record = score_instance(inst, &resp, oracle.as_deref());
        if let Some(e) = &record.oracle_error {
            say(err, format!("{}: oracle failed: {e}", inst.id));
        }
        records.push(record);
    }
    let mut sink = create_writer(&a.out)?;
    for r in &records {
        let line = serde_json::to_string(r).expect("records serialize");
        writeln!(sink, "{line}").map_err(|e| io_err(&a.out, e))?;
    }
    sink.flush().map_err(|e| io_err(&a.out, e))?;
    let failed = records.iter().filter(|r| r.parse_failed).count();
    say(out, format!("{} records -> {} ({missing} responses missing, {failed} unparseable)", records.len(), a.out.display()));
    Ok(EXIT_OK)
}

fn load_records(path: &Path) -> Result<Vec<MetricRecord>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| CliError::Validation(format!("{}: line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn cmd_report(a: &ReportArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let records = load_records(&a.records)?;
    let instances = open_dataset(&a.dataset)?;
    let axes = if a.axes.is_empty() { Axis::ALL.to_vec() } else { a.axes.clone() };
    let mode = if a.cumulative { BucketMode::Cumulative } else { BucketMode::Disjoint };
    for axis in axes {
        let rows = aggregate(&records, &instances, axis, mode).map_err(|e| CliError::Validation(e.to_string()))?;
        match &a.out_dir {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
                for format in [TableFormat::Markdown, TableFormat::Csv] {
                    let path = dir.join(format!("report.{}.{}", axis.name(), format.extension()));
                    fs::write(&path, render_table(&rows, format)).map_err(|e| io_err(&path, e))?;
                }
            }
            None => {
                say(out, format!("## {axis}\n"));
                say(out, render_table(&rows, a.format));
            }
        }
    }
    if let Some(dir) = &a.out_dir {
        say(out, format!("reports -> {}", dir.display()));
    }
    Ok(EXIT_OK)
}

pub fn cmd_stats(a: &StatsArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let instances = open_dataset(&a.dataset)?;
    let table = dataset_stats(&instances);
    match a.format.as_str() {
        "json" => say(out, serde_json::to_string_pretty(&table).expect("stats serialize")),
        "markdown" | "md" => say(out, table.to_markdown()),
        other => return Err(CliError::Usage(format!("unknown stats format {other:?}"))),
    }
    Ok(EXIT_OK)
}
