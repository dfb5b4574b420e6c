//! The `cbf` command-line tool.
//!
//! Every input line (one trailing `\n` stripped, empty lines skipped) is one
//! element. Ensembles of `N` filters use seeds `seed..seed+N` and are written
//! as `<stem>.0.cbf` … `<stem>.N-1.cbf`.
//!
//! Exit codes: 0 on success or "maybe-present", 1 for a definitive "absent"
//! or a violated underestimation check, 2 for usage and I/O errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::entropy::{self, LogBase, SampleHistogram, ValueGroup};
use crate::filter::{CountingBloomFilter, FilterConfig, FilterStats};
use crate::format;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Gap below which `compare` reports an underestimation violation.
pub const GAP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "cbf", version, about = "Counting Bloom filter entropy estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Logarithm base for entropy values.
    #[arg(long, global = true, value_enum, default_value = "2")]
    pub log_base: Base,

    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: OutputFormat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build filter file(s) from a text corpus.
    Build {
        /// Input file; standard input when omitted or "-".
        input: Option<PathBuf>,
        #[command(flatten)]
        filter: FilterArgs,
        /// Output path stem; files are written as <stem>.<i>.cbf.
        #[arg(long, default_value = "filter")]
        output: PathBuf,
    },
    /// Estimate entropy from filter files or an ensemble stem.
    Entropy {
        #[arg(required = true)]
        filters: Vec<PathBuf>,
    },
    /// Exact plugin entropy of a text corpus.
    Exact { input: Option<PathBuf> },
    /// Compare filter estimates against the exact entropy of a corpus.
    Compare {
        input: Option<PathBuf>,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Report whether the counters prove a collision.
    Collisions { filter: PathBuf },
    /// Membership query.
    Query { filter: PathBuf, element: String },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct FilterArgs {
    /// Number of counter cells.
    #[arg(long, default_value_t = 1 << 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub size: u64,
    /// Number of hash functions.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    pub hashes: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of independently seeded filters.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub ensemble: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Base {
    #[value(name = "2")]
    Two,
    #[value(name = "e")]
    E,
    #[value(name = "10")]
    Ten,
}

impl From<Base> for LogBase {
    fn from(b: Base) -> Self {
        match b {
            Base::Two => LogBase::BITS,
            Base::E => LogBase::NATS,
            Base::Ten => LogBase::DITS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: crate::Error },
    #[error(transparent)]
    Core(#[from] crate::Error),
    #[error("input contains no elements")]
    EmptyInput,
    #[error("line {line}: counter overflow at cell {cell} in filter with seed {seed}")]
    Overflow { line: usize, cell: usize, seed: u64 },
    #[error("{path}: size/hashes {got:?} differ from {expected:?}")]
    MixedConfigs { path: PathBuf, expected: (usize, u32), got: (usize, u32) },
    #[error("no filter file found at {0}")]
    NoFilters(PathBuf),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_ERROR
                }
            };
            return code;
        }
    };
    match execute(&cli, stdin, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn execute(cli: &Cli, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let base = LogBase::from(cli.log_base);
    let json = cli.format == OutputFormat::Json;
    match &cli.command {
        Command::Build { input, filter, output } => {
            let corpus = read_corpus(input.as_deref(), stdin, err)?;
            cmd_build(&corpus, filter, output, json, out)
        }
        Command::Entropy { filters } => cmd_entropy(filters, base, json, out),
        Command::Exact { input } => {
            let corpus = read_corpus(input.as_deref(), stdin, err)?;
            cmd_exact(&corpus, base, json, out)
        }
        Command::Compare { input, filter } => {
            let corpus = read_corpus(input.as_deref(), stdin, err)?;
            cmd_compare(&corpus, filter, base, json, out, err)
        }
        Command::Collisions { filter } => cmd_collisions(filter, json, out),
        Command::Query { filter, element } => cmd_query(filter, element.as_bytes(), json, out),
    }
}

/// Elements with their 1-based line numbers.
#[derive(Debug, Default)]
pub struct Corpus {
    pub lines: Vec<(usize, Vec<u8>)>,
    pub skipped_empty: usize,
}

impl Corpus {
    pub fn from_reader<R: BufRead>(mut reader: R) -> std::io::Result<Self> {
        let mut corpus = Corpus::default();
        let mut buf = Vec::new();
        let mut line = 0;
        loop {
            buf.clear();
            if reader.read_until(b'\n', &mut buf)? == 0 {
                break;
            }
            line += 1;
            if buf.last() == Some(&b'\n') {
                buf.pop();
            }
            if buf.is_empty() {
                corpus.skipped_empty += 1;
            } else {
                corpus.lines.push((line, buf.clone()));
            }
        }
        Ok(corpus)
    }

    pub fn histogram(&self) -> SampleHistogram {
        self.lines.iter().map(|(_, e)| e).collect()
    }
}

fn read_corpus(input: Option<&Path>, stdin: &mut dyn BufRead, err: &mut dyn Write) -> CliResult<Corpus> {
    let corpus = match input {
        Some(p) if p != Path::new("-") => {
            let file =
                File::open(p).map_err(|e| CliError::File { path: p.to_path_buf(), source: e.into() })?;
            Corpus::from_reader(BufReader::new(file))?
        }
        _ => Corpus::from_reader(stdin)?,
    };
    if corpus.skipped_empty > 0 {
        writeln!(err, "warning: skipped {} empty line(s)", corpus.skipped_empty)?;
    }
    if corpus.lines.is_empty() {
        return Err(CliError::EmptyInput);
    }
    Ok(corpus)
}

/// Builds the `ensemble` filters over `corpus`, in seed order.
pub fn build_filters(corpus: &Corpus, args: &FilterArgs) -> CliResult<Vec<CountingBloomFilter>> {
    let size =
        usize::try_from(args.size).map_err(|_| crate::Error::InvalidConfig("size does not fit in memory"))?;
    let base = FilterConfig::new(size, args.hashes, args.seed)?;
    (0..args.ensemble)
        .map(|i| {
            let seed = args.seed.wrapping_add(i);
            let mut f = CountingBloomFilter::new(base.with_seed(seed))?;
            for (line, element) in &corpus.lines {
                f.insert(element).map_err(|e| match e {
                    crate::Error::CounterOverflow { cell } => CliError::Overflow { line: *line, cell, seed },
                    other => other.into(),
                })?;
            }
            Ok(f)
        })
        .collect()
}

/// `<stem>.<index>.cbf`
pub fn member_path(stem: &Path, index: u64) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(format!(".{index}.cbf"));
    PathBuf::from(s)
}

/// Rounds to 12 significant digits for reporting.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    serde_json::to_writer(&mut *out, value).map_err(crate::Error::from)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct BuiltFilter {
    path: String,
    seed: u64,
    #[serde(flatten)]
    stats: FilterStats,
}

fn cmd_build(
    corpus: &Corpus,
    args: &FilterArgs,
    stem: &Path,
    json: bool,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let filters = build_filters(corpus, args)?;
    let mut built = Vec::with_capacity(filters.len());
    for (i, f) in (0u64..).zip(&filters) {
        let path = member_path(stem, i);
        let file =
            File::create(&path).map_err(|e| CliError::File { path: path.clone(), source: e.into() })?;
        format::save(f, BufWriter::new(file))
            .map_err(|e| CliError::File { path: path.clone(), source: e })?;
        built.push(BuiltFilter {
            path: path.display().to_string(),
            seed: f.config().seed(),
            stats: f.stats(),
        });
    }
    if json {
        write_json(out, &built)?;
    } else {
        for b in &built {
            writeln!(
                out,
                "{}: seed={} c={} sum={} nonzero={} max={}",
                b.path,
                b.seed,
                b.stats.inserted_count,
                b.stats.counter_sum,
                b.stats.nonzero_cells,
                b.stats.max_counter
            )?;
        }
    }
    Ok(EXIT_OK)
}

/// Expands an ensemble stem into its member files; plain files pass through.
fn resolve_filters(paths: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut resolved = Vec::new();
    for p in paths {
        if p.is_file() {
            resolved.push(p.clone());
            continue;
        }
        let members: Vec<PathBuf> = (0..).map(|i| member_path(p, i)).take_while(|m| m.is_file()).collect();
        if members.is_empty() {
            return Err(CliError::NoFilters(p.clone()));
        }
        resolved.extend(members);
    }
    Ok(resolved)
}

fn load_file(path: &Path) -> CliResult<CountingBloomFilter> {
    let file = File::open(path).map_err(|e| CliError::File { path: path.into(), source: e.into() })?;
    format::load(BufReader::new(file)).map_err(|e| CliError::File { path: path.into(), source: e })
}

#[derive(Debug, Serialize)]
struct MemberEntropy {
    path: String,
    seed: u64,
    uncorrected: f64,
    corrected: f64,
}

#[derive(Debug, Serialize)]
struct EnsembleReport {
    uncorrected: f64,
    corrected: f64,
    exact: Option<f64>,
    log_base: f64,
    m: u32,
    c: u64,
    ensemble_max: f64,
    per_filter: Vec<MemberEntropy>,
}

fn cmd_entropy(paths: &[PathBuf], base: LogBase, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let paths = resolve_filters(paths)?;
    let mut filters = Vec::with_capacity(paths.len());
    for p in &paths {
        let f = load_file(p)?;
        if let Some(first) = filters.first() {
            let shape = |f: &CountingBloomFilter| (f.config().size(), f.config().num_hashes());
            if shape(first) != shape(&f) {
                return Err(CliError::MixedConfigs {
                    path: p.clone(),
                    expected: shape(first),
                    got: shape(&f),
                });
            }
        }
        filters.push(f);
    }

    let mut reports = Vec::with_capacity(filters.len());
    for (p, f) in paths.iter().zip(&filters) {
        let r =
            entropy::filter_entropy(f, base).map_err(|e| CliError::File { path: p.clone(), source: e })?;
        reports.push(r);
    }
    let ensemble_max = entropy::ensemble_entropy(&filters, base)?;
    // First member attaining the max.
    let best = reports.iter().find(|r| r.corrected == ensemble_max).expect("max is a member value");

    if json {
        let report = EnsembleReport {
            uncorrected: round12(best.uncorrected),
            corrected: round12(best.corrected),
            exact: None,
            log_base: round12(base.value()),
            m: best.m,
            c: best.c,
            ensemble_max: round12(ensemble_max),
            per_filter: paths
                .iter()
                .zip(&filters)
                .zip(&reports)
                .map(|((p, f), r)| MemberEntropy {
                    path: p.display().to_string(),
                    seed: f.config().seed(),
                    uncorrected: round12(r.uncorrected),
                    corrected: round12(r.corrected),
                })
                .collect(),
        };
        write_json(out, &report)?;
    } else {
        for ((p, f), r) in paths.iter().zip(&filters).zip(&reports) {
            writeln!(
                out,
                "{}: seed={} m={} c={} uncorrected={} corrected={}",
                p.display(),
                f.config().seed(),
                r.m,
                r.c,
                round12(r.uncorrected),
                round12(r.corrected)
            )?;
        }
        writeln!(out, "ensemble max (log base {base}): {}", round12(ensemble_max))?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ExactReport {
    exact: f64,
    log_base: f64,
    samples: u64,
    distinct: usize,
}

fn cmd_exact(corpus: &Corpus, base: LogBase, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let hist = corpus.histogram();
    let exact = entropy::exact_plugin_entropy(&hist, base)?;
    if json {
        let r = ExactReport {
            exact: round12(exact),
            log_base: round12(base.value()),
            samples: hist.total(),
            distinct: hist.distinct(),
        };
        write_json(out, &r)?;
    } else {
        writeln!(
            out,
            "exact (log base {base}): {} over {} samples, {} distinct",
            round12(exact),
            hist.total(),
            hist.distinct()
        )?;
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct MemberComparison {
    seed: u64,
    corrected: f64,
    gap: f64,
    collision_free: bool,
    certain_collision: bool,
}

#[derive(Debug, Serialize)]
struct ComparisonReport {
    exact: f64,
    log_base: f64,
    m: u32,
    size: usize,
    samples: u64,
    distinct: usize,
    ensemble_max: f64,
    ensemble_gap: f64,
    violation: bool,
    per_filter: Vec<MemberComparison>,
}

fn cmd_compare(
    corpus: &Corpus,
    args: &FilterArgs,
    base: LogBase,
    json: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<i32> {
    let hist = corpus.histogram();
    let exact = entropy::exact_plugin_entropy(&hist, base)?;
    let filters = build_filters(corpus, args)?;
    let ensemble_max = entropy::ensemble_entropy(&filters, base)?;

    let mut members = Vec::with_capacity(filters.len());
    for f in &filters {
        let r = entropy::filter_entropy(f, base)?;
        members.push(MemberComparison {
            seed: f.config().seed(),
            corrected: r.corrected,
            gap: exact - r.corrected,
            collision_free: f.config().collision_free(hist.iter().map(|(v, _)| v)),
            certain_collision: entropy::certain_collision(f.counters(), r.m)?.certain,
        });
    }
    let ensemble_gap = exact - ensemble_max;
    let violation = ensemble_gap < -GAP_TOLERANCE || members.iter().any(|m| m.gap < -GAP_TOLERANCE);

    if json {
        for m in &mut members {
            m.corrected = round12(m.corrected);
            m.gap = round12(m.gap);
        }
        let report = ComparisonReport {
            exact: round12(exact),
            log_base: round12(base.value()),
            m: args.hashes,
            size: filters[0].config().size(),
            samples: hist.total(),
            distinct: hist.distinct(),
            ensemble_max: round12(ensemble_max),
            ensemble_gap: round12(ensemble_gap),
            violation,
            per_filter: members,
        };
        write_json(out, &report)?;
    } else {
        writeln!(
            out,
            "exact (log base {base}): {} over {} samples, {} distinct",
            round12(exact),
            hist.total(),
            hist.distinct()
        )?;
        for m in &members {
            writeln!(
                out,
                "seed={}: corrected={} gap={} collision_free={} certain_collision={}",
                m.seed,
                round12(m.corrected),
                round12(m.gap),
                m.collision_free,
                m.certain_collision
            )?;
        }
        writeln!(out, "ensemble max: {} gap={}", round12(ensemble_max), round12(ensemble_gap))?;
    }
    if violation {
        writeln!(err, "error: filter estimate exceeds exact entropy by more than {GAP_TOLERANCE}")?;
        return Ok(EXIT_NEGATIVE);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CollisionReport<'a> {
    certain: bool,
    m: u32,
    violating_groups: &'a [ValueGroup],
}

fn cmd_collisions(path: &Path, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let f = load_file(path)?;
    let m = f.config().num_hashes();
    let d = entropy::certain_collision(f.counters(), m)?;
    if json {
        let r = CollisionReport { certain: d.certain, m, violating_groups: &d.violating_groups };
        write_json(out, &r)?;
    } else {
        writeln!(out, "certain collision: {}", if d.certain { "yes" } else { "no" })?;
        for g in &d.violating_groups {
            writeln!(out, "  value {}: {} cell(s), not a multiple of {m}", g.value, g.cells)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_query(path: &Path, element: &[u8], json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let f = load_file(path)?;
    let present = f.contains(element);
    let verdict = if present { "maybe-present" } else { "absent" };
    if json {
        write_json(out, &serde_json::json!({ "verdict": verdict }))?;
    } else {
        writeln!(out, "{verdict}")?;
    }
    Ok(if present { EXIT_OK } else { EXIT_NEGATIVE })
}
