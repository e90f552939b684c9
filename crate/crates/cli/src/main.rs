mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ocskit::matching::{InstanceKind, Mode};
use ocskit::oracle::Family;
use ocskit::frlp::Variant;

use commands::{Audit, Report};
use config::{read_config, Resolver};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] ocskit::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use ocskit::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(
                E::Parse { .. }
                | E::InvalidParams(_)
                | E::InvalidInstance(_)
                | E::UnknownFamily(_)
                | E::UnknownElement(_)
                | E::InvalidWindows(_)
                | E::MalformedQuery { .. }
                | E::TooLarge(_),
            ) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ocskit", version, about = "Online correlated selection: bounds, oracles, LPs and matching runs")]
struct Cli {
    /// `key = value` file with defaults for the chosen subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tables of the never-chosen bounds.
    Bounds(BoundsArgs),
    /// Checks never-chosen probabilities of adversarial inputs against their bounds.
    Verify(VerifyArgs),
    /// Solves a factor-revealing LP.
    Lp(LpArgs),
    /// Runs the online matching algorithms against the offline optimum.
    Simulate(SimulateArgs),
    /// Exact probabilities of a replayed or generated query sequence.
    Enumerate(EnumerateArgs),
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Largest k tabulated [default: 10].
    #[arg(long)]
    max_k: Option<usize>,
    /// `paper` or `consistent` [default: paper].
    #[arg(long)]
    mode: Option<Mode>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// all-same, alternating, chained or random-k-regular [default: all-same].
    #[arg(long)]
    family: Option<Family>,
    /// Number of pair queries.
    #[arg(long, conflicts_with = "triples")]
    pairs: Option<usize>,
    /// Number of triple queries [default: 3].
    #[arg(long)]
    triples: Option<usize>,
    /// Monte Carlo trials when the input is too large to enumerate [default: 100000].
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Window specs over the element's occurrences, e.g. `0..2,3..5`; several separated by `;`.
    #[arg(long)]
    windows: Option<String>,
    /// Watched element [default: 0].
    #[arg(long)]
    element: Option<u64>,
    /// Largest pair input enumerated exactly [default: 8].
    #[arg(long)]
    max_pairs: Option<usize>,
    /// Largest triple input enumerated exactly [default: 3].
    #[arg(long)]
    max_triples: Option<usize>,
}

#[derive(Debug, Args)]
struct LpArgs {
    /// `unweighted` or `weighted` [default: unweighted].
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long)]
    ellmax: Option<usize>,
    #[arg(long)]
    sigma_r2: Option<f64>,
    #[arg(long)]
    sigma_d: Option<f64>,
    /// Use γ_A = γ_B = 1/16 with re-derived deltas.
    #[arg(long)]
    consistent_mode: bool,
    /// Also write the LP in text form to this path.
    #[arg(long)]
    export: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// `unweighted` or `weighted` [default: unweighted].
    #[arg(long)]
    variant: Option<Variant>,
    /// Instance generator, optionally with an edge probability, e.g. `random-bipartite:0.3`.
    #[arg(long)]
    kind: Option<InstanceKind>,
    /// Vertices per side [default: 20].
    #[arg(long)]
    n: Option<usize>,
    /// [default: 100]
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `paper` or `consistent` [default: consistent].
    #[arg(long)]
    mode: Option<Mode>,
    /// `strict` fails the run on any audit violation [default: strict].
    #[arg(long)]
    audit: Option<Audit>,
    /// Run every trial on this JSON instance instead of generating one.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long)]
    ellmax: Option<usize>,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    /// Query file with one `P a b` or `T a b c` per line.
    #[arg(long, conflicts_with = "family")]
    replay: Option<PathBuf>,
    #[arg(long)]
    family: Option<Family>,
    #[arg(long, conflicts_with = "triples")]
    pairs: Option<usize>,
    #[arg(long)]
    triples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    windows: Option<String>,
    #[arg(long)]
    element: Option<u64>,
    #[arg(long)]
    max_pairs: Option<usize>,
    #[arg(long)]
    max_triples: Option<usize>,
}

fn name(command: &Command) -> &'static str {
    match command {
        Command::Bounds(_) => "bounds",
        Command::Verify(_) => "verify",
        Command::Lp(_) => "lp",
        Command::Simulate(_) => "simulate",
        Command::Enumerate(_) => "enumerate",
    }
}

fn run(cli: Cli) -> Result<Report, CliError> {
    let file = match &cli.config {
        Some(path) => read_config(path)?,
        None => Default::default(),
    };
    let mut r = Resolver::new(name(&cli.command), file)?;
    let mut report = match cli.command {
        Command::Bounds(a) => {
            let max_k = r.value("max-k", a.max_k, 10)?;
            let mode = r.value("mode", a.mode, Mode::Paper)?;
            r.finish()?;
            commands::bounds(max_k, mode)?
        }
        Command::Verify(a) => {
            let family = r.value("family", a.family, Family::AllSame)?;
            let (pairs, triples) = sizes(&mut r, a.pairs, a.triples)?;
            let trials = r.value("trials", a.trials, 100_000)?;
            let seed = r.seed(a.seed)?;
            let windows = r.optional("windows", a.windows)?;
            let element = r.value("element", a.element, 0)?;
            let max_pairs = r.value("max-pairs", a.max_pairs, ocskit::oracle::DEFAULT_MAX_PAIRS)?;
            let max_triples = r.value("max-triples", a.max_triples, ocskit::oracle::DEFAULT_MAX_TRIPLES)?;
            r.finish()?;
            let source = commands::Source::Family { family, pairs, triples, seed };
            let caps = (max_pairs, max_triples);
            commands::verify(&source, element, windows.as_deref(), caps, trials, seed)?
        }
        Command::Lp(a) => {
            let variant = r.value("variant", a.variant, Variant::Unweighted)?;
            let limit = ocskit::matching::default_limit(variant);
            let kmax = r.value("kmax", a.kmax, limit.0)?;
            let ellmax = r.value("ellmax", a.ellmax, limit.1)?;
            let consistent = r.flag("consistent-mode", a.consistent_mode)?;
            let sigma_r2 = r.value("sigma-r2", a.sigma_r2, 1.3)?;
            let sigma_d = r.value("sigma-d", a.sigma_d, 2.2)?;
            let export: Option<String> = r.optional("export", a.export.map(|p| p.display().to_string()))?;
            r.finish()?;
            commands::lp(variant, (kmax, ellmax), consistent, (sigma_r2, sigma_d), export.as_deref().map(Path::new))?
        }
        Command::Simulate(a) => {
            let variant = r.value("variant", a.variant, Variant::Unweighted)?;
            let instance: Option<String> = r.optional("instance", a.instance.map(|p| p.display().to_string()))?;
            let kind = r.value("kind", a.kind, InstanceKind::RandomBipartite(ocskit::matching::DEFAULT_EDGE_PROBABILITY))?;
            let n = r.value("n", a.n, 20)?;
            let trials = r.value("trials", a.trials, 100)?;
            let seed = r.seed(a.seed)?;
            let mode = r.value("mode", a.mode, Mode::Consistent)?;
            let audit = r.value("audit", a.audit, Audit::Strict)?;
            let kmax = r.optional("kmax", a.kmax)?;
            let ellmax = r.optional("ellmax", a.ellmax)?;
            r.finish()?;
            let limit = match (kmax, ellmax) {
                (None, None) => None,
                (k, l) => {
                    let d = ocskit::matching::default_limit(variant);
                    Some((k.unwrap_or(d.0), l.unwrap_or(d.1)))
                }
            };
            let cfg = ocskit::matching::ExperimentConfig {
                variant,
                kind,
                n,
                trials,
                seed,
                mode,
                limit,
                tol: commands::AUDIT_TOL,
            };
            commands::simulate(&cfg, instance.as_deref().map(Path::new), audit)?
        }
        Command::Enumerate(a) => {
            let replay: Option<String> = r.optional("replay", a.replay.map(|p| p.display().to_string()))?;
            let family = r.optional("family", a.family)?;
            let (pairs, triples) = sizes(&mut r, a.pairs, a.triples)?;
            let seed = r.seed(a.seed)?;
            let windows = r.optional("windows", a.windows)?;
            let element = r.value("element", a.element, 0)?;
            let max_pairs = r.value("max-pairs", a.max_pairs, ocskit::oracle::DEFAULT_MAX_PAIRS)?;
            let max_triples = r.value("max-triples", a.max_triples, ocskit::oracle::DEFAULT_MAX_TRIPLES)?;
            r.finish()?;
            let source = match (replay, family) {
                (Some(_), Some(_)) => return Err(CliError::Usage("give either a replay file or a family".into())),
                (Some(path), None) => commands::Source::Replay(PathBuf::from(path)),
                (None, family) => {
                    commands::Source::Family { family: family.unwrap_or(Family::AllSame), pairs, triples, seed }
                }
            };
            commands::enumerate(&source, element, windows.as_deref(), (max_pairs, max_triples))?
        }
    };
    report.resolved = r.resolved;
    Ok(report)
}

/// Exactly one of pairs and triples; three triples when neither is given.
fn sizes(r: &mut Resolver, pairs: Option<usize>, triples: Option<usize>) -> Result<(Option<usize>, Option<usize>), CliError> {
    let pairs = r.optional("pairs", pairs)?;
    let triples = r.optional("triples", triples)?;
    match (pairs, triples) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either pairs or triples, not both".into())),
        (None, None) => {
            r.resolved.push(("triples".into(), "3".into()));
            Ok((None, Some(3)))
        }
        sizes => Ok(sizes),
    }
}

/// Writes through a temporary file in the target directory.
fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.output.clone();
    match run(cli) {
        Ok(report) => {
            let text = report.render();
            let written = match &output {
                Some(path) => write_atomic(path, &text),
                None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
            };
            for line in &report.notes {
                eprintln!("{line}");
            }
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(e.exit_code());
            }
            if report.violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                for v in &report.violations {
                    eprintln!("violation: {v}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
