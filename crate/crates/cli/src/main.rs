//! Command-line surface: generate, check, repair, benchmark, and LP export.
//!
//! Exit codes: 0 success (check: metric; repair: fully repaired),
//! 1 non-metric / incomplete repair, 2 usage or parse errors,
//! 3 internal solver failure.

mod bench;
mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use metric_repair::instances::{perturb, CorruptionSign, CorruptionSpec, InstanceKind, InstanceSpec};
use metric_repair::l1::{build_metric_lp, irl1_repair, l1_repair, unit_weights, write_lp};
use metric_repair::{
    broken_triangles, build_oracle, fw_domr, fw_prior, heuristic_repair, iomr_repair, oracle_iomr,
    shift_repair, support_threshold, triangle_count, DistanceMatrix, OracleStrategy, Perturbation,
    RepairMode, DEFAULT_TOL,
};

/// Environment variable overriding the default broken-triangle tolerance.
const TOL_ENV: &str = "METRIC_REPAIR_TOL";

#[derive(Parser)]
#[command(name = "metric-repair", version, about = "Sparse metric repair toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Euclidean,
    ErPath,
    Uniform,
    Exponential,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Negative,
    Positive,
    Mixed,
    IntegerPm1,
}

impl From<SignArg> for CorruptionSign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Negative => CorruptionSign::Negative,
            SignArg::Positive => CorruptionSign::Positive,
            SignArg::Mixed => CorruptionSign::Mixed,
            SignArg::IntegerPm1 => CorruptionSign::IntegerPm1,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Domr,
    Iomr,
    General,
}

impl From<ModeArg> for RepairMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Domr => RepairMode::DecreaseOnly,
            ModeArg::Iomr => RepairMode::IncreaseOnly,
            ModeArg::General => RepairMode::General,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Counting,
    Cover,
    Routing,
}

impl From<StrategyArg> for OracleStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Counting => OracleStrategy::Counting,
            StrategyArg::Cover => OracleStrategy::Cover,
            StrategyArg::Routing => OracleStrategy::Routing,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    FwDomr,
    FwPrior,
    Iomr,
    OracleIomr,
    Heuristic,
    Shift,
    L1,
    Irl1,
}

impl AlgoArg {
    fn name(self) -> &'static str {
        match self {
            AlgoArg::FwDomr => "fw-domr",
            AlgoArg::FwPrior => "fw-prior",
            AlgoArg::Iomr => "iomr",
            AlgoArg::OracleIomr => "oracle-iomr",
            AlgoArg::Heuristic => "heuristic",
            AlgoArg::Shift => "shift",
            AlgoArg::L1 => "l1",
            AlgoArg::Irl1 => "irl1",
        }
    }
}

#[derive(Args)]
struct KindParams {
    /// Instance kind.
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Point dimension for euclidean instances.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Edge probability for er-path ("auto" = 2 ln n / n).
    #[arg(long, default_value = "auto")]
    p: String,
    /// Rate for exponential instances.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
}

impl KindParams {
    fn to_kind(&self) -> Result<InstanceKind> {
        Ok(match self.kind {
            KindArg::Euclidean => InstanceKind::Euclidean { dim: self.dim },
            KindArg::ErPath => InstanceKind::ErdosRenyiPath {
                p: match self.p.as_str() {
                    "auto" => None,
                    s => Some(s.parse().context("--p must be a number or 'auto'")?),
                },
            },
            KindArg::Uniform => InstanceKind::Uniform,
            KindArg::Exponential => InstanceKind::Exponential { lambda: self.lambda },
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance; optionally corrupt it and keep the ground truth.
    Gen {
        #[command(flatten)]
        kind: KindParams,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the (clean) matrix.
        #[arg(long)]
        out: PathBuf,
        /// Number of pairs to corrupt.
        #[arg(long, conflicts_with = "corrupt_frac")]
        corrupt_k: Option<usize>,
        /// Fraction of pairs to corrupt.
        #[arg(long)]
        corrupt_frac: Option<f64>,
        #[arg(long, value_enum, default_value = "negative")]
        sign: SignArg,
        /// Corruption magnitude as a fraction of the matrix max.
        #[arg(long, default_value_t = 0.125)]
        corrupt_scale: f64,
        /// Separate seed for the corruption streams (defaults to --seed).
        #[arg(long)]
        corrupt_seed: Option<u64>,
        /// Where to write the corrupted matrix.
        #[arg(long)]
        corrupted_out: Option<PathBuf>,
        /// Where to write the ground-truth corruption.
        #[arg(long)]
        delta_out: Option<PathBuf>,
    },
    /// Check all triangle inequalities; exit 0 iff metric.
    Check {
        #[arg(long)]
        input: PathBuf,
        /// Relative tolerance (default 1e-9, or METRIC_REPAIR_TOL).
        #[arg(long)]
        tol: Option<f64>,
        /// List every broken triangle as "i,j,k" (edge ij, apex k), 1-indexed.
        #[arg(long)]
        list_broken: bool,
    },
    /// Repair a matrix and write the repaired matrix + perturbation.
    Repair {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        algo: AlgoArg,
        /// Repair mode; required to be consistent with the algorithm.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Oracle file for oracle-iomr.
        #[arg(long, conflicts_with_all = ["oracle_strategy", "oracle_from_delta"])]
        oracle: Option<PathBuf>,
        /// Oracle construction heuristic for oracle-iomr.
        #[arg(long, conflicts_with = "oracle_from_delta")]
        oracle_strategy: Option<StrategyArg>,
        /// Build the exact-support oracle from a ground-truth perturbation
        /// file (as written by gen --delta-out).
        #[arg(long)]
        oracle_from_delta: Option<PathBuf>,
        /// Write the oracle that was used (oracle-iomr only).
        #[arg(long)]
        oracle_out: Option<PathBuf>,
        /// Reweighting iterations for irl1.
        #[arg(long, default_value_t = metric_repair::l1::IRL1_DEFAULT_ITERS)]
        iters: usize,
        /// Reweighting stabilizer for irl1 (default 1e-3 * matrix max).
        #[arg(long)]
        eps: Option<f64>,
        /// Repaired matrix path (default: <input>.repaired.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Perturbation path (default: <input>.perturbation.csv).
        #[arg(long)]
        perturbation_out: Option<PathBuf>,
    },
    /// Sweep corruption levels and benchmark repair algorithms to CSV.
    Bench {
        #[command(flatten)]
        kind: KindParams,
        /// Instance sizes (repeatable).
        #[arg(long, required = true)]
        n: Vec<usize>,
        /// Comma-separated corruption levels as fractions of n(n-1)/2.
        #[arg(long, default_value = "")]
        grid: String,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Comma-separated algorithms.
        #[arg(long, default_value = "iomr,oracle-iomr,heuristic,l1,irl1")]
        algos: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "negative")]
        sign: SignArg,
        #[arg(long, default_value_t = 0.125)]
        corrupt_scale: f64,
        /// Mode for the l1/irl1 baselines.
        #[arg(long, value_enum, default_value = "general")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "counting")]
        oracle_strategy: StrategyArg,
        #[arg(long, default_value_t = metric_repair::l1::IRL1_DEFAULT_ITERS)]
        irl1_iters: usize,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores). Results are identical
        /// either way; only timings move.
        #[arg(long)]
        threads: Option<usize>,
        /// Blank the time_ms column for byte-reproducible output.
        #[arg(long)]
        no_timing: bool,
    },
    /// Write the metric-repair LP for a matrix in LP text format.
    ExportLp {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "general")]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
    },
}

fn default_tol() -> Result<f64> {
    match std::env::var(TOL_ENV) {
        Ok(s) => s
            .parse::<f64>()
            .with_context(|| format!("{TOL_ENV} must be a number, got {s:?}")),
        Err(_) => Ok(DEFAULT_TOL),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.downcast_ref::<metric_repair::Error>() {
                Some(
                    metric_repair::Error::IterationLimit { .. }
                    | metric_repair::Error::SolverStalled { .. },
                ) => 3,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Gen {
            kind,
            n,
            seed,
            out,
            corrupt_k,
            corrupt_frac,
            sign,
            corrupt_scale,
            corrupt_seed,
            corrupted_out,
            delta_out,
        } => {
            let kind = kind.to_kind()?;
            let spec = InstanceSpec { kind, n, seed };
            let d = spec.generate()?;
            io::write_matrix(&out, &d).with_context(|| format!("writing {}", out.display()))?;
            let k = match (corrupt_k, corrupt_frac) {
                (Some(k), None) => Some(k),
                (None, Some(f)) => {
                    if !(0.0..=1.0).contains(&f) {
                        bail!("--corrupt-frac must be in [0, 1]");
                    }
                    Some((f * d.pair_count() as f64).round() as usize)
                }
                (None, None) => None,
                (Some(_), Some(_)) => unreachable!("clap conflict"),
            };
            if let Some(k) = k {
                let (c_out, d_out) = match (&corrupted_out, &delta_out) {
                    (Some(c), Some(p)) => (c.clone(), p.clone()),
                    _ => bail!("corruption requires --corrupted-out and --delta-out"),
                };
                let cspec = CorruptionSpec {
                    k,
                    sign: sign.into(),
                    scale: corrupt_scale,
                    seed: corrupt_seed.unwrap_or(seed),
                };
                let (dp, delta) = perturb(&d, &cspec)?;
                io::write_matrix(&c_out, &dp)
                    .with_context(|| format!("writing {}", c_out.display()))?;
                io::write_perturbation(&d_out, &delta)
                    .with_context(|| format!("writing {}", d_out.display()))?;
                eprintln!(
                    "generated {} n={n} seed={seed}; corrupted {k} pairs ({})",
                    kind.name(),
                    cspec.sign.name()
                );
            } else {
                eprintln!("generated {} n={n} seed={seed}", kind.name());
            }
            Ok(0)
        }
        Command::Check {
            input,
            tol,
            list_broken,
        } => {
            let d = io::read_matrix(&input)?;
            let tol = match tol {
                Some(t) => t,
                None => default_tol()?,
            };
            let broken = broken_triangles(&d, tol);
            let total = triangle_count(d.n());
            println!("{} broken / {} triangles", broken.len(), total);
            if list_broken {
                for t in &broken {
                    println!("{},{},{}", t.i + 1, t.j + 1, t.k + 1);
                }
            }
            Ok(if broken.is_empty() { 0 } else { 1 })
        }
        Command::Repair {
            input,
            algo,
            mode,
            oracle,
            oracle_strategy,
            oracle_from_delta,
            oracle_out,
            iters,
            eps,
            out,
            perturbation_out,
        } => repair_command(RepairOptions {
            input,
            algo,
            mode,
            oracle,
            oracle_strategy,
            oracle_from_delta,
            oracle_out,
            iters,
            eps,
            out,
            perturbation_out,
        }),
        Command::Bench {
            kind,
            n,
            grid,
            trials,
            algos,
            seed,
            sign,
            corrupt_scale,
            mode,
            oracle_strategy,
            irl1_iters,
            out,
            threads,
            no_timing,
        } => {
            let grid: Vec<f64> = grid
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<f64>().context("bad grid value"))
                .collect::<Result<_>>()?;
            let algos: Vec<bench::Algo> = algos
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| bench::Algo::parse(s.trim()))
                .collect::<Result<_>>()?;
            if algos.is_empty() {
                bail!("at least one algorithm is required");
            }
            let cfg = bench::BenchConfig {
                kind: kind.to_kind()?,
                ns: n,
                grid,
                trials,
                algos,
                seed,
                sign: sign.into(),
                corrupt_scale,
                mode: mode.into(),
                oracle_strategy: oracle_strategy.into(),
                irl1_iters,
                no_timing,
            };
            let csv = match threads {
                Some(t) => rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .context("building thread pool")?
                    .install(|| bench::run(&cfg)),
                None => bench::run(&cfg),
            }?;
            match out {
                Some(path) => io::write_text(&path, &csv)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
            Ok(0)
        }
        Command::ExportLp { input, mode, out } => {
            let d = io::read_matrix(&input)?;
            let lp = build_metric_lp(&d, mode.into(), &unit_weights(d.n()));
            let mut buf = Vec::new();
            write_lp(&lp, &mut buf)?;
            io::write_text(&out, std::str::from_utf8(&buf).expect("ascii output"))
                .with_context(|| format!("writing {}", out.display()))?;
            Ok(0)
        }
    }
}

struct RepairOptions {
    input: PathBuf,
    algo: AlgoArg,
    mode: Option<ModeArg>,
    oracle: Option<PathBuf>,
    oracle_strategy: Option<StrategyArg>,
    oracle_from_delta: Option<PathBuf>,
    oracle_out: Option<PathBuf>,
    iters: usize,
    eps: Option<f64>,
    out: Option<PathBuf>,
    perturbation_out: Option<PathBuf>,
}

fn check_mode(algo: AlgoArg, mode: Option<ModeArg>) -> Result<RepairMode> {
    let fixed = |expected: RepairMode| -> Result<RepairMode> {
        match mode {
            None => Ok(expected),
            Some(m) if RepairMode::from(m) == expected => Ok(expected),
            Some(m) => bail!(
                "--algo {} is {}-only; --mode {} is inconsistent",
                algo.name(),
                expected.name(),
                RepairMode::from(m).name()
            ),
        }
    };
    match algo {
        AlgoArg::FwDomr | AlgoArg::FwPrior => fixed(RepairMode::DecreaseOnly),
        AlgoArg::Iomr | AlgoArg::OracleIomr => fixed(RepairMode::IncreaseOnly),
        AlgoArg::Heuristic | AlgoArg::Shift => fixed(RepairMode::General),
        AlgoArg::L1 | AlgoArg::Irl1 => Ok(mode.map(RepairMode::from).unwrap_or(RepairMode::General)),
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

fn repair_command(opts: RepairOptions) -> Result<u8> {
    let dp = io::read_matrix(&opts.input)?;
    let mode = check_mode(opts.algo, opts.mode)?;
    let scale = dp.max_entry();
    let eps = opts.eps.unwrap_or_else(|| metric_repair::l1::irl1_default_eps(scale));
    if opts.algo != AlgoArg::OracleIomr
        && (opts.oracle.is_some()
            || opts.oracle_strategy.is_some()
            || opts.oracle_from_delta.is_some()
            || opts.oracle_out.is_some())
    {
        bail!("oracle flags only apply to --algo oracle-iomr");
    }

    let clock = Instant::now();
    let (repaired, perturbation): (DistanceMatrix, Perturbation) = match opts.algo {
        AlgoArg::FwDomr => {
            let r = fw_domr(&dp);
            (r.repaired, r.perturbation)
        }
        AlgoArg::FwPrior => {
            let broken = broken_triangles(&dp, DEFAULT_TOL);
            let r = fw_prior(&dp, &broken)?;
            (r.repaired, r.perturbation)
        }
        AlgoArg::Iomr => {
            let r = iomr_repair(&dp);
            (r.repaired, r.perturbation)
        }
        AlgoArg::OracleIomr => {
            let q = match (&opts.oracle, opts.oracle_strategy, &opts.oracle_from_delta) {
                (Some(path), None, None) => io::read_oracle(path, dp.n())?,
                (None, Some(strategy), None) => build_oracle(&dp, strategy.into()),
                (None, None, Some(path)) => {
                    let delta = io::read_perturbation(path, dp.n())?;
                    metric_repair::OracleMask::from_pairs(dp.n(), &delta.support())?
                }
                (None, None, None) => bail!(
                    "oracle-iomr requires --oracle FILE, --oracle-strategy or --oracle-from-delta FILE"
                ),
                _ => unreachable!("clap conflicts"),
            };
            if let Some(path) = &opts.oracle_out {
                io::write_oracle(path, &q)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let r = oracle_iomr(&dp, &q)?;
            (r.repaired, r.perturbation)
        }
        AlgoArg::Heuristic => {
            let r = heuristic_repair(&dp);
            (r.repaired, r.perturbation)
        }
        AlgoArg::Shift => {
            let r = shift_repair(&dp);
            (r.repaired, r.perturbation)
        }
        AlgoArg::L1 => {
            let r = l1_repair(&dp, mode)?;
            if r.solver_status != metric_repair::l1::SolverStatus::Optimal {
                return Err(anyhow!(metric_repair::Error::SolverStalled { residual: f64::NAN })
                    .context(format!("LP solve ended {:?}", r.solver_status)));
            }
            (r.repaired(&dp), r.perturbation)
        }
        AlgoArg::Irl1 => {
            let r = irl1_repair(&dp, mode, opts.iters, eps)?;
            if r.solver_status != metric_repair::l1::SolverStatus::Optimal {
                return Err(anyhow!(metric_repair::Error::SolverStalled { residual: f64::NAN })
                    .context(format!("LP solve ended {:?}", r.solver_status)));
            }
            (r.repaired(&dp), r.perturbation)
        }
    };
    let elapsed_ms = clock.elapsed().as_secs_f64() * 1e3;

    let residual = broken_triangles(&repaired, default_tol()?).len();
    let out = opts
        .out
        .unwrap_or_else(|| with_suffix(&opts.input, ".repaired.csv"));
    let pert_out = opts
        .perturbation_out
        .unwrap_or_else(|| with_suffix(&opts.input, ".perturbation.csv"));
    io::write_matrix(&out, &repaired).with_context(|| format!("writing {}", out.display()))?;
    io::write_perturbation(&pert_out, &perturbation)
        .with_context(|| format!("writing {}", pert_out.display()))?;
    let thr = support_threshold(scale);
    println!(
        "algo={} norm0={} norm1={} residual_broken={}/{} time_ms={:.3}",
        opts.algo.name(),
        perturbation.norm0(thr),
        perturbation.norm1(),
        residual,
        triangle_count(dp.n()),
        elapsed_ms
    );
    println!("repaired -> {}", out.display());
    println!("perturbation -> {}", pert_out.display());
    Ok(if residual == 0 { 0 } else { 1 })
}
