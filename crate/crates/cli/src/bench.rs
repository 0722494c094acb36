//! Benchmark harness: sweeps corruption levels over generated instances,
//! runs the selected repair algorithms, and emits one CSV record per
//! (n, level, trial, algorithm) plus a per-level aggregate section.
//!
//! Per-trial seeds are derived from (base seed, n index, level index,
//! trial index), and rows are sorted before writing, so serial and
//! parallel runs produce identical result bytes. Wall-clock timing is the
//! one non-reproducible column; `--no-timing` blanks it when byte-stable
//! output is required.

use std::time::Instant;

use anyhow::{bail, Result};
use metric_repair::instances::{
    derive_seed, gen_metric, gen_random, perturb, CorruptionSign, CorruptionSpec, InstanceKind,
    InstanceSpec, RandomKind,
};
use metric_repair::l1::{irl1_repair, l1_repair};
use metric_repair::{
    broken_triangles, build_oracle, fw_domr, fw_prior, heuristic_repair, iomr_repair, oracle_iomr,
    shift_repair, support_threshold, DistanceMatrix, OracleStrategy, Perturbation, RepairMode,
    DEFAULT_TOL,
};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    FwDomr,
    FwPrior,
    Iomr,
    OracleIomr,
    Heuristic,
    Shift,
    L1,
    Irl1,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::FwDomr => "fw-domr",
            Algo::FwPrior => "fw-prior",
            Algo::Iomr => "iomr",
            Algo::OracleIomr => "oracle-iomr",
            Algo::Heuristic => "heuristic",
            Algo::Shift => "shift",
            Algo::L1 => "l1",
            Algo::Irl1 => "irl1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "fw-domr" => Algo::FwDomr,
            "fw-prior" => Algo::FwPrior,
            "iomr" => Algo::Iomr,
            "oracle-iomr" => Algo::OracleIomr,
            "heuristic" => Algo::Heuristic,
            "shift" => Algo::Shift,
            "l1" => Algo::L1,
            "irl1" => Algo::Irl1,
            other => bail!("unknown algorithm: {other}"),
        })
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub kind: InstanceKind,
    pub ns: Vec<usize>,
    /// Corruption levels as fractions of n(n-1)/2; ignored for the random
    /// kinds, which have no ground-truth corruption.
    pub grid: Vec<f64>,
    pub trials: usize,
    pub algos: Vec<Algo>,
    pub seed: u64,
    pub sign: CorruptionSign,
    pub corrupt_scale: f64,
    pub mode: RepairMode,
    pub oracle_strategy: OracleStrategy,
    pub irl1_iters: usize,
    pub no_timing: bool,
}

struct Outcome {
    perturbation: Perturbation,
    residual_broken: usize,
    elapsed_ms: f64,
    failed: bool,
}

fn run_algo(algo: Algo, dp: &DistanceMatrix, cfg: &BenchConfig) -> Result<Outcome> {
    let clock = Instant::now();
    let (perturbation, repaired, failed) = match algo {
        Algo::FwDomr => {
            let r = fw_domr(dp);
            (r.perturbation, r.repaired, false)
        }
        Algo::FwPrior => {
            let broken = broken_triangles(dp, DEFAULT_TOL);
            let r = fw_prior(dp, &broken)?;
            (r.perturbation, r.repaired, false)
        }
        Algo::Iomr => {
            let r = iomr_repair(dp);
            (r.perturbation, r.repaired, false)
        }
        Algo::OracleIomr => {
            let q = build_oracle(dp, cfg.oracle_strategy);
            match oracle_iomr(dp, &q) {
                Ok(r) => (r.perturbation, r.repaired, false),
                // infeasible heuristic oracle: report the input unrepaired
                Err(metric_repair::Error::InfeasibleOracle { .. }) => {
                    (Perturbation::new(dp.n()), dp.clone(), true)
                }
                Err(e) => return Err(e.into()),
            }
        }
        Algo::Heuristic => {
            let r = heuristic_repair(dp);
            (r.perturbation, r.repaired, false)
        }
        Algo::Shift => {
            let r = shift_repair(dp);
            (r.perturbation, r.repaired, false)
        }
        Algo::L1 => {
            let r = l1_repair(dp, cfg.mode)?;
            let repaired = r.repaired(dp);
            (r.perturbation, repaired, false)
        }
        Algo::Irl1 => {
            let eps = metric_repair::l1::irl1_default_eps(dp.max_entry());
            let r = irl1_repair(dp, cfg.mode, cfg.irl1_iters, eps)?;
            let repaired = r.repaired(dp);
            (r.perturbation, repaired, false)
        }
    };
    let elapsed_ms = clock.elapsed().as_secs_f64() * 1e3;
    let residual_broken = broken_triangles(&repaired, DEFAULT_TOL).len();
    Ok(Outcome {
        perturbation,
        residual_broken,
        elapsed_ms,
        failed,
    })
}

struct Record {
    n: usize,
    level_idx: usize,
    level: Option<f64>,
    trial: usize,
    seed: u64,
    algo_idx: usize,
    input_nnz: Option<usize>,
    input_frac: Option<f64>,
    input_l1: Option<f64>,
    output_nnz: Option<usize>,
    output_frac: Option<f64>,
    output_l1: Option<f64>,
    residual_broken: Option<usize>,
    elapsed_ms: Option<f64>,
}

pub fn run(cfg: &BenchConfig) -> Result<String> {
    let metric_kind = cfg.kind.is_metric_kind();
    let levels: Vec<Option<f64>> = if metric_kind {
        if cfg.grid.is_empty() {
            bail!("a sparsity grid is required for metric instance kinds");
        }
        cfg.grid.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    for level in levels.iter().flatten() {
        if !(0.0..=1.0).contains(level) {
            bail!("sparsity level {level} not in [0, 1]");
        }
    }
    if cfg.trials == 0 {
        bail!("at least one trial is required");
    }

    let mut units = Vec::new();
    for (n_idx, &n) in cfg.ns.iter().enumerate() {
        for (level_idx, &level) in levels.iter().enumerate() {
            for trial in 0..cfg.trials {
                units.push((n_idx, n, level_idx, level, trial));
            }
        }
    }

    let records: Result<Vec<Vec<Record>>> = units
        .par_iter()
        .map(|&(n_idx, n, level_idx, level, trial)| {
            let seed = derive_seed(cfg.seed, &[n_idx as u64, level_idx as u64, trial as u64]);
            let (dp, delta) = make_instance(cfg, n, level, seed)?;
            let thr = support_threshold(dp.max_entry());
            let pairs = dp.pair_count() as f64;
            let mut out = Vec::with_capacity(cfg.algos.len());
            for (algo_idx, &algo) in cfg.algos.iter().enumerate() {
                let o = run_algo(algo, &dp, cfg)?;
                let (output_nnz, output_frac, output_l1, residual) = if o.failed {
                    (None, None, None, None)
                } else {
                    let nnz = o.perturbation.norm0(thr);
                    (
                        Some(nnz),
                        Some(nnz as f64 / pairs),
                        Some(o.perturbation.norm1()),
                        Some(o.residual_broken),
                    )
                };
                out.push(Record {
                    n,
                    level_idx,
                    level,
                    trial,
                    seed,
                    algo_idx,
                    input_nnz: delta.as_ref().map(|d| d.norm0(thr)),
                    input_frac: delta.as_ref().map(|d| d.norm0(thr) as f64 / pairs),
                    input_l1: delta.as_ref().map(|d| d.norm1()),
                    output_nnz,
                    output_frac,
                    output_l1,
                    residual_broken: residual,
                    elapsed_ms: if cfg.no_timing { None } else { Some(o.elapsed_ms) },
                });
            }
            Ok(out)
        })
        .collect();
    let mut records: Vec<Record> = records?.into_iter().flatten().collect();
    records.sort_by(|a, b| {
        (a.n, a.level_idx, a.trial, a.algo_idx).cmp(&(b.n, b.level_idx, b.trial, b.algo_idx))
    });

    let mut csv = String::from(
        "kind,n,level,trial,seed,algo,input_nnz,input_frac,input_l1,output_nnz,output_frac,output_l1,residual_broken,time_ms\n",
    );
    for r in &records {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            cfg.kind.name(),
            r.n,
            r.level.map(|l| format!("{l}")).unwrap_or_default(),
            r.trial,
            r.seed,
            cfg.algos[r.algo_idx].name(),
            fmt_opt_usize(r.input_nnz),
            fmt_opt(r.input_frac),
            fmt_opt(r.input_l1),
            fmt_opt_usize(r.output_nnz),
            fmt_opt(r.output_frac),
            fmt_opt(r.output_l1),
            fmt_opt_usize(r.residual_broken),
            r.elapsed_ms.map(|t| format!("{t:.3}")).unwrap_or_default(),
        ));
    }

    csv.push_str("# aggregate\n");
    csv.push_str("kind,n,level,algo,trials,mean_output_nnz,mean_output_frac,mean_output_l1,mean_residual_broken,mean_time_ms\n");
    for (n_idx, &n) in cfg.ns.iter().enumerate() {
        let _ = n_idx;
        for (level_idx, &level) in levels.iter().enumerate() {
            for (algo_idx, &algo) in cfg.algos.iter().enumerate() {
                let group: Vec<&Record> = records
                    .iter()
                    .filter(|r| r.n == n && r.level_idx == level_idx && r.algo_idx == algo_idx)
                    .collect();
                let ok: Vec<&&Record> = group.iter().filter(|r| r.output_nnz.is_some()).collect();
                let count = ok.len();
                let mean = |f: &dyn Fn(&Record) -> f64| -> String {
                    if count == 0 {
                        String::new()
                    } else {
                        format!("{:.6}", ok.iter().map(|r| f(r)).sum::<f64>() / count as f64)
                    }
                };
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    cfg.kind.name(),
                    n,
                    level.map(|l| format!("{l}")).unwrap_or_default(),
                    algo.name(),
                    count,
                    mean(&|r| r.output_nnz.unwrap() as f64),
                    mean(&|r| r.output_frac.unwrap()),
                    mean(&|r| r.output_l1.unwrap()),
                    mean(&|r| r.residual_broken.unwrap() as f64),
                    if cfg.no_timing || count == 0 {
                        String::new()
                    } else {
                        format!(
                            "{:.3}",
                            ok.iter().map(|r| r.elapsed_ms.unwrap()).sum::<f64>() / count as f64
                        )
                    },
                ));
            }
        }
    }
    Ok(csv)
}

fn make_instance(
    cfg: &BenchConfig,
    n: usize,
    level: Option<f64>,
    seed: u64,
) -> Result<(DistanceMatrix, Option<Perturbation>)> {
    match cfg.kind {
        InstanceKind::Euclidean { .. } | InstanceKind::ErdosRenyiPath { .. } => {
            let spec = InstanceSpec {
                kind: cfg.kind,
                n,
                seed,
            };
            let d = gen_metric(&spec)?;
            let frac = level.expect("metric kinds carry a level");
            let k = (frac * d.pair_count() as f64).round() as usize;
            let corruption = CorruptionSpec {
                k,
                sign: cfg.sign,
                scale: cfg.corrupt_scale,
                seed: derive_seed(seed, &[1]),
            };
            let (dp, delta) = perturb(&d, &corruption)?;
            Ok((dp, Some(delta)))
        }
        InstanceKind::Uniform => {
            let d = gen_random(RandomKind::Uniform, n, 0.0, seed)?;
            Ok((d, None))
        }
        InstanceKind::Exponential { lambda } => {
            let d = gen_random(RandomKind::Exponential, n, lambda, seed)?;
            Ok((d, None))
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v}")).unwrap_or_default()
}

fn fmt_opt_usize(v: Option<usize>) -> String {
    v.map(|v| format!("{v}")).unwrap_or_default()
}
