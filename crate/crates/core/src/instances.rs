//! Reproducible instance generation: Euclidean point clouds, Erdos-Renyi
//! path metrics, i.i.d. random symmetric matrices, and sparse corruption
//! injection.
//!
//! Everything is keyed on a 64-bit seed fed to ChaCha8, with a fixed
//! stream id per purpose so the corruption support and its values are
//! independently reproducible:
//!
//! - stream `a` (a = 0, 1, ...): instance generation, attempt `a`
//!   (connectivity retries advance the stream, never the seed);
//! - stream `2^32`: corruption support;
//! - stream `2^32 + 1`: corruption values;
//! - stream `2^33 + t`: trial `t` of a Monte Carlo estimate.

use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;
use crate::perturbation::Perturbation;
use crate::triangle::{broken_triangles, triangle_count, DEFAULT_TOL};

const STREAM_SUPPORT: u64 = 1 << 32;
const STREAM_VALUE: u64 = (1 << 32) + 1;
const STREAM_TRIAL: u64 = 1 << 33;
const CONNECT_RETRIES: usize = 64;
const VALUE_RETRIES: usize = 64;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Deterministic child-seed derivation (splitmix64 over the indices), used
/// by the bench harness so per-trial seeds do not depend on scheduling.
pub fn derive_seed(base: u64, indices: &[u64]) -> u64 {
    let mut z = base;
    for &ix in indices {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(ix);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

/// What kind of matrix to generate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InstanceKind {
    /// Pairwise distances of n i.i.d. uniform points in the unit cube.
    Euclidean { dim: usize },
    /// Hop-count metric of a connected G(n, p); `None` means 2 ln(n) / n.
    ErdosRenyiPath { p: Option<f64> },
    /// I.i.d. Unif[0,1] off-diagonal entries; not metric in general.
    Uniform,
    /// I.i.d. Exp(lambda) off-diagonal entries; not metric in general.
    Exponential { lambda: f64 },
}

impl InstanceKind {
    pub fn name(&self) -> &'static str {
        match self {
            InstanceKind::Euclidean { .. } => "euclidean",
            InstanceKind::ErdosRenyiPath { .. } => "er-path",
            InstanceKind::Uniform => "uniform",
            InstanceKind::Exponential { .. } => "exponential",
        }
    }

    pub fn is_metric_kind(&self) -> bool {
        matches!(
            self,
            InstanceKind::Euclidean { .. } | InstanceKind::ErdosRenyiPath { .. }
        )
    }
}

/// A fully pinned-down instance: same spec and seed, same bytes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub n: usize,
    pub seed: u64,
}

impl InstanceSpec {
    /// Generate whatever the kind calls for, metric or not.
    pub fn generate(&self) -> Result<DistanceMatrix> {
        match self.kind {
            InstanceKind::Euclidean { .. } | InstanceKind::ErdosRenyiPath { .. } => {
                gen_metric(self)
            }
            InstanceKind::Uniform => gen_random(RandomKind::Uniform, self.n, 0.0, self.seed),
            InstanceKind::Exponential { lambda } => {
                gen_random(RandomKind::Exponential, self.n, lambda, self.seed)
            }
        }
    }
}

/// Generate a matrix that is metric by construction (Euclidean or
/// Erdos-Renyi path kinds only).
pub fn gen_metric(spec: &InstanceSpec) -> Result<DistanceMatrix> {
    match spec.kind {
        InstanceKind::Euclidean { dim } => {
            if dim == 0 {
                return Err(Error::InvalidSpec("euclidean dim must be >= 1".into()));
            }
            let mut rng = rng_for(spec.seed, 0);
            let unit = Uniform::new(0.0f64, 1.0).expect("valid range");
            let points: Vec<Vec<f64>> = (0..spec.n)
                .map(|_| (0..dim).map(|_| unit.sample(&mut rng)).collect())
                .collect();
            DistanceMatrix::from_fn(spec.n, |i, j| {
                points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
        }
        InstanceKind::ErdosRenyiPath { p } => {
            let n = spec.n;
            let p = p.unwrap_or_else(|| 2.0 * (n as f64).ln() / n as f64);
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidSpec(format!("edge probability {p} not in [0,1]")));
            }
            for attempt in 0..CONNECT_RETRIES {
                let mut rng = rng_for(spec.seed, attempt as u64);
                if let Some(d) = er_path_attempt(n, p, &mut rng) {
                    return Ok(d);
                }
            }
            Err(Error::Disconnected {
                attempts: CONNECT_RETRIES,
            })
        }
        _ => Err(Error::InvalidSpec(format!(
            "{} is not a metric kind",
            spec.kind.name()
        ))),
    }
}

/// Sample G(n, p) and return its hop-count metric, or None if disconnected.
fn er_path_attempt(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Option<DistanceMatrix> {
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    let mut dist = vec![vec![0u32; n]; n];
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        let mut seen = vec![false; n];
        seen[s] = true;
        queue.clear();
        queue.push_back(s);
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    dist[s][w] = dist[s][v] + 1;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        if reached < n {
            return None;
        }
    }
    Some(
        DistanceMatrix::from_fn(n, |i, j| dist[i][j] as f64)
            .expect("hop counts are nonnegative"),
    )
}

/// Which i.i.d. law fills the off-diagonal entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomKind {
    Uniform,
    Exponential,
}

/// Random symmetric matrix with i.i.d. off-diagonal entries; `param` is
/// the rate for the exponential law and ignored for the uniform one.
pub fn gen_random(kind: RandomKind, n: usize, param: f64, seed: u64) -> Result<DistanceMatrix> {
    let mut rng = rng_for(seed, 0);
    match kind {
        RandomKind::Uniform => {
            let unit = Uniform::new(0.0f64, 1.0).expect("valid range");
            DistanceMatrix::from_fn(n, |_, _| unit.sample(&mut rng))
        }
        RandomKind::Exponential => {
            if param <= 0.0 {
                return Err(Error::InvalidSpec(format!("exponential rate {param} must be > 0")));
            }
            let exp = Exp::new(param)
                .map_err(|e| Error::InvalidSpec(format!("exponential rate: {e}")))?;
            DistanceMatrix::from_fn(n, |_, _| exp.sample(&mut rng))
        }
    }
}

/// Sign pattern of the injected corruption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptionSign {
    /// Uniform on [-scale * max, 0].
    Negative,
    /// Uniform on [0, scale * max].
    Positive,
    /// Uniform on [-scale * max, scale * max].
    Mixed,
    /// Each value -1 or +1 with equal probability.
    IntegerPm1,
}

impl CorruptionSign {
    pub fn name(self) -> &'static str {
        match self {
            CorruptionSign::Negative => "negative",
            CorruptionSign::Positive => "positive",
            CorruptionSign::Mixed => "mixed",
            CorruptionSign::IntegerPm1 => "integer-pm1",
        }
    }
}

/// Sparse corruption: `k` uniformly chosen pairs, values by sign/scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorruptionSpec {
    pub k: usize,
    pub sign: CorruptionSign,
    /// Value range as a fraction of the matrix max (default 1/8).
    pub scale: f64,
    pub seed: u64,
}

impl CorruptionSpec {
    pub fn new(k: usize, sign: CorruptionSign, seed: u64) -> Self {
        CorruptionSpec {
            k,
            sign,
            scale: 0.125,
            seed,
        }
    }
}

/// Apply sparse corruption: picks exactly `k` support pairs with a
/// dedicated stream, then draws values with another, resampling any value
/// that would push an entry negative (which keeps the law uniform on the
/// allowed range).
pub fn perturb(
    d: &DistanceMatrix,
    spec: &CorruptionSpec,
) -> Result<(DistanceMatrix, Perturbation)> {
    let n = d.n();
    let pairs = d.pair_count();
    if spec.k > pairs {
        return Err(Error::InvalidSpec(format!(
            "cannot corrupt {} of {} pairs",
            spec.k, pairs
        )));
    }
    // support: partial Fisher-Yates over the pair indices
    let mut support_rng = rng_for(spec.seed, STREAM_SUPPORT);
    let mut all: Vec<usize> = (0..pairs).collect();
    for t in 0..spec.k {
        let r = support_rng.random_range(t..pairs);
        all.swap(t, r);
    }
    let mut support: Vec<usize> = all[..spec.k].to_vec();
    support.sort_unstable();

    let max = d.max_entry();
    let amp = spec.scale * max;
    let mut value_rng = rng_for(spec.seed, STREAM_VALUE);
    let mut delta = Perturbation::new(n);
    for q in support {
        let (i, j) = pair_q_to_ij(q, n);
        let base = d.get(i, j);
        let mut accepted = None;
        for _ in 0..VALUE_RETRIES {
            let v = draw_value(spec.sign, amp, &mut value_rng);
            let corrupted = base + v;
            if corrupted < 0.0 {
                continue;
            }
            // Store the value actually applied in floating point so that
            // Dp - delta reproduces D bit-exactly; reject the rare draw
            // where the rounding round-trip does not close.
            let applied = corrupted - base;
            let sign_ok = match spec.sign {
                CorruptionSign::Negative => applied < 0.0,
                CorruptionSign::Positive => applied > 0.0,
                CorruptionSign::Mixed => applied != 0.0,
                CorruptionSign::IntegerPm1 => applied == 1.0 || applied == -1.0,
            };
            if sign_ok && corrupted - applied == base && base + applied == corrupted {
                accepted = Some(applied);
                break;
            }
        }
        match accepted {
            Some(v) => delta.set(i, j, v),
            None => {
                return Err(Error::CorruptionResample {
                    i,
                    j,
                    attempts: VALUE_RETRIES,
                })
            }
        }
    }
    let corrupted = delta.apply(d)?;
    Ok((corrupted, delta))
}

fn draw_value(sign: CorruptionSign, amp: f64, rng: &mut ChaCha8Rng) -> f64 {
    match sign {
        CorruptionSign::Negative => -rng.random::<f64>() * amp,
        CorruptionSign::Positive => rng.random::<f64>() * amp,
        CorruptionSign::Mixed => (2.0 * rng.random::<f64>() - 1.0) * amp,
        CorruptionSign::IntegerPm1 => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
    }
}

fn pair_q_to_ij(q: usize, n: usize) -> (usize, usize) {
    let mut i = 0;
    let mut offset = 0;
    loop {
        let row = n - 1 - i;
        if q < offset + row {
            return (i, q - offset + i + 1);
        }
        offset += row;
        i += 1;
    }
}

/// Monte Carlo estimate of the expected broken-triangle fraction of the
/// i.i.d. random model: mean over fresh draws of |T(D)| / triangle_count.
/// For Unif[0,1] the limit is 1/6; for Exp(lambda) it is 1/4.
pub fn broken_fraction(
    kind: RandomKind,
    n: usize,
    param: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    assert!(trials >= 1);
    let total = triangle_count(n).max(1) as f64;
    let mut acc = 0.0;
    for t in 0..trials {
        let trial_seed = derive_seed(seed, &[STREAM_TRIAL, t as u64]);
        let d = gen_random(kind, n, param, trial_seed)?;
        acc += broken_triangles(&d, DEFAULT_TOL).len() as f64 / total;
    }
    Ok(acc / trials as f64)
}
