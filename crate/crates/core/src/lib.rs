//! Sparse metric repair: given a corrupted symmetric distance matrix, find
//! a sparse perturbation restoring every triangle inequality.
//!
//! Three repair modes are supported, each with combinatorial algorithms and
//! an l1 convex-relaxation baseline backed by an internal LP solver:
//!
//! - decrease-only: Floyd-Warshall APSP, certified sparsest ([`fw_domr`],
//!   [`fw_prior`]);
//! - increase-only: a raising sweep and oracle-guided repair
//!   ([`iomr_repair`], [`oracle_iomr`]);
//! - general: a two-pass counting heuristic and the additive-shift
//!   baseline ([`heuristic_repair`], [`shift_repair`]).
//!
//! [`instances`] generates reproducible corrupted benchmark instances.

mod domr;
mod error;
mod general;
mod iomr;
pub mod instances;
pub mod l1;
mod matrix;
mod perturbation;
mod triangle;

pub use domr::{fw_domr, fw_prior, DomrResult};
pub use error::{Error, Result};
pub use general::{heuristic_prior, heuristic_repair, shift_repair, GeneralResult};
pub use iomr::{
    build_oracle, iomr_prior, iomr_repair, oracle_feasible, oracle_iomr, IomrResult,
    OracleStrategy,
};
pub use l1::{build_metric_lp, irl1_repair, l1_repair, solve_lp, L1Result, LpInstance, SolverStatus};
pub use matrix::{DistanceMatrix, OracleMask};
pub use perturbation::{support_threshold, Perturbation, SUPPORT_REL_THRESHOLD};
pub use triangle::{
    broken_triangles, extend_broken, is_metric, max_violation, triangle_count, violation_counts,
    Triangle, ViolationCounts, DEFAULT_TOL,
};

/// Sign constraint on the repair perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RepairMode {
    /// P <= 0: only decrease distances.
    DecreaseOnly,
    /// P >= 0: only increase distances.
    IncreaseOnly,
    /// No sign restriction.
    General,
}

impl RepairMode {
    pub fn name(self) -> &'static str {
        match self {
            RepairMode::DecreaseOnly => "domr",
            RepairMode::IncreaseOnly => "iomr",
            RepairMode::General => "general",
        }
    }
}

impl std::str::FromStr for RepairMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "domr" | "decrease-only" => Ok(RepairMode::DecreaseOnly),
            "iomr" | "increase-only" => Ok(RepairMode::IncreaseOnly),
            "general" => Ok(RepairMode::General),
            other => Err(format!("unknown repair mode: {other}")),
        }
    }
}
