//! Constellation systems: polynomial feasibility problems for candidate sets
//! of mutually unbiased bases, plus known-MUB fixtures and symmetry groups.
//!
//! A constellation `{a1,...,ak}_d` asks for `k` groups of orthonormal vectors
//! in dimension `d` (group sizes `a1..ak`), pairwise unbiased across groups.
//! After gauge fixing, existence is equivalent to a real polynomial system
//! having a solution; the builders here emit those systems with exact integer
//! coefficients.

mod builders;
mod fixtures;
mod symmetry;

pub use builders::{
    build_1111_2, build_5333_6_density, build_5333_6_density_with, build_5551_6,
    build_vector_system, MinorSet,
};
pub use fixtures::{check_mu, fourier_basis, mub_fixture, GroupPairDeviation, MuReport};
pub use symmetry::{
    constraint_action, constraint_action_on, symmetry_group_5551, verify_invariance,
    PermutationGroup,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polyring::Polynomial;

#[derive(Debug, Error)]
pub enum ConsysError {
    #[error("invalid constellation spec: {0}")]
    InvalidSpec(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("constraint index {idx} out of range ({len} constraints)")]
    BadIndex { idx: usize, len: usize },
    #[error("inconsistent system: {0}")]
    Inconsistent(String),
}

/// A constellation label `{a1,...,ak}_d`: `k` groups of orthonormal vectors
/// in dimension `d`, pairwise mutually unbiased across groups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstellationSpec {
    d: usize,
    groups: Vec<usize>,
}

impl ConstellationSpec {
    pub fn new(groups: Vec<usize>, d: usize) -> Result<Self, ConsysError> {
        if d < 1 {
            return Err(ConsysError::InvalidSpec("dimension must be positive".into()));
        }
        if groups.is_empty() {
            return Err(ConsysError::InvalidSpec("need at least one group".into()));
        }
        if let Some(&bad) = groups.iter().find(|&&a| a < 1 || a > d) {
            return Err(ConsysError::InvalidSpec(format!(
                "group size {bad} outside 1..={d}"
            )));
        }
        Ok(ConstellationSpec { d, groups })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn groups(&self) -> &[usize] {
        &self.groups
    }

    pub fn total_vectors(&self) -> usize {
        self.groups.iter().sum()
    }
}

impl std::fmt::Display for ConstellationSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sizes: Vec<String> = self.groups.iter().map(|a| a.to_string()).collect();
        write!(f, "{}@{}", sizes.join(","), self.d)
    }
}

impl std::str::FromStr for ConstellationSpec {
    type Err = ConsysError;

    /// Parse `"a1,a2,...,ak@d"`, e.g. `"5,5,5,1@6"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (sizes, dim) = s
            .split_once('@')
            .ok_or_else(|| ConsysError::InvalidSpec(format!("`{s}` is missing `@d`")))?;
        let d: usize = dim
            .trim()
            .parse()
            .map_err(|_| ConsysError::InvalidSpec(format!("bad dimension `{dim}`")))?;
        let groups = sizes
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<usize>()
                    .map_err(|_| ConsysError::InvalidSpec(format!("bad group size `{a}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        ConstellationSpec::new(groups, d)
    }
}

/// A polynomial feasibility system: `constraints = 0`, with an optional
/// objective to minimize over the constraint variety.
///
/// `spec` is a free-text provenance tag naming the generator and the
/// constellation (or whatever else produced the system).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolySystem {
    pub spec: String,
    pub nvars: usize,
    pub vars: Vec<String>,
    pub constraints: Vec<Polynomial>,
    pub objective: Option<Polynomial>,
}

impl PolySystem {
    /// Check the structural invariants: one shared variable count, matching
    /// name list. An empty constraint list is allowed (a fully gauge-fixed
    /// constellation generates one); algorithms that need constraints reject
    /// it at their own boundary.
    pub fn validate(&self) -> Result<(), ConsysError> {
        if self.vars.len() != self.nvars {
            return Err(ConsysError::Inconsistent(format!(
                "{} variable names for nvars {}",
                self.vars.len(),
                self.nvars
            )));
        }
        for (i, p) in self.constraints.iter().enumerate() {
            if p.nvars() != self.nvars {
                return Err(ConsysError::Inconsistent(format!(
                    "constraint {i} has {} variables, system has {}",
                    p.nvars(),
                    self.nvars
                )));
            }
        }
        if let Some(obj) = &self.objective {
            if obj.nvars() != self.nvars {
                return Err(ConsysError::Inconsistent(format!(
                    "objective has {} variables, system has {}",
                    obj.nvars(),
                    self.nvars
                )));
            }
        }
        Ok(())
    }

    /// Largest total degree over constraints and objective (0 for an empty
    /// system).
    pub fn max_degree(&self) -> u32 {
        self.constraints
            .iter()
            .chain(self.objective.iter())
            .filter_map(Polynomial::degree)
            .max()
            .unwrap_or(0)
    }

    /// Floating-point constraint residuals at a point, for witness checks.
    pub fn residuals_f64(&self, point: &[f64]) -> Result<Vec<f64>, ConsysError> {
        self.constraints
            .iter()
            .map(|p| {
                p.evaluate_f64(point)
                    .map_err(|e| ConsysError::ShapeMismatch(e.to_string()))
            })
            .collect()
    }
}

/// Move constraint `idx` (0-based) out of the constraint list and install its
/// square as the objective: minimize `p_idx^2` subject to the rest.
///
/// Replaces any existing objective.
pub fn promote_squared_objective(sys: &PolySystem, idx: usize) -> Result<PolySystem, ConsysError> {
    let len = sys.constraints.len();
    let p = sys
        .constraints
        .get(idx)
        .ok_or(ConsysError::BadIndex { idx, len })?
        .clone();
    let mut out = sys.clone();
    out.constraints.remove(idx);
    out.objective = Some(&p * &p);
    out.spec = format!("{}; objective=p{}^2", sys.spec, idx + 1);
    Ok(out)
}
