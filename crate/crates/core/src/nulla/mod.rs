//! Nullstellensatz certificate search (NulLA): a system `p_1 = ... = p_s = 0`
//! has no complex solution iff some cofactors `r_i` satisfy
//! `sum_i r_i p_i = 1`. For a fixed total degree `d` the identity is a linear
//! system in the cofactor coefficients, solved here exactly over the
//! rationals; an optional permutation symmetry collapses the system to orbit
//! variables.
//!
//! Everything in this module is exact — no floating point.

mod orbit;
mod solve;

pub use orbit::{orbit_reduce, ReducedSystem};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polyring::{Monomial, Polynomial, Rational};

#[derive(Debug, Error)]
pub enum NullaError {
    #[error("input system is empty")]
    EmptyInput,
    #[error("constraint {0} is the zero polynomial")]
    ZeroConstraint(usize),
    #[error("degree {d} is below the maximum constraint degree {max_deg}")]
    DegreeTooLow { d: u32, max_deg: u32 },
    #[error("certificate has {got} cofactors for {expected} constraints")]
    CofactorCount { expected: usize, got: usize },
    #[error("monomial count overflows: C({n}+{d}, {d})")]
    CountOverflow { n: usize, d: u32 },
    #[error("system is not invariant under the supplied group: {0}")]
    NotInvariant(String),
    #[error("resource cap exceeded: {message}")]
    Resource {
        message: String,
        /// Highest degree whose search completed before the cap fired.
        last_completed_degree: Option<u32>,
    },
}

/// A Nullstellensatz certificate: cofactors aligned with the constraint list
/// and the certificate degree `max_i deg(r_i p_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub cofactors: Vec<Polynomial>,
    pub degree: u32,
}

/// Descriptive statistics for reporting.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateStats {
    pub degree: u32,
    pub cofactor_terms: Vec<usize>,
    pub max_coeff_bits: u64,
}

pub fn certificate_stats(c: &Certificate) -> CertificateStats {
    CertificateStats {
        degree: c.degree,
        cofactor_terms: c.cofactors.iter().map(Polynomial::num_terms).collect(),
        max_coeff_bits: c.cofactors.iter().map(Polynomial::coeff_bits).max().unwrap_or(0),
    }
}

/// Hard limits for the search. Row/column caps are checked from the closed
/// formulas before any allocation; the bit cap is enforced during
/// elimination.
#[derive(Clone, Copy, Debug)]
pub struct ResourceCaps {
    pub max_rows: u64,
    pub max_cols: u64,
    pub max_coeff_bits: u64,
}

impl Default for ResourceCaps {
    fn default() -> Self {
        ResourceCaps {
            max_rows: 200_000,
            max_cols: 200_000,
            max_coeff_bits: 16_384,
        }
    }
}

impl ResourceCaps {
    pub fn unlimited() -> Self {
        ResourceCaps { max_rows: u64::MAX, max_cols: u64::MAX, max_coeff_bits: u64::MAX }
    }
}

/// `C(n+d, d)`: the number of monomials in `n` variables of degree `<= d`.
pub fn count_monomials(n: usize, d: u32) -> Result<u128, NullaError> {
    // C(n+d, min(n,d)) multiplicatively with exact division at each step.
    let overflow = || NullaError::CountOverflow { n, d };
    let k = (d as u128).min(n as u128);
    let top = n as u128 + d as u128;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc
            .checked_mul(top - k + i)
            .ok_or_else(overflow)?
            / i;
    }
    Ok(acc)
}

/// All monomials in `nvars` variables of total degree `<= d`, in canonical
/// (graded) order.
pub fn monomials_up_to(nvars: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut exps = vec![0u32; nvars];
    fn rec(out: &mut Vec<Monomial>, exps: &mut Vec<u32>, var: usize, left: u32) {
        if var + 1 == exps.len() {
            exps[var] = left;
            out.push(Monomial::new(exps.clone()));
            return;
        }
        for e in 0..=left {
            exps[var] = e;
            rec(out, exps, var + 1, left - e);
        }
        exps[var] = 0;
    }
    if nvars == 0 {
        return vec![Monomial::constant(0)];
    }
    for deg in 0..=d {
        // Within a degree, generation below is ascending in the *last-first*
        // sense; sort the block into canonical order afterwards.
        let start = out.len();
        rec(&mut out, &mut exps, 0, deg);
        out[start..].sort();
    }
    out
}

/// The NulLA linear system at degree `d`: rows indexed by monomials of
/// degree `<= d`, columns by pairs `(x^delta, i)` with
/// `deg(delta) <= d - deg(p_i)`; entry = coefficient of the row monomial in
/// `x^delta * p_i`. The right-hand side is 1 at the constant row.
#[derive(Clone)]
pub struct LinearSystem {
    pub nvars: usize,
    pub degree: u32,
    /// Row labels in canonical order; the constant monomial is row 0.
    pub rows: Vec<Monomial>,
    /// Column labels, grouped by constraint then canonical delta order.
    pub cols: Vec<(Monomial, usize)>,
    /// Column-major sparse entries: `(row, coefficient)` sorted by row.
    pub entries: Vec<Vec<(usize, Rational)>>,
}

impl LinearSystem {
    /// Index of the right-hand-side row (the constant monomial).
    pub fn b_row(&self) -> usize {
        0
    }

    /// The dense right-hand side: 1 at the constant row, 0 elsewhere.
    pub fn b(&self) -> Vec<Rational> {
        let mut b = vec![Rational::from(num::BigInt::from(0)); self.rows.len()];
        b[self.b_row()] = Rational::from(num::BigInt::from(1));
        b
    }
}

fn check_constraints(constraints: &[Polynomial]) -> Result<u32, NullaError> {
    if constraints.is_empty() {
        return Err(NullaError::EmptyInput);
    }
    let mut max_deg = 0;
    for (i, p) in constraints.iter().enumerate() {
        match p.degree() {
            None => return Err(NullaError::ZeroConstraint(i)),
            Some(deg) => max_deg = max_deg.max(deg),
        }
    }
    Ok(max_deg)
}

/// Build the NulLA system at degree `d`. Requires `d >= max_i deg(p_i)`.
pub fn build_linear_system(
    constraints: &[Polynomial],
    d: u32,
) -> Result<LinearSystem, NullaError> {
    let max_deg = check_constraints(constraints)?;
    if d < max_deg {
        return Err(NullaError::DegreeTooLow { d, max_deg });
    }
    Ok(build_relaxed(constraints, d))
}

/// Same construction but with no lower bound on `d`: constraints of degree
/// above `d` simply contribute no columns. Used by the minimal-degree probe;
/// the public entry point keeps the documented precondition.
pub(crate) fn build_relaxed(constraints: &[Polynomial], d: u32) -> LinearSystem {
    let nvars = constraints[0].nvars();
    let rows = monomials_up_to(nvars, d);
    debug_assert!(rows[0].is_constant());
    let row_index: std::collections::HashMap<&Monomial, usize> =
        rows.iter().enumerate().map(|(i, m)| (m, i)).collect();

    let mut cols: Vec<(Monomial, usize)> = Vec::new();
    for (i, p) in constraints.iter().enumerate() {
        let deg = p.degree().expect("checked nonzero");
        if deg > d {
            continue;
        }
        for delta in monomials_up_to(nvars, d - deg) {
            cols.push((delta, i));
        }
    }

    // Column assembly is embarrassingly parallel; collect preserves order.
    let entries: Vec<Vec<(usize, Rational)>> = cols
        .par_iter()
        .map(|(delta, i)| {
            let mut col: Vec<(usize, Rational)> = constraints[*i]
                .terms()
                .map(|(m, c)| (row_index[&m.mul(delta)], c.clone()))
                .collect();
            col.sort_by_key(|(r, _)| *r);
            col
        })
        .collect();

    LinearSystem { nvars, degree: d, rows, cols, entries }
}

/// Solve `M y = b` exactly. `None` when inconsistent; otherwise a solution
/// with free columns set to zero.
pub fn solve_exact(ls: &LinearSystem) -> Option<Vec<Rational>> {
    solve_capped(ls, u64::MAX).expect("no caps can fire")
}

pub(crate) fn solve_capped(
    ls: &LinearSystem,
    max_coeff_bits: u64,
) -> Result<Option<Vec<Rational>>, NullaError> {
    let rows = solve::rows_from_columns(ls.rows.len(), &ls.entries, ls.b_row());
    solve::solve_rows(rows, ls.cols.len(), max_coeff_bits)
}

/// Assemble cofactors from a coefficient vector over `(delta, i)` columns.
pub(crate) fn cofactors_from_solution(
    constraints: &[Polynomial],
    cols: &[(Monomial, usize)],
    y: &[Rational],
) -> Certificate {
    let nvars = constraints[0].nvars();
    let mut cofactors = vec![Polynomial::zero(nvars); constraints.len()];
    for ((delta, i), coeff) in cols.iter().zip(y) {
        if num::Zero::is_zero(coeff) {
            continue;
        }
        cofactors[*i] = &cofactors[*i] + &Polynomial::term(nvars, delta.clone(), coeff.clone());
    }
    let degree = cofactors
        .iter()
        .zip(constraints)
        .filter_map(|(r, p)| Some(r.degree()? + p.degree()?))
        .max()
        .unwrap_or(0);
    Certificate { cofactors, degree }
}

/// Is `sum_i r_i p_i - 1` exactly the zero polynomial?
pub fn verify(constraints: &[Polynomial], cert: &Certificate) -> Result<bool, NullaError> {
    if cert.cofactors.len() != constraints.len() {
        return Err(NullaError::CofactorCount {
            expected: constraints.len(),
            got: cert.cofactors.len(),
        });
    }
    if constraints.is_empty() {
        return Err(NullaError::EmptyInput);
    }
    let nvars = constraints[0].nvars();
    let mut acc = Polynomial::zero(nvars);
    for (r, p) in cert.cofactors.iter().zip(constraints) {
        acc = &acc + &(r * p);
    }
    Ok(acc.is_one())
}

/// Search for a certificate of degree `<= d_max` with default resource caps,
/// starting at the maximum constraint degree.
pub fn nulla_search(
    constraints: &[Polynomial],
    d_max: u32,
) -> Result<Option<Certificate>, NullaError> {
    nulla_search_with(constraints, d_max, &ResourceCaps::default(), None)
}

/// Full-control search. With a symmetry group the system is orbit-reduced
/// first and a symmetric certificate is searched; per the one-sided
/// soundness of the reduction, a miss at degree `d` then means "no symmetric
/// certificate at `d`", not "no certificate".
///
/// Every returned certificate has passed [`verify`].
pub fn nulla_search_with(
    constraints: &[Polynomial],
    d_max: u32,
    caps: &ResourceCaps,
    group: Option<&crate::consys::PermutationGroup>,
) -> Result<Option<Certificate>, NullaError> {
    let max_deg = check_constraints(constraints)?;
    let nvars = constraints[0].nvars();
    let mut last_completed: Option<u32> = None;

    for d in max_deg..=d_max {
        // Closed-form size check before any allocation.
        let rows = count_monomials(nvars, d)?;
        let mut cols: u128 = 0;
        for p in constraints {
            let deg = p.degree().expect("checked nonzero");
            cols += count_monomials(nvars, d - deg)?;
        }
        if rows > caps.max_rows as u128 || cols > caps.max_cols as u128 {
            return Err(NullaError::Resource {
                message: format!(
                    "degree {d} needs a {rows} x {cols} system (caps: {} x {})",
                    caps.max_rows, caps.max_cols
                ),
                last_completed_degree: last_completed,
            });
        }

        let found = match group {
            None => {
                let ls = build_linear_system(constraints, d)?;
                solve_capped(&ls, caps.max_coeff_bits)
                    .map_err(|e| attach_degree(e, last_completed))?
                    .map(|y| cofactors_from_solution(constraints, &ls.cols, &y))
            }
            Some(g) => {
                let red = orbit_reduce(constraints, d, g)?;
                red.solve_capped(caps.max_coeff_bits)
                    .map_err(|e| attach_degree(e, last_completed))?
                    .map(|y| cofactors_from_solution(constraints, red.full_cols(), &y))
            }
        };
        if let Some(cert) = found {
            debug_assert!(matches!(verify(constraints, &cert), Ok(true)));
            if !verify(constraints, &cert)? {
                // An exact-arithmetic solution that fails the symbolic check
                // would be a bug, not a math outcome; refuse to return it.
                return Err(NullaError::Resource {
                    message: "internal error: solved system produced a non-certificate".into(),
                    last_completed_degree: last_completed,
                });
            }
            return Ok(Some(cert));
        }
        last_completed = Some(d);
    }
    Ok(None)
}

fn attach_degree(e: NullaError, last: Option<u32>) -> NullaError {
    match e {
        NullaError::Resource { message, .. } => NullaError::Resource {
            message,
            last_completed_degree: last,
        },
        other => other,
    }
}
