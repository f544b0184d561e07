//! Order-`k` moment relaxations of polynomial optimization problems.
//!
//! For `minimize p_0(x) subject to p_1(x) = ... = p_s(x) = 0`, the order-`k`
//! relaxation optimizes over a moment vector `y = (y_alpha)` for `|alpha| <=
//! 2k`: it minimizes the linear functional `L_y(p_0)` subject to
//!
//! * normalization `y_0 = 1` (the moments of a probability measure),
//! * the moment matrix `M_k(y) = (y_{alpha+beta})` being PSD, and
//! * the equality ideal rows `L_y(p_i * x^delta) = 0` for every monomial
//!   `x^delta` with `|delta| <= 2k - deg(p_i)`.
//!
//! The optimum lower-bounds the polynomial minimum at every order, and the
//! bounds are non-decreasing in `k`. A strictly positive bound certifies that
//! the equations have no real solution. Equalities are imposed as linear
//! functionals over the ideal (exact for equations and smaller than two-sided
//! localizing matrices).
//!
//! The relaxation is assembled as a single dense PSD block over the moment
//! matrix, with one equality row per repeated moment entry (consistency), per
//! ideal row (localizing), plus the normalization. Moments are indexed in
//! graded order so emitted SDP files are reproducible.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num::One;
use serde::Serialize;
use thiserror::Error;

use crate::nulla::monomials_up_to;
use crate::polyring::{rational_to_f64, Monomial, Polynomial, Rational};
use crate::sdp::{self, SdpConstraint, SdpError, SdpOptions, SdpProblem, SdpSolution, SdpStatus};

#[derive(Debug, Error)]
pub enum LasserreError {
    #[error("constraint {0} is the zero polynomial")]
    ZeroConstraint(usize),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("order {k} is too small: this problem needs order at least {min_order}")]
    OrderTooSmall { k: u32, min_order: u32 },
    #[error(transparent)]
    Sdp(#[from] SdpError),
}

/// Structural summary of a built relaxation, serializable for run manifests.
#[derive(Clone, Debug, Serialize)]
pub struct RelaxationMeta {
    /// Half-degree order `k` of the relaxation.
    pub order: u32,
    /// Smallest admissible order for this problem (`ceil(maxdeg / 2)`).
    pub min_order: u32,
    /// 1-based position in the hierarchy: `order - min_order + 1`. The first
    /// admissible relaxation is level 1, the next level 2, and so on.
    pub level: u32,
    pub nvars: usize,
    /// Moment-matrix side length `C(n+k, k)`.
    pub matrix_size: usize,
    /// Number of distinct moments `y_alpha`, `|alpha| <= 2k`.
    pub moment_count: usize,
    pub normalization_rows: usize,
    pub consistency_rows: usize,
    pub localizing_rows: usize,
}

/// A built order-`k` moment relaxation: the moment-index tables plus the
/// assembled SDP.
#[derive(Clone, Debug)]
pub struct MomentRelaxation {
    k: u32,
    min_order: u32,
    nvars: usize,
    /// Monomials of degree `<= k`, in graded order; row/column labels of the
    /// moment matrix. `basis[0]` is the constant monomial.
    basis: Vec<Monomial>,
    /// Monomials of degree `<= 2k`, in graded order; labels of the moment
    /// vector `y`.
    moments: Vec<Monomial>,
    /// For each moment, its representative position `(i, j)`, `i <= j`, in
    /// the moment matrix: the first position in column-scan order with
    /// `basis[i] * basis[j]` equal to the moment.
    rep: Vec<(usize, usize)>,
    consistency_rows: usize,
    localizing_rows: usize,
    sdp: SdpProblem,
}

impl MomentRelaxation {
    pub fn order(&self) -> u32 {
        self.k
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Moment-matrix row/column labels (degree `<= k`, graded order).
    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    /// Moment-vector labels (degree `<= 2k`, graded order).
    pub fn moments(&self) -> &[Monomial] {
        &self.moments
    }

    /// For each moment (parallel to [`Self::moments`]), the moment-matrix
    /// position `(i, j)`, `i <= j`, that carries its value; all other
    /// positions with the same product monomial are tied to it by
    /// consistency rows.
    pub fn representatives(&self) -> &[(usize, usize)] {
        &self.rep
    }

    /// Side length of the moment matrix.
    pub fn matrix_size(&self) -> usize {
        self.basis.len()
    }

    /// The assembled SDP: one dense PSD block of side [`Self::matrix_size`].
    pub fn sdp(&self) -> &SdpProblem {
        &self.sdp
    }

    pub fn into_sdp(self) -> SdpProblem {
        self.sdp
    }

    pub fn meta(&self) -> RelaxationMeta {
        RelaxationMeta {
            order: self.k,
            min_order: self.min_order,
            level: self.k - self.min_order + 1,
            nvars: self.nvars,
            matrix_size: self.basis.len(),
            moment_count: self.moments.len(),
            normalization_rows: 1,
            consistency_rows: self.consistency_rows,
            localizing_rows: self.localizing_rows,
        }
    }

    /// Solve the relaxation with the internal solver. The primal value is the
    /// lower bound.
    pub fn solve(&self, opts: &SdpOptions) -> Result<SdpSolution, LasserreError> {
        Ok(sdp::solve(&self.sdp, opts)?)
    }

    /// The moment matrix of the Dirac measure at `point`: the rank-one outer
    /// product `v v^T` with `v_i = point^{basis[i]}`. For a feasible point it
    /// satisfies every constraint row of the relaxation.
    pub fn dirac_moment_matrix(&self, point: &[f64]) -> Result<DMatrix<f64>, LasserreError> {
        if point.len() != self.nvars {
            return Err(LasserreError::Shape(format!(
                "point has {} coordinates, relaxation has {} variables",
                point.len(),
                self.nvars
            )));
        }
        let v = DVector::from_iterator(
            self.basis.len(),
            self.basis.iter().map(|m| eval_monomial(m, point)),
        );
        Ok(&v * v.transpose())
    }
}

fn eval_monomial(m: &Monomial, point: &[f64]) -> f64 {
    m.exps()
        .iter()
        .zip(point)
        .map(|(&e, &x)| x.powi(e as i32))
        .product()
}

/// Accumulate weight `w` on the symmetric entry pair `(i, j)` so that
/// `<A, X> ` picks up `w * X[i, j]` for symmetric `X`.
fn add_sym(a: &mut DMatrix<f64>, i: usize, j: usize, w: f64) {
    if i == j {
        a[(i, i)] += w;
    } else {
        a[(i, j)] += w / 2.0;
        a[(j, i)] += w / 2.0;
    }
}

/// Build the order-`k` moment relaxation of `minimize objective subject to
/// eqs = 0`. Requires `2k >= deg(objective)` and `2k >= deg(p)` for every
/// equation `p`; an empty equation list gives the unconstrained moment
/// relaxation.
pub fn build_moment_relaxation(
    objective: &Polynomial,
    eqs: &[Polynomial],
    k: u32,
) -> Result<MomentRelaxation, LasserreError> {
    let nvars = objective.nvars();
    for (i, p) in eqs.iter().enumerate() {
        if p.nvars() != nvars {
            return Err(LasserreError::Shape(format!(
                "equation {i} has {} variables, objective has {nvars}",
                p.nvars()
            )));
        }
        if p.is_zero() {
            return Err(LasserreError::ZeroConstraint(i));
        }
    }
    let required = eqs
        .iter()
        .filter_map(Polynomial::degree)
        .chain(objective.degree())
        .max()
        .unwrap_or(0);
    let min_order = required.div_ceil(2);
    if k < min_order {
        return Err(LasserreError::OrderTooSmall { k, min_order });
    }

    let basis = monomials_up_to(nvars, k);
    let moments = monomials_up_to(nvars, 2 * k);
    let m = basis.len();
    let moment_index: HashMap<&Monomial, usize> =
        moments.iter().enumerate().map(|(i, mo)| (mo, i)).collect();

    // Representative positions: first (i, j) in column-scan order (j outer,
    // i <= j inner) whose product monomial is the moment. Every moment of
    // degree <= 2k splits as a product of two basis monomials, so the scan
    // covers all of them.
    let mut rep: Vec<Option<(usize, usize)>> = vec![None; moments.len()];
    for j in 0..m {
        for i in 0..=j {
            let alpha = basis[i].mul(&basis[j]);
            let idx = moment_index[&alpha];
            if rep[idx].is_none() {
                rep[idx] = Some((i, j));
            }
        }
    }
    let rep: Vec<(usize, usize)> = rep
        .into_iter()
        .map(|r| r.expect("every moment up to degree 2k is a product of two basis monomials"))
        .collect();

    let zeros = || DMatrix::<f64>::zeros(m, m);
    let mut constraints = Vec::new();

    // Normalization y_0 = 1: basis[0] is the constant monomial, and the
    // representative of the constant moment is (0, 0).
    let mut norm = zeros();
    norm[(0, 0)] = 1.0;
    constraints.push(SdpConstraint { matrices: vec![norm], rhs: 1.0 });

    // Consistency: every non-representative entry equals its representative.
    let mut consistency_rows = 0;
    for j in 0..m {
        for i in 0..=j {
            let alpha = basis[i].mul(&basis[j]);
            let (ri, rj) = rep[moment_index[&alpha]];
            if (ri, rj) == (i, j) {
                continue;
            }
            let mut a = zeros();
            add_sym(&mut a, i, j, 1.0);
            add_sym(&mut a, ri, rj, -1.0);
            constraints.push(SdpConstraint { matrices: vec![a], rhs: 0.0 });
            consistency_rows += 1;
        }
    }

    // Localizing rows: L_y(p_i * x^delta) = 0, one row per (equation, delta)
    // with |delta| <= 2k - deg(p_i), written on representative entries.
    let one = Rational::one();
    let mut localizing_rows = 0;
    for p in eqs {
        let dp = p.degree().expect("zero equations rejected above");
        for delta in monomials_up_to(nvars, 2 * k - dp) {
            let q = p.mul_term(&delta, &one);
            let mut a = zeros();
            for (mono, coeff) in q.terms() {
                let (ri, rj) = rep[moment_index[mono]];
                add_sym(&mut a, ri, rj, rational_to_f64(coeff));
            }
            constraints.push(SdpConstraint { matrices: vec![a], rhs: 0.0 });
            localizing_rows += 1;
        }
    }

    // Objective L_y(p_0) on representative entries (the constant term lands
    // on the (0, 0) entry, whose value is fixed to 1).
    let mut c = zeros();
    for (mono, coeff) in objective.terms() {
        let (ri, rj) = rep[moment_index[mono]];
        add_sym(&mut c, ri, rj, rational_to_f64(coeff));
    }

    let sdp = SdpProblem::new(vec![m as i32], vec![c], constraints)?;
    Ok(MomentRelaxation {
        k,
        min_order,
        nvars,
        basis,
        moments,
        rep,
        consistency_rows,
        localizing_rows,
        sdp,
    })
}

/// A solved lower bound: the relaxation optimum with the solver's own audit
/// fields.
#[derive(Clone, Debug)]
pub struct Bound {
    pub value: f64,
    pub status: SdpStatus,
    pub eq_residual: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    pub meta: RelaxationMeta,
}

/// Build and solve the order-`k` relaxation; `value` lower-bounds the
/// minimum of `objective` over the real variety of `eqs`.
pub fn lower_bound(
    objective: &Polynomial,
    eqs: &[Polynomial],
    k: u32,
    opts: &SdpOptions,
) -> Result<Bound, LasserreError> {
    let relax = build_moment_relaxation(objective, eqs, k)?;
    let sol = relax.solve(opts)?;
    Ok(Bound {
        value: sol.primal_value,
        status: sol.status,
        eq_residual: sol.eq_residual,
        duality_gap: sol.duality_gap,
        iterations: sol.iterations,
        meta: relax.meta(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consys::{build_1111_2, promote_squared_objective, PolySystem};
    use crate::polyring::{parse_polynomial, ratio};
    use approx::assert_abs_diff_eq;

    /// Eq-style quartet problem: minimize p1^2 over the variety of the
    /// remaining four equations. Its exact minimum is 4 - 2*sqrt(3) at
    /// x = ((sqrt(3)-1)/2, (sqrt(3)-1)/2, 0, +-1).
    fn quartet_problem() -> PolySystem {
        promote_squared_objective(&build_1111_2(), 0).unwrap()
    }

    fn quartet_minimum() -> f64 {
        4.0 - 2.0 * 3.0_f64.sqrt()
    }

    fn quartet_minimizer() -> [f64; 4] {
        let t = (3.0_f64.sqrt() - 1.0) / 2.0;
        [t, t, 0.0, 1.0]
    }

    #[test]
    fn unconstrained_squares_are_exact_at_order_one() {
        // minimize x^2: moment matrix [[1, y1], [y1, y2]], minimize y2.
        let x2 = parse_polynomial(1, &["x"], "x^2").unwrap();
        let b = lower_bound(&x2, &[], 1, &SdpOptions::default()).unwrap();
        assert_eq!(b.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(b.value, 0.0, epsilon = 1e-6);
        assert_eq!(b.meta.matrix_size, 2);
        assert_eq!(b.meta.moment_count, 3);
        assert_eq!(b.meta.consistency_rows, 0);

        // minimize (x-1)^2 = x^2 - 2x + 1: exact as well.
        let shifted = parse_polynomial(1, &["x"], "x^2 - 2*x + 1").unwrap();
        let b = lower_bound(&shifted, &[], 1, &SdpOptions::default()).unwrap();
        assert_eq!(b.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(b.value, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn order_below_the_degree_is_rejected() {
        let x4 = parse_polynomial(1, &["x"], "x^4").unwrap();
        match build_moment_relaxation(&x4, &[], 1) {
            Err(LasserreError::OrderTooSmall { k: 1, min_order: 2 }) => {}
            other => panic!("expected OrderTooSmall, got {other:?}"),
        }
        let x = parse_polynomial(1, &["x"], "x").unwrap();
        let cubic = parse_polynomial(1, &["x"], "x^3 - 1").unwrap();
        match build_moment_relaxation(&x, std::slice::from_ref(&cubic), 1) {
            Err(LasserreError::OrderTooSmall { k: 1, min_order: 2 }) => {}
            other => panic!("expected OrderTooSmall, got {other:?}"),
        }
        // Order 2 admits the degree-3 equation.
        assert!(build_moment_relaxation(&x, &[cubic], 2).is_ok());
    }

    #[test]
    fn zero_and_mismatched_inputs_are_rejected() {
        let x = parse_polynomial(1, &["x"], "x").unwrap();
        let zero = Polynomial::zero(1);
        match build_moment_relaxation(&x, &[zero], 1) {
            Err(LasserreError::ZeroConstraint(0)) => {}
            other => panic!("expected ZeroConstraint, got {other:?}"),
        }
        let y2 = Polynomial::var(2, 1);
        match build_moment_relaxation(&x, &[y2], 1) {
            Err(LasserreError::Shape(_)) => {}
            other => panic!("expected Shape, got {other:?}"),
        }
    }

    #[test]
    fn moment_table_shapes_for_the_quartet_problem() {
        let sys = quartet_problem();
        let obj = sys.objective.as_ref().unwrap();
        let relax = build_moment_relaxation(obj, &sys.constraints, 2).unwrap();
        // C(4+2, 2) = 15 basis monomials, C(4+4, 4) = 70 moments.
        assert_eq!(relax.matrix_size(), 15);
        assert_eq!(relax.moments().len(), 70);
        assert_eq!(relax.sdp().blocks, vec![15]);
        // 120 upper-triangle entries carry 70 distinct moments.
        let meta = relax.meta();
        assert_eq!(meta.consistency_rows, 120 - 70);
        // Three degree-2 equations with C(4+2, 2) = 15 shift monomials each,
        // plus the degree-4 equation with only the constant shift.
        assert_eq!(meta.localizing_rows, 3 * 15 + 1);
        assert_eq!(meta.min_order, 2);
        assert_eq!(meta.level, 1);

        let relax3 = build_moment_relaxation(obj, &sys.constraints, 3).unwrap();
        assert_eq!(relax3.matrix_size(), 35);
        assert_eq!(relax3.moments().len(), 210);
        assert_eq!(relax3.meta().level, 2);

        let json = serde_json::to_value(relax3.meta()).unwrap();
        assert_eq!(json["order"], 3);
        assert_eq!(json["matrix_size"], 35);
    }

    #[test]
    fn dirac_moments_satisfy_every_relaxation_row() {
        let sys = quartet_problem();
        let obj = sys.objective.as_ref().unwrap();
        let point = quartet_minimizer();
        for k in [2u32, 3] {
            let relax = build_moment_relaxation(obj, &sys.constraints, k).unwrap();
            let x = relax.dirac_moment_matrix(&point).unwrap();
            // Every equality row vanishes (normalization row equals 1).
            for (ci, con) in relax.sdp().constraints.iter().enumerate() {
                let val = (&con.matrices[0] * &x).trace();
                assert!(
                    (val - con.rhs).abs() <= 1e-10,
                    "order {k}, row {ci}: {val} vs {}",
                    con.rhs
                );
            }
            // The matrix is PSD of rank one: top eigenvalue positive, the
            // rest zero to rounding.
            let mut eigs: Vec<f64> =
                nalgebra::SymmetricEigen::new(x.clone()).eigenvalues.iter().copied().collect();
            eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
            assert!(eigs[0] > 1.0);
            assert!(eigs[1].abs() <= 1e-10);
            assert!(eigs.last().unwrap().abs() <= 1e-10);
            // The objective row evaluates to the true objective value.
            let val = (&relax.sdp().objective[0] * &x).trace();
            assert_abs_diff_eq!(val, quartet_minimum(), epsilon = 1e-12);
        }
    }

    #[test]
    fn quartet_first_level_bound_is_zero() {
        let sys = quartet_problem();
        let obj = sys.objective.as_ref().unwrap();
        let b = lower_bound(obj, &sys.constraints, 2, &SdpOptions::default()).unwrap();
        assert_eq!(b.status, SdpStatus::Optimal);
        assert!(b.value.abs() <= 1e-4, "level-1 bound should vanish, got {}", b.value);
    }

    #[test]
    fn quartet_second_level_bound_is_the_exact_minimum() {
        let sys = quartet_problem();
        let obj = sys.objective.as_ref().unwrap();
        let opts = SdpOptions { tol: 1e-6, ..SdpOptions::default() };
        let b = lower_bound(obj, &sys.constraints, 3, &opts).unwrap();
        assert_eq!(b.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(b.value, quartet_minimum(), epsilon = 0.01);
        // Strictly positive: certifies the promoted equation cannot vanish on
        // the variety of the others.
        assert!(b.value > 0.1);
    }

    #[test]
    fn bounds_are_monotone_and_sound() {
        let sys = quartet_problem();
        let obj = sys.objective.as_ref().unwrap();
        let point = quartet_minimizer();
        // The witness point satisfies the four equations.
        for r in sys.residuals_f64(&point).unwrap() {
            assert!(r.abs() <= 1e-12);
        }
        let truth = obj.evaluate_f64(&point).unwrap();
        assert_abs_diff_eq!(truth, quartet_minimum(), epsilon = 1e-12);

        let opts = SdpOptions { tol: 1e-6, ..SdpOptions::default() };
        let b2 = lower_bound(obj, &sys.constraints, 2, &opts).unwrap();
        let b3 = lower_bound(obj, &sys.constraints, 3, &opts).unwrap();
        let slack = 2e-4;
        assert!(b2.value <= b3.value + slack);
        assert!(b2.value <= truth + slack);
        assert!(b3.value <= truth + slack);
    }

    #[test]
    fn ratio_coefficients_survive_the_float_conversion() {
        // minimize (1/4)x^2 - x + 1 = (x/2 - 1)^2: minimum 0 at x = 2.
        let p = Polynomial::from_terms(
            1,
            vec![
                (Monomial::var(1, 0).mul(&Monomial::var(1, 0)), ratio(1, 4)),
                (Monomial::var(1, 0), ratio(-1, 1)),
                (Monomial::constant(1), ratio(1, 1)),
            ],
        );
        let b = lower_bound(&p, &[], 1, &SdpOptions::default()).unwrap();
        assert_eq!(b.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(b.value, 0.0, epsilon = 1e-6);
    }
}
