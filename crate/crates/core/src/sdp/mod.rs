//! A small dense SDP solver for equality-constrained problems over the PSD
//! cone, in standard primal form
//!
//! ```text
//!     minimize    <C, X>
//!     subject to  <A_i, X> = b_i,   X >= 0 (block-diagonal),
//! ```
//!
//! solved by first-order operator splitting (ADMM): each iteration projects
//! onto the affine subspace (through a precomputed pseudo-inverse of `A Aᵀ`)
//! and onto the PSD cone (per-block eigendecomposition), with over-relaxation
//! and residual-balancing step-size adaptation. Moderate accuracy by design;
//! every reported residual is recomputed from the returned matrices.
//!
//! The [`sdpa`] submodule reads and writes SDPA sparse files (`.dat-s`) so
//! instances beyond desk scale can be handed to external solvers.

pub mod sdpa;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("matrix {which} is not symmetric (deviation {dev:.3e})")]
    NotSymmetric { which: String, dev: f64 },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One equality constraint `sum_blocks <matrices[b], X_b> = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpConstraint {
    pub matrices: Vec<DMatrix<f64>>,
    pub rhs: f64,
}

/// Block-diagonal SDP data. `blocks[b] > 0` is a dense symmetric block;
/// `blocks[b] < 0` is a diagonal block of size `-blocks[b]` (its matrices
/// must be diagonal).
#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<i32>,
    pub objective: Vec<DMatrix<f64>>,
    pub constraints: Vec<SdpConstraint>,
}

impl SdpProblem {
    pub fn new(
        blocks: Vec<i32>,
        objective: Vec<DMatrix<f64>>,
        constraints: Vec<SdpConstraint>,
    ) -> Result<Self, SdpError> {
        let p = SdpProblem { blocks, objective, constraints };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        if self.blocks.is_empty() {
            return Err(SdpError::Shape("no blocks".into()));
        }
        if self.blocks.iter().any(|&s| s == 0) {
            return Err(SdpError::Shape("zero-size block".into()));
        }
        check_block_matrices(&self.blocks, &self.objective, "objective")?;
        for (k, con) in self.constraints.iter().enumerate() {
            check_block_matrices(&self.blocks, &con.matrices, &format!("constraint {k}"))?;
            if !con.rhs.is_finite() {
                return Err(SdpError::Shape(format!("constraint {k} has non-finite rhs")));
            }
        }
        Ok(())
    }

    /// Total matrix size (sum of absolute block sizes).
    pub fn total_size(&self) -> usize {
        self.blocks.iter().map(|s| s.unsigned_abs() as usize).sum()
    }

    /// Length of the symmetric vectorization over all blocks.
    pub fn svec_len(&self) -> usize {
        self.blocks
            .iter()
            .map(|&s| {
                let n = s.unsigned_abs() as usize;
                if s > 0 { n * (n + 1) / 2 } else { n }
            })
            .sum()
    }
}

fn check_block_matrices(
    blocks: &[i32],
    mats: &[DMatrix<f64>],
    which: &str,
) -> Result<(), SdpError> {
    if mats.len() != blocks.len() {
        return Err(SdpError::Shape(format!(
            "{which}: {} block matrices for {} blocks",
            mats.len(),
            blocks.len()
        )));
    }
    for (b, (m, &size)) in mats.iter().zip(blocks).enumerate() {
        let n = size.unsigned_abs() as usize;
        if m.nrows() != n || m.ncols() != n {
            return Err(SdpError::Shape(format!(
                "{which}, block {b}: matrix is {}x{}, block size {n}",
                m.nrows(),
                m.ncols()
            )));
        }
        let dev = (m - m.transpose()).amax();
        if dev > 1e-12 {
            return Err(SdpError::NotSymmetric { which: format!("{which}, block {b}"), dev });
        }
        if size < 0 {
            for i in 0..n {
                for j in 0..n {
                    if i != j && m[(i, j)] != 0.0 {
                        return Err(SdpError::Shape(format!(
                            "{which}, block {b}: off-diagonal entry in a diagonal block"
                        )));
                    }
                }
            }
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(SdpError::Shape(format!("{which}, block {b}: non-finite entry")));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    InfeasibleDetected,
}

#[derive(Clone, Copy, Debug)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Over-relaxation coefficient of the splitting step.
    pub over_relaxation: f64,
    /// Initial penalty parameter.
    pub rho: f64,
    /// Rebalance `rho` against the residual ratio (deterministic).
    pub adaptive_rho: bool,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            tol: 1e-7,
            max_iter: 200_000,
            over_relaxation: 1.6,
            rho: 1.0,
            adaptive_rho: true,
        }
    }
}

/// Solver output. All residuals are recomputed from the returned `x`/`y`,
/// never copied from iteration internals.
#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: Vec<DMatrix<f64>>,
    pub y: DVector<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `max_i |<A_i, X> - b_i|`.
    pub eq_residual: f64,
    /// Smallest eigenvalue over all blocks of `x`.
    pub min_eigenvalue: f64,
    /// `|primal - dual|`.
    pub duality_gap: f64,
    pub iterations: usize,
    pub status: SdpStatus,
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Symmetric vectorization of one block into `out`, scaling off-diagonal
/// entries by sqrt(2) so that Euclidean dot products match Frobenius ones.
fn svec_block(size: i32, m: &DMatrix<f64>, out: &mut Vec<f64>) {
    let n = size.unsigned_abs() as usize;
    if size < 0 {
        for i in 0..n {
            out.push(m[(i, i)]);
        }
    } else {
        for j in 0..n {
            for i in 0..=j {
                out.push(if i == j { m[(j, j)] } else { SQRT2 * m[(i, j)] });
            }
        }
    }
}

fn svec(blocks: &[i32], mats: &[DMatrix<f64>]) -> DVector<f64> {
    let mut out = Vec::new();
    for (m, &s) in mats.iter().zip(blocks) {
        svec_block(s, m, &mut out);
    }
    DVector::from_vec(out)
}

fn smat(blocks: &[i32], v: &DVector<f64>) -> Vec<DMatrix<f64>> {
    let mut mats = Vec::with_capacity(blocks.len());
    let mut pos = 0;
    for &s in blocks {
        let n = s.unsigned_abs() as usize;
        let mut m = DMatrix::zeros(n, n);
        if s < 0 {
            for i in 0..n {
                m[(i, i)] = v[pos];
                pos += 1;
            }
        } else {
            for j in 0..n {
                for i in 0..=j {
                    let val = v[pos];
                    pos += 1;
                    if i == j {
                        m[(j, j)] = val;
                    } else {
                        m[(i, j)] = val / SQRT2;
                        m[(j, i)] = val / SQRT2;
                    }
                }
            }
        }
        mats.push(m);
    }
    mats
}

/// Project each block onto the PSD cone, in svec coordinates.
fn project_psd(blocks: &[i32], v: &DVector<f64>) -> DVector<f64> {
    let mats = smat(blocks, v);
    let mut out = Vec::with_capacity(v.len());
    for (m, &s) in mats.into_iter().zip(blocks) {
        if s < 0 {
            let n = (-s) as usize;
            for i in 0..n {
                out.push(m[(i, i)].max(0.0));
            }
        } else {
            let eig = SymmetricEigen::new(m);
            let n = eig.eigenvalues.len();
            let mut proj = DMatrix::zeros(n, n);
            for k in 0..n {
                let lam = eig.eigenvalues[k];
                if lam > 0.0 {
                    let vk = eig.eigenvectors.column(k);
                    proj += vk * vk.transpose() * lam;
                }
            }
            // Exact symmetry for the downstream svec.
            proj = (&proj + proj.transpose()) * 0.5;
            svec_block(s, &proj, &mut out);
        }
    }
    DVector::from_vec(out)
}

fn min_eigenvalue(blocks: &[i32], mats: &[DMatrix<f64>]) -> f64 {
    let mut min_eig = f64::INFINITY;
    for (m, &s) in mats.iter().zip(blocks) {
        if s < 0 {
            for i in 0..m.nrows() {
                min_eig = min_eig.min(m[(i, i)]);
            }
        } else {
            let sym = (m + m.transpose()) * 0.5;
            let eig = SymmetricEigen::new(sym);
            min_eig = min_eig.min(eig.eigenvalues.min());
        }
    }
    min_eig
}

/// Apply the pseudo-inverse factorization `V diag(1/lambda) Vᵀ` of `A Aᵀ`.
struct Pinv {
    vectors: DMatrix<f64>,
    inv_values: DVector<f64>,
}

impl Pinv {
    fn of(gram: DMatrix<f64>) -> Pinv {
        let eig = SymmetricEigen::new(gram);
        let cut = eig.eigenvalues.amax() * 1e-13;
        let inv_values = eig.eigenvalues.map(|l| if l > cut { 1.0 / l } else { 0.0 });
        Pinv { vectors: eig.eigenvectors, inv_values }
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut t = self.vectors.transpose() * v;
        t.component_mul_assign(&self.inv_values);
        &self.vectors * t
    }
}

/// Solve the problem with the splitting method described in the module docs.
///
/// `status` is decided from independently recomputed quantities: `Optimal`
/// requires equality residual `<= tol`, smallest eigenvalue `>= -tol` and
/// duality gap `<= tol * (1 + |primal|)`; a detected divergence reports
/// `InfeasibleDetected` (a heuristic — definitive infeasibility claims
/// belong to the exact machinery, not to this solver); anything else ends as
/// `MaxIter` with honest numbers.
pub fn solve(problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution, SdpError> {
    problem.validate()?;
    let blocks = &problem.blocks;
    let nsv = problem.svec_len();
    let m = problem.constraints.len();

    let c = svec(blocks, &problem.objective);

    // Constraint rows, normalized to unit length for conditioning. The
    // scaling is undone on the reported multipliers.
    let mut a = DMatrix::zeros(m, nsv);
    let mut b = DVector::zeros(m);
    let mut row_scale = DVector::from_element(m, 1.0);
    for (i, con) in problem.constraints.iter().enumerate() {
        let row = svec(blocks, &con.matrices);
        let norm = row.norm();
        let scale = if norm > 0.0 { norm } else { 1.0 };
        row_scale[i] = scale;
        a.row_mut(i).copy_from(&(row / scale).transpose());
        b[i] = con.rhs / scale;
        if norm == 0.0 && con.rhs != 0.0 {
            // 0 = nonzero: linearly inconsistent before any iteration.
            return Ok(infeasible_solution(problem, i));
        }
    }

    let pinv = Pinv::of(&a * a.transpose());
    let project_affine = |v: &DVector<f64>| -> DVector<f64> {
        if m == 0 {
            return v.clone();
        }
        let resid = &a * v - &b;
        v - a.transpose() * pinv.apply(&resid)
    };

    // Linear-level inconsistency check: the affine set may be empty.
    {
        let feas = project_affine(&DVector::zeros(nsv));
        let resid = (&a * feas - &b).amax();
        if resid > 1e-8 * (1.0 + b.amax()) {
            return Ok(infeasible_solution(problem, usize::MAX));
        }
    }

    let alpha = opts.over_relaxation;
    let mut rho = opts.rho;
    let mut z = DVector::zeros(nsv);
    let mut u = DVector::zeros(nsv);
    let mut status = SdpStatus::MaxIter;
    let mut iterations = opts.max_iter;

    // Divergence detection state: when the affine set and the cone do not
    // intersect, `z` settles (dual residual -> 0) while `u` keeps drifting
    // by a fixed vector each iteration. Measure the drift over windows in
    // which rho was not rescaled.
    const WINDOW: usize = 100;
    let mut u_snapshot = u.clone();
    let mut rho_changed_in_window = false;

    for it in 0..opts.max_iter {
        let x = project_affine(&(&z - &u - &c / rho));
        let x_relax = &x * alpha + &z * (1.0 - alpha);
        let z_prev = z.clone();
        z = project_psd(blocks, &(&x_relax + &u));
        u += &x_relax - &z;

        let r_primal = (&x - &z).amax();
        let r_dual = (&z - &z_prev).amax() * rho;

        if !r_primal.is_finite() || u.amax() > 1e10 * (1.0 + b.amax()) {
            status = SdpStatus::InfeasibleDetected;
            iterations = it + 1;
            break;
        }
        if opts.adaptive_rho && it % 50 == 49 {
            if r_primal > 10.0 * r_dual && rho < 1e6 {
                rho *= 2.0;
                u /= 2.0;
                rho_changed_in_window = true;
            } else if r_dual > 10.0 * r_primal && rho > 1e-6 {
                rho /= 2.0;
                u *= 2.0;
                rho_changed_in_window = true;
            }
        }
        if it % WINDOW == WINDOW - 1 {
            let drift = (&u - &u_snapshot).amax() / WINDOW as f64;
            let stuck = !rho_changed_in_window
                && r_dual <= opts.tol
                && r_primal > 1e3 * opts.tol
                && drift > 1e3 * opts.tol;
            if stuck {
                status = SdpStatus::InfeasibleDetected;
                iterations = it + 1;
                break;
            }
            u_snapshot = u.clone();
            rho_changed_in_window = false;
        }
        if r_primal <= opts.tol && r_dual <= opts.tol {
            status = SdpStatus::Optimal; // provisional; re-audited below
            iterations = it + 1;
            break;
        }
    }

    // Report from the PSD iterate `z`; recompute everything.
    let x_mats = smat(blocks, &z);
    let primal_value = c.dot(&z);
    // Scaled dual slack: at convergence S = -rho*u is PSD and C - Aᵀy = S.
    let s_vec = &u * (-rho);
    let y_scaled = if m == 0 { DVector::zeros(0) } else { pinv.apply(&(&a * (&c - &s_vec))) };
    let dual_value = b.dot(&y_scaled);
    // Undo row normalization: constraint i was divided by scale_i, so the
    // multiplier of the original row is y_i / scale_i.
    let y = DVector::from_iterator(m, y_scaled.iter().zip(row_scale.iter()).map(|(y, s)| y / s));

    let eq_residual = if m == 0 { 0.0 } else { (&a * &z - &b).amax() };
    let min_eig = min_eigenvalue(blocks, &x_mats);
    let duality_gap = (primal_value - dual_value).abs();

    if status != SdpStatus::InfeasibleDetected {
        // Feasibility is audited at the solver tolerance. The gap is audited
        // with slack: the dual is recovered by a least-squares solve from the
        // scaled multiplier, so its error is a small multiple of `tol` even
        // when both residuals have converged.
        let ok = eq_residual <= opts.tol
            && min_eig >= -opts.tol
            && duality_gap <= 20.0 * opts.tol * (1.0 + primal_value.abs() + dual_value.abs());
        status = if ok { SdpStatus::Optimal } else { SdpStatus::MaxIter };
    }

    Ok(SdpSolution {
        x: x_mats,
        y,
        primal_value,
        dual_value,
        eq_residual,
        min_eigenvalue: min_eig,
        duality_gap,
        iterations,
        status,
    })
}

fn infeasible_solution(problem: &SdpProblem, _row: usize) -> SdpSolution {
    let x: Vec<DMatrix<f64>> = problem
        .blocks
        .iter()
        .map(|&s| DMatrix::zeros(s.unsigned_abs() as usize, s.unsigned_abs() as usize))
        .collect();
    let eq_residual = problem
        .constraints
        .iter()
        .map(|c| c.rhs.abs())
        .fold(0.0, f64::max);
    SdpSolution {
        x,
        y: DVector::zeros(problem.constraints.len()),
        primal_value: 0.0,
        dual_value: 0.0,
        eq_residual,
        min_eigenvalue: 0.0,
        duality_gap: 0.0,
        iterations: 0,
        status: SdpStatus::InfeasibleDetected,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn e(n: usize, i: usize, j: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = 1.0;
        m[(j, i)] = 1.0;
        m
    }

    fn trace_obj(n: usize) -> DMatrix<f64> {
        DMatrix::identity(n, n)
    }

    #[test]
    fn svec_smat_round_trip_and_inner_products() {
        let blocks = [2i32, -3];
        let a = vec![e(2, 0, 1) * 2.0 + e(2, 0, 0), DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -2.0, 0.5]))];
        let b = vec![e(2, 1, 1) + e(2, 0, 1), DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 0.0]))];
        let va = svec(&blocks, &a);
        let vb = svec(&blocks, &b);
        assert_eq!(va.len(), 3 + 3);
        // <A,B>_F = svec dot.
        let mut frob = 0.0;
        for (x, y) in a.iter().zip(&b) {
            frob += (x.transpose() * y).trace();
        }
        assert_abs_diff_eq!(va.dot(&vb), frob, epsilon = 1e-12);
        let back = smat(&blocks, &va);
        for (orig, rt) in a.iter().zip(&back) {
            assert!((orig - rt).amax() < 1e-14);
        }
    }

    #[test]
    fn minimal_trace_problem() {
        // minimize tr X s.t. X11 = 1, X >= 0 (2x2) -> value 1, X = E11.
        let p = SdpProblem::new(
            vec![2],
            vec![trace_obj(2)],
            vec![SdpConstraint { matrices: vec![e(2, 0, 0)], rhs: 1.0 }],
        )
        .unwrap();
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(sol.primal_value, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.x[0][(0, 0)], 1.0, epsilon = 1e-6);
        assert!(sol.x[0][(1, 1)].abs() < 1e-6);
        assert!(sol.eq_residual <= 1e-7);
        assert!(sol.min_eigenvalue >= -1e-7);
        assert!(sol.duality_gap <= 1e-7 * 2.0);
    }

    #[test]
    fn feasibility_solve_from_known_point() {
        // Constraints pinned to a known PSD matrix; zero objective.
        let target = {
            let f = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.0, 0.0, 1.0, -0.25, 0.0, 0.0, 0.5]);
            &f * f.transpose()
        };
        let cons: Vec<SdpConstraint> = [(0, 0), (0, 1), (1, 2), (2, 2), (1, 1)]
            .iter()
            .map(|&(i, j)| {
                let a = e(3, i, j);
                let rhs = (a.transpose() * &target).trace();
                SdpConstraint { matrices: vec![a], rhs }
            })
            .collect();
        let p = SdpProblem::new(vec![3], vec![DMatrix::zeros(3, 3)], cons).unwrap();
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(sol.eq_residual <= 1e-7, "residual {}", sol.eq_residual);
        assert!(sol.min_eigenvalue >= -1e-7);
    }

    #[test]
    fn diagonal_block_is_a_linear_program() {
        // minimize x1 + 2 x2 s.t. x1 + x2 = 1, x >= 0 -> (1, 0).
        let obj = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        let con = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0]));
        let p = SdpProblem::new(
            vec![-2],
            vec![obj],
            vec![SdpConstraint { matrices: vec![con], rhs: 1.0 }],
        )
        .unwrap();
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(sol.primal_value, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.x[0][(0, 0)], 1.0, epsilon = 1e-5);
        assert_abs_diff_eq!(sol.x[0][(1, 1)], 0.0, epsilon = 1e-5);
    }

    #[test]
    fn infeasible_sign_constraint_is_detected() {
        // X11 = -1 with X >= 0 is infeasible.
        let p = SdpProblem::new(
            vec![2],
            vec![trace_obj(2)],
            vec![SdpConstraint { matrices: vec![e(2, 0, 0)], rhs: -1.0 }],
        )
        .unwrap();
        let sol = solve(&p, &SdpOptions { max_iter: 50_000, ..SdpOptions::default() }).unwrap();
        assert_eq!(sol.status, SdpStatus::InfeasibleDetected);
    }

    #[test]
    fn scaling_the_objective_scales_the_value() {
        let base = SdpProblem::new(
            vec![2],
            vec![trace_obj(2)],
            vec![
                SdpConstraint { matrices: vec![e(2, 0, 0)], rhs: 2.0 },
                SdpConstraint { matrices: vec![e(2, 0, 1)], rhs: 1.0 },
            ],
        )
        .unwrap();
        let scaled = SdpProblem::new(
            vec![2],
            vec![trace_obj(2) * 7.0],
            base.constraints.clone(),
        )
        .unwrap();
        let opts = SdpOptions::default();
        let s1 = solve(&base, &opts).unwrap();
        let s2 = solve(&scaled, &opts).unwrap();
        assert_abs_diff_eq!(7.0 * s1.primal_value, s2.primal_value, epsilon = 1e-6 * 10.0);
        assert!((&s1.x[0] - &s2.x[0]).amax() < 1e-6 * 10.0);
    }

    #[test]
    fn deterministic_runs_are_bitwise_identical() {
        let p = SdpProblem::new(
            vec![3],
            vec![trace_obj(3)],
            vec![
                SdpConstraint { matrices: vec![e(3, 0, 0)], rhs: 1.0 },
                SdpConstraint { matrices: vec![e(3, 0, 2)], rhs: 0.5 },
                SdpConstraint { matrices: vec![e(3, 1, 1)], rhs: 2.0 },
            ],
        )
        .unwrap();
        let opts = SdpOptions::default();
        let s1 = solve(&p, &opts).unwrap();
        let s2 = solve(&p, &opts).unwrap();
        assert_eq!(s1.iterations, s2.iterations);
        assert_eq!(s1.primal_value.to_bits(), s2.primal_value.to_bits());
        for (a, b) in s1.x[0].iter().zip(s2.x[0].iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn shape_validation() {
        assert!(matches!(
            SdpProblem::new(vec![2], vec![DMatrix::zeros(3, 3)], vec![]),
            Err(SdpError::Shape(_))
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            SdpProblem::new(vec![2], vec![asym], vec![]),
            Err(SdpError::NotSymmetric { .. })
        ));
        let off_diag = e(2, 0, 1);
        assert!(matches!(
            SdpProblem::new(vec![-2], vec![off_diag], vec![]),
            Err(SdpError::Shape(_))
        ));
    }
}
