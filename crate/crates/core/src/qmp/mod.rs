//! Quadratic matrix programs (QMP), their rank-constrained SDP relaxation,
//! the constellation-as-QMP encoder, and convex iteration.
//!
//! A QMP minimizes `f_0(X)` subject to `f_i(X) = 0` over `X in R^{n x r}`,
//! where each `f_i(X) = tr{X^T A_i X} + 2 tr{B_i^T X} + c_i`. Homogenization
//! replaces `f_i` with the quadratic form of the block matrix
//!
//! ```text
//!     M(f_i) = [ A_i      B_i        ]
//!              [ B_i^T    (c_i/r)I_r ],
//! ```
//!
//! so that `f_i(X) = tr{S^T M(f_i) S}` for `S = (X; I_r)`. Writing
//! `U = S S^T` turns the QMP into a linear SDP over `U >= 0` with the single
//! nonconvex condition `rank(U) <= r`; the slack-block constraints
//! `tr{N_ij U} = 2 delta_ij` pin the bottom-right `r x r` block of `U` to the
//! identity. The relaxation is solvable exactly when the QMP is.
//!
//! A mutually-unbiased constellation with the first group gauge-fixed to
//! computational projectors becomes such a QMP: stack the real and imaginary
//! parts of the free density matrices into `X`, and hermiticity, trace,
//! projector, and cross-state inner-product conditions are all (at most)
//! quadratic matrix functions.
//!
//! Rank-constrained feasibility is attacked by convex iteration: alternately
//! minimize `tr{GW}` over the SDP feasible set (`G`-step, a linear SDP) and
//! over the Fantope `{0 <= W <= I, tr W = N - n}` (`W`-step, closed-form
//! spectral solution). The value sequence is non-increasing; reaching
//! `tau = 0` proves `rank(G) <= n` and yields a feasible point, while
//! stalling above zero proves nothing.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::consys::ConstellationSpec;
use crate::sdp::{self, SdpConstraint, SdpOptions, SdpProblem, SdpStatus};

#[derive(Debug, Error)]
pub enum QmpError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("unsupported constellation: {0}")]
    Unsupported(String),
    #[error("objective index {idx} out of range: the encoding has {len} constraints")]
    BadObjectiveIndex { idx: usize, len: usize },
    #[error("convex iteration step {iteration}: {message}")]
    Iteration { iteration: usize, message: String },
}

/// One quadratic matrix function `f(X) = tr{X^T A X} + 2 tr{B^T X} + c` of
/// order `r` (`A` is `n x n` symmetric, `B` is `n x r`).
#[derive(Clone, Debug, PartialEq)]
pub struct QmpFunction {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: f64,
}

impl QmpFunction {
    /// A zero function of the given shape.
    pub fn zero(n: usize, r: usize) -> Self {
        QmpFunction { a: DMatrix::zeros(n, n), b: DMatrix::zeros(n, r), c: 0.0 }
    }

    pub fn eval(&self, x: &DMatrix<f64>) -> f64 {
        (x.transpose() * &self.a * x).trace() + 2.0 * (self.b.transpose() * x).trace() + self.c
    }
}

/// A quadratic matrix program: `functions[0]` is the objective, the rest are
/// equality constraints (`= 0`).
#[derive(Clone, Debug)]
pub struct QmpProblem {
    pub n: usize,
    pub r: usize,
    pub functions: Vec<QmpFunction>,
}

impl QmpProblem {
    pub fn new(n: usize, r: usize, functions: Vec<QmpFunction>) -> Result<Self, QmpError> {
        if n == 0 || r == 0 {
            return Err(QmpError::Shape(format!("degenerate variable shape {n}x{r}")));
        }
        if functions.is_empty() {
            return Err(QmpError::Shape("no functions: index 0 must be the objective".into()));
        }
        for (i, f) in functions.iter().enumerate() {
            if f.a.nrows() != n || f.a.ncols() != n {
                return Err(QmpError::Shape(format!(
                    "function {i}: A is {}x{}, expected {n}x{n}",
                    f.a.nrows(),
                    f.a.ncols()
                )));
            }
            if f.b.nrows() != n || f.b.ncols() != r {
                return Err(QmpError::Shape(format!(
                    "function {i}: B is {}x{}, expected {n}x{r}",
                    f.b.nrows(),
                    f.b.ncols()
                )));
            }
            let dev = (&f.a - f.a.transpose()).amax();
            if dev > 1e-12 {
                return Err(QmpError::Shape(format!(
                    "function {i}: A is not symmetric (deviation {dev:.3e})"
                )));
            }
            if !f.c.is_finite()
                || f.a.iter().any(|v| !v.is_finite())
                || f.b.iter().any(|v| !v.is_finite())
            {
                return Err(QmpError::Shape(format!("function {i}: non-finite entry")));
            }
        }
        Ok(QmpProblem { n, r, functions })
    }

    pub fn objective(&self) -> &QmpFunction {
        &self.functions[0]
    }

    pub fn constraints(&self) -> &[QmpFunction] {
        &self.functions[1..]
    }

    /// Constraint values at `x` (the objective is not included).
    pub fn residuals(&self, x: &DMatrix<f64>) -> Vec<f64> {
        self.constraints().iter().map(|f| f.eval(x)).collect()
    }
}

/// The homogenization matrix `M(f) = [[A, B], [B^T, (c/r) I_r]]`, so that
/// `f(X) = tr{(X; I_r)^T M(f) (X; I_r)}`.
pub fn homogenize(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: f64,
    r: usize,
) -> Result<DMatrix<f64>, QmpError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(QmpError::Shape(format!("A is {}x{}, expected square", n, a.ncols())));
    }
    if b.nrows() != n || b.ncols() != r {
        return Err(QmpError::Shape(format!(
            "B is {}x{}, expected {n}x{r}",
            b.nrows(),
            b.ncols()
        )));
    }
    if r == 0 {
        return Err(QmpError::Shape("order r must be positive".into()));
    }
    let size = n + r;
    let mut m = DMatrix::zeros(size, size);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, r)).copy_from(b);
    m.view_mut((n, 0), (r, n)).copy_from(&b.transpose());
    let diag = c / r as f64;
    for i in 0..r {
        m[(n + i, n + i)] = diag;
    }
    Ok(m)
}

/// The SDP relaxation of a QMP with its rank condition kept as data: minimize
/// `tr{M(f_0) U}` subject to `tr{M(f_i) U} = 0`, `tr{N_ij U} = 2 delta_ij`,
/// `U >= 0`, and (non-convex, not part of [`Self::to_sdp_problem`])
/// `rank(U) <= rank_bound`.
#[derive(Clone, Debug)]
pub struct RankConstrainedSdp {
    /// Matrix size `N = n + r`.
    pub size: usize,
    /// The rank bound `r` (also the width of the pinned slack block).
    pub rank_bound: usize,
    /// Objective `M(f_0)`.
    pub objective: DMatrix<f64>,
    /// `M(f_i)` rows with rhs 0, then `N_ij` rows with rhs `2 delta_ij`.
    pub constraints: Vec<SdpConstraint>,
}

impl RankConstrainedSdp {
    /// The relaxation as a plain SDP (rank condition dropped).
    pub fn to_sdp_problem(&self) -> Result<SdpProblem, QmpError> {
        SdpProblem::new(
            vec![self.size as i32],
            vec![self.objective.clone()],
            self.constraints.clone(),
        )
        .map_err(|e| QmpError::Shape(e.to_string()))
    }
}

/// Build the rank-constrained relaxation of a QMP: homogenize every function
/// and append the slack-block constraints `tr{N_ij U} = 2 delta_ij` for
/// `1 <= i <= j <= r` (in row-major pair order). Constraint count is
/// `k + r(r+1)/2`.
pub fn build_relaxation(q: &QmpProblem) -> Result<RankConstrainedSdp, QmpError> {
    let size = q.n + q.r;
    let objective = homogenize(&q.functions[0].a, &q.functions[0].b, q.functions[0].c, q.r)?;
    let mut constraints = Vec::with_capacity(q.functions.len() - 1 + q.r * (q.r + 1) / 2);
    for f in q.constraints() {
        constraints.push(SdpConstraint {
            matrices: vec![homogenize(&f.a, &f.b, f.c, q.r)?],
            rhs: 0.0,
        });
    }
    for i in 0..q.r {
        for j in i..q.r {
            let mut nij = DMatrix::zeros(size, size);
            if i == j {
                nij[(q.n + i, q.n + i)] = 2.0;
            } else {
                nij[(q.n + i, q.n + j)] = 1.0;
                nij[(q.n + j, q.n + i)] = 1.0;
            }
            constraints.push(SdpConstraint {
                matrices: vec![nij],
                rhs: if i == j { 2.0 } else { 0.0 },
            });
        }
    }
    Ok(RankConstrainedSdp { size, rank_bound: q.r, objective, constraints })
}

/// Which constraint of the constellation encoding, if any, is promoted to the
/// objective `f_0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectiveChoice {
    /// Zero objective: a pure feasibility program.
    Feasibility,
    /// Promote the first orthogonality condition between two states of the
    /// same free group, if one exists (feasibility otherwise). Such an `f_0`
    /// is non-negative on the remaining constraint set and vanishes exactly
    /// when the constellation exists.
    FirstOrthogonality,
    /// Promote the constraint at this index of the feasibility encoding.
    Constraint(usize),
}

/// Accumulate weight `w` on `(X X^T)[u, v]` inside the symmetric coefficient
/// matrix of a quadratic form `tr{X^T A X} = sum A[u,v] (X X^T)[u,v]`.
fn add_sym(a: &mut DMatrix<f64>, u: usize, v: usize, w: f64) {
    if u == v {
        a[(u, u)] += w;
    } else {
        a[(u, v)] += w / 2.0;
        a[(v, u)] += w / 2.0;
    }
}

/// Encode a MU constellation as a QMP, with the first group gauge-fixed to
/// the computational projectors `E_ii`.
///
/// Every remaining ("free") state `rho = C + iD` contributes `2d` rows to
/// `X` (its real part `C`, then its imaginary part `D`), so `X` has shape
/// `(2 s d) x d` for `s` free states. Emitted constraints, in order, per free
/// state:
///
/// 1. `C` symmetric: `C[p,q] - C[q,p] = 0` for `p < q` (linear);
/// 2. `D` antisymmetric: `D[p,q] + D[q,p] = 0` for `p <= q` (linear);
/// 3. unit trace: `sum_p C[p,p] = 1` (linear);
/// 4. unbiasedness to each fixed computational projector: `C[j,j] = 1/d`
///    (linear);
/// 5. projector, real part: `(C C^T + D D^T - C)[p,q] = 0` for `p <= q`;
/// 6. projector, imaginary part: `(D C^T - C D^T - D)[p,q] = 0` for `p < q`;
///
/// then one cross-state condition per free pair: `tr{C C'^T} + tr{D D'^T}`
/// equals 0 within a group and `1/d` across groups. (Under the hermiticity
/// rows these are the entries of `rho^2 - rho` and the Hilbert-Schmidt
/// product `tr{C C' - D D'}`; the transposed forms are the ones expressible
/// through `X X^T`.)
pub fn encode_constellation_qmp(
    spec: &ConstellationSpec,
    choice: ObjectiveChoice,
) -> Result<QmpProblem, QmpError> {
    let d = spec.d();
    let groups = spec.groups();
    if groups.len() < 2 {
        return Err(QmpError::Unsupported(format!(
            "{spec}: needs at least one free group beyond the gauge-fixed first group"
        )));
    }
    let fixed = groups[0];
    // Free state t belongs to free group `group_of[t]`.
    let group_of: Vec<usize> = groups[1..]
        .iter()
        .enumerate()
        .flat_map(|(g, &size)| std::iter::repeat(g).take(size))
        .collect();
    let s = group_of.len();
    let n = 2 * s * d;
    let r = d;

    let cbase = |t: usize| 2 * t * d;
    let dbase = |t: usize| 2 * t * d + d;
    let mut cons: Vec<QmpFunction> = Vec::new();

    for t in 0..s {
        let (cb, db) = (cbase(t), dbase(t));
        // 1. C symmetric.
        for p in 0..d {
            for q in p + 1..d {
                let mut f = QmpFunction::zero(n, r);
                f.b[(cb + p, q)] = 0.5;
                f.b[(cb + q, p)] = -0.5;
                cons.push(f);
            }
        }
        // 2. D antisymmetric (diagonal included).
        for p in 0..d {
            for q in p..d {
                let mut f = QmpFunction::zero(n, r);
                if p == q {
                    f.b[(db + p, p)] = 0.5;
                } else {
                    f.b[(db + p, q)] = 0.5;
                    f.b[(db + q, p)] = 0.5;
                }
                cons.push(f);
            }
        }
        // 3. Unit trace.
        let mut f = QmpFunction::zero(n, r);
        for p in 0..d {
            f.b[(cb + p, p)] = 0.5;
        }
        f.c = -1.0;
        cons.push(f);
        // 4. Unbiasedness to the fixed projectors: tr{rho E_jj} = C[j,j] = 1/d.
        for j in 0..fixed {
            let mut f = QmpFunction::zero(n, r);
            f.b[(cb + j, j)] = 0.5;
            f.c = -1.0 / d as f64;
            cons.push(f);
        }
        // 5. Projector, real part.
        for p in 0..d {
            for q in p..d {
                let mut f = QmpFunction::zero(n, r);
                add_sym(&mut f.a, cb + p, cb + q, 1.0);
                add_sym(&mut f.a, db + p, db + q, 1.0);
                f.b[(cb + p, q)] = -0.5;
                cons.push(f);
            }
        }
        // 6. Projector, imaginary part.
        for p in 0..d {
            for q in p + 1..d {
                let mut f = QmpFunction::zero(n, r);
                add_sym(&mut f.a, db + p, cb + q, 1.0);
                add_sym(&mut f.a, cb + p, db + q, -1.0);
                f.b[(db + p, q)] = -0.5;
                cons.push(f);
            }
        }
    }

    // Cross-state conditions, pairs in lexicographic order.
    let mut first_orthogonality = None;
    for t in 0..s {
        for u in t + 1..s {
            let mut f = QmpFunction::zero(n, r);
            for p in 0..d {
                add_sym(&mut f.a, cbase(t) + p, cbase(u) + p, 1.0);
                add_sym(&mut f.a, dbase(t) + p, dbase(u) + p, 1.0);
            }
            if group_of[t] == group_of[u] {
                if first_orthogonality.is_none() {
                    first_orthogonality = Some(cons.len());
                }
            } else {
                f.c = -1.0 / d as f64;
            }
            cons.push(f);
        }
    }

    let promoted = match choice {
        ObjectiveChoice::Feasibility => None,
        ObjectiveChoice::FirstOrthogonality => first_orthogonality,
        ObjectiveChoice::Constraint(idx) => {
            if idx >= cons.len() {
                return Err(QmpError::BadObjectiveIndex { idx, len: cons.len() });
            }
            Some(idx)
        }
    };
    let objective = match promoted {
        Some(idx) => cons.remove(idx),
        None => QmpFunction::zero(n, r),
    };
    let mut functions = Vec::with_capacity(cons.len() + 1);
    functions.push(objective);
    functions.extend(cons);
    QmpProblem::new(n, r, functions)
}

/// Decode a stacked `(2 s d) x d` solution matrix back into ket groups: the
/// gauge-fixed computational group first, then one column per free state (the
/// top eigenvector of its density matrix), grouped as in `spec`.
pub fn decode_states(
    spec: &ConstellationSpec,
    x: &DMatrix<f64>,
) -> Result<Vec<DMatrix<Complex64>>, QmpError> {
    let d = spec.d();
    let groups = spec.groups();
    if groups.len() < 2 {
        return Err(QmpError::Unsupported(format!("{spec}: no free states to decode")));
    }
    let s: usize = groups[1..].iter().sum();
    if x.nrows() != 2 * s * d || x.ncols() != d {
        return Err(QmpError::Shape(format!(
            "solution matrix is {}x{}, expected {}x{d} for {spec}",
            x.nrows(),
            x.ncols(),
            2 * s * d
        )));
    }
    let mut out = Vec::with_capacity(groups.len());
    let mut fixed = DMatrix::<Complex64>::zeros(d, groups[0]);
    for j in 0..groups[0] {
        fixed[(j, j)] = Complex64::new(1.0, 0.0);
    }
    out.push(fixed);

    let mut t = 0;
    for &size in &groups[1..] {
        let mut kets = DMatrix::<Complex64>::zeros(d, size);
        for col in 0..size {
            let mut rho = DMatrix::<Complex64>::zeros(d, d);
            for p in 0..d {
                for q in 0..d {
                    rho[(p, q)] =
                        Complex64::new(x[(2 * t * d + p, q)], x[(2 * t * d + d + p, q)]);
                }
            }
            // Hermitize against extraction noise, then take the top
            // eigenvector as the ket.
            let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = SymmetricEigen::new(rho);
            let top = (0..d)
                .max_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap())
                .expect("d >= 1");
            let v = eig.eigenvectors.column(top);
            let norm = v.norm();
            if norm == 0.0 {
                return Err(QmpError::Shape(format!("free state {t} decodes to zero")));
            }
            kets.column_mut(col).copy_from(&(v / Complex64::new(norm, 0.0)));
            t += 1;
        }
        out.push(kets);
    }
    Ok(out)
}

/// Minimize `tr{GW}` over the `(N-n)`-Fantope `{0 <= W <= I, tr W = N - n}`
/// with `n = rank_bound`, in closed form: `W` is the projector onto the
/// eigenvectors of the `N - n` smallest eigenvalues of `G`, and the value is
/// their sum (the minimum is attained at an extreme point, a rank-`(N-n)`
/// projector, by the Ky Fan principle). Degenerate eigenvalues are broken by
/// the deterministic eigensolver's output, ascending, with index order as the
/// final tiebreak.
pub fn fantope_step(g: &DMatrix<f64>, rank_bound: usize) -> (DMatrix<f64>, f64) {
    let n = g.nrows();
    debug_assert_eq!(g.ncols(), n, "fantope_step needs a square matrix");
    let m = n.saturating_sub(rank_bound);
    if m == 0 {
        return (DMatrix::zeros(n, n), 0.0);
    }
    let eig = SymmetricEigen::new((g + g.transpose()) * 0.5);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalues")
            .then(a.cmp(&b))
    });
    let mut w = DMatrix::zeros(n, n);
    let mut value = 0.0;
    for &i in order.iter().take(m) {
        let v = eig.eigenvectors.column(i);
        w += v * v.transpose();
        value += eig.eigenvalues[i];
    }
    let w = (&w + w.transpose()) * 0.5;
    (w, value)
}

/// How convex iteration seeds its first `W`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FantopeInit {
    /// `W = 0`: the first `G`-step is an unweighted feasibility solve. On
    /// problems whose witness set has a continuous symmetry this start can
    /// stall at a symmetric fixed point that a random seed escapes.
    Zero,
    /// A seeded random rank-`(N - rank_bound)` projector; local convergence
    /// depends on the initialization, so distinct seeds explore distinct
    /// basins.
    RandomProjector { seed: u64 },
}

#[derive(Clone, Copy, Debug)]
pub struct ConvexIterOptions {
    /// Maximum number of outer (SDP1 + Fantope) rounds.
    pub max_iter: usize,
    /// Convergence target for `tau`, and the stall threshold for `|d tau|`.
    pub tol: f64,
    pub init: FantopeInit,
    pub sdp: SdpOptions,
}

impl Default for ConvexIterOptions {
    fn default() -> Self {
        ConvexIterOptions {
            max_iter: 500,
            tol: 1e-6,
            init: FantopeInit::Zero,
            sdp: SdpOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvexIterStatus {
    /// `tau <= tol`: a rank-`<= rank_bound` feasible point was found.
    Converged,
    /// `tau` stopped decreasing (or the iteration budget ran out) above the
    /// tolerance. Proves nothing about feasibility.
    Stalled,
}

/// Final state of a convex-iteration run.
#[derive(Clone, Debug)]
pub struct ConvexIterState {
    /// Number of SDP1 solves performed (equals `tau_history.len()`).
    pub iterations: usize,
    /// `tau = tr{GW}` after every round; non-increasing up to solver
    /// tolerance.
    pub tau_history: Vec<f64>,
    pub g: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub status: ConvexIterStatus,
    /// On convergence: the factor `F` with `G ~ F F^T` (columns scaled by
    /// root eigenvalue, kept above `sqrt(tol)`).
    pub factor: Option<DMatrix<f64>>,
    /// On convergence: the recovered QMP variable `X = F_top F_bot^+`.
    pub extracted: Option<DMatrix<f64>>,
}

/// Alternate SDP1 (`G`-step, solved by the internal solver) with the
/// closed-form Fantope step (`W`-step) until `tau <= tol`, the change in
/// `tau` drops below `tol`, or `max_iter` rounds pass.
///
/// The relaxation's objective, when nonzero, is a promoted equality (an
/// orthogonality condition), so SDP1 re-imposes it as a constraint with
/// rhs 0 and minimizes the pure weight `tr{GW}`; with `W = 0` the first round
/// is an unweighted feasibility solve.
pub fn convex_iteration(
    relax: &RankConstrainedSdp,
    opts: &ConvexIterOptions,
) -> Result<ConvexIterState, QmpError> {
    let n = relax.size;
    if relax.rank_bound > n {
        return Err(QmpError::Shape(format!(
            "rank bound {} exceeds matrix size {n}",
            relax.rank_bound
        )));
    }
    let mut constraints = Vec::with_capacity(relax.constraints.len() + 1);
    if relax.objective.amax() != 0.0 {
        constraints.push(SdpConstraint { matrices: vec![relax.objective.clone()], rhs: 0.0 });
    }
    constraints.extend(relax.constraints.iter().cloned());

    let mut w = match opts.init {
        FantopeInit::Zero => DMatrix::zeros(n, n),
        FantopeInit::RandomProjector { seed } => {
            random_fantope_projector(n, n - relax.rank_bound, seed)
        }
    };
    let mut problem = SdpProblem::new(vec![n as i32], vec![w.clone()], constraints)
        .map_err(|e| QmpError::Iteration { iteration: 0, message: e.to_string() })?;

    let mut tau_history: Vec<f64> = Vec::new();
    let mut g = DMatrix::zeros(n, n);
    let mut status = ConvexIterStatus::Stalled;
    for it in 0..opts.max_iter {
        problem.objective[0] = w.clone();
        let sol = sdp::solve(&problem, &opts.sdp)
            .map_err(|e| QmpError::Iteration { iteration: it, message: e.to_string() })?;
        if sol.status == SdpStatus::InfeasibleDetected {
            return Err(QmpError::Iteration {
                iteration: it,
                message: format!(
                    "SDP1 reported infeasible (equality residual {:.3e})",
                    sol.eq_residual
                ),
            });
        }
        g = sol.x.into_iter().next().expect("single block");
        let (w_next, tau) = fantope_step(&g, relax.rank_bound);
        let prev = tau_history.last().copied();
        tau_history.push(tau);
        w = w_next;
        if tau <= opts.tol {
            status = ConvexIterStatus::Converged;
            break;
        }
        if let Some(p) = prev {
            if (p - tau).abs() < opts.tol {
                break; // stalled
            }
        }
    }

    let (factor, extracted) = if status == ConvexIterStatus::Converged {
        let f = extract_factor(&g, opts.tol);
        let x = split_factor(&f, n - relax.rank_bound);
        (Some(f), x)
    } else {
        (None, None)
    };
    Ok(ConvexIterState {
        iterations: tau_history.len(),
        tau_history,
        g,
        w,
        status,
        factor,
        extracted,
    })
}

/// Eigenpairs of `g` above `sqrt(tol)`, as a factor `F` (columns scaled by
/// the root eigenvalue, descending), so `F F^T` reconstructs `g` up to the
/// discarded spectrum.
fn extract_factor(g: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = g.nrows();
    let eig = SymmetricEigen::new((g + g.transpose()) * 0.5);
    let cut = tol.max(0.0).sqrt();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
            .then(a.cmp(&b))
    });
    let kept: Vec<usize> = order.into_iter().filter(|&i| eig.eigenvalues[i] > cut).collect();
    let mut f = DMatrix::zeros(n, kept.len());
    for (col, &i) in kept.iter().enumerate() {
        let scale = eig.eigenvalues[i].sqrt();
        f.column_mut(col).copy_from(&(eig.eigenvectors.column(i) * scale));
    }
    f
}

/// Recover `X` from a lift factor: with `F = (F_top; F_bot)` split at
/// `top` rows, `X = F_top F_bot^+` (for an exact lift `F = (X; I_r) Q`, this
/// undoes the unknown orthogonal mixing `Q`).
fn split_factor(f: &DMatrix<f64>, top: usize) -> Option<DMatrix<f64>> {
    if f.ncols() == 0 {
        return None;
    }
    let f_top = f.rows(0, top);
    let f_bot = f.rows(top, f.nrows() - top);
    let pinv = f_bot.clone_owned().pseudo_inverse(1e-10).ok()?;
    Some(f_top * pinv)
}

fn random_fantope_projector(n: usize, rank: usize, seed: u64) -> DMatrix<f64> {
    if rank == 0 {
        return DMatrix::zeros(n, n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(n, rank, |_, _| rng.gen_range(-0.5..0.5));
    let q = m.qr().q();
    let p = &q * q.transpose();
    (&p + p.transpose()) * 0.5
}
