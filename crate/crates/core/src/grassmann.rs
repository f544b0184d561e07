//! Bloch-space geometry. A unit-trace hermitian `M` embeds as the real
//! vector of coordinates of `M - I/d` in an orthonormal traceless hermitian
//! basis; an orthonormal basis of `C^d` embeds as `d` such vectors spanning
//! a `(d-1)`-plane, and the squared chordal distance between two planes,
//! `D^2 = 1/2 tr{(P1 - P2)^2}`, reaches its maximum `d - 1` exactly when the
//! planes are orthogonal — which for basis planes is the mutually-unbiased
//! condition.
//!
//! Everything here is floating point; it guides and cross-checks the exact
//! machinery but never feeds it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GrassmannError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not hermitian (deviation {0:.3e}, tolerance 1e-10)")]
    NotHermitian(f64),
    #[error("trace deviates from 1 by {0:.3e} (tolerance 1e-10)")]
    Trace(f64),
    #[error("basis is not orthonormal (Gram deviation {0:.3e}, tolerance 1e-10)")]
    NotOrthonormal(f64),
    #[error("embedded basis spans rank {got}, expected {expected}")]
    Rank { expected: usize, got: usize },
    #[error("dimension mismatch: d = {0} vs d = {1}")]
    DimensionMismatch(usize, usize),
    #[error("need at least two planes, got {0}")]
    TooFewPlanes(usize),
}

const VALIDATION_TOL: f64 = 1e-10;

/// An orthonormal basis of the traceless hermitian `d x d` matrices,
/// normalized to `tr{L_a L_b} = 2 delta_ab`: the generalized Gell-Mann
/// matrices (symmetric and antisymmetric off-diagonal pairs, then diagonal).
pub fn gell_mann_basis(d: usize) -> Vec<DMatrix<Complex64>> {
    assert!(d >= 2, "Bloch space needs d >= 2");
    let mut basis = Vec::with_capacity(d * d - 1);
    let z = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in (i + 1)..d {
            let mut sym = DMatrix::from_element(d, d, z);
            sym[(i, j)] = Complex64::new(1.0, 0.0);
            sym[(j, i)] = Complex64::new(1.0, 0.0);
            basis.push(sym);
            let mut asym = DMatrix::from_element(d, d, z);
            asym[(i, j)] = Complex64::new(0.0, -1.0);
            asym[(j, i)] = Complex64::new(0.0, 1.0);
            basis.push(asym);
        }
    }
    for l in 1..d {
        let scale = (2.0 / (l as f64 * (l + 1) as f64)).sqrt();
        let mut diag = DMatrix::from_element(d, d, z);
        for k in 0..l {
            diag[(k, k)] = Complex64::new(scale, 0.0);
        }
        diag[(l, l)] = Complex64::new(-(l as f64) * scale, 0.0);
        basis.push(diag);
    }
    basis
}

/// A point of Bloch space: coordinates of `M - I/d`, with the Euclidean dot
/// product realizing `m1 . m2 = 1/2 tr{(M1 - I/d)(M2 - I/d)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochVector {
    d: usize,
    components: DVector<f64>,
}

impl BlochVector {
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Coordinates in the [`gell_mann_basis`] order, length `d^2 - 1`.
    pub fn components(&self) -> &DVector<f64> {
        &self.components
    }

    pub fn dot(&self, other: &BlochVector) -> Result<f64, GrassmannError> {
        if self.d != other.d {
            return Err(GrassmannError::DimensionMismatch(self.d, other.d));
        }
        Ok(self.components.dot(&other.components))
    }

    pub fn norm_sq(&self) -> f64 {
        self.components.norm_squared()
    }
}

fn validate_state(m: &DMatrix<Complex64>) -> Result<usize, GrassmannError> {
    let d = m.nrows();
    if m.ncols() != d || d < 2 {
        return Err(GrassmannError::NotSquare);
    }
    let herm_dev = (m - m.adjoint()).camax();
    if herm_dev > VALIDATION_TOL {
        return Err(GrassmannError::NotHermitian(herm_dev));
    }
    let trace_dev = (m.trace() - Complex64::new(1.0, 0.0)).norm();
    if trace_dev > VALIDATION_TOL {
        return Err(GrassmannError::Trace(trace_dev));
    }
    Ok(d)
}

/// Embed a hermitian unit-trace matrix. Coordinates are
/// `c_a = 1/2 tr{M L_a}` (the `I/d` part is traceless-orthogonal and drops
/// out), so embedded dot products reproduce the half-trace inner product.
pub fn bloch_embed(m: &DMatrix<Complex64>) -> Result<BlochVector, GrassmannError> {
    let d = validate_state(m)?;
    let basis = gell_mann_basis(d);
    let components = DVector::from_iterator(
        d * d - 1,
        basis.iter().map(|lambda| 0.5 * (m * lambda).trace().re),
    );
    Ok(BlochVector { d, components })
}

/// Embed a unit ket as its projector `|e><e|`. A non-unit ket fails the
/// trace validation.
pub fn bloch_embed_ket(ket: &DVector<Complex64>) -> Result<BlochVector, GrassmannError> {
    let proj = ket * ket.adjoint();
    bloch_embed(&proj)
}

/// The orthogonal projector onto the plane spanned by a basis's embedded
/// vectors: a symmetric idempotent on `R^{d^2-1}` of rank `d - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneProjector {
    d: usize,
    matrix: DMatrix<f64>,
}

impl PlaneProjector {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Apply to a Bloch vector.
    pub fn apply(&self, v: &BlochVector) -> Result<BlochVector, GrassmannError> {
        if self.d != v.d {
            return Err(GrassmannError::DimensionMismatch(self.d, v.d));
        }
        Ok(BlochVector { d: v.d, components: &self.matrix * &v.components })
    }
}

/// Build the plane projector of an orthonormal basis (columns of `basis`).
///
/// The `d` embedded vectors sum to zero (the basis projectors sum to `I`),
/// so the span has dimension exactly `d - 1`.
pub fn basis_plane(basis: &DMatrix<Complex64>) -> Result<PlaneProjector, GrassmannError> {
    let d = basis.nrows();
    if basis.ncols() != d || d < 2 {
        return Err(GrassmannError::NotSquare);
    }
    let gram_dev = (basis.adjoint() * basis - DMatrix::identity(d, d)).camax();
    if gram_dev > VALIDATION_TOL {
        return Err(GrassmannError::NotOrthonormal(gram_dev));
    }

    let dim = d * d - 1;
    let mut embedded = DMatrix::zeros(dim, d);
    for j in 0..d {
        let ket = basis.column(j).clone_owned();
        let v = bloch_embed_ket(&ket)?;
        embedded.set_column(j, &v.components);
    }

    // Nonzero singular values of the embedded frame are all sqrt(1/2); a
    // fixed threshold separates them cleanly from rounding noise.
    let svd = embedded.svd(true, false);
    let u = svd.u.as_ref().expect("u requested");
    let mut matrix = DMatrix::zeros(dim, dim);
    let mut rank = 0;
    for (k, sigma) in svd.singular_values.iter().enumerate() {
        if *sigma > 1e-8 {
            rank += 1;
            let uk = u.column(k);
            matrix += uk * uk.transpose();
        }
    }
    if rank != d - 1 {
        return Err(GrassmannError::Rank { expected: d - 1, got: rank });
    }
    // Symmetrize away the last rounding asymmetry.
    matrix = (&matrix + matrix.transpose()) * 0.5;
    Ok(PlaneProjector { d, matrix })
}

/// `D^2(P1, P2) = 1/2 tr{(P1 - P2)^2}`, in `[0, d-1]`; the maximum is
/// attained exactly for mutually orthogonal planes.
pub fn distance_sq(p1: &PlaneProjector, p2: &PlaneProjector) -> Result<f64, GrassmannError> {
    if p1.d != p2.d {
        return Err(GrassmannError::DimensionMismatch(p1.d, p2.d));
    }
    let diff = &p1.matrix - &p2.matrix;
    Ok(0.5 * diff.norm_squared())
}

/// Mean of the pairwise `D^2` over all pairs — for the standard quartet of
/// planes this is `(1/6) sum_{i<j} D^2(P_i, P_j)`.
pub fn avg_distance_sq(planes: &[PlaneProjector]) -> Result<f64, GrassmannError> {
    if planes.len() < 2 {
        return Err(GrassmannError::TooFewPlanes(planes.len()));
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..planes.len() {
        for j in (i + 1)..planes.len() {
            sum += distance_sq(&planes[i], &planes[j])?;
            pairs += 1;
        }
    }
    Ok(sum / pairs as f64)
}
