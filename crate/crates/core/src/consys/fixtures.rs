//! Known mutually unbiased bases, used as floating-point witnesses in tests
//! and for the Bloch-geometry checks. Never used in exact pipelines.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::ConsysError;

/// A complete set of `d+1` MUBs for prime `d`, each basis a `d x d` matrix
/// with the basis vectors as columns. The first basis is computational.
///
/// For odd primes this is the quadratic-phase construction
/// `B_t[j, m] = omega^(t j^2 + m j) / sqrt(d)` with `omega = exp(2 pi i/d)`;
/// `d = 2` needs the `±i` phases and is special-cased.
pub fn mub_fixture(d: usize) -> Result<Vec<DMatrix<Complex64>>, ConsysError> {
    if !is_prime(d) {
        return Err(ConsysError::Unsupported(format!(
            "complete MUB fixture needs prime d, got {d}"
        )));
    }
    let s = 1.0 / (d as f64).sqrt();
    if d == 2 {
        let c = |re: f64, im: f64| Complex64::new(re * s, im * s);
        return Ok(vec![
            DMatrix::identity(2, 2),
            DMatrix::from_column_slice(2, 2, &[c(1., 0.), c(1., 0.), c(1., 0.), c(-1., 0.)]),
            DMatrix::from_column_slice(2, 2, &[c(1., 0.), c(0., 1.), c(1., 0.), c(0., -1.)]),
        ]);
    }
    let mut bases = vec![DMatrix::identity(d, d)];
    let omega = std::f64::consts::TAU / d as f64;
    for t in 0..d {
        bases.push(DMatrix::from_fn(d, d, |j, m| {
            let phase = omega * ((t * j * j + m * j) % d) as f64;
            Complex64::new(phase.cos() * s, phase.sin() * s)
        }));
    }
    Ok(bases)
}

/// The Fourier basis `F[j, m] = omega^(j m) / sqrt(d)`, columns as vectors.
/// Unbiased to the computational basis in any dimension.
pub fn fourier_basis(d: usize) -> DMatrix<Complex64> {
    let s = 1.0 / (d as f64).sqrt();
    let omega = std::f64::consts::TAU / d as f64;
    DMatrix::from_fn(d, d, |j, m| {
        let phase = omega * ((j * m) % d) as f64;
        Complex64::new(phase.cos() * s, phase.sin() * s)
    })
}

/// Largest deviation from the mutually-unbiased conditions for one pair of
/// groups (within-group pairs measure orthonormality instead).
#[derive(Clone, Debug, Serialize)]
pub struct GroupPairDeviation {
    pub group_a: usize,
    pub group_b: usize,
    pub max_deviation: f64,
}

/// Result of [`check_mu`].
#[derive(Clone, Debug, Serialize)]
pub struct MuReport {
    pub pass: bool,
    pub tol: f64,
    pub max_deviation: f64,
    pub pairs: Vec<GroupPairDeviation>,
}

/// Check a grouped collection of vectors against the MU conditions: within a
/// group, `|<v_i, v_j> - delta_ij|`; across groups, `| |<u, v>| - 1/sqrt(d) |`.
/// All deviations are reported per group pair; pass iff the max is `<= tol`.
pub fn check_mu(groups: &[DMatrix<Complex64>], tol: f64) -> Result<MuReport, ConsysError> {
    if groups.is_empty() {
        return Err(ConsysError::ShapeMismatch("no groups given".into()));
    }
    let d = groups[0].nrows();
    for (g, m) in groups.iter().enumerate() {
        if m.nrows() != d {
            return Err(ConsysError::ShapeMismatch(format!(
                "group {g} has vectors of dimension {}, expected {d}",
                m.nrows()
            )));
        }
        if m.ncols() == 0 {
            return Err(ConsysError::ShapeMismatch(format!("group {g} is empty")));
        }
    }
    let target = 1.0 / (d as f64).sqrt();
    let mut pairs = Vec::new();
    let mut overall: f64 = 0.0;
    for a in 0..groups.len() {
        for b in a..groups.len() {
            let mut dev: f64 = 0.0;
            for i in 0..groups[a].ncols() {
                let u = groups[a].column(i);
                let js = if a == b { i..groups[b].ncols() } else { 0..groups[b].ncols() };
                for j in js {
                    let v = groups[b].column(j);
                    let ip = u.dotc(&v);
                    let e = if a == b {
                        let expected = if i == j { 1.0 } else { 0.0 };
                        (ip.norm() - expected).abs()
                    } else {
                        (ip.norm() - target).abs()
                    };
                    dev = dev.max(e);
                }
            }
            overall = overall.max(dev);
            pairs.push(GroupPairDeviation { group_a: a, group_b: b, max_deviation: dev });
        }
    }
    Ok(MuReport { pass: overall <= tol, tol, max_deviation: overall, pairs })
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_mutually_unbiased() {
        for d in [2usize, 3, 5] {
            let bases = mub_fixture(d).unwrap();
            assert_eq!(bases.len(), d + 1);
            let report = check_mu(&bases, 1e-12).unwrap();
            assert!(
                report.pass,
                "d={d}: max deviation {}",
                report.max_deviation
            );
        }
    }

    #[test]
    fn non_prime_dimension_is_rejected() {
        assert!(mub_fixture(6).is_err());
        assert!(mub_fixture(4).is_err());
        assert!(mub_fixture(1).is_err());
    }

    #[test]
    fn fourier_vs_computational_in_dimension_six() {
        let comp = DMatrix::identity(6, 6);
        let report = check_mu(&[comp, fourier_basis(6)], 1e-12).unwrap();
        assert!(report.pass, "max deviation {}", report.max_deviation);
    }

    #[test]
    fn duplicated_basis_fails_unbiasedness() {
        let comp = DMatrix::<Complex64>::identity(4, 4);
        let report = check_mu(&[comp.clone(), comp], 1e-6).unwrap();
        assert!(!report.pass);
        // overlap 1 vs target 1/2 → deviation 1/2; and the zero overlaps
        // deviate by 1/2 as well.
        assert!((report.max_deviation - 0.5).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = DMatrix::<Complex64>::identity(3, 3);
        let b = DMatrix::<Complex64>::identity(4, 4);
        assert!(check_mu(&[a, b], 1e-9).is_err());
        assert!(check_mu(&[], 1e-9).is_err());
    }
}
