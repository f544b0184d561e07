//! Feasibility machinery for mutually unbiased bases.
//!
//! A set of orthonormal bases of C^d is mutually unbiased when every pair of
//! vectors from different bases has squared overlap 1/d. Whether a given
//! constellation of such bases can exist is, after a choice of gauge, a
//! question about real polynomial systems — and this crate provides four
//! independent ways to attack it:
//!
//! * [`groebner`] — Buchberger's algorithm; the reduced basis is `{1}` iff
//!   the system has no complex solution.
//! * [`nulla`] — explicit Nullstellensatz certificates found by exact linear
//!   algebra over the rationals, optionally compressed by symmetry.
//! * [`qmp`] — rank-constrained semidefinite relaxations of the quadratic
//!   matrix program form, attacked by convex iteration.
//! * [`lasserre`] — moment relaxations giving certified lower bounds on
//!   squared-residual objectives.
//!
//! [`polyring`] supplies the exact arithmetic, [`consys`] builds the
//! constellation systems, [`sdp`] holds the shared semidefinite solver and
//! the SDPA interchange format, and [`grassmann`] has the Bloch-space
//! geometry used to compare bases numerically.

pub mod consys;
pub mod grassmann;
pub mod groebner;
pub mod lasserre;
pub mod nulla;
pub mod polyring;
pub mod qmp;
pub mod sdp;

pub use polyring::{Monomial, MonomialOrder, Polynomial, Rational};
