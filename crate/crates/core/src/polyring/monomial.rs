//! Monomials and the three monomial orders used by the basis algorithms.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A monomial `x^a = x_1^{a_1} ... x_n^{a_n}`, stored as its exponent vector.
///
/// The length of the exponent vector is the ambient variable count; all
/// monomials of one polynomial share it.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial { exps }
    }

    /// The constant monomial `1` in `nvars` variables.
    pub fn constant(nvars: usize) -> Self {
        Monomial { exps: vec![0; nvars] }
    }

    /// The single variable `x_i` (0-based index).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range for {nvars} variables");
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Monomial { exps }
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn total_degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// Product of monomials (exponent vectors add).
    pub fn mul(&self, other: &Monomial) -> Monomial {
        assert_same_nvars(self, other);
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Least common multiple (componentwise max).
    pub fn lcm(&self, other: &Monomial) -> Monomial {
        assert_same_nvars(self, other);
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| *a.max(b))
                .collect(),
        }
    }

    /// Does `self` divide `other`?
    pub fn divides(&self, other: &Monomial) -> bool {
        assert_same_nvars(self, other);
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `self / other`, or `None` when `other` does not divide `self`.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        assert_same_nvars(self, other);
        let mut exps = Vec::with_capacity(self.exps.len());
        for (a, b) in self.exps.iter().zip(&other.exps) {
            exps.push(a.checked_sub(*b)?);
        }
        Some(Monomial { exps })
    }

    /// Are the exponents disjoint (`lcm = product`)? Used by Buchberger's
    /// first criterion.
    pub fn coprime(&self, other: &Monomial) -> bool {
        assert_same_nvars(self, other);
        self.exps.iter().zip(&other.exps).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Rename variables: variable `i` becomes variable `perm[i]`.
    ///
    /// `perm` must be a permutation of `0..nvars`.
    pub fn permute(&self, perm: &[usize]) -> Monomial {
        assert_eq!(perm.len(), self.exps.len(), "permutation degree mismatch");
        let mut exps = vec![0; self.exps.len()];
        for (i, &e) in self.exps.iter().enumerate() {
            exps[perm[i]] += e;
        }
        Monomial { exps }
    }
}

fn assert_same_nvars(a: &Monomial, b: &Monomial) {
    assert_eq!(
        a.exps.len(),
        b.exps.len(),
        "monomial variable counts differ: {} vs {}",
        a.exps.len(),
        b.exps.len()
    );
}

/// Canonical storage key: graded, ties broken by plain exponent-vector
/// comparison. This is the key behind term maps and serialization order; it is
/// independent of the order an algorithm runs under, so equal polynomials
/// always serialize identically.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "x{}", i + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// The monomial orders supported by every algorithm in this crate.
///
/// All three are total, multiplicative well-orderings. `GrevLex` is the
/// default everywhere; it is usually the cheapest for basis computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MonomialOrder {
    /// Pure lexicographic with `x_1 > x_2 > ... > x_n`.
    Lex,
    /// Total degree first, ties broken by lex.
    GrLex,
    /// Total degree first, ties broken by comparing exponents of the last
    /// variable upward, smaller exponents ranking larger.
    GrevLex,
}

impl MonomialOrder {
    /// Compare two monomials under this order.
    ///
    /// Panics when the monomials live in different variable counts.
    pub fn compare(&self, a: &Monomial, b: &Monomial) -> Ordering {
        assert_same_nvars(a, b);
        match self {
            MonomialOrder::Lex => lex_cmp(a.exps(), b.exps()),
            MonomialOrder::GrLex => a
                .total_degree()
                .cmp(&b.total_degree())
                .then_with(|| lex_cmp(a.exps(), b.exps())),
            MonomialOrder::GrevLex => a
                .total_degree()
                .cmp(&b.total_degree())
                .then_with(|| {
                    for (ea, eb) in a.exps().iter().zip(b.exps()).rev() {
                        match ea.cmp(eb) {
                            Ordering::Equal => continue,
                            // smaller trailing exponent = larger monomial
                            Ordering::Less => return Ordering::Greater,
                            Ordering::Greater => return Ordering::Less,
                        }
                    }
                    Ordering::Equal
                }),
        }
    }

    /// The monomial `max(a, b)` under this order.
    pub fn max<'a>(&self, a: &'a Monomial, b: &'a Monomial) -> &'a Monomial {
        if self.compare(a, b) == Ordering::Less {
            b
        } else {
            a
        }
    }
}

impl Default for MonomialOrder {
    fn default() -> Self {
        MonomialOrder::GrevLex
    }
}

impl fmt::Display for MonomialOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonomialOrder::Lex => write!(f, "lex"),
            MonomialOrder::GrLex => write!(f, "grlex"),
            MonomialOrder::GrevLex => write!(f, "grevlex"),
        }
    }
}

impl std::str::FromStr for MonomialOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lex" => Ok(MonomialOrder::Lex),
            "grlex" => Ok(MonomialOrder::GrLex),
            "grevlex" => Ok(MonomialOrder::GrevLex),
            other => Err(format!("unknown monomial order `{other}` (expected lex, grlex or grevlex)")),
        }
    }
}

fn lex_cmp(a: &[u32], b: &[u32]) -> Ordering {
    for (ea, eb) in a.iter().zip(b) {
        match ea.cmp(eb) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    Ordering::Equal
}
