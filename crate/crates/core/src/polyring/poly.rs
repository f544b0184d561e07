//! Multivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::monomial::{Monomial, MonomialOrder};
use super::PolyError;

/// Exact rational scalar. Always stored reduced, with a positive denominator.
pub type Rational = num::BigRational;

/// Build a rational from an integer pair; `den` must be nonzero.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// A polynomial in `nvars` variables over the rationals.
///
/// Terms are kept in a map keyed by the canonical monomial key, so the term
/// stream is deterministic and zero coefficients never survive an operation.
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::constant(nvars), c);
        }
        p
    }

    /// The variable `x_i` (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.terms.insert(Monomial::var(nvars, i), Rational::one());
        p
    }

    /// Single term `c * m`.
    pub fn term(nvars: usize, m: Monomial, c: Rational) -> Self {
        assert_eq!(m.nvars(), nvars, "monomial variable count mismatch");
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    /// Collect terms, merging duplicates and dropping zeros.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial variable count mismatch");
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map(|(m, c)| m.is_constant() && c.is_one())
                .unwrap_or(false)
    }

    /// Is this a (possibly zero) constant?
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_constant)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in canonical (graded) key order, ascending.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// Total degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::total_degree).max()
    }

    /// Coefficient of a monomial (zero when absent).
    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Leading term under `ord`, or `None` for the zero polynomial.
    pub fn leading(&self, ord: MonomialOrder) -> Option<(&Monomial, &Rational)> {
        self.terms
            .iter()
            .max_by(|(a, _), (b, _)| ord.compare(a, b))
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    /// `self * c * m` in one pass.
    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> Polynomial {
        assert_eq!(m.nvars(), self.nvars, "monomial variable count mismatch");
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(ma, a)| (ma.mul(m), a * c))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut acc = Polynomial::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Exact evaluation at a rational point.
    pub fn evaluate(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::PointLength { nvars: self.nvars, got: point.len() });
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exps()) {
                for _ in 0..e {
                    t *= x;
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Floating-point evaluation; coefficients are rounded to nearest.
    pub fn evaluate_f64(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::PointLength { nvars: self.nvars, got: point.len() });
        }
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = rational_to_f64(c);
            for (x, &e) in point.iter().zip(m.exps()) {
                t *= x.powi(e as i32);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Rename variables: variable `i` of `self` becomes variable `perm[i]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.permute(perm), c.clone()))
                .collect(),
        }
    }

    /// Scale by the positive rational that makes all coefficients coprime
    /// integers; the sign is fixed so the canonically largest monomial gets a
    /// positive coefficient. Keeps coefficient growth in check during basis
    /// computations without changing the generated ideal.
    pub fn primitive(&self) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        let mut den_lcm = BigInt::one();
        let mut num_gcd = BigInt::zero();
        for c in self.terms.values() {
            den_lcm = num::integer::lcm(den_lcm, c.denom().clone());
            num_gcd = num::integer::gcd(num_gcd, c.numer().clone());
        }
        let mut factor = Rational::new(den_lcm, num_gcd);
        let lead_sign = self
            .terms
            .iter()
            .next_back()
            .map(|(_, c)| c.is_negative())
            .unwrap_or(false);
        if lead_sign != factor.is_negative() {
            factor = -factor;
        }
        self.scale(&factor)
    }

    /// Largest absolute numerator/denominator bit length over all
    /// coefficients. Used for resource accounting in the exact solvers.
    pub fn coeff_bits(&self) -> u64 {
        self.terms
            .values()
            .map(|c| c.numer().bits().max(c.denom().bits()))
            .max()
            .unwrap_or(0)
    }
}

pub(crate) fn rational_to_f64(c: &Rational) -> f64 {
    num::ToPrimitive::to_f64(c).unwrap_or_else(|| {
        // Fall back to a quotient of roundings for magnitudes beyond f64
        // range; good enough for diagnostics, never used in exact paths.
        let n = num::ToPrimitive::to_f64(c.numer()).unwrap_or(f64::MAX);
        let d = num::ToPrimitive::to_f64(c.denom()).unwrap_or(f64::MAX);
        n / d
    })
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // Highest-degree terms first reads most naturally.
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_constant() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{m:?}")?;
            } else {
                write!(f, "{abs}*{m:?}")?;
            }
        }
        Ok(())
    }
}

macro_rules! check_nvars {
    ($a:expr, $b:expr) => {
        assert_eq!(
            $a.nvars, $b.nvars,
            "polynomial variable counts differ: {} vs {}",
            $a.nvars, $b.nvars
        );
    };
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        check_nvars!(self, rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        check_nvars!(self, rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        check_nvars!(self, rhs);
        let mut out = Polynomial::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                (&self).$method(rhs)
            }
        }
        impl $trait<Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

// --- serialization ---------------------------------------------------------
//
// Wire form:
//   {"nvars": 4, "terms": [{"num": "-1", "den": "2", "exps": [1,0,0,0]}, ...]}
// with coefficients as decimal strings (arbitrary precision survives JSON)
// and terms sorted by the canonical monomial key.

#[derive(Serialize, Deserialize)]
struct TermRepr {
    num: String,
    den: String,
    exps: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    nvars: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = PolyRepr {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| TermRepr {
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                    exps: m.exps().to_vec(),
                })
                .collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(deserializer)?;
        let mut p = Polynomial::zero(repr.nvars);
        for t in repr.terms {
            if t.exps.len() != repr.nvars {
                return Err(D::Error::custom(format!(
                    "term has {} exponents but nvars is {}",
                    t.exps.len(),
                    repr.nvars
                )));
            }
            let num: BigInt = t
                .num
                .parse()
                .map_err(|e| D::Error::custom(format!("bad numerator `{}`: {e}", t.num)))?;
            let den: BigInt = t
                .den
                .parse()
                .map_err(|e| D::Error::custom(format!("bad denominator `{}`: {e}", t.den)))?;
            if den.is_zero() {
                return Err(D::Error::custom("zero denominator"));
            }
            p.add_term(Monomial::new(t.exps), Rational::new(num, den));
        }
        Ok(p)
    }
}

// --- parsing ---------------------------------------------------------------

/// Parse a polynomial expression over the given variable names.
///
/// Grammar: `+ - * ^` with parentheses, integer and `a/b` rational literals,
/// and unary minus. Multiplication must be explicit (`2*x1`, not `2x1`).
pub fn parse_polynomial(nvars: usize, vars: &[&str], src: &str) -> Result<Polynomial, PolyError> {
    assert_eq!(vars.len(), nvars, "variable name list must match nvars");
    let mut p = Parser { src: src.as_bytes(), pos: 0, nvars, vars };
    let poly = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(poly)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
    vars: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> PolyError {
        PolyError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -self.term()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc * self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial, PolyError> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let k = self.uint()?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Polynomial, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.base()?)
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.uint()?;
                let mut r = Rational::from(BigInt::from(num));
                if self.src.get(self.pos) == Some(&b'/') {
                    self.pos += 1;
                    let den = self.uint()?;
                    if den == 0 {
                        return Err(self.err("zero denominator"));
                    }
                    r /= Rational::from(BigInt::from(den));
                }
                Ok(Polynomial::constant(self.nvars, r))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self
                    .src
                    .get(self.pos)
                    .map(|c| c.is_ascii_alphanumeric() || *c == b'_')
                    .unwrap_or(false)
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Polynomial::var(self.nvars, i)),
                    None => {
                        self.pos = start;
                        Err(self.err(&format!("unknown variable `{name}`")))
                    }
                }
            }
            _ => Err(self.err("expected a factor")),
        }
    }

    fn uint(&mut self) -> Result<u32, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).map(u8::is_ascii_digit).unwrap_or(false) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("number out of range"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy(src: &str) -> Polynomial {
        parse_polynomial(2, &["x", "y"], src).unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        let p = xy("x^2 - 2*x*y + y^2 - 1/2");
        assert_eq!(p.num_terms(), 4);
        assert_eq!(p.degree(), Some(2));
        // Display names the variables x1, x2, ... regardless of how the
        // polynomial was built.
        let again = parse_polynomial(2, &["x1", "x2"], &p.to_string()).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn arithmetic_identities() {
        let p = xy("x^2 + y - 3");
        let q = xy("x - y");
        assert_eq!(&p * &q, xy("(x^2 + y - 3)*(x - y)"));
        assert_eq!(&p - &p, Polynomial::zero(2));
        assert_eq!(&p + &Polynomial::zero(2), p);
        assert_eq!((&p - &q) + &q, p);
    }

    #[test]
    fn binomial_square_expands() {
        let p = xy("(x + y)^2");
        assert_eq!(p, xy("x^2 + 2*x*y + y^2"));
    }

    #[test]
    fn leading_depends_on_order() {
        // p = x1^2 + x2^3: grevlex/grlex pick the cubic, lex picks x1^2.
        let p = parse_polynomial(2, &["x1", "x2"], "x1^2 + x2^3").unwrap();
        let (m, _) = p.leading(MonomialOrder::GrevLex).unwrap();
        assert_eq!(m.exps(), &[0, 3]);
        let (m, _) = p.leading(MonomialOrder::Lex).unwrap();
        assert_eq!(m.exps(), &[2, 0]);
        assert!(Polynomial::zero(2).leading(MonomialOrder::Lex).is_none());
    }

    #[test]
    fn evaluation_exact_and_float() {
        let p = xy("x^2*y - 3*x + 1/2");
        // 4*(-1/2) - 6 + 1/2 = -15/2
        let v = p.evaluate(&[ratio(2, 1), ratio(-1, 2)]).unwrap();
        assert_eq!(v, ratio(-15, 2));
        let f = p.evaluate_f64(&[2.0, -0.5]).unwrap();
        assert!((f + 7.5).abs() < 1e-12);
        assert!(p.evaluate(&[ratio(1, 1)]).is_err());
    }

    #[test]
    fn primitive_clears_denominators_and_content() {
        let p = xy("2/3*x - 4/9*y");
        let prim = p.primitive();
        assert_eq!(prim, xy("3*x - 2*y"));
        let q = xy("-6*x^2 - 9");
        assert_eq!(q.primitive(), xy("2*x^2 + 3"));
    }

    #[test]
    fn serde_round_trip_preserves_big_coefficients() {
        let big = Rational::new(
            "123456789012345678901234567890".parse::<BigInt>().unwrap(),
            "987654321098765432109876543211".parse::<BigInt>().unwrap(),
        );
        let p = Polynomial::term(3, Monomial::new(vec![1, 2, 0]), big.clone())
            + Polynomial::constant(3, -Rational::one());
        let json = serde_json::to_string(&p).unwrap();
        let back: Polynomial = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.coeff(&Monomial::new(vec![1, 2, 0])), big);
    }

    #[test]
    fn deserialization_canonicalizes() {
        // Duplicate monomials merge; zero terms drop; denominator sign fixes.
        let json = r#"{"nvars":1,"terms":[
            {"num":"1","den":"-2","exps":[1]},
            {"num":"1","den":"2","exps":[1]},
            {"num":"0","den":"7","exps":[0]},
            {"num":"5","den":"1","exps":[2]}
        ]}"#;
        let p: Polynomial = serde_json::from_str(json).unwrap();
        assert_eq!(p, parse_polynomial(1, &["x"], "5*x^2").unwrap());
        let bad = r#"{"nvars":2,"terms":[{"num":"1","den":"1","exps":[1]}]}"#;
        assert!(serde_json::from_str::<Polynomial>(bad).is_err());
    }

    #[test]
    fn permute_vars_relabels() {
        let p = parse_polynomial(3, &["a", "b", "c"], "a^2*b + c").unwrap();
        // a->c, b->a, c->b  (perm[i] = new index of old variable i)
        let q = p.permute_vars(&[2, 0, 1]);
        assert_eq!(q, parse_polynomial(3, &["a", "b", "c"], "c^2*a + b").unwrap());
    }
}
