//! Buchberger's algorithm, reduced Gröbner bases, and the complex
//! infeasibility test: a polynomial system has no common zero over the
//! complex numbers if and only if its reduced Gröbner basis is `{1}`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polyring::{Monomial, MonomialOrder, Polynomial, Rational};

#[derive(Debug, Error)]
pub enum GroebnerError {
    #[error("input system is empty")]
    EmptyInput,
    #[error("all input polynomials are zero; the zero ideal has no finite basis computation")]
    AllZero,
    #[error("zero polynomial has no S-polynomial")]
    ZeroInput,
    #[error("degree cap {cap} exceeded (reached degree {reached})")]
    DegreeCap { cap: u32, reached: u32 },
}

/// A Gröbner basis together with the order it was computed under.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroebnerBasis {
    pub polynomials: Vec<Polynomial>,
    pub order: MonomialOrder,
    pub reduced: bool,
}

/// Work counters from a Buchberger run. `pairs` counts critical pairs popped
/// from the queue (including ones the criteria discard); `reductions` counts
/// full normal-form computations; `max_degree_seen` is the largest total
/// degree among processed S-polynomial lcms and appended basis elements.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct GroebnerStats {
    pub pairs: u64,
    pub reductions: u64,
    pub max_degree_seen: u32,
}

#[derive(Clone, Copy, Debug)]
pub struct BuchbergerOptions {
    pub order: MonomialOrder,
    /// Abort with a resource error when any intermediate degree exceeds this.
    pub max_degree: Option<u32>,
    /// Buchberger's chain (second) criterion. The first criterion is always
    /// on; this one is optional and off by default.
    pub chain_criterion: bool,
}

impl Default for BuchbergerOptions {
    fn default() -> Self {
        BuchbergerOptions {
            order: MonomialOrder::GrevLex,
            max_degree: None,
            chain_criterion: false,
        }
    }
}

// --- order-sorted term lists -------------------------------------------------
//
// Buchberger spends its life asking for leading terms and merging scaled
// polynomials, so internally polynomials are kept as term vectors sorted
// descending under the active order.

#[derive(Clone)]
struct OrdPoly {
    terms: Vec<(Monomial, Rational)>,
}

impl OrdPoly {
    fn from_poly(p: &Polynomial, ord: MonomialOrder) -> Self {
        let mut terms: Vec<(Monomial, Rational)> =
            p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        terms.sort_by(|(a, _), (b, _)| ord.compare(b, a));
        OrdPoly { terms }
    }

    fn into_poly(self, nvars: usize) -> Polynomial {
        Polynomial::from_terms(nvars, self.terms)
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn leading(&self) -> &(Monomial, Rational) {
        &self.terms[0]
    }

    fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.total_degree())
            .max()
            .unwrap_or(0)
    }

    /// `self - c * x^m * g`, preserving sort order. One sorted merge.
    fn sub_scaled(&self, c: &Rational, m: &Monomial, g: &OrdPoly, ord: MonomialOrder) -> OrdPoly {
        let mut out = Vec::with_capacity(self.terms.len() + g.terms.len());
        let mut i = 0;
        let mut j = 0;
        while i < self.terms.len() && j < g.terms.len() {
            let gm = g.terms[j].0.mul(m);
            match ord.compare(&self.terms[i].0, &gm) {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push((gm, -(c * &g.terms[j].1)));
                    j += 1;
                }
                Ordering::Equal => {
                    let coeff = &self.terms[i].1 - c * &g.terms[j].1;
                    if !num::Zero::is_zero(&coeff) {
                        out.push((gm, coeff));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        for (gm, gc) in &g.terms[j..] {
            out.push((gm.mul(m), -(c * gc)));
        }
        OrdPoly { terms: out }
    }

    /// Divide out the rational content (make coefficients coprime integers,
    /// leading coefficient positive under the active order). Keeps bit-sizes
    /// in check; scaling does not change the ideal.
    fn make_primitive(&mut self) {
        if self.terms.is_empty() {
            return;
        }
        let mut den_lcm = num::BigInt::from(1);
        let mut num_gcd = num::BigInt::from(0);
        for (_, c) in &self.terms {
            den_lcm = num::integer::lcm(den_lcm, c.denom().clone());
            num_gcd = num::integer::gcd(num_gcd, c.numer().clone());
        }
        let mut factor = Rational::new(den_lcm, num_gcd);
        if num::Signed::is_negative(&self.terms[0].1) == num::Signed::is_positive(&factor) {
            factor = -factor;
        }
        for (_, c) in &mut self.terms {
            *c *= &factor;
        }
    }
}

/// Full normal form of `f` against the (nonzero) divisors `g`: repeatedly
/// cancel the leading term by some divisor whose leading monomial divides it,
/// otherwise retire the term to the remainder. Returns the remainder and the
/// number of cancellation steps.
fn normal_form(f: &OrdPoly, divisors: &[OrdPoly], ord: MonomialOrder) -> (OrdPoly, u64) {
    let mut h = f.clone();
    let mut remainder: Vec<(Monomial, Rational)> = Vec::new();
    let mut steps = 0u64;
    'outer: while !h.is_zero() {
        let (lm, lc) = h.leading().clone();
        for g in divisors {
            let (glm, glc) = g.leading();
            if let Some(q) = lm.checked_div(glm) {
                let c = &lc / glc;
                h = h.sub_scaled(&c, &q, g, ord);
                steps += 1;
                continue 'outer;
            }
        }
        // Leading term irreducible: move it to the remainder (strictly
        // decreasing order, so the remainder stays sorted).
        remainder.push((lm, lc));
        h.terms.remove(0);
    }
    (OrdPoly { terms: remainder }, steps)
}

/// The S-polynomial `S(f,g) = (L/lt f) f - (L/lt g) g`, `L = lcm(lp f, lp g)`.
/// Leading terms cancel by construction.
pub fn s_polynomial(
    f: &Polynomial,
    g: &Polynomial,
    ord: MonomialOrder,
) -> Result<Polynomial, GroebnerError> {
    if f.is_zero() || g.is_zero() {
        return Err(GroebnerError::ZeroInput);
    }
    let nvars = f.nvars();
    let fo = OrdPoly::from_poly(f, ord);
    let go = OrdPoly::from_poly(g, ord);
    Ok(s_poly_internal(&fo, &go, ord).into_poly(nvars))
}

fn s_poly_internal(f: &OrdPoly, g: &OrdPoly, ord: MonomialOrder) -> OrdPoly {
    let (flm, flc) = f.leading();
    let (glm, glc) = g.leading();
    let l = flm.lcm(glm);
    let fm = l.checked_div(flm).expect("lcm divisible by both");
    let gm = l.checked_div(glm).expect("lcm divisible by both");
    // (1/lc_f) x^fm f - (1/lc_g) x^gm g, via one scaled merge:
    // start from (1/lc_f) x^fm f and subtract.
    let inv_flc = Rational::from(num::BigInt::from(1)) / flc;
    let scaled_f = OrdPoly {
        terms: f
            .terms
            .iter()
            .map(|(m, c)| (m.mul(&fm), c * &inv_flc))
            .collect(),
    };
    let c = Rational::from(num::BigInt::from(1)) / glc;
    scaled_f.sub_scaled(&c, &gm, g, ord)
}

/// Normal form of `f` against the list `g` (all members must be nonzero;
/// zero members are skipped defensively).
pub fn reduce(f: &Polynomial, g: &[Polynomial], ord: MonomialOrder) -> Polynomial {
    let nvars = f.nvars();
    let divisors: Vec<OrdPoly> = g
        .iter()
        .filter(|p| !p.is_zero())
        .map(|p| OrdPoly::from_poly(p, ord))
        .collect();
    let fo = OrdPoly::from_poly(f, ord);
    normal_form(&fo, &divisors, ord).0.into_poly(nvars)
}

/// Buchberger's algorithm with the normal selection strategy (lowest lcm
/// degree first) and the coprimality criterion; the chain criterion is
/// opt-in. The result is a Gröbner basis of the input ideal, not yet reduced.
pub fn buchberger(
    input: &[Polynomial],
    opts: &BuchbergerOptions,
) -> Result<(GroebnerBasis, GroebnerStats), GroebnerError> {
    if input.is_empty() {
        return Err(GroebnerError::EmptyInput);
    }
    let nvars = input[0].nvars();
    let ord = opts.order;
    let mut stats = GroebnerStats::default();

    let mut basis: Vec<OrdPoly> = Vec::new();
    for p in input {
        if p.is_zero() {
            continue;
        }
        let mut op = OrdPoly::from_poly(p, ord);
        op.make_primitive();
        basis.push(op);
    }
    if basis.is_empty() {
        return Err(GroebnerError::AllZero);
    }

    // Critical pair queue keyed by lcm degree (normal strategy); `done`
    // tracks treated pairs for the chain criterion.
    let mut queue: Vec<(u32, usize, usize)> = Vec::new();
    let mut done: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
    let push_pairs = |queue: &mut Vec<(u32, usize, usize)>, basis: &[OrdPoly], j: usize| {
        for i in 0..j {
            let l = basis[i].leading().0.lcm(&basis[j].leading().0);
            queue.push((l.total_degree(), i, j));
        }
    };
    for j in 0..basis.len() {
        push_pairs(&mut queue, &basis, j);
    }

    while !queue.is_empty() {
        // Normal strategy: smallest lcm degree first (stable tie-break on
        // indices for determinism).
        let best = queue
            .iter()
            .enumerate()
            .min_by_key(|(_, &(deg, i, j))| (deg, i, j))
            .map(|(pos, _)| pos)
            .unwrap();
        let (lcm_deg, i, j) = queue.swap_remove(best);
        stats.pairs += 1;
        done.insert((i, j));

        if let Some(cap) = opts.max_degree {
            if lcm_deg > cap {
                return Err(GroebnerError::DegreeCap { cap, reached: lcm_deg });
            }
        }
        stats.max_degree_seen = stats.max_degree_seen.max(lcm_deg);

        let (ilm, _) = basis[i].leading();
        let (jlm, _) = basis[j].leading();
        // First criterion: coprime leading monomials reduce to zero.
        if ilm.coprime(jlm) {
            continue;
        }
        // Chain criterion: some k with lp(k) | lcm(i,j) and both (i,k),
        // (j,k) already treated.
        if opts.chain_criterion {
            let l = ilm.lcm(jlm);
            let chained = (0..basis.len()).any(|k| {
                k != i
                    && k != j
                    && basis[k].leading().0.divides(&l)
                    && done.contains(&(i.min(k), i.max(k)))
                    && done.contains(&(j.min(k), j.max(k)))
            });
            if chained {
                continue;
            }
        }

        let s = s_poly_internal(&basis[i], &basis[j], ord);
        let (mut h, _) = normal_form(&s, &basis, ord);
        stats.reductions += 1;
        if h.is_zero() {
            continue;
        }
        h.make_primitive();
        let h_deg = h.degree();
        if let Some(cap) = opts.max_degree {
            if h_deg > cap {
                return Err(GroebnerError::DegreeCap { cap, reached: h_deg });
            }
        }
        stats.max_degree_seen = stats.max_degree_seen.max(h_deg);

        // A nonzero constant entered the basis: the ideal is the whole ring
        // and `{1}` settles every remaining question — stop early.
        if h.leading().0.is_constant() {
            basis.push(OrdPoly {
                terms: vec![(Monomial::constant(nvars), Rational::from(num::BigInt::from(1)))],
            });
            break;
        }

        basis.push(h);
        push_pairs(&mut queue, &basis, basis.len() - 1);
    }

    let polynomials = basis
        .into_iter()
        .map(|op| op.into_poly(nvars))
        .collect();
    Ok((
        GroebnerBasis { polynomials, order: ord, reduced: false },
        stats,
    ))
}

/// Minimize and inter-reduce a Gröbner basis into the unique reduced basis:
/// monic generators, none of whose monomials is divisible by another
/// generator's leading monomial, sorted by leading monomial.
pub fn reduce_basis(gb: &GroebnerBasis) -> GroebnerBasis {
    let ord = gb.order;
    let mut polys: Vec<Polynomial> = gb
        .polynomials
        .iter()
        .filter(|p| !p.is_zero())
        .cloned()
        .collect();
    if polys.is_empty() {
        return GroebnerBasis { polynomials: vec![], order: ord, reduced: true };
    }
    let nvars = polys[0].nvars();

    // Minimize: drop any generator whose leading monomial is divisible by
    // another survivor's leading monomial.
    let mut keep: Vec<bool> = vec![true; polys.len()];
    for a in 0..polys.len() {
        if !keep[a] {
            continue;
        }
        let (lma, _) = polys[a].leading(ord).unwrap();
        for b in 0..polys.len() {
            if a == b || !keep[b] {
                continue;
            }
            let (lmb, _) = polys[b].leading(ord).unwrap();
            if lmb.divides(lma) && !(lma == lmb && b > a) {
                keep[a] = false;
                break;
            }
        }
    }
    let mut minimal: Vec<Polynomial> = polys
        .drain(..)
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect();

    // Inter-reduce: each generator to normal form against the others, until
    // stable. Termination: each pass can only shrink/standardize terms.
    loop {
        let mut changed = false;
        for i in 0..minimal.len() {
            let others: Vec<Polynomial> = minimal
                .iter()
                .enumerate()
                .filter_map(|(j, p)| (j != i && !p.is_zero()).then(|| p.clone()))
                .collect();
            let r = reduce(&minimal[i], &others, ord);
            if r != minimal[i] {
                minimal[i] = r;
                changed = true;
            }
        }
        minimal.retain(|p| !p.is_zero());
        if !changed {
            break;
        }
    }

    // Monic + deterministic order (ascending leading monomial).
    let mut out: Vec<Polynomial> = minimal
        .into_iter()
        .map(|p| {
            let lc = p.leading(ord).unwrap().1.clone();
            p.scale(&(Rational::from(num::BigInt::from(1)) / lc))
        })
        .collect();
    out.sort_by(|a, b| {
        ord.compare(a.leading(ord).unwrap().0, b.leading(ord).unwrap().0)
    });
    let _ = nvars;
    GroebnerBasis { polynomials: out, order: ord, reduced: true }
}

/// Compute the reduced Gröbner basis of `input` under `opts`.
pub fn groebner_basis(
    input: &[Polynomial],
    opts: &BuchbergerOptions,
) -> Result<(GroebnerBasis, GroebnerStats), GroebnerError> {
    let (gb, stats) = buchberger(input, opts)?;
    Ok((reduce_basis(&gb), stats))
}

/// Theorem-1 test: the system has no common complex zero iff the reduced
/// Gröbner basis is `{1}`. Uses grevlex; the verdict is order-independent.
#[allow(non_snake_case)]
pub fn infeasible_over_C(input: &[Polynomial]) -> Result<bool, GroebnerError> {
    let (gb, _) = groebner_basis(input, &BuchbergerOptions::default())?;
    Ok(basis_is_unit(&gb))
}

/// Is this basis exactly `{1}`?
pub fn basis_is_unit(gb: &GroebnerBasis) -> bool {
    gb.polynomials.len() == 1 && gb.polynomials[0].is_one()
}
