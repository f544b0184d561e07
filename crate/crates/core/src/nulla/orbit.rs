//! Symmetry (orbit) reduction of the NulLA linear system.
//!
//! When the constraint set is invariant under a variable-permutation group,
//! a certificate can be searched among *symmetric* cofactor vectors: ones
//! constant on the orbits of the column labels `(x^delta, i)` under
//! `(delta, i) -> (g . delta, pi_g(i))`, where `pi_g` is the permutation the
//! generator induces on the constraint list. For such vectors the full
//! equation at a row monomial follows from the equation at any other row in
//! its orbit, so it suffices to keep one representative row per orbit and to
//! sum each kept row's coefficients over every member of a column orbit.
//!
//! The reduction is one-sided: a reduced solution always lifts to a genuine
//! certificate (and is re-verified symbolically), but a miss only rules out
//! symmetric certificates at that degree.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::consys::{constraint_action_on, PermutationGroup};
use crate::polyring::{Monomial, Polynomial, Rational};

use super::{build_linear_system, solve, LinearSystem, NullaError};

/// Disjoint-set union with union-by-minimum, so every root is the smallest
/// member of its set — the canonical orbit representative.
struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Orbit ids in order of first appearance plus the representative
    /// (minimal member) of each orbit.
    fn orbits(mut self) -> (Vec<usize>, Vec<usize>) {
        let n = self.parent.len();
        let mut orbit_of = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for i in 0..n {
            let root = self.find(i);
            if root == i {
                orbit_of[i] = reps.len();
                reps.push(i);
            } else {
                orbit_of[i] = orbit_of[root];
            }
        }
        (orbit_of, reps)
    }
}

/// The orbit-reduced NulLA system together with everything needed to lift a
/// reduced solution back to full cofactors.
pub struct ReducedSystem {
    full: LinearSystem,
    row_orbit: Vec<usize>,
    row_reps: Vec<usize>,
    col_orbit: Vec<usize>,
    col_reps: Vec<usize>,
    /// Column-major reduced matrix: `entries[col orbit] = [(row orbit, sum)]`.
    entries: Vec<Vec<(usize, Rational)>>,
    /// Row orbit of the constant monomial (always a singleton orbit).
    b_orbit: usize,
}

impl ReducedSystem {
    /// `(row orbits, column orbits)`.
    pub fn reduced_shape(&self) -> (usize, usize) {
        (self.row_reps.len(), self.col_reps.len())
    }

    /// `(rows, columns)` of the unreduced system.
    pub fn full_shape(&self) -> (usize, usize) {
        (self.full.rows.len(), self.full.cols.len())
    }

    /// Column labels of the unreduced system, aligned with [`Self::lift`].
    pub fn full_cols(&self) -> &[(Monomial, usize)] {
        &self.full.cols
    }

    /// Orbit id of every full row, in order of first appearance.
    pub fn row_orbits(&self) -> &[usize] {
        &self.row_orbit
    }

    /// Orbit id of every full column, aligned with [`Self::full_cols`].
    pub fn col_orbits(&self) -> &[usize] {
        &self.col_orbit
    }

    /// Expand a reduced solution to the full column set by giving every
    /// member of a column orbit its orbit's value.
    pub fn lift(&self, reduced: &[Rational]) -> Vec<Rational> {
        assert_eq!(reduced.len(), self.col_reps.len(), "reduced solution length mismatch");
        self.col_orbit.iter().map(|&o| reduced[o].clone()).collect()
    }

    /// Solve the reduced system exactly and lift; `None` when no symmetric
    /// certificate of this degree exists.
    pub fn solve(&self) -> Option<Vec<Rational>> {
        self.solve_capped(u64::MAX).expect("no caps can fire")
    }

    pub(crate) fn solve_capped(
        &self,
        max_coeff_bits: u64,
    ) -> Result<Option<Vec<Rational>>, NullaError> {
        let rows = solve::rows_from_columns(self.row_reps.len(), &self.entries, self.b_orbit);
        Ok(solve::solve_rows(rows, self.col_reps.len(), max_coeff_bits)?
            .map(|y| self.lift(&y)))
    }
}

/// Build the orbit-reduced system at degree `d`.
///
/// Errors with [`NullaError::NotInvariant`] when the group degree does not
/// match the variable count or some generator fails to map the constraint
/// multiset onto itself.
pub fn orbit_reduce(
    constraints: &[Polynomial],
    d: u32,
    group: &PermutationGroup,
) -> Result<ReducedSystem, NullaError> {
    let full = build_linear_system(constraints, d)?;
    if group.degree() != full.nvars {
        return Err(NullaError::NotInvariant(format!(
            "group degree {} does not match the {} system variables",
            group.degree(),
            full.nvars
        )));
    }
    let mut actions = Vec::with_capacity(group.generators().len());
    for gen in group.generators() {
        let action = constraint_action_on(constraints, gen).ok_or_else(|| {
            NullaError::NotInvariant(
                "a generator does not map the constraint set onto itself".into(),
            )
        })?;
        actions.push(action);
    }

    let row_index: HashMap<&Monomial, usize> =
        full.rows.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let col_index: HashMap<(&Monomial, usize), usize> = full
        .cols
        .iter()
        .enumerate()
        .map(|(c, (m, i))| ((m, *i), c))
        .collect();

    let mut row_dsu = Dsu::new(full.rows.len());
    let mut col_dsu = Dsu::new(full.cols.len());
    for (gen, action) in group.generators().iter().zip(&actions) {
        for (r, m) in full.rows.iter().enumerate() {
            row_dsu.union(r, row_index[&m.permute(gen)]);
        }
        for (c, (delta, i)) in full.cols.iter().enumerate() {
            let img = delta.permute(gen);
            col_dsu.union(c, col_index[&(&img, action[*i])]);
        }
    }
    let (row_orbit, row_reps) = row_dsu.orbits();
    let (col_orbit, col_reps) = col_dsu.orbits();

    // Members per column orbit, then fold each orbit's columns at the
    // representative rows only: the reduced entry at (row orbit, col orbit)
    // is the sum over member columns of the coefficient at the row orbit's
    // representative monomial.
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); col_reps.len()];
    for (c, &o) in col_orbit.iter().enumerate() {
        members[o].push(c);
    }
    let is_rep: Vec<bool> = {
        let mut v = vec![false; full.rows.len()];
        for &r in &row_reps {
            v[r] = true;
        }
        v
    };
    let entries: Vec<Vec<(usize, Rational)>> = members
        .par_iter()
        .map(|cols| {
            let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
            for &c in cols {
                for (r, coeff) in &full.entries[c] {
                    if is_rep[*r] {
                        use num::Zero;
                        let slot = acc.entry(row_orbit[*r]).or_insert_with(Rational::zero);
                        *slot += coeff;
                    }
                }
            }
            acc.into_iter()
                .filter(|(_, v)| !num::Zero::is_zero(v))
                .collect()
        })
        .collect();

    let b_orbit = row_orbit[full.b_row()];
    debug_assert_eq!(
        row_reps[b_orbit],
        full.b_row(),
        "the constant monomial is fixed by every variable permutation"
    );

    Ok(ReducedSystem { full, row_orbit, row_reps, col_orbit, col_reps, entries, b_orbit })
}
