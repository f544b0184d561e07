//! Exact sparse linear solving over the rationals.
//!
//! Gaussian elimination with a Markowitz-style pivot rule (sparsest row, then
//! least-occupied column) and per-row primitive-integer rescaling after every
//! update, which keeps coefficient bit growth polynomial in practice.

use num::traits::{One, Signed, Zero};
use num::BigInt;

use crate::polyring::Rational;

use super::NullaError;

/// One equation: sorted sparse coefficient row plus right-hand side.
#[derive(Clone)]
pub(crate) struct Row {
    /// (column, coefficient), strictly increasing columns, no zeros.
    pub entries: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

impl Row {
    fn coeff(&self, col: usize) -> Option<&Rational> {
        self.entries
            .binary_search_by_key(&col, |e| e.0)
            .ok()
            .map(|i| &self.entries[i].1)
    }

    /// `self -= factor * other`, sparse merge.
    fn sub_scaled(&mut self, factor: &Rational, other: &Row) {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((b[j].0, -(factor * &b[j].1)));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = &a[i].1 - factor * &b[j].1;
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        for (col, c) in &b[j..] {
            out.push((*col, -(factor * c)));
        }
        self.entries = out;
        self.rhs = &self.rhs - factor * &other.rhs;
    }

    /// Rescale to coprime integer coefficients (rhs included).
    fn make_primitive(&mut self) {
        if self.entries.is_empty() && self.rhs.is_zero() {
            return;
        }
        let mut den_lcm = BigInt::one();
        let mut num_gcd = BigInt::zero();
        for c in self.entries.iter().map(|(_, c)| c).chain([&self.rhs]) {
            if c.is_zero() {
                continue;
            }
            den_lcm = num::integer::lcm(den_lcm, c.denom().clone());
            num_gcd = num::integer::gcd(num_gcd, c.numer().clone());
        }
        let factor = Rational::new(den_lcm, num_gcd).abs();
        if factor.is_one() {
            return;
        }
        for (_, c) in &mut self.entries {
            *c *= &factor;
        }
        self.rhs *= &factor;
    }

    fn max_bits(&self) -> u64 {
        self.entries
            .iter()
            .map(|(_, c)| c)
            .chain([&self.rhs])
            .map(|c| c.numer().bits().max(c.denom().bits()))
            .max()
            .unwrap_or(0)
    }
}

/// Solve `A y = b` exactly. Returns `Ok(None)` when inconsistent, otherwise
/// one solution with free columns set to zero. `max_coeff_bits` bounds the
/// bit-size of any intermediate coefficient; exceeding it is a resource
/// error.
pub(crate) fn solve_rows(
    mut rows: Vec<Row>,
    ncols: usize,
    max_coeff_bits: u64,
) -> Result<Option<Vec<Rational>>, NullaError> {
    rows.retain(|r| !(r.entries.is_empty() && r.rhs.is_zero()));
    for r in &mut rows {
        r.make_primitive();
    }

    let mut active: Vec<usize> = (0..rows.len()).collect();
    // (row, pivot column) in elimination order, for back-substitution.
    let mut pivots: Vec<(usize, usize)> = Vec::new();

    loop {
        // Column occupancy over active rows.
        let mut col_count = vec![0usize; ncols];
        for &r in &active {
            for (c, _) in &rows[r].entries {
                col_count[*c] += 1;
            }
        }
        // Markowitz-style choice: among the nonempty active rows with the
        // fewest entries, pick the entry whose column is least occupied.
        let mut best: Option<(usize, usize, usize, usize)> = None; // (nnz, colcount, row, col)
        for &r in &active {
            if rows[r].entries.is_empty() {
                continue;
            }
            let nnz = rows[r].entries.len();
            if let Some((bn, ..)) = best {
                if nnz > bn {
                    continue;
                }
            }
            for (c, _) in &rows[r].entries {
                let key = (nnz, col_count[*c], r, *c);
                if best.map(|b| key < b).unwrap_or(true) {
                    best = Some(key);
                }
            }
        }
        let Some((_, _, prow, pcol)) = best else {
            break; // no nonzero rows left
        };

        let pivot = rows[prow].clone();
        let pivot_coeff = pivot.coeff(pcol).expect("chosen entry exists").clone();
        for &r in &active {
            if r == prow {
                continue;
            }
            let Some(c) = rows[r].coeff(pcol) else { continue };
            let factor = c / &pivot_coeff;
            rows[r].sub_scaled(&factor, &pivot);
            rows[r].make_primitive();
            if rows[r].max_bits() > max_coeff_bits {
                return Err(NullaError::Resource {
                    message: format!(
                        "coefficient bit-size exceeded {max_coeff_bits} during elimination"
                    ),
                    last_completed_degree: None,
                });
            }
        }
        active.retain(|&r| r != prow);
        pivots.push((prow, pcol));
    }

    // Any zero row with nonzero rhs: inconsistent.
    for &r in &active {
        if rows[r].entries.is_empty() && !rows[r].rhs.is_zero() {
            return Ok(None);
        }
    }

    // Back-substitute in reverse elimination order; free columns stay zero.
    let mut y = vec![Rational::zero(); ncols];
    for &(r, c) in pivots.iter().rev() {
        let row = &rows[r];
        let mut acc = row.rhs.clone();
        let mut pivot_coeff = None;
        for (col, coeff) in &row.entries {
            if *col == c {
                pivot_coeff = Some(coeff);
            } else {
                acc -= coeff * &y[*col];
            }
        }
        y[c] = acc / pivot_coeff.expect("pivot entry survives its own elimination step");
    }
    Ok(Some(y))
}

/// Build solver rows from column-major sparse data.
pub(crate) fn rows_from_columns(
    nrows: usize,
    cols: &[Vec<(usize, Rational)>],
    b_row: usize,
) -> Vec<Row> {
    let mut rows = vec![
        Row { entries: Vec::new(), rhs: Rational::zero() };
        nrows
    ];
    for (col, entries) in cols.iter().enumerate() {
        for (row, coeff) in entries {
            rows[*row].entries.push((col, coeff.clone()));
        }
    }
    // Columns were visited in increasing order, so entries are sorted.
    rows[b_row].rhs = Rational::one();
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::ratio;

    fn row(entries: &[(usize, i64)], rhs: i64) -> Row {
        Row {
            entries: entries.iter().map(|&(c, v)| (c, ratio(v, 1))).collect(),
            rhs: ratio(rhs, 1),
        }
    }

    #[test]
    fn identity_system() {
        let rows = vec![row(&[(0, 1)], 1), row(&[(1, 1)], 0)];
        let y = solve_rows(rows, 2, 1 << 20).unwrap().unwrap();
        assert_eq!(y, vec![ratio(1, 1), ratio(0, 1)]);
    }

    #[test]
    fn inconsistent_zero_equation() {
        let rows = vec![row(&[], 1)];
        assert!(solve_rows(rows, 1, 1 << 20).unwrap().is_none());
        let rows = vec![row(&[(0, 1), (1, 1)], 1), row(&[(0, 2), (1, 2)], 3)];
        assert!(solve_rows(rows, 2, 1 << 20).unwrap().is_none());
    }

    #[test]
    fn underdetermined_takes_free_columns_zero() {
        // y0 + y1 = 2 with free y1 → y = (2, 0).
        let rows = vec![row(&[(0, 1), (1, 1)], 2)];
        let y = solve_rows(rows, 2, 1 << 20).unwrap().unwrap();
        assert_eq!(y, vec![ratio(2, 1), ratio(0, 1)]);
    }

    #[test]
    fn dependent_rows_are_fine() {
        let rows = vec![
            row(&[(0, 1), (1, -1)], 0),
            row(&[(0, 2), (1, -2)], 0),
            row(&[(0, 1), (1, 1)], 2),
        ];
        let y = solve_rows(rows, 2, 1 << 20).unwrap().unwrap();
        assert_eq!(y, vec![ratio(1, 1), ratio(1, 1)]);
    }

    #[test]
    fn rational_pivoting_stays_exact() {
        // A deliberately awkward fraction mix.
        let rows = vec![
            Row {
                entries: vec![(0, ratio(1, 3)), (1, ratio(1, 7))],
                rhs: ratio(1, 21),
            },
            Row {
                entries: vec![(0, ratio(2, 5)), (1, ratio(-3, 11))],
                rhs: ratio(7, 55),
            },
        ];
        let y = solve_rows(rows.clone(), 2, 1 << 20).unwrap().unwrap();
        for r in &rows {
            let lhs: Rational = r
                .entries
                .iter()
                .map(|(c, v)| v * &y[*c])
                .fold(ratio(0, 1), |a, b| a + b);
            assert_eq!(lhs, r.rhs);
        }
    }

    #[test]
    fn bit_cap_triggers_resource_error() {
        // Hilbert-like ill-conditioned 6x6 with tiny bit budget.
        let n = 6;
        let rows: Vec<Row> = (0..n)
            .map(|i| Row {
                entries: (0..n).map(|j| (j, ratio(1, (i + j + 1) as i64))).collect(),
                rhs: ratio(1, (i + 1) as i64),
            })
            .collect();
        match solve_rows(rows, n, 8) {
            Err(NullaError::Resource { .. }) => {}
            other => panic!("expected resource error, got {:?}", other.map(|_| ())),
        }
    }
}
