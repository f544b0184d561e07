//! Variable-permutation symmetries of polynomial systems.

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{ConsysError, PolySystem};

/// A permutation group acting on variable indices.
///
/// Internally permutations are 0-based image maps (`perm[i]` = image of
/// variable `i`); the JSON form uses 1-based points to match the usual
/// `{1,...,n}` convention.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationGroup {
    degree: usize,
    generators: Vec<Vec<usize>>,
}

impl PermutationGroup {
    pub fn new(degree: usize, generators: Vec<Vec<usize>>) -> Result<Self, ConsysError> {
        for g in &generators {
            if g.len() != degree {
                return Err(ConsysError::InvalidSpec(format!(
                    "generator has {} points, degree is {degree}",
                    g.len()
                )));
            }
            let mut seen = vec![false; degree];
            for &img in g {
                if img >= degree || seen[img] {
                    return Err(ConsysError::InvalidSpec(
                        "generator is not a bijection".into(),
                    ));
                }
                seen[img] = true;
            }
        }
        Ok(PermutationGroup { degree, generators })
    }

    pub fn trivial(degree: usize) -> Self {
        PermutationGroup { degree, generators: Vec::new() }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Vec<usize>] {
        &self.generators
    }

    /// Breadth-first closure of the generators. Errors if the group has more
    /// than `cap` elements. The identity is always included.
    pub fn enumerate(&self, cap: usize) -> Result<Vec<Vec<usize>>, ConsysError> {
        let id: Vec<usize> = (0..self.degree).collect();
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        seen.insert(id.clone());
        out.push(id.clone());
        queue.push_back(id);
        while let Some(p) = queue.pop_front() {
            for g in &self.generators {
                let q = compose(g, &p);
                if seen.insert(q.clone()) {
                    if out.len() >= cap {
                        return Err(ConsysError::Unsupported(format!(
                            "group has more than {cap} elements"
                        )));
                    }
                    out.push(q.clone());
                    queue.push_back(q);
                }
            }
        }
        Ok(out)
    }
}

/// `(g ∘ h)(i) = g[h[i]]`.
pub(crate) fn compose(g: &[usize], h: &[usize]) -> Vec<usize> {
    h.iter().map(|&i| g[i]).collect()
}

#[derive(Serialize, Deserialize)]
struct GroupRepr {
    degree: usize,
    generators: Vec<Vec<usize>>,
}

impl Serialize for PermutationGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GroupRepr {
            degree: self.degree,
            generators: self
                .generators
                .iter()
                .map(|g| g.iter().map(|&i| i + 1).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PermutationGroup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = GroupRepr::deserialize(d)?;
        let mut gens = Vec::with_capacity(repr.generators.len());
        for g in repr.generators {
            let mut shifted = Vec::with_capacity(g.len());
            for img in g {
                if img == 0 {
                    return Err(D::Error::custom("permutation points are 1-based"));
                }
                shifted.push(img - 1);
            }
            gens.push(shifted);
        }
        PermutationGroup::new(repr.degree, gens).map_err(D::Error::custom)
    }
}

/// The `S2 x S5 x S5` symmetry of the `{5,5,5,1}_6` system: swap the two
/// free groups, permute the five vectors of both groups simultaneously, or
/// permute the five parameterized components of every vector simultaneously
/// — the same index action applied to `x` and `y` alike.
pub fn symmetry_group_5551() -> PermutationGroup {
    let idx = |i: usize, j: usize, k: usize, part: usize| {
        2 * (25 * (i - 1) + 5 * (j - 1) + (k - 1)) + part
    };
    // Build the variable permutation induced by (i,j,k) index maps.
    let build = |fi: &dyn Fn(usize) -> usize,
                 fj: &dyn Fn(usize) -> usize,
                 fk: &dyn Fn(usize) -> usize| {
        let mut perm = vec![0usize; 100];
        for i in 1..=2 {
            for j in 1..=5 {
                for k in 1..=5 {
                    for part in 0..2 {
                        perm[idx(i, j, k, part)] = idx(fi(i), fj(j), fk(k), part);
                    }
                }
            }
        }
        perm
    };
    let ident = |v: usize| v;
    let swap2 = |v: usize| 3 - v; // 1 <-> 2
    let trans5 = |v: usize| match v {
        1 => 2,
        2 => 1,
        other => other,
    };
    let cycle5 = |v: usize| v % 5 + 1; // (1 2 3 4 5)
    let generators = vec![
        build(&swap2, &ident, &ident),
        build(&ident, &trans5, &ident),
        build(&ident, &cycle5, &ident),
        build(&ident, &ident, &trans5),
        build(&ident, &ident, &cycle5),
    ];
    PermutationGroup::new(100, generators).expect("hand-built generators are bijections")
}

/// Canonical fingerprint of a polynomial for multiset comparison.
fn poly_key(p: &crate::polyring::Polynomial) -> String {
    serde_json::to_string(p).expect("polynomial serialization cannot fail")
}

/// Does every generator of `g` map the constraint set of `sys` onto itself
/// (as a multiset of polynomials)?
///
/// Panics if `g.degree() != sys.nvars`.
pub fn verify_invariance(sys: &PolySystem, g: &PermutationGroup) -> bool {
    assert_eq!(
        g.degree(),
        sys.nvars,
        "group degree {} does not match system variable count {}",
        g.degree(),
        sys.nvars
    );
    let mut original: BTreeMap<String, usize> = BTreeMap::new();
    for p in &sys.constraints {
        *original.entry(poly_key(p)).or_insert(0) += 1;
    }
    for gen in g.generators() {
        let mut permuted: BTreeMap<String, usize> = BTreeMap::new();
        for p in &sys.constraints {
            *permuted.entry(poly_key(&p.permute_vars(gen))).or_insert(0) += 1;
        }
        if permuted != original {
            return false;
        }
    }
    true
}

/// The permutation a variable permutation induces on the constraint list:
/// `result[i] = j` when constraint `i` maps onto constraint `j`. `None` when
/// the permuted set is not the original set. Duplicate constraints are
/// matched greedily, which is sound: equal polynomials play interchangeable
/// roles in any construction keyed on constraint identity.
pub fn constraint_action(sys: &PolySystem, perm: &[usize]) -> Option<Vec<usize>> {
    constraint_action_on(&sys.constraints, perm)
}

/// [`constraint_action`] on a bare constraint slice.
pub fn constraint_action_on(
    constraints: &[crate::polyring::Polynomial],
    perm: &[usize],
) -> Option<Vec<usize>> {
    let mut by_key: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (j, p) in constraints.iter().enumerate() {
        by_key.entry(poly_key(p)).or_default().push(j);
    }
    let mut action = Vec::with_capacity(constraints.len());
    for p in constraints {
        let img = p.permute_vars(perm);
        let slot = by_key.get_mut(&poly_key(&img))?;
        action.push(slot.pop()?);
    }
    Some(action)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consys::{build_1111_2, build_5551_6};

    #[test]
    fn group_5551_has_order_28800() {
        let g = symmetry_group_5551();
        assert_eq!(g.generators().len(), 5);
        let elements = g.enumerate(40_000).unwrap();
        assert_eq!(elements.len(), 28_800); // 2 * 120 * 120
    }

    #[test]
    fn system_5551_is_invariant() {
        let sys = build_5551_6();
        let g = symmetry_group_5551();
        assert!(verify_invariance(&sys, &g));
        for gen in g.generators() {
            let action = constraint_action(&sys, gen).expect("generator preserves constraints");
            // The action is itself a permutation of the 105 constraints.
            let mut seen = vec![false; 105];
            for &j in &action {
                assert!(!seen[j]);
                seen[j] = true;
            }
        }
    }

    #[test]
    fn trivial_group_always_passes() {
        let sys = build_1111_2();
        assert!(verify_invariance(&sys, &PermutationGroup::trivial(4)));
        let ident = PermutationGroup::new(4, vec![vec![0, 1, 2, 3]]).unwrap();
        assert!(verify_invariance(&sys, &ident));
    }

    #[test]
    fn quartet_not_invariant_under_x1_x2_swap() {
        let sys = build_1111_2();
        let swap = PermutationGroup::new(4, vec![vec![1, 0, 2, 3]]).unwrap();
        assert!(!verify_invariance(&sys, &swap));
        assert!(constraint_action(&sys, &[1, 0, 2, 3]).is_none());
    }

    #[test]
    fn quartet_is_invariant_under_pair_swap() {
        // Swapping the two free vectors, (x1,x2) <-> (x3,x4), permutes
        // p1<->p2 and p3<->p4 and fixes p5.
        let sys = build_1111_2();
        let g = PermutationGroup::new(4, vec![vec![2, 3, 0, 1]]).unwrap();
        assert!(verify_invariance(&sys, &g));
        let action = constraint_action(&sys, &[2, 3, 0, 1]).unwrap();
        assert_eq!(action, vec![1, 0, 3, 2, 4]);
        assert_eq!(g.enumerate(10).unwrap().len(), 2);
    }

    #[test]
    fn group_json_round_trip_is_one_based() {
        let g = PermutationGroup::new(3, vec![vec![1, 2, 0]]).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, r#"{"degree":3,"generators":[[2,3,1]]}"#);
        let back: PermutationGroup = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<PermutationGroup>(
            r#"{"degree":3,"generators":[[0,1,2]]}"#
        )
        .is_err());
    }

    #[test]
    fn bad_generators_rejected() {
        assert!(PermutationGroup::new(3, vec![vec![0, 0, 1]]).is_err());
        assert!(PermutationGroup::new(3, vec![vec![0, 1]]).is_err());
        assert!(PermutationGroup::new(3, vec![vec![0, 1, 3]]).is_err());
    }
}
