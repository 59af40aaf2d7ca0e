use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::cnf::Cnf;
use crate::algebra::{Field, Polynomial, RingMode};
use crate::families::{arithmetize_clause, rng};

/// Window budget `ceil(c_w * log2 n)`, at least 1.
pub fn window_budget(n: usize, c_w: f64) -> usize {
    ((c_w * (n.max(2) as f64).log2()).ceil() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSelection {
    pub window_size: usize,
    pub seed: u64,
    /// Selected variables (1-based CNF indices) in discovery order.
    pub vars: Vec<usize>,
}

impl WindowSelection {
    pub fn live(&self) -> usize {
        self.vars.len()
    }

    /// Clauses whose variables all lie in the window, renumbered so the
    /// `i`-th selected variable is `i + 1`.
    pub fn clauses(&self, cnf: &Cnf) -> Vec<Vec<i64>> {
        let local: BTreeMap<usize, i64> = self.vars.iter().enumerate().map(|(i, &v)| (v, i as i64 + 1)).collect();
        cnf.clauses
            .iter()
            .filter(|c| !c.is_empty() && c.iter().all(|l| local.contains_key(&(l.unsigned_abs() as usize))))
            .map(|c| c.iter().map(|&l| l.signum() * local[&(l.unsigned_abs() as usize)]).collect())
            .collect()
    }
}

/// Breadth-first growth over the variable-clause incidence graph from a
/// seeded pivot, stopping at `budget` variables. When a component is
/// exhausted the next seeded variable starts a new search. Variables cut
/// off from every clause by the truncation are dropped, so each live
/// variable occurs in some window clause.
pub fn extract_window(cnf: &Cnf, budget: usize, seed: u64) -> WindowSelection {
    let edges: Vec<Vec<usize>> = cnf
        .clauses
        .iter()
        .map(|c| c.iter().map(|l| l.unsigned_abs() as usize - 1).collect())
        .collect();
    let grown = grow_window(cnf.n_vars, &edges, budget, seed);
    let mut inside = vec![false; cnf.n_vars];
    for &v in &grown {
        inside[v] = true;
    }
    let mut covered = vec![false; cnf.n_vars];
    for e in edges.iter().filter(|e| !e.is_empty() && e.iter().all(|&v| inside[v])) {
        for &v in e {
            covered[v] = true;
        }
    }
    WindowSelection {
        window_size: budget,
        seed,
        vars: grown.into_iter().filter(|&v| covered[v]).map(|v| v + 1).collect(),
    }
}

/// Seeded breadth-first window over a hypergraph on `0..n` (for CNFs the
/// edges are clauses, for polynomials the monomials).
pub fn grow_window(n: usize, edges: &[Vec<usize>], budget: usize, seed: u64) -> Vec<usize> {
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ei, e) in edges.iter().enumerate() {
        for &v in e {
            incident[v].push(ei);
        }
    }
    let mut candidates: Vec<usize> = (0..n).filter(|&v| !incident[v].is_empty()).collect();
    candidates.shuffle(&mut rng(seed));

    let mut taken = vec![false; n];
    let mut vars = Vec::new();
    let mut starts = candidates.into_iter();
    'grow: while vars.len() < budget {
        let Some(pivot) = starts.find(|&v| !taken[v]) else {
            break;
        };
        taken[pivot] = true;
        vars.push(pivot);
        let mut queue = VecDeque::from([pivot]);
        while let Some(v) = queue.pop_front() {
            for &ei in &incident[v] {
                for &u in &edges[ei] {
                    if vars.len() >= budget {
                        break 'grow;
                    }
                    if !taken[u] {
                        taken[u] = true;
                        vars.push(u);
                        queue.push_back(u);
                    }
                }
            }
        }
    }
    vars
}

/// Occurrence signature: `(clause width, positive?) -> count` inside the
/// window.
pub type Signature = BTreeMap<(usize, bool), usize>;

/// How occurrences are summarized. `Multiset` keeps counts; `Support`
/// records only which `(width, polarity)` pairs occur.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignatureMode {
    Multiset,
    #[default]
    Support,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileClasses {
    /// Signature of each selected variable, in selection order.
    pub signatures: Vec<Signature>,
    /// Class index of each selected variable.
    pub class_of: Vec<usize>,
    /// Number of distinct signatures.
    pub count: usize,
}

impl ProfileClasses {
    /// First member of each class, as window-local 0-based indices.
    pub fn representatives(&self) -> Vec<usize> {
        let mut reps = vec![usize::MAX; self.count];
        for (i, &c) in self.class_of.iter().enumerate() {
            if reps[c] == usize::MAX {
                reps[c] = i;
            }
        }
        reps
    }
}

/// Groups window variables by their occurrence signature. Classes are
/// numbered by first appearance.
pub fn canonicalize_profiles(sel: &WindowSelection, cnf: &Cnf, mode: SignatureMode) -> ProfileClasses {
    let mut signatures = vec![Signature::new(); sel.live()];
    for c in sel.clauses(cnf) {
        for &l in &c {
            let count = signatures[l.unsigned_abs() as usize - 1].entry((c.len(), l > 0)).or_insert(0);
            *count = match mode {
                SignatureMode::Multiset => *count + 1,
                SignatureMode::Support => 1,
            };
        }
    }
    let mut ids: BTreeMap<&Signature, usize> = BTreeMap::new();
    let class_of = signatures
        .iter()
        .map(|s| {
            let next = ids.len();
            *ids.entry(s).or_insert(next)
        })
        .collect();
    let count = ids.len();
    ProfileClasses {
        signatures,
        class_of,
        count,
    }
}

/// Sum of arithmetized window clauses over the window variables. With
/// `classes`, every variable is replaced by its class representative and
/// the result lives on one variable per class.
pub fn window_polynomial<F: Field>(sel: &WindowSelection, cnf: &Cnf, classes: Option<&ProfileClasses>) -> Polynomial<F> {
    let clauses = sel.clauses(cnf);
    let (n, map): (usize, Vec<usize>) = match classes {
        Some(pc) => (pc.count, pc.class_of.clone()),
        None => (sel.live(), (0..sel.live()).collect()),
    };
    let mut p = Polynomial::zero(n, RingMode::Multilinear);
    for c in clauses {
        let mapped: Vec<i64> = c
            .iter()
            .map(|&l| l.signum() * (map[l.unsigned_abs() as usize - 1] as i64 + 1))
            .collect();
        p = p.add(&arithmetize_clause(n, &mapped)).expect("same ring");
    }
    p
}

/// Variables that occur in some window clause.
pub fn clause_support(sel: &WindowSelection, cnf: &Cnf) -> BTreeSet<usize> {
    sel.clauses(cnf).iter().flatten().map(|l| l.unsigned_abs() as usize).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Rational;

    fn cnf(n: usize, clauses: &[&[i64]]) -> Cnf {
        Cnf::new(n, clauses.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    #[test]
    fn one_clause_window() {
        let f = cnf(5, &[&[2, -4, 5]]);
        let sel = extract_window(&f, 10, 1);
        assert_eq!(sel.vars.iter().copied().collect::<BTreeSet<_>>(), BTreeSet::from([2, 4, 5]));
        assert_eq!(extract_window(&f, 10, 1), sel);
    }

    #[test]
    fn large_budget_takes_everything() {
        let f = cnf(6, &[&[1, 2], &[3, -4], &[5, 6, -1]]);
        assert_eq!(extract_window(&f, 100, 4).live(), 6);
        let cut = extract_window(&f, 3, 4);
        assert!(cut.live() <= 3);
        assert_eq!(clause_support(&cut, &f).len(), cut.live());
        assert_eq!(extract_window(&Cnf::default(), 5, 0).live(), 0);
    }

    #[test]
    fn signatures() {
        let f = cnf(3, &[&[1, 2, 3]]);
        let sel = extract_window(&f, 3, 0);
        assert_eq!(canonicalize_profiles(&sel, &f, SignatureMode::Multiset).count, 1);

        let g = cnf(2, &[&[1, -2]]);
        let sel = extract_window(&g, 2, 0);
        assert_eq!(canonicalize_profiles(&sel, &g, SignatureMode::Multiset).count, 2);

        let renamed = cnf(3, &[&[3, 1, 2]]);
        let sel = extract_window(&renamed, 3, 9);
        assert_eq!(canonicalize_profiles(&sel, &renamed, SignatureMode::Multiset).count, 1);

        // Counts split classes only in multiset mode.
        let h = cnf(3, &[&[1, 2], &[1, 3], &[2, 3, 1]]);
        let sel = extract_window(&h, 3, 0);
        assert_eq!(canonicalize_profiles(&sel, &h, SignatureMode::Multiset).count, 2);
        assert_eq!(canonicalize_profiles(&sel, &h, SignatureMode::Support).count, 1);
    }

    #[test]
    fn polynomials() {
        let f = cnf(2, &[&[1, 2]]);
        let sel = WindowSelection {
            window_size: 2,
            seed: 0,
            vars: vec![1, 2],
        };
        let p: Polynomial<Rational> = window_polynomial(&sel, &f, None);
        assert_eq!(p.to_string(), "x1 + x2 - x1*x2");
        let pc = canonicalize_profiles(&sel, &f, SignatureMode::Multiset);
        let q: Polynomial<Rational> = window_polynomial(&sel, &f, Some(&pc));
        assert_eq!(q.to_string(), "x1");

        let empty = WindowSelection {
            window_size: 0,
            seed: 0,
            vars: vec![],
        };
        assert!(window_polynomial::<Rational>(&empty, &f, None).is_zero());
    }

    #[test]
    fn budget_formula() {
        assert_eq!(window_budget(256, 3.0), 24);
        assert_eq!(window_budget(1024, 3.0), 30);
        assert_eq!(window_budget(9, 3.0), 10);
    }
}
