use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, GateOp};
use crate::error::{Error, Result};

/// CNF over variables `1..=n_vars`; literals are signed DIMACS integers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cnf {
    pub n_vars: usize,
    pub clauses: Vec<Vec<i64>>,
    /// Optional variable names, carried through DIMACS comments.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub names: BTreeMap<usize, String>,
}

fn var(lit: i64) -> usize {
    lit.unsigned_abs() as usize
}

impl Cnf {
    pub fn new(n_vars: usize, clauses: Vec<Vec<i64>>) -> Result<Self> {
        for c in &clauses {
            if let Some(&l) = c.iter().find(|&&l| l == 0 || var(l) > n_vars) {
                return Err(Error::parse(format!("literal {l} out of range for {n_vars} variables")));
            }
        }
        Ok(Cnf {
            n_vars,
            clauses,
            names: BTreeMap::new(),
        })
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(Vec::is_empty)
    }

    /// Truth value under a full assignment (`assignment[v - 1]`).
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|&l| assignment[var(l) - 1] == (l > 0)))
    }

    /// Exhaustive satisfiability check; only for tiny formulas.
    pub fn brute_force_satisfiable(&self) -> bool {
        assert!(self.n_vars <= 24, "brute force over {} variables", self.n_vars);
        (0u64..1 << self.n_vars).any(|bits| {
            let a: Vec<bool> = (0..self.n_vars).map(|i| bits >> i & 1 == 1).collect();
            self.satisfied_by(&a)
        })
    }

    /// DIMACS text. Variable names become `c var <index> <name>` lines.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        for (v, name) in &self.names {
            let _ = writeln!(out, "c var {v} {name}");
        }
        let _ = writeln!(out, "p cnf {} {}", self.n_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(out, "{l} ");
            }
            out.push_str("0\n");
        }
        out
    }

    pub fn from_dimacs(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut names = BTreeMap::new();
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('%') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('c') {
                let mut it = rest.split_whitespace();
                if let (Some("var"), Some(v), Some(name)) = (it.next(), it.next(), it.next()) {
                    if let Ok(v) = v.parse::<usize>() {
                        names.insert(v, name.to_string());
                    }
                }
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let f: Vec<&str> = rest.split_whitespace().collect();
                match f.as_slice() {
                    ["cnf", v, c] => {
                        let v = v.parse().map_err(|_| Error::parse(format!("line {}: bad header", lineno + 1)))?;
                        let c = c.parse().map_err(|_| Error::parse(format!("line {}: bad header", lineno + 1)))?;
                        header = Some((v, c));
                    }
                    _ => return Err(Error::parse(format!("line {}: bad header `{line}`", lineno + 1))),
                }
                continue;
            }
            if header.is_none() {
                return Err(Error::parse("clause before `p cnf` header"));
            }
            for tok in line.split_whitespace() {
                let l: i64 = tok
                    .parse()
                    .map_err(|_| Error::parse(format!("line {}: bad literal `{tok}`", lineno + 1)))?;
                if l == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(l);
                }
            }
        }
        let (n_vars, count) = header.ok_or_else(|| Error::parse("missing `p cnf` header"))?;
        if !current.is_empty() {
            clauses.push(current);
        }
        if clauses.len() != count {
            return Err(Error::parse(format!("header promises {count} clauses, found {}", clauses.len())));
        }
        let mut cnf = Cnf::new(n_vars, clauses)?;
        cnf.names = names;
        Ok(cnf)
    }
}

/// Tseitin encoding: node `i` of the circuit becomes variable `i + 1`, so
/// inputs keep their positions. Standard clause templates per gate, plus
/// the unit clause asserting the output.
pub fn tseitin(circuit: &Circuit) -> Cnf {
    let mut clauses = Vec::new();
    for (id, g) in circuit.nodes().iter().enumerate() {
        let z = id as i64 + 1;
        let a = g.inputs.first().map(|&i| i as i64 + 1);
        let b = g.inputs.get(1).map(|&i| i as i64 + 1);
        match (g.op, a, b) {
            (GateOp::Input, _, _) => {}
            (GateOp::And, Some(a), Some(b)) => {
                clauses.extend([vec![-z, a], vec![-z, b], vec![z, -a, -b]]);
            }
            (GateOp::Or, Some(a), Some(b)) => {
                clauses.extend([vec![z, -a], vec![z, -b], vec![-z, a, b]]);
            }
            (GateOp::Not, Some(a), _) => {
                clauses.extend([vec![-z, -a], vec![z, a]]);
            }
            (GateOp::Xor, Some(a), Some(b)) => {
                clauses.extend([vec![-z, a, b], vec![-z, -a, -b], vec![z, -a, b], vec![z, a, -b]]);
            }
            _ => unreachable!("circuit invariants checked at construction"),
        }
    }
    clauses.push(vec![circuit.output() as i64 + 1]);
    let names = (0..circuit.nodes().len())
        .map(|i| (i + 1, circuit.name(i).to_string()))
        .collect();
    Cnf {
        n_vars: circuit.nodes().len(),
        clauses,
        names,
    }
}

/// Outcome of restriction and pruning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Restricted {
    /// Remaining formula, variables renumbered densely from 1.
    pub cnf: Cnf,
    /// An empty clause was derived; `cnf` is then the single empty clause.
    pub conflict: bool,
    /// Every fixed variable (given or propagated), original numbering.
    pub fixed: BTreeMap<usize, bool>,
    /// `new_to_old[v - 1]` is the original index of new variable `v`.
    pub new_to_old: Vec<usize>,
}

/// Applies a partial assignment, propagates units to a fixpoint, drops
/// satisfied clauses and false literals, and renumbers the survivors.
pub fn restrict_prune(cnf: &Cnf, restriction: &BTreeMap<usize, bool>) -> Result<Restricted> {
    if let Some(&v) = restriction.keys().find(|&&v| v == 0 || v > cnf.n_vars) {
        return Err(Error::InvalidVariable {
            index: v,
            n_vars: cnf.n_vars,
        });
    }
    let mut value: Vec<Option<bool>> = vec![None; cnf.n_vars + 1];
    for (&v, &b) in restriction {
        value[v] = Some(b);
    }
    let conflict_result = |value: &[Option<bool>]| Restricted {
        cnf: Cnf {
            n_vars: 0,
            clauses: vec![vec![]],
            names: BTreeMap::new(),
        },
        conflict: true,
        fixed: fixed_map(value),
        new_to_old: vec![],
    };

    // Clauses by variable, for propagation.
    let mut watch: Vec<Vec<usize>> = vec![Vec::new(); cnf.n_vars + 1];
    for (ci, c) in cnf.clauses.iter().enumerate() {
        for &l in c {
            watch[var(l)].push(ci);
        }
    }
    let mut queue: Vec<usize> = (0..cnf.clauses.len()).collect();
    let mut queued = vec![true; cnf.clauses.len()];
    while let Some(ci) = queue.pop() {
        queued[ci] = false;
        let mut open: Vec<i64> = Vec::new();
        let mut satisfied = false;
        for &l in &cnf.clauses[ci] {
            match value[var(l)] {
                Some(b) if b == (l > 0) => {
                    satisfied = true;
                    break;
                }
                Some(_) => {}
                None if !open.contains(&l) => open.push(l),
                None => {}
            }
        }
        if satisfied {
            continue;
        }
        match open.len() {
            0 => return Ok(conflict_result(&value)),
            1 => {
                let l = open[0];
                value[var(l)] = Some(l > 0);
                for &cj in &watch[var(l)] {
                    if !queued[cj] {
                        queued[cj] = true;
                        queue.push(cj);
                    }
                }
            }
            _ => {}
        }
    }

    // Simplify and renumber in first-occurrence order of the original indices.
    let mut simplified: Vec<Vec<i64>> = Vec::new();
    let mut seen_clauses = BTreeSet::new();
    for c in &cnf.clauses {
        if c.iter().any(|&l| value[var(l)] == Some(l > 0)) {
            continue;
        }
        let mut rest: Vec<i64> = c.iter().copied().filter(|&l| value[var(l)].is_none()).collect();
        rest.sort_by_key(|&l| (var(l), l));
        rest.dedup();
        if rest.windows(2).any(|w| w[0] == -w[1]) {
            continue; // tautology
        }
        if seen_clauses.insert(rest.clone()) {
            simplified.push(rest);
        }
    }
    let used: BTreeSet<usize> = simplified.iter().flatten().map(|&l| var(l)).collect();
    let new_to_old: Vec<usize> = used.into_iter().collect();
    let mut old_to_new = vec![0i64; cnf.n_vars + 1];
    for (i, &v) in new_to_old.iter().enumerate() {
        old_to_new[v] = i as i64 + 1;
    }
    let clauses = simplified
        .into_iter()
        .map(|c| c.into_iter().map(|l| l.signum() * old_to_new[var(l)]).collect())
        .collect();
    let names = new_to_old
        .iter()
        .enumerate()
        .filter_map(|(i, v)| cnf.names.get(v).map(|n| (i + 1, n.clone())))
        .collect();
    Ok(Restricted {
        cnf: Cnf {
            n_vars: new_to_old.len(),
            clauses,
            names,
        },
        conflict: false,
        fixed: fixed_map(&value),
        new_to_old,
    })
}

fn fixed_map(value: &[Option<bool>]) -> BTreeMap<usize, bool> {
    value
        .iter()
        .enumerate()
        .filter_map(|(v, b)| b.map(|b| (v, b)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and_circuit() -> Circuit {
        Circuit::parse("a = INPUT\nb = INPUT\ng = AND a b").unwrap()
    }

    #[test]
    fn tseitin_templates() {
        let cnf = tseitin(&and_circuit());
        assert_eq!(cnf.clauses.len(), 4);
        assert_eq!(cnf.clauses[3], vec![3]);
        let not = tseitin(&Circuit::parse("a = INPUT\ng = NOT a").unwrap());
        assert_eq!(not.clauses.len(), 3);
        let xor = tseitin(&Circuit::parse("a = INPUT\nb = INPUT\ng = XOR a b").unwrap());
        assert_eq!(xor.clauses.len(), 5);
    }

    #[test]
    fn dimacs_round_trip() {
        let cnf = tseitin(&and_circuit());
        let text = cnf.to_dimacs();
        assert!(text.contains("c var 3 g"));
        assert!(text.contains("p cnf 3 4"));
        assert_eq!(Cnf::from_dimacs(&text).unwrap(), cnf);
        assert!(Cnf::from_dimacs("p cnf 2 1\n1 3 0\n").is_err());
        assert!(Cnf::from_dimacs("1 2 0\n").is_err());
        assert!(Cnf::from_dimacs("p cnf 2 2\n1 2 0\n").is_err());
    }

    #[test]
    fn restriction_examples() {
        let cnf = tseitin(&and_circuit());
        // Output unit propagates everything.
        let r = restrict_prune(&cnf, &BTreeMap::new()).unwrap();
        assert!(!r.conflict);
        assert!(r.cnf.is_empty());
        assert_eq!(r.fixed, BTreeMap::from([(1, true), (2, true), (3, true)]));

        let full = BTreeMap::from([(1, true), (2, true), (3, true)]);
        assert!(restrict_prune(&cnf, &full).unwrap().cnf.is_empty());

        let bad = restrict_prune(&cnf, &BTreeMap::from([(1, false)])).unwrap();
        assert!(bad.conflict && bad.cnf.has_empty_clause());
    }

    #[test]
    fn renumbering() {
        let cnf = Cnf::new(5, vec![vec![1, 4], vec![-4, 5, 2], vec![3]]).unwrap();
        let r = restrict_prune(&cnf, &BTreeMap::from([(1, false)])).unwrap();
        // 1 = F forces 4, then (-4 5 2) becomes (5 2); 3 is a unit.
        assert_eq!(r.new_to_old, vec![2, 5]);
        assert_eq!(r.cnf.clauses, vec![vec![1, 2]]);
        assert_eq!(r.fixed.get(&3), Some(&true));
    }
}
