//! Benchmark polynomial families: permanents and their diagonal
//! derivatives, diagonal powers, planted random 3-CNFs, Goldreich-style
//! local predicates, and small random arithmetic circuits.
//!
//! Randomized families draw from `ChaCha8Rng::seed_from_u64(seed)`, so a
//! `(kind, params, seed)` triple gives the same polynomial on every platform.

use itertools::Itertools;
use num_bigint::BigUint;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{parse_polynomial, Field, Monomial, Polynomial, RingMode};
use crate::error::{Error, Result};

pub const MAX_PERMANENT_DIM: usize = 7;
pub const DEFAULT_LOCALITY: usize = 5;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Variable index of `x_{i,j}` (0-based row and column) in a `d x d` matrix.
pub fn matrix_var(d: usize, i: usize, j: usize) -> usize {
    i * d + j
}

/// `Perm_d = sum over permutations pi of prod_i x_{i,pi(i)}`.
pub fn permanent<F: Field>(d: usize) -> Result<Polynomial<F>> {
    if d > MAX_PERMANENT_DIM {
        let terms: BigUint = (1..=d as u64).product();
        return Err(Error::BudgetExceeded {
            what: "permanent terms",
            required: terms.to_string(),
            cap: 5040,
        });
    }
    let terms = (0..d).permutations(d).map(|pi| {
        let m = Monomial::from_indices(pi.iter().enumerate().map(|(i, &j)| matrix_var(d, i, j)));
        (m, F::one())
    });
    Polynomial::from_terms(d * d, RingMode::Multilinear, terms)
}

/// `p_R = d_R Perm_d` for every `R` of size `kappa`, differentiating along
/// the diagonal variables `x_{i,i}`, `i in R`. Lexicographic in `R`.
pub fn sub_permanent_generators<F: Field>(d: usize, kappa: usize) -> Result<Vec<(Vec<usize>, Polynomial<F>)>> {
    if kappa > d {
        return Err(Error::InvalidFamily(format!("kappa {kappa} exceeds dimension {d}")));
    }
    let perm = permanent::<F>(d)?;
    Ok((0..d)
        .combinations(kappa)
        .map(|r| {
            let alpha = Monomial::from_indices(r.iter().map(|&i| matrix_var(d, i, i)));
            let p = perm.derive_multi(&alpha);
            (r, p)
        })
        .collect())
}

/// Diagonal marker `prod_{i not in R} x_{i,i}`.
pub fn diagonal_marker(d: usize, r: &[usize]) -> Monomial {
    Monomial::from_indices((0..d).filter(|i| !r.contains(i)).map(|i| matrix_var(d, i, i)))
}

/// `sum_i x_i^e` in the standard ring.
pub fn diagonal_power<F: Field>(n: usize, e: usize) -> Result<Polynomial<F>> {
    if e == 0 {
        return Err(Error::InvalidFamily("exponent must be at least 1".into()));
    }
    let terms = (0..n).map(|i| (Monomial::from_indices(std::iter::repeat_n(i, e)), F::one()));
    Polynomial::from_terms(n, RingMode::Standard, terms)
}

/// `x1*x2 + x2*x3`.
pub fn toy_example<F: Field>() -> Polynomial<F> {
    parse_polynomial("x1*x2 + x2*x3", None, RingMode::Multilinear).expect("toy polynomial")
}

/// Literal `x_v` or `1 - x_v`.
fn literal<F: Field>(n: usize, var: usize, positive: bool) -> Polynomial<F> {
    let x = Polynomial::var(n, RingMode::Multilinear, var).expect("variable in range");
    if positive {
        x
    } else {
        Polynomial::constant(n, RingMode::Multilinear, F::one()).sub(&x).expect("same ring")
    }
}

/// `1 - prod (1 - lit)`: one on assignments satisfying the clause.
pub fn arithmetize_clause<F: Field>(n: usize, lits: &[i64]) -> Polynomial<F> {
    let one = Polynomial::constant(n, RingMode::Multilinear, F::one());
    let falsified = lits.iter().fold(one.clone(), |acc, &l| {
        let lit = literal::<F>(n, l.unsigned_abs() as usize - 1, l > 0);
        acc.mul(&one.sub(&lit).expect("same ring")).expect("same ring")
    });
    one.sub(&falsified).expect("same ring")
}

/// `a xor b = a + b - 2ab` on multilinear polynomials.
fn xor<F: Field>(a: &Polynomial<F>, b: &Polynomial<F>) -> Polynomial<F> {
    let ab = a.mul(b).expect("same ring").scale(&F::from_i64(2));
    a.add(b).and_then(|s| s.sub(&ab)).expect("same ring")
}

/// A planted 3-CNF: clauses in DIMACS literals, each satisfied by `planted`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedCnf {
    pub n: usize,
    pub clauses: Vec<[i64; 3]>,
    pub planted: Vec<bool>,
}

pub fn planted_3cnf(n: usize, clause_count: usize, seed: u64) -> Result<PlantedCnf> {
    if clause_count > 0 && n < 3 {
        return Err(Error::InvalidFamily(format!("3-clauses need n >= 3, got {n}")));
    }
    let mut rng = rng(seed);
    let planted: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    let mut clauses = Vec::with_capacity(clause_count);
    while clauses.len() < clause_count {
        let vars = sample(&mut rng, n, 3).into_vec();
        let mut clause = [0i64; 3];
        for (slot, &v) in clause.iter_mut().zip(&vars) {
            let positive: bool = rng.gen();
            *slot = if positive { v as i64 + 1 } else { -(v as i64 + 1) };
        }
        let satisfied = clause
            .iter()
            .any(|&l| planted[l.unsigned_abs() as usize - 1] == (l > 0));
        if satisfied {
            clauses.push(clause);
        }
    }
    Ok(PlantedCnf { n, clauses, planted })
}

/// Sum of arithmetized clauses of a planted random 3-CNF.
pub fn random_deg3<F: Field>(n: usize, clause_count: usize, seed: u64) -> Result<Polynomial<F>> {
    let cnf = planted_3cnf(n, clause_count, seed)?;
    Ok(cnf_polynomial(&cnf))
}

pub fn cnf_polynomial<F: Field>(cnf: &PlantedCnf) -> Polynomial<F> {
    cnf.clauses
        .iter()
        .fold(Polynomial::zero(cnf.n, RingMode::Multilinear), |acc, c| {
            acc.add(&arithmetize_clause(cnf.n, c)).expect("same ring")
        })
}

/// Goldreich-style instance: each tuple feeds the XOR-AND predicate
/// `x_1 ^ ... ^ x_{k-2} ^ (x_{k-1} & x_k)`; `outputs` are its values on the
/// planted input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldreichInstance {
    pub n: usize,
    pub locality: usize,
    pub tuples: Vec<Vec<usize>>,
    pub outputs: Vec<bool>,
    pub planted: Vec<bool>,
}

pub fn xor_and(bits: &[bool]) -> bool {
    let k = bits.len();
    bits[..k - 2].iter().fold(false, |a, &b| a ^ b) ^ (bits[k - 2] & bits[k - 1])
}

pub fn goldreich_instance(n: usize, locality: usize, predicates: usize, seed: u64) -> Result<GoldreichInstance> {
    if locality < 3 {
        return Err(Error::InvalidFamily(format!("locality must be at least 3, got {locality}")));
    }
    if predicates > 0 && n < locality {
        return Err(Error::InvalidFamily(format!("locality {locality} exceeds n = {n}")));
    }
    let mut rng = rng(seed);
    let planted: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    let tuples: Vec<Vec<usize>> = (0..predicates)
        .map(|_| sample(&mut rng, n, locality).into_vec())
        .collect();
    let outputs = tuples
        .iter()
        .map(|t| xor_and(&t.iter().map(|&v| planted[v]).collect::<Vec<_>>()))
        .collect();
    Ok(GoldreichInstance {
        n,
        locality,
        tuples,
        outputs,
        planted,
    })
}

pub fn predicate_polynomial<F: Field>(n: usize, tuple: &[usize]) -> Polynomial<F> {
    let var = |v: usize| Polynomial::var(n, RingMode::Multilinear, v).expect("variable in range");
    let k = tuple.len();
    let and = var(tuple[k - 2]).mul(&var(tuple[k - 1])).expect("same ring");
    tuple[..k - 2].iter().fold(and, |acc, &v| xor(&acc, &var(v)))
}

/// Sum of arithmetized XOR-AND predicates on seeded random tuples.
pub fn goldreich_like<F: Field>(n: usize, locality: usize, predicates: usize, seed: u64) -> Result<Polynomial<F>> {
    let inst = goldreich_instance(n, locality, predicates, seed)?;
    Ok(inst
        .tuples
        .iter()
        .fold(Polynomial::zero(n, RingMode::Multilinear), |acc, t| {
            acc.add(&predicate_polynomial(n, t)).expect("same ring")
        }))
}

/// Node of a fan-in-2 arithmetic circuit; operands are earlier node ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArithNode {
    Input(usize),
    Add(usize, usize),
    Mul(usize, usize),
}

/// Straight-line arithmetic circuit; the last node is the output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArithCircuit {
    pub n_inputs: usize,
    pub nodes: Vec<ArithNode>,
}

impl ArithCircuit {
    /// `n` input nodes followed by `gates` random add/mul gates.
    pub fn random(n: usize, gates: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidCircuit("no inputs".into()));
        }
        let mut rng = rng(seed);
        let mut nodes: Vec<ArithNode> = (0..n).map(ArithNode::Input).collect();
        for _ in 0..gates {
            let a = rng.gen_range(0..nodes.len());
            let b = rng.gen_range(0..nodes.len());
            nodes.push(if rng.gen_bool(0.5) {
                ArithNode::Add(a, b)
            } else {
                ArithNode::Mul(a, b)
            });
        }
        Ok(ArithCircuit { n_inputs: n, nodes })
    }

    /// Size counts every node, inputs included.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn evaluate<F: Field>(&self, mode: RingMode) -> Result<Polynomial<F>> {
        let mut vals: Vec<Polynomial<F>> = Vec::with_capacity(self.nodes.len());
        for (id, node) in self.nodes.iter().enumerate() {
            let operand = |k: usize| {
                if k >= id {
                    Err(Error::InvalidCircuit(format!("node {id} reads later node {k}")))
                } else {
                    Ok(k)
                }
            };
            let v = match *node {
                ArithNode::Input(i) => Polynomial::var(self.n_inputs, mode, i)?,
                ArithNode::Add(a, b) => vals[operand(a)?].add(&vals[operand(b)?])?,
                ArithNode::Mul(a, b) => vals[operand(a)?].mul(&vals[operand(b)?])?,
            };
            vals.push(v);
        }
        vals.pop().ok_or_else(|| Error::InvalidCircuit("empty circuit".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Permanent,
    DiagonalPower,
    RandomDeg3,
    GoldreichLike,
    ToyExample,
    Custom,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilyParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Matrix dimension for permanents.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clauses: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub locality: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<RingMode>,
}

/// `{kind, params, seed}`: everything needed to rebuild a family member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    #[serde(default)]
    pub params: FamilyParams,
    #[serde(default)]
    pub seed: u64,
}

fn need(v: Option<usize>, name: &str, kind: FamilyKind) -> Result<usize> {
    v.ok_or_else(|| Error::InvalidFamily(format!("{kind:?} needs parameter `{name}`")))
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, seed: u64) -> Self {
        FamilySpec {
            kind,
            params: FamilyParams::default(),
            seed,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(format!("family spec: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("family spec serializes")
    }

    /// Number of variables of the built polynomial.
    pub fn n_vars(&self) -> Result<usize> {
        let p = &self.params;
        match self.kind {
            FamilyKind::Permanent => need(p.d, "d", self.kind).map(|d| d * d),
            FamilyKind::ToyExample => Ok(3),
            FamilyKind::Custom => match p.n {
                Some(n) => Ok(n),
                None => Ok(self.build::<crate::algebra::Rational>()?.n_vars()),
            },
            _ => need(p.n, "n", self.kind),
        }
    }

    /// Predicate count for the Goldreich family: `n` unless given.
    pub fn predicate_count(&self) -> Result<usize> {
        Ok(match self.params.predicates {
            Some(m) => m,
            None => need(self.params.n, "n", self.kind)?,
        })
    }

    pub fn locality(&self) -> usize {
        self.params.locality.unwrap_or(DEFAULT_LOCALITY)
    }

    pub fn build<F: Field>(&self) -> Result<Polynomial<F>> {
        let p = &self.params;
        match self.kind {
            FamilyKind::Permanent => permanent(need(p.d, "d", self.kind)?),
            FamilyKind::DiagonalPower => diagonal_power(need(p.n, "n", self.kind)?, p.exponent.unwrap_or(4)),
            FamilyKind::RandomDeg3 => {
                let n = need(p.n, "n", self.kind)?;
                random_deg3(n, p.clauses.unwrap_or(n), self.seed)
            }
            FamilyKind::GoldreichLike => goldreich_like(
                need(p.n, "n", self.kind)?,
                self.locality(),
                self.predicate_count()?,
                self.seed,
            ),
            FamilyKind::ToyExample => Ok(toy_example()),
            FamilyKind::Custom => {
                let text = p
                    .polynomial
                    .as_deref()
                    .ok_or_else(|| Error::InvalidFamily("custom needs parameter `polynomial`".into()))?;
                parse_polynomial(text, p.n, p.mode.unwrap_or(RingMode::Multilinear))
            }
        }
    }
}
