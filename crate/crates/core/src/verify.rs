//! Executable property suites over seeded random instances.
//!
//! Every suite is deterministic in its seed. A violation records the
//! offending instance verbatim so it can be replayed with `spdp rank`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Field, Gf62, Monomial, Polynomial, Rational, RingMode};
use crate::error::{Error, Result};
use crate::families::{diagonal_marker, permanent, rng, sub_permanent_generators};
use crate::localwidth::{count_profiles, realized_profiles, width_for, LocalModel};
use crate::spdp::{binomial, blocked_matrix, build_matrix, Admissibility, BlockPartition, Budget, SpdpParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Monotonicity,
    Invariance,
    Blocked,
    Permanent,
    Profiles,
    Oracle,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Monotonicity,
        Suite::Invariance,
        Suite::Blocked,
        Suite::Permanent,
        Suite::Profiles,
        Suite::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Monotonicity => "monotonicity",
            Suite::Invariance => "invariance",
            Suite::Blocked => "blocked",
            Suite::Permanent => "permanent",
            Suite::Profiles => "profiles",
            Suite::Oracle => "oracle",
        }
    }

    /// Case count used when none is given.
    pub fn default_cases(self) -> usize {
        match self {
            Suite::Blocked => 100,
            Suite::Permanent => 4,
            Suite::Profiles => 8,
            _ => 200,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::parse(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Replayable description of the instance.
    pub instance: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub cases: usize,
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Seeded random multilinear polynomial with small integer coefficients.
/// `n` in `1..=max_vars`, up to `max_terms` terms of degree at most 4.
pub fn random_multilinear(max_vars: usize, max_terms: usize, seed: u64) -> Polynomial<Rational> {
    let mut g = rng(seed);
    let n = g.gen_range(1..=max_vars.max(1));
    let terms = g.gen_range(1..=max_terms.max(1));
    let vars: Vec<usize> = (0..n).collect();
    let monomials: Vec<(Monomial, Rational)> = (0..terms)
        .map(|_| {
            let deg = g.gen_range(0..=n.min(4));
            let support = vars.choose_multiple(&mut g, deg).copied();
            let mut c = g.gen_range(-5i64..=4);
            if c >= 0 {
                c += 1;
            }
            (Monomial::from_indices(support), Rational::from_i64(c))
        })
        .collect();
    Polynomial::from_terms(n, RingMode::Multilinear, monomials).expect("indices in range")
}

/// Rank by dense Gaussian elimination with the first nonzero pivot.
/// Slow and simple; used to cross-check the sparse engine.
pub fn dense_rank<F: Field>(mut rows: Vec<Vec<F>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = rows[rank][col].inv().expect("nonzero pivot");
        let pivot: Vec<F> = rows[rank].iter().map(|x| x.mul(&inv)).collect();
        for row in rows.iter_mut().skip(rank + 1) {
            let f = row[col].clone();
            if f.is_zero() {
                continue;
            }
            for (x, p) in row.iter_mut().zip(&pivot).skip(col) {
                *x = x.sub(&f.mul(p));
            }
        }
        rows[rank] = pivot;
        rank += 1;
    }
    rank
}

fn gamma<F: Field>(p: &Polynomial<F>, params: &SpdpParams) -> Result<usize> {
    Ok(build_matrix(p, params, &Budget::default())?.rank().gamma)
}

fn to_gf(p: &Polynomial<Rational>) -> Result<Polynomial<Gf62>> {
    p.map_field(Gf62::from_rational)
}

fn describe(p: &Polynomial<Rational>, params: &SpdpParams) -> String {
    format!("p = {p} (n={}), kappa={}, ell={}", p.n_vars(), params.kappa, params.ell)
}

/// Random case parameters: `kappa <= 3`, `ell <= 3`.
fn case(seed: u64) -> (Polynomial<Rational>, SpdpParams) {
    let p = random_multilinear(8, 8, seed);
    let mut g = rng(seed ^ 0xca5e);
    (p, SpdpParams::new(g.gen_range(0..=3), g.gen_range(0..=3)))
}

type CaseResult = Result<(usize, Vec<Violation>)>;

fn run_cases(cases: usize, seed: u64, f: impl Fn(u64) -> CaseResult + Sync) -> Result<(usize, Vec<Violation>)> {
    let results: Vec<(usize, Vec<Violation>)> = (0..cases as u64)
        .into_par_iter()
        .map(|i| f(seed.wrapping_add(i)))
        .collect::<Result<_>>()?;
    Ok(results
        .into_iter()
        .fold((0, Vec::new()), |(n, mut v), (k, w)| {
            v.extend(w);
            (n + k, v)
        }))
}

fn monotonicity_case(seed: u64) -> CaseResult {
    let (p, params) = case(seed);
    let mut v = Vec::new();
    let base = gamma(&p, &params)?;
    let wider = SpdpParams::new(params.kappa, params.ell + 1);
    let up = gamma(&p, &wider)?;
    if up < base {
        v.push(Violation {
            instance: describe(&p, &params),
            detail: format!("rank dropped from {base} to {up} when ell grew to {}", params.ell + 1),
        });
    }

    // Deleting rows or columns never raises the rank.
    let m = build_matrix(&p, &params, &Budget::default())?;
    let mut g = rng(seed ^ 0xde1e7e);
    let rows: Vec<usize> = (0..m.row_count()).filter(|_| g.gen_bool(0.6)).collect();
    let cols: Vec<usize> = (0..m.column_count()).filter(|_| g.gen_bool(0.6)).collect();
    let sub = m.submatrix(&rows, &cols)?.rank().gamma;
    if sub > base {
        v.push(Violation {
            instance: describe(&p, &params),
            detail: format!("submatrix on {} rows, {} columns has rank {sub} > {base}", rows.len(), cols.len()),
        });
    }
    Ok((2, v))
}

fn invariance_case(seed: u64) -> CaseResult {
    let (p, params) = case(seed);
    let mut perm: Vec<usize> = (0..p.n_vars()).collect();
    perm.shuffle(&mut rng(seed ^ 0x9e7));
    let q = p.permute(&perm)?;
    let (a, b) = (gamma(&p, &params)?, gamma(&q, &params)?);
    let v = if a == b {
        vec![]
    } else {
        vec![Violation {
            instance: describe(&p, &params),
            detail: format!("permutation {perm:?} changed rank {a} to {b}"),
        }]
    };
    Ok((1, v))
}

fn blocked_case(seed: u64) -> CaseResult {
    let (p, params) = case(seed);
    let n = p.n_vars();
    let mut g = rng(seed ^ 0xb10c);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut g);
    let parts = g.gen_range(1..=n);
    let mut blocks = vec![Vec::new(); parts];
    for (i, v) in order.into_iter().enumerate() {
        blocks[if i < parts { i } else { g.gen_range(0..parts) }].push(v);
    }
    let partition = BlockPartition::new(n, blocks)?;
    let m = build_matrix(&p, &params, &Budget::default())?;
    let full = m.rank().gamma;
    let blocked = blocked_matrix(&m, &partition, &Admissibility::block_local())?.rank().gamma;
    let v = if blocked <= full {
        vec![]
    } else {
        vec![Violation {
            instance: format!("{}, blocks={:?}", describe(&p, &params), partition.blocks()),
            detail: format!("blocked rank {blocked} exceeds rank {full}"),
        }]
    };
    Ok((1, v))
}

/// Lower bound `Gamma_{kappa,0}(Perm_d) >= C(d, kappa)` with `kappa =
/// floor(d/2)`, plus the diagonal-marker separation behind it.
pub fn permanent_case(d: usize) -> CaseResult {
    let kappa = d / 2;
    let params = SpdpParams::new(kappa, 0);
    let perm = permanent::<Rational>(d)?;
    let gamma = gamma(&perm, &params)?;
    let bound = binomial(d as u64, kappa as u64);
    let mut v = Vec::new();
    if BigUint::from(gamma) < bound {
        v.push(Violation {
            instance: format!("perm_{d}, kappa={kappa}, ell=0"),
            detail: format!("rank {gamma} below C({d},{kappa}) = {bound}"),
        });
    }
    let gens = sub_permanent_generators::<Rational>(d, kappa)?;
    for (r, _) in &gens {
        let marker = diagonal_marker(d, r);
        for (s, p_s) in &gens {
            let c = p_s.coefficient(&marker);
            let expected = if r == s { Rational::from_i64(1) } else { Rational::from_i64(0) };
            if c != expected {
                v.push(Violation {
                    instance: format!("perm_{d}, R={r:?}, S={s:?}"),
                    detail: format!("marker of R has coefficient {c} in p_S"),
                });
            }
        }
    }
    Ok((1 + gens.len() * gens.len(), v))
}

/// Weak compositions of `r` into `bins` parts, by enumeration.
pub fn enumerate_histograms(r: usize, bins: usize) -> usize {
    fn go(left: usize, bins: usize) -> usize {
        match bins {
            0 => usize::from(left == 0),
            1 => 1,
            _ => (0..=left).map(|k| go(left - k, bins - 1)).sum(),
        }
    }
    go(r, bins)
}

fn profiles_checks() -> CaseResult {
    let mut v = Vec::new();
    let mut checks = 0;
    for r in 0..=8 {
        for s in 1..=4 {
            checks += 1;
            let enumerated = enumerate_histograms(r, s);
            let counted = count_profiles(r, s);
            if counted != BigUint::from(enumerated) {
                v.push(Violation {
                    instance: format!("R={r}, S'={s}"),
                    detail: format!("count_profiles gave {counted}, enumeration {enumerated}"),
                });
            }
        }
    }
    for n in [256usize, 1024] {
        let r = width_for(n, 0.25, 1.0);
        let model = LocalModel::toy(r);
        let counts: Vec<usize> = (2..=8).map(|k| realized_profiles(&model, r, k).len()).collect();
        checks += 1;
        if counts.windows(2).any(|w| w[0] != w[1]) {
            v.push(Violation {
                instance: format!("toy model, n={n}, R={r}"),
                detail: format!("realized profile counts vary with kappa 2..8: {counts:?}"),
            });
        }
        let cap = count_profiles(r, model.s_prime());
        checks += 1;
        if BigUint::from(counts[0]) > cap {
            v.push(Violation {
                instance: format!("toy model, n={n}, R={r}"),
                detail: format!("{} realized profiles exceed count_profiles = {cap}", counts[0]),
            });
        }
    }
    Ok((checks, v))
}

fn oracle_case(seed: u64) -> CaseResult {
    let (p, params) = case(seed);
    let m = build_matrix(&p, &params, &Budget::default())?;
    let sparse = m.rank().gamma;
    let dense = dense_rank(m.to_dense());
    let modular = gamma(&to_gf(&p)?, &params)?;
    let mut v = Vec::new();
    if sparse != dense {
        v.push(Violation {
            instance: describe(&p, &params),
            detail: format!("sparse rank {sparse}, dense rank {dense}"),
        });
    }
    if sparse != modular {
        v.push(Violation {
            instance: describe(&p, &params),
            detail: format!("rank over Q is {sparse}, over GF(p) {modular}"),
        });
    }
    Ok((2, v))
}

/// Runs `suite` on `cases` instances (the suite default when `None`).
pub fn run_suite(suite: Suite, seed: u64, cases: Option<usize>) -> Result<SuiteReport> {
    let cases = cases.unwrap_or(suite.default_cases());
    let (checks, violations) = match suite {
        Suite::Monotonicity => run_cases(cases, seed, monotonicity_case)?,
        Suite::Invariance => run_cases(cases, seed, invariance_case)?,
        Suite::Blocked => run_cases(cases, seed, blocked_case)?,
        Suite::Oracle => run_cases(cases, seed, oracle_case)?,
        // Fixed instances: dimensions 2..=5 and the profile grid.
        Suite::Permanent => {
            let dims: Vec<usize> = (2..2 + cases.min(4)).collect();
            let results: Vec<(usize, Vec<Violation>)> = dims.par_iter().map(|&d| permanent_case(d)).collect::<Result<_>>()?;
            results.into_iter().fold((0, Vec::new()), |(n, mut v), (k, w)| {
                v.extend(w);
                (n + k, v)
            })
        }
        Suite::Profiles => profiles_checks()?,
    };
    Ok(SuiteReport {
        suite,
        seed,
        cases,
        checks,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn dense_rank_small() {
        let q = |v: i64| Rational::from_i64(v);
        assert_eq!(dense_rank(vec![vec![q(1), q(2)], vec![q(2), q(4)]]), 1);
        assert_eq!(dense_rank(vec![vec![q(0), q(1)], vec![q(1), q(0)]]), 2);
        assert_eq!(dense_rank::<Rational>(vec![]), 0);
    }

    #[test]
    fn random_polynomials_are_seeded() {
        let a = random_multilinear(8, 8, 5);
        assert_eq!(a, random_multilinear(8, 8, 5));
        assert!(a.n_vars() <= 8 && a.terms().all(|(m, _)| m.is_squarefree()));
    }

    #[test]
    fn histograms() {
        assert_eq!(enumerate_histograms(3, 2), 4);
        assert_eq!(enumerate_histograms(5, 3), 21);
        assert_eq!(enumerate_histograms(0, 1), 1);
    }

    #[test]
    fn small_suites_pass() {
        for s in [Suite::Monotonicity, Suite::Invariance, Suite::Blocked, Suite::Oracle] {
            let r = run_suite(s, 1, Some(10)).unwrap();
            assert!(r.passed(), "{s}: {:?}", r.violations);
        }
        assert!(run_suite(Suite::Permanent, 0, Some(2)).unwrap().passed());
    }
}
