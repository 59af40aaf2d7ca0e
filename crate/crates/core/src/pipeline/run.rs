use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::circuit::Circuit;
use super::cnf::{restrict_prune, tseitin, Cnf};
use super::window::{canonicalize_profiles, SignatureMode, extract_window, grow_window, window_budget, window_polynomial};
use crate::algebra::{Field, Monomial, Polynomial};
use crate::error::{Error, Result};
use crate::families::{goldreich_instance, planted_3cnf, rng, FamilyKind, FamilySpec};
use crate::spdp::{build_matrix, Budget, Convention, SpdpParams};
use crate::TOOL_VERSION;

/// Knobs of a pipeline run. `kappa: None` means `max(1, round(log2 n / 4))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineParams {
    pub kappa: Option<usize>,
    pub ell: usize,
    pub convention: Convention,
    /// Window budget constant: `kappa_win = ceil(c_w * log2 n)`.
    pub c_w: f64,
    /// Fraction of inputs fixed by the restriction; 0 leaves only unit
    /// propagation.
    pub rho: f64,
    /// Merge variables with equal signatures before ranking.
    pub compress: bool,
    pub signature: SignatureMode,
    pub budget: Budget,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            kappa: None,
            ell: 2,
            convention: Convention::Exact,
            c_w: 3.0,
            rho: 0.0,
            compress: true,
            signature: SignatureMode::default(),
            budget: Budget::default(),
        }
    }
}

pub fn default_kappa(n: usize) -> usize {
    ((n.max(1) as f64).log2() / 4.0).round().max(1.0) as usize
}

/// `ceil(sqrt(n))` in exact integer arithmetic.
pub fn collapse_threshold(n: usize) -> usize {
    let mut t = (n as f64).sqrt() as usize;
    while t * t < n {
        t += 1;
    }
    while t > 0 && (t - 1) * (t - 1) >= n {
        t -= 1;
    }
    t
}

/// What a run starts from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "source")]
pub enum PipelineInput {
    Family(FamilySpec),
    Circuit { name: String, circuit: Circuit },
    Cnf { name: String, cnf: Cnf },
}

impl PipelineInput {
    pub fn label(&self) -> String {
        match self {
            PipelineInput::Family(spec) => family_label(spec),
            PipelineInput::Circuit { name, .. } | PipelineInput::Cnf { name, .. } => name.clone(),
        }
    }
}

pub fn family_label(spec: &FamilySpec) -> String {
    match spec.kind {
        FamilyKind::RandomDeg3 => "RandDeg3".into(),
        FamilyKind::GoldreichLike => "Goldreich-like".into(),
        FamilyKind::DiagonalPower => format!("Diagonal(sum x^{})", spec.params.exponent.unwrap_or(4)),
        FamilyKind::Permanent => {
            let d = spec.params.d.unwrap_or(0);
            format!("perm_{d}x{d}")
        }
        FamilyKind::ToyExample => "toy".into(),
        FamilyKind::Custom => "custom".into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub version: String,
    pub family: String,
    pub input: PipelineInput,
    /// `boolean` (circuit, CNF, window, signatures) or `algebraic`
    /// (polynomial window, no signature merging).
    pub route: String,
    pub n: usize,
    pub kappa_win: usize,
    pub live_vars: usize,
    pub profiles: usize,
    pub gamma: usize,
    pub ambient_dim: usize,
    pub threshold: usize,
    pub pass: bool,
    pub conflict: bool,
    pub kappa: usize,
    pub ell: usize,
    pub convention: Convention,
    pub field: String,
    pub params: PipelineParams,
    pub seed: u64,
}

/// Circuit asserting a planted 3-CNF: one OR pair per clause, negative
/// literals through shared NOT gates, a balanced AND on top.
pub fn deg3_circuit(n: usize, clauses: &[[i64; 3]]) -> Circuit {
    let mut c = Circuit::with_inputs(n);
    let mut negated: BTreeMap<usize, usize> = BTreeMap::new();
    let mut lit = |c: &mut Circuit, l: i64| {
        let v = l.unsigned_abs() as usize - 1;
        if l > 0 {
            v
        } else {
            *negated.entry(v).or_insert_with(|| c.not(v))
        }
    };
    let roots: Vec<usize> = clauses
        .iter()
        .map(|cl| {
            let a = lit(&mut c, cl[0]);
            let b = lit(&mut c, cl[1]);
            let d = lit(&mut c, cl[2]);
            let ab = c.or(a, b);
            c.or(ab, d)
        })
        .collect();
    c.and_all(&roots);
    c
}

/// Circuit asserting every XOR-AND predicate equals its planted output.
pub fn goldreich_circuit(n: usize, tuples: &[Vec<usize>], outputs: &[bool]) -> Circuit {
    let mut c = Circuit::with_inputs(n);
    let roots: Vec<usize> = tuples
        .iter()
        .zip(outputs)
        .map(|(t, &out)| {
            let k = t.len();
            let mut acc = c.and(t[k - 2], t[k - 1]);
            for &v in &t[..k - 2] {
                acc = c.xor(acc, v);
            }
            if out {
                acc
            } else {
                c.not(acc)
            }
        })
        .collect();
    c.and_all(&roots);
    c
}

/// Fixes a seeded `rho`-fraction of the first `n` variables: to `values`
/// when given, else to seeded random bits.
fn restriction(n: usize, rho: f64, values: Option<&[bool]>, seed: u64) -> BTreeMap<usize, bool> {
    let mut g = rng(seed ^ 0x5eed_0001);
    let count = ((rho.clamp(0.0, 1.0) * n as f64).round() as usize).min(n);
    let mut chosen = sample(&mut g, n, count).into_vec();
    chosen.sort_unstable();
    chosen
        .into_iter()
        .map(|v| (v + 1, values.map_or_else(|| g.gen(), |x| x[v])))
        .collect()
}

struct BooleanInstance {
    cnf: Cnf,
    n: usize,
    planted: Option<Vec<bool>>,
}

fn boolean_instance(input: &PipelineInput) -> Result<Option<BooleanInstance>> {
    Ok(Some(match input {
        PipelineInput::Family(spec) => match spec.kind {
            FamilyKind::RandomDeg3 => {
                let n = spec.n_vars()?;
                let planted = planted_3cnf(n, spec.params.clauses.unwrap_or(n), spec.seed)?;
                // The family already is a CNF, so it enters after the encoder.
                BooleanInstance {
                    cnf: Cnf::new(n, planted.clauses.iter().map(|c| c.to_vec()).collect())?,
                    n,
                    planted: Some(planted.planted),
                }
            }
            FamilyKind::GoldreichLike => {
                let n = spec.n_vars()?;
                let inst = goldreich_instance(n, spec.locality(), spec.predicate_count()?, spec.seed)?;
                BooleanInstance {
                    cnf: tseitin(&goldreich_circuit(n, &inst.tuples, &inst.outputs)),
                    n,
                    planted: Some(inst.planted),
                }
            }
            _ => return Ok(None),
        },
        PipelineInput::Circuit { circuit, .. } => BooleanInstance {
            cnf: tseitin(circuit),
            n: circuit.n_inputs(),
            planted: None,
        },
        PipelineInput::Cnf { cnf, .. } => BooleanInstance {
            cnf: cnf.clone(),
            n: cnf.n_vars,
            planted: None,
        },
    }))
}

/// Runs every stage and records the verdict `gamma < ceil(sqrt n)`.
/// Deterministic in `(input, params, seed)`.
pub fn run_pipeline<F: Field>(input: &PipelineInput, params: &PipelineParams, seed: u64) -> Result<PipelineRun> {
    let stage = |s: &'static str| move |e: Error| e.in_stage(s);
    let (route, n, kappa_win, live_vars, profiles, conflict, poly) =
        match boolean_instance(input).map_err(stage("family"))? {
            Some(inst) => {
                let kappa_win = window_budget(inst.n, params.c_w);
                let fix = restriction(inst.n, params.rho, inst.planted.as_deref(), seed);
                let restricted = restrict_prune(&inst.cnf, &fix).map_err(stage("restrict"))?;
                let sel = extract_window(&restricted.cnf, kappa_win, seed);
                let classes = canonicalize_profiles(&sel, &restricted.cnf, params.signature);
                let poly: Polynomial<F> = if params.compress {
                    window_polynomial(&sel, &restricted.cnf, Some(&classes))
                } else {
                    window_polynomial(&sel, &restricted.cnf, None)
                };
                let profiles = if params.compress { classes.count } else { sel.live() };
                ("boolean", inst.n, kappa_win, sel.live(), profiles, restricted.conflict, poly)
            }
            None => {
                let PipelineInput::Family(spec) = input else {
                    unreachable!("non-family inputs take the boolean route")
                };
                let p: Polynomial<F> = spec.build().map_err(stage("family"))?;
                let n = p.n_vars();
                let kappa_win = window_budget(n, params.c_w);
                let (w, poly) = algebraic_window(&p, kappa_win, seed).map_err(stage("window"))?;
                ("algebraic", n, kappa_win, w, w, false, poly)
            }
        };

    let kappa = params.kappa.unwrap_or_else(|| default_kappa(n));
    let spdp = SpdpParams {
        kappa,
        ell: params.ell,
        convention: params.convention,
        drop_zero_rows: true,
    };
    let report = build_matrix(&poly, &spdp, &params.budget)
        .map_err(stage("rank"))?
        .rank();
    let threshold = collapse_threshold(n);
    Ok(PipelineRun {
        version: TOOL_VERSION.to_string(),
        family: input.label(),
        input: input.clone(),
        route: route.into(),
        n,
        kappa_win,
        live_vars,
        profiles,
        gamma: report.gamma,
        ambient_dim: report.ambient_dim,
        threshold,
        pass: report.gamma < threshold,
        conflict,
        kappa,
        ell: params.ell,
        convention: params.convention,
        field: F::MODE.tag(),
        params: *params,
        seed,
    })
}

/// Window on the monomial co-occurrence graph; other variables are set to
/// zero and the survivors renumbered in window order.
fn algebraic_window<F: Field>(p: &Polynomial<F>, budget: usize, seed: u64) -> Result<(usize, Polynomial<F>)> {
    let edges: Vec<Vec<usize>> = p.monomials().map(|m| m.support().collect()).collect();
    let vars = grow_window(p.n_vars(), &edges, budget, seed);
    let mut map = vec![0; p.n_vars()];
    let mut zero = BTreeMap::new();
    let mut inside = vec![false; p.n_vars()];
    for (i, &v) in vars.iter().enumerate() {
        map[v] = i;
        inside[v] = true;
    }
    for v in (0..p.n_vars()).filter(|&v| !inside[v]) {
        zero.insert(v, F::zero());
    }
    let restricted = p.restrict(&zero);
    let w = vars.len();
    if w == 0 {
        let c = restricted.coefficient(&Monomial::one());
        return Ok((0, Polynomial::constant(0, p.mode(), c)));
    }
    Ok((w, restricted.substitute_vars(&map, w)?))
}

/// A named list of runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub runs: Vec<FamilySpec>,
}

const TABLE1_SCALED: &str = include_str!("../../manifests/table1_scaled.json");

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(format!("manifest: {e}")))
    }

    /// Bundled manifests by name.
    pub fn bundled(name: &str) -> Option<Self> {
        match name {
            "table1_scaled" => Some(Self::from_json(TABLE1_SCALED).expect("bundled manifest parses")),
            _ => None,
        }
    }
}

/// Runs every manifest entry concurrently; output order follows the manifest.
pub fn run_manifest<F: Field>(manifest: &Manifest, params: &PipelineParams, seed: u64) -> Result<Vec<PipelineRun>> {
    manifest
        .runs
        .par_iter()
        .map(|spec| run_pipeline::<F>(&PipelineInput::Family(spec.clone()), params, seed))
        .collect()
}

pub const CSV_HEADER: &str = "family,n,live_vars,profiles,rank,threshold,pass";

/// Table-style CSV with a `✓`/`✗` pass column.
pub fn runs_to_csv(runs: &[PipelineRun]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in runs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.family,
            r.n,
            r.live_vars,
            r.profiles,
            r.gamma,
            r.threshold,
            if r.pass { "✓" } else { "✗" }
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Rational;
    use crate::families::FamilyParams;

    fn family(kind: FamilyKind, params: FamilyParams, seed: u64) -> PipelineInput {
        PipelineInput::Family(FamilySpec { kind, params, seed })
    }

    #[test]
    fn threshold_and_kappa() {
        assert_eq!(collapse_threshold(256), 16);
        assert_eq!(collapse_threshold(9), 3);
        assert_eq!(collapse_threshold(10), 4);
        assert_eq!(collapse_threshold(1024), 32);
        assert_eq!(collapse_threshold(2048), 46);
        assert_eq!(collapse_threshold(0), 0);
        assert_eq!(default_kappa(256), 2);
        assert_eq!(default_kappa(1024), 3);
        assert_eq!(default_kappa(2), 1);
    }

    #[test]
    fn runs_are_deterministic() {
        let input = family(
            FamilyKind::GoldreichLike,
            FamilyParams {
                n: Some(64),
                ..Default::default()
            },
            3,
        );
        let p = PipelineParams::default();
        let a = run_pipeline::<Rational>(&input, &p, 11).unwrap();
        let b = run_pipeline::<Rational>(&input, &p, 11).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.pass, a.gamma < a.threshold);
        assert_eq!(a.route, "boolean");
    }

    #[test]
    fn permanent_control_does_not_collapse() {
        let input = family(
            FamilyKind::Permanent,
            FamilyParams {
                d: Some(3),
                ..Default::default()
            },
            0,
        );
        let r = run_pipeline::<Rational>(&input, &PipelineParams::default(), 0).unwrap();
        assert_eq!((r.n, r.live_vars, r.threshold, r.route.as_str()), (9, 9, 3, "algebraic"));
        assert!(!r.pass);
    }

    #[test]
    fn circuit_input() {
        let c = Circuit::parse("a = INPUT\nb = INPUT\ng = AND a b").unwrap();
        let input = PipelineInput::Circuit {
            name: "and2".into(),
            circuit: c,
        };
        let r = run_pipeline::<Rational>(&input, &PipelineParams::default(), 0).unwrap();
        // The asserted output forces both inputs, so nothing is left.
        assert_eq!((r.live_vars, r.gamma), (0, 0));
        assert_eq!(r.family, "and2");
    }

    #[test]
    fn manifest_and_csv() {
        let m = Manifest::bundled("table1_scaled").unwrap();
        assert_eq!(m.runs.len(), 6);
        assert!(Manifest::bundled("nope").is_none());
        assert!(Manifest::from_json("{").is_err());
        let csv = runs_to_csv(&[]);
        assert_eq!(csv, format!("{CSV_HEADER}\n"));
    }
}
