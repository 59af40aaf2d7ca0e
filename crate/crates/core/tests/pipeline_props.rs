mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use common::{rank_mod_p, spdp_rows, to_mask_poly};
use spdp_core::algebra::{Polynomial, Rational};
use spdp_core::families::{permanent, FamilyKind, FamilySpec};
use spdp_core::pipeline::{
    canonicalize_profiles, default_kappa, extract_window, restrict_prune, run_pipeline, window_budget,
    window_polynomial, Cnf, Manifest, PipelineInput, PipelineParams, SignatureMode,
};
use spdp_core::spdp::{build_matrix, Budget, SpdpParams};

fn gamma(p: &Polynomial<Rational>, kappa: usize, ell: usize) -> usize {
    build_matrix(p, &SpdpParams::new(kappa, ell).dropping_zero_rows(), &Budget::default())
        .unwrap()
        .rank()
        .gamma
}

/// Ranks of the window polynomial with and without signature merging.
fn compressed_and_plain(cnf: &Cnf, budget: usize, seed: u64, mode: SignatureMode, kappa: usize, ell: usize) -> (usize, usize) {
    let sel = extract_window(cnf, budget, seed);
    let classes = canonicalize_profiles(&sel, cnf, mode);
    let merged: Polynomial<Rational> = window_polynomial(&sel, cnf, Some(&classes));
    let plain: Polynomial<Rational> = window_polynomial(&sel, cnf, None);
    (gamma(&merged, kappa, ell), gamma(&plain, kappa, ell))
}

#[test]
fn compression_never_raises_rank_on_manifest_fixtures() {
    let manifest = Manifest::bundled("table1_scaled").unwrap();
    for spec in manifest.runs.iter().filter(|s| matches!(s.kind, FamilyKind::RandomDeg3 | FamilyKind::GoldreichLike)) {
        let params = PipelineParams::default();
        let compressed = run_pipeline::<Rational>(&PipelineInput::Family(spec.clone()), &params, 0).unwrap();
        let plain_params = PipelineParams { compress: false, ..params };
        let plain = run_pipeline::<Rational>(&PipelineInput::Family(spec.clone()), &plain_params, 0).unwrap();
        assert_eq!(compressed.live_vars, plain.live_vars);
        assert!(compressed.profiles <= plain.profiles);
        assert!(
            compressed.gamma <= plain.gamma,
            "{}: compressed {} > plain {}",
            compressed.family,
            compressed.gamma,
            plain.gamma
        );
    }
}

fn small_cnf(max_vars: usize) -> impl Strategy<Value = Cnf> {
    (1..=max_vars).prop_flat_map(|n| {
        let lit = (1..=n as i64, any::<bool>()).prop_map(|(v, pos)| if pos { v } else { -v });
        let clause = prop::collection::vec(lit, 1..=3);
        prop::collection::vec(clause, 0..=2 * n).prop_map(move |cs| Cnf::new(n, cs).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn compression_never_raises_rank_on_small_formulas(
        cnf in small_cnf(8),
        seed in 0u64..4,
        kappa in 1usize..=2,
        ell in 0usize..=2,
        multiset in any::<bool>(),
    ) {
        let mode = if multiset { SignatureMode::Multiset } else { SignatureMode::Support };
        let (merged, plain) = compressed_and_plain(&cnf, 8, seed, mode, kappa, ell);
        prop_assert!(merged <= plain, "{:?}: compressed {} > plain {}", cnf.clauses, merged, plain);
    }

    #[test]
    fn signature_count_ignores_variable_names(cnf in small_cnf(8), perm_seed in any::<u64>()) {
        let n = cnf.n_vars;
        let mut perm: Vec<i64> = (1..=n as i64).collect();
        let mut s = perm_seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let renamed = Cnf::new(
            n,
            cnf.clauses.iter().map(|c| c.iter().map(|&l| l.signum() * perm[l.unsigned_abs() as usize - 1]).collect()).collect(),
        ).unwrap();
        // budget covers everything, so both windows see the whole formula
        let a = canonicalize_profiles(&extract_window(&cnf, n, 0), &cnf, SignatureMode::Multiset);
        let b = canonicalize_profiles(&extract_window(&renamed, n, 0), &renamed, SignatureMode::Multiset);
        prop_assert_eq!(a.count, b.count);
    }

    #[test]
    fn window_polynomial_rank_matches_oracle(cnf in small_cnf(7), kappa in 1usize..=2, ell in 0usize..=2) {
        let sel = extract_window(&cnf, 7, 1);
        let p: Polynomial<Rational> = window_polynomial(&sel, &cnf, None);
        let (rows, _) = spdp_rows(&to_mask_poly(&p), p.n_vars(), kappa, ell);
        prop_assert_eq!(gamma(&p, kappa, ell), rank_mod_p(&rows));
    }

    #[test]
    fn permanent_ignores_row_and_column_order(
        rows in Just((0..4).collect::<Vec<usize>>()).prop_shuffle(),
        cols in Just((0..4).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let d = 4;
        let p: Polynomial<Rational> = permanent(d).unwrap();
        let mut map = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                map[i * d + j] = rows[i] * d + cols[j];
            }
        }
        prop_assert_eq!(p.substitute_vars(&map, d * d).unwrap(), p.clone());
        let mut both = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                both[i * d + j] = rows[i] * d + rows[j];
            }
        }
        prop_assert_eq!(p.substitute_vars(&both, d * d).unwrap(), p);
    }
}

#[test]
fn fixture_window_polynomial_is_stable() {
    let cnf = Cnf::new(5, vec![vec![1, -2, 3], vec![-1, 4], vec![2, 5], vec![-3, -4, -5]]).unwrap();
    let restricted = restrict_prune(&cnf, &BTreeMap::new()).unwrap();
    let sel = extract_window(&restricted.cnf, window_budget(5, 3.0), 0);
    let p: Polynomial<Rational> = window_polynomial(&sel, &restricted.cnf, None);
    let mut vars = sel.vars.clone();
    vars.sort();
    assert_eq!(vars, vec![1, 2, 3, 4, 5]);
    // On every Boolean point the polynomial counts satisfied clauses.
    let local = restricted.cnf.clone();
    let clauses = sel.clauses(&local);
    for a in 0u32..1 << 5 {
        let point: Vec<Rational> = (0..5).map(|i| Rational::from_integer((a >> i & 1).into())).collect();
        let sat = clauses.iter().filter(|c| common::satisfies(a, std::slice::from_ref(c))).count();
        assert_eq!(p.evaluate(&point).unwrap(), Rational::from_integer(sat.into()), "point {a:05b}");
    }
    let again: Polynomial<Rational> = window_polynomial(&extract_window(&local, window_budget(5, 3.0), 0), &local, None);
    assert_eq!(again, p);
    assert_eq!(p.to_string(), "3 - x1 + x5 + x1*x2 + x1*x4 + x2*x3 - x2*x5 - x1*x2*x3 - x3*x4*x5");
}

#[test]
fn pipeline_parameters_are_echoed() {
    let spec = FamilySpec::from_json(r#"{"kind":"random_deg3","params":{"n":256,"clauses":1024},"seed":1}"#).unwrap();
    let run = run_pipeline::<Rational>(&PipelineInput::Family(spec), &PipelineParams::default(), 3).unwrap();
    assert_eq!(run.kappa, default_kappa(256));
    assert_eq!(run.ell, 2);
    assert_eq!(run.kappa_win, 24);
    assert_eq!(run.pass, run.gamma < run.threshold);
    let json = serde_json::to_value(&run).unwrap();
    assert_eq!(json["params"]["c_w"], 3.0);
    assert_eq!(json["seed"], 3);
}

#[test]
fn compression_never_raises_rank_exhaustively_on_three_variables() {
    let mut pool: Vec<Vec<i64>> = Vec::new();
    for v in 1..=3i64 {
        pool.extend([vec![v], vec![-v]]);
        for u in v + 1..=3 {
            for (a, b) in [(u, v), (u, -v), (-u, v), (-u, -v)] {
                pool.push(vec![b, a]);
            }
        }
    }
    pool.extend([vec![1, 2, 3], vec![-1, 2, 3], vec![1, -2, -3]]);
    let mut checked = 0;
    for i in 0..pool.len() {
        for j in i..pool.len() {
            for k in j..pool.len() {
                let cnf = Cnf::new(3, vec![pool[i].clone(), pool[j].clone(), pool[k].clone()]).unwrap();
                for mode in [SignatureMode::Multiset, SignatureMode::Support] {
                    for (kappa, ell) in [(1, 0), (1, 1), (1, 2), (2, 1)] {
                        let (merged, plain) = compressed_and_plain(&cnf, 3, 0, mode, kappa, ell);
                        assert!(merged <= plain, "{:?} kappa={kappa} ell={ell}: {merged} > {plain}", cnf.clauses);
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 10_000);
}
