use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::LocalModel;
use crate::algebra::{Field, Monomial, Polynomial, Rational, RingMode};
use crate::error::{Error, Result};
use crate::families::rng;

/// One derivative step: the interfaces it touches and the symbol each one
/// receives.
pub type Step = Vec<(usize, char)>;

/// A window of derivative steps over `interfaces` live interfaces, each
/// belonging to a block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    blocks: Vec<usize>,
    steps: Vec<Step>,
}

impl Window {
    pub fn new(blocks: Vec<usize>, steps: Vec<Step>, model: &LocalModel) -> Result<Self> {
        if blocks.len() > model.width() {
            return Err(Error::InvalidWindow(format!(
                "{} live interfaces exceed width {}",
                blocks.len(),
                model.width()
            )));
        }
        for (t, step) in steps.iter().enumerate() {
            let touched: BTreeSet<usize> = step.iter().map(|e| e.0).collect();
            if touched.len() != step.len() {
                return Err(Error::InvalidWindow(format!("step {t} touches an interface twice")));
            }
            if touched.len() > model.b() {
                return Err(Error::InvalidWindow(format!(
                    "step {t} touches {} interfaces, more than b = {}",
                    touched.len(),
                    model.b()
                )));
            }
            if let Some(&i) = touched.iter().find(|&&i| i >= blocks.len()) {
                return Err(Error::InvalidWindow(format!("step {t} touches unknown interface {i}")));
            }
            if let Some((_, c)) = step.iter().find(|(_, c)| !model.alphabet().contains(c)) {
                return Err(Error::InvalidWindow(format!("symbol `{c}` outside the alphabet")));
            }
        }
        Ok(Window { blocks, steps })
    }

    /// All interfaces in one block.
    pub fn single_block(interfaces: usize, steps: Vec<Step>, model: &LocalModel) -> Result<Self> {
        Window::new(vec![0; interfaces], steps, model)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn live(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Local update word of every interface.
    pub fn words(&self) -> Vec<String> {
        let mut words = vec![String::new(); self.blocks.len()];
        for step in &self.steps {
            for &(i, c) in step {
                words[i].push(c);
            }
        }
        words
    }

    /// Per interface, how many appended symbols changed its normal form.
    pub fn effective_changes(&self, model: &LocalModel) -> Vec<usize> {
        let mut nf = vec![String::new(); self.blocks.len()];
        let mut changes = vec![0; self.blocks.len()];
        for step in &self.steps {
            for &(i, c) in step {
                let next = model.normal_form(&format!("{}{c}", nf[i]));
                if next != nf[i] {
                    changes[i] += 1;
                    nf[i] = next;
                }
            }
        }
        changes
    }

    /// Relabels interfaces by `perm` (interface `i` becomes `perm[i]`).
    /// Only permutations that respect blocks are accepted.
    pub fn permute_interfaces(&self, perm: &[usize]) -> Result<Self> {
        let n = self.blocks.len();
        let mut seen = vec![false; n];
        for (i, &j) in perm.iter().enumerate() {
            if j >= n || seen[j] || perm.len() != n {
                return Err(Error::InvalidWindow("not a permutation".into()));
            }
            if self.blocks[i] != self.blocks[j] {
                return Err(Error::InvalidWindow(format!("interface {i} would leave its block")));
            }
            seen[j] = true;
        }
        let steps = self
            .steps
            .iter()
            .map(|s| s.iter().map(|&(i, c)| (perm[i], c)).collect())
            .collect();
        Ok(Window {
            blocks: self.blocks.clone(),
            steps,
        })
    }
}

/// Interface-anonymous profile: how many live interfaces end in each
/// normal form. Empty bins are not stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Profile(BTreeMap<String, usize>);

impl Profile {
    pub fn from_counts<I: IntoIterator<Item = (String, usize)>>(counts: I) -> Self {
        let mut h = BTreeMap::new();
        for (k, v) in counts {
            if v > 0 {
                *h.entry(k).or_insert(0) += v;
            }
        }
        Profile(h)
    }

    pub fn get(&self, sigma: &str) -> usize {
        self.0.get(sigma).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bins(&self) -> impl Iterator<Item = (&str, usize)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

pub fn profile_of(window: &Window, model: &LocalModel) -> Profile {
    Profile::from_counts(window.words().iter().map(|w| (model.normal_form(w), 1)))
}

/// Normal forms and the table `nf(sigma . c)` the profile dynamics run on.
struct Transitions {
    forms: Vec<String>,
    next: Vec<Vec<usize>>,
}

impl Transitions {
    fn new(model: &LocalModel) -> Self {
        let forms = model.normal_forms();
        let index: HashMap<&str, usize> = forms.iter().enumerate().map(|(i, f)| (f.as_str(), i)).collect();
        let next = forms
            .iter()
            .map(|f| {
                model
                    .alphabet()
                    .iter()
                    .map(|c| index[model.normal_form(&format!("{f}{c}")).as_str()])
                    .collect()
            })
            .collect();
        Transitions { forms, next }
    }

    fn profile(&self, h: &[u32]) -> Profile {
        Profile::from_counts(self.forms.iter().zip(h).map(|(f, &k)| (f.clone(), k as usize)))
    }
}

/// Every histogram reachable from `h` in one step. A step picks at most
/// `b` distinct interfaces; since interfaces in the same bin are
/// interchangeable, it is a multiset of `(bin, symbol)` moves whose use of
/// each bin stays within its count.
fn successors(h: &[u32], t: &Transitions, b: usize, out: &mut BTreeSet<Vec<u32>>) {
    let symbols = t.next.first().map_or(0, Vec::len);
    let moves: Vec<(usize, usize)> = (0..h.len())
        .filter(|&i| h[i] > 0)
        .flat_map(|i| (0..symbols).map(move |c| (i, c)))
        .collect();
    let mut used = vec![0u32; h.len()];
    let mut cur = h.to_vec();
    step_moves(0, b, &moves, h, &mut used, &mut cur, t, out);
}

/// Moves are drawn from the interfaces present before the step, so an
/// interface that lands back in its own bin is never picked twice.
#[allow(clippy::too_many_arguments)]
fn step_moves(
    start: usize,
    left: usize,
    moves: &[(usize, usize)],
    orig: &[u32],
    used: &mut [u32],
    cur: &mut [u32],
    t: &Transitions,
    out: &mut BTreeSet<Vec<u32>>,
) {
    out.insert(cur.to_vec());
    if left == 0 {
        return;
    }
    for k in start..moves.len() {
        let (bin, c) = moves[k];
        if used[bin] == orig[bin] {
            continue;
        }
        let to = t.next[bin][c];
        used[bin] += 1;
        cur[bin] -= 1;
        cur[to] += 1;
        step_moves(k, left - 1, moves, orig, used, cur, t, out);
        cur[to] -= 1;
        cur[bin] += 1;
        used[bin] -= 1;
    }
}

/// Profiles realized by windows of exactly `kappa` steps over `r`
/// interfaces that start with empty words. The empty step is allowed, so
/// the set only grows with `kappa`; it stops growing once every interface
/// can have made its `q` effective changes, at `max(q, ceil(q*r/b))`
/// steps (one symbol per interface per step).
pub fn realized_profiles(model: &LocalModel, r: usize, kappa: usize) -> BTreeSet<Profile> {
    let t = Transitions::new(model);
    let mut start = vec![0u32; t.forms.len()];
    if !t.forms.is_empty() {
        start[0] = r as u32;
    }
    let mut states: BTreeSet<Vec<u32>> = BTreeSet::from([start]);
    for _ in 0..kappa {
        let next: Vec<BTreeSet<Vec<u32>>> = states
            .par_iter()
            .map(|h| {
                let mut out = BTreeSet::new();
                successors(h, &t, model.b(), &mut out);
                out
            })
            .collect();
        let grown: BTreeSet<Vec<u32>> = next.into_iter().flatten().collect();
        if grown == states {
            break;
        }
        states = grown;
    }
    states.iter().map(|h| t.profile(h)).collect()
}

/// Steps after which [`realized_profiles`] is constant.
pub fn saturation_kappa(model: &LocalModel, r: usize) -> usize {
    (model.q() * r).div_ceil(model.b()).max(model.q())
}

/// Concrete block-local instantiation used to measure profile subspaces.
///
/// Each normal-form type `sigma` owns `d_sigma` shared variables. An
/// interface `i` whose word normalizes to `sigma` contributes a fixed
/// random linear form `L_{i,sigma}` in those variables, and a window's
/// polynomial is the product of its interfaces' forms. Windows sharing a
/// profile therefore span a space of dimension at most
/// `prod_sigma C(h(sigma) + d_sigma - 1, d_sigma - 1)`.
#[derive(Debug, Clone)]
pub struct ProfileInstantiation {
    forms: Vec<String>,
    offsets: Vec<usize>,
    dims: Vec<usize>,
    n_vars: usize,
    seed: u64,
}

impl ProfileInstantiation {
    pub fn new(model: &LocalModel, local_dims: &BTreeMap<String, usize>, default_dim: usize, seed: u64) -> Result<Self> {
        let forms = model.normal_forms();
        let dims: Vec<usize> = forms.iter().map(|f| local_dims.get(f).copied().unwrap_or(default_dim)).collect();
        if dims.contains(&0) {
            return Err(Error::InvalidModel("local dimensions must be positive".into()));
        }
        let mut offsets = Vec::with_capacity(dims.len());
        let mut n_vars = 0;
        for &d in &dims {
            offsets.push(n_vars);
            n_vars += d;
        }
        Ok(ProfileInstantiation {
            forms,
            offsets,
            dims,
            n_vars,
            seed,
        })
    }

    pub fn local_dims(&self) -> BTreeMap<String, usize> {
        self.forms.iter().cloned().zip(self.dims.iter().copied()).collect()
    }

    fn linear_form(&self, interface: usize, ty: usize) -> Polynomial<Rational> {
        let mix = self.seed ^ ((interface as u64) << 20) ^ ty as u64;
        let mut g = rng(mix);
        let terms = (0..self.dims[ty]).map(|k| {
            let c: i64 = g.gen_range(1..=97);
            (Monomial::var(self.offsets[ty] + k), Rational::from_i64(c))
        });
        Polynomial::from_terms(self.n_vars, RingMode::Standard, terms).expect("variables in range")
    }

    pub fn window_polynomial(&self, window: &Window, model: &LocalModel) -> Polynomial<Rational> {
        let one = Polynomial::constant(self.n_vars, RingMode::Standard, Rational::one());
        window.words().iter().enumerate().fold(one, |acc, (i, w)| {
            let nf = model.normal_form(w);
            let ty = self.forms.iter().position(|f| *f == nf).expect("normal form is listed");
            acc.mul(&self.linear_form(i, ty)).expect("same ring")
        })
    }

    /// `dim span { p_w }` over the given windows, by exact rank.
    pub fn measured_dim(&self, windows: &[&Window], model: &LocalModel) -> usize {
        let polys: Vec<Polynomial<Rational>> = windows.iter().map(|w| self.window_polynomial(w, model)).collect();
        let columns: BTreeMap<&Monomial, usize> = polys
            .iter()
            .flat_map(|p| p.monomials())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();
        let rows = polys
            .iter()
            .map(|p| p.terms().map(|(m, c)| (columns[m], c.clone())).collect())
            .collect();
        Rational::rank(rows, columns.len())
    }
}
