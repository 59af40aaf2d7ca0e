//! Counting formulas and concrete rank bounds. Every hidden constant is
//! an explicit argument.

use num_bigint::BigUint;
use num_traits::{One, Pow};

use super::window::Profile;
use crate::spdp::binomial;

/// Weak compositions of `r` into `s_prime` parts: `C(r + S' - 1, S' - 1)`.
pub fn count_profiles(r: usize, s_prime: usize) -> BigUint {
    assert!(s_prime >= 1, "S' must be positive");
    binomial((r + s_prime - 1) as u64, (s_prime - 1) as u64)
}

/// The ordered-sequence bound `T_step^kappa`.
pub fn count_kappa_step_sequences(t_step: &BigUint, kappa: usize) -> BigUint {
    Pow::pow(t_step, kappa as u32)
}

/// Single-step transitions with at most `b` of `r` interfaces touched,
/// each receiving one of `alphabet` symbols: `sum_{j<=b} C(r,j) |Sigma|^j`.
pub fn t_step(r: usize, b: usize, alphabet: usize) -> BigUint {
    (0..=b.min(r))
        .map(|j| binomial(r as u64, j as u64) * Pow::pow(BigUint::from(alphabet), j as u32))
        .sum()
}

/// `s^{c_gate * kappa} * C(n + ell, ell)`.
pub fn circuit_rank_bound(s: usize, n: usize, kappa: usize, ell: usize, c_gate: u32) -> BigUint {
    Pow::pow(BigUint::from(s), c_gate * kappa as u32) * binomial((n + ell) as u64, ell as u64)
}

/// `prod_sigma C(h(sigma) + d_sigma - 1, d_sigma - 1)`; `dim` gives `d_sigma`.
pub fn profile_subspace_dim(profile: &Profile, dim: impl Fn(&str) -> usize) -> BigUint {
    profile.bins().fold(BigUint::one(), |acc, (sigma, h)| {
        let d = dim(sigma).max(1);
        acc * binomial((h + d - 1) as u64, (d - 1) as u64)
    })
}

/// `|M_{<=ell}| * C(n, kappa) * B^kappa`, multilinear shifts.
pub fn coordinate_budget(n: usize, kappa: usize, ell: usize, per_step: usize) -> BigUint {
    let shifts: BigUint = (0..=ell.min(n)).map(|j| binomial(n as u64, j as u64)).sum();
    shifts * binomial(n as u64, kappa as u64) * Pow::pow(BigUint::from(per_step), kappa as u32)
}

/// `R = floor(C * (log2 n)^c)`, at least 1.
pub fn width_for(n: usize, constant: f64, exponent: f64) -> usize {
    let log = (n.max(2) as f64).log2();
    ((constant * log.powf(exponent)).floor() as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_counts() {
        assert_eq!(count_profiles(3, 2), BigUint::from(4u32));
        assert_eq!(count_profiles(0, 5), BigUint::one());
        assert_eq!(count_profiles(5, 3), BigUint::from(21u32));
    }

    #[test]
    fn step_sequences() {
        assert_eq!(count_kappa_step_sequences(&BigUint::one(), 9), BigUint::one());
        assert_eq!(count_kappa_step_sequences(&BigUint::from(2u32), 3), BigUint::from(8u32));
        // 1 + 2*2 + 1*4
        assert_eq!(t_step(2, 2, 2), BigUint::from(9u32));
    }

    #[test]
    fn circuit_bounds() {
        assert_eq!(circuit_rank_bound(1, 5, 3, 2, 2), BigUint::from(21u32));
        assert_eq!(circuit_rank_bound(3, 5, 2, 0, 2), BigUint::from(81u32));
    }

    #[test]
    fn subspace_and_budget() {
        assert_eq!(profile_subspace_dim(&Profile::default(), |_| 3), BigUint::one());
        let single = Profile::from_counts([("a".to_string(), 2)]);
        assert_eq!(profile_subspace_dim(&single, |_| 2), BigUint::from(3u32));
        // (1 + 4) * C(4,1) * 2
        assert_eq!(coordinate_budget(4, 1, 1, 2), BigUint::from(40u32));
        assert_eq!(width_for(256, 0.25, 1.0), 2);
        assert_eq!(width_for(1024, 0.25, 1.0), 2);
    }
}
