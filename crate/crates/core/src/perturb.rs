//! Second-order time-independent perturbation theory for the trapped mass and one field mode.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Second-order level shift of |n_a, n_b⟩ for a single field mode (units ħ = 1).
///
/// γ²Ω²[−(4n_an_b + 2n_a + n_b² + 3n_b + 2)/(2ω + Ω) + (4n_an_b + 2n_a − n_b² + n_b)/(Ω − 2ω)]
pub fn single_mode_shift<T: Real>(n_a: u32, n_b: u32, omega: T, omega_k: T, gamma: T) -> Result<T> {
    let two = T::lit(2.0);
    if (omega_k - two * omega).abs() <= T::lit(1e-9) * (omega_k.abs() + omega.abs()) {
        return Err(Error::param("omega_k", "resonant with 2ω"));
    }
    let (na, nb) = (T::lit(n_a as f64), T::lit(n_b as f64));
    let four = T::lit(4.0);
    let a = four * na * nb + two * na + nb * nb + T::lit(3.0) * nb + two;
    let b = four * na * nb + two * na - nb * nb + nb;
    let g2w2 = gamma * gamma * omega_k * omega_k;
    Ok(g2w2 * (-a / (two * omega + omega_k) + b / (omega_k - two * omega)))
}

/// The same shift written as the explicit sum over the four intermediate states.
pub fn single_mode_shift_four_term<T: Real>(n_a: u32, n_b: u32, omega: T, omega_k: T, gamma: T) -> T {
    let (na, nb) = (T::lit(n_a as f64), T::lit(n_b as f64));
    let one = T::one();
    let two = T::lit(2.0);
    let g2w2 = gamma * gamma * omega_k * omega_k;
    g2w2 * (na * nb * (nb - one) / (two * omega + omega_k)
        + na * (nb + one) * (nb + two) / (-two * omega + omega_k)
        + (na + one) * nb * (nb - one) / (two * omega - omega_k)
        + (na + one) * (nb + one) * (nb + two) / (-two * omega - omega_k))
}

/// Multimode level shift (Δ− − Δ+)n² − (3Δ+ + Δ−)n, with the n-independent part dropped.
pub fn multimode_shift<T: Real>(n_b: u32, delta_plus: T, delta_minus: T) -> T {
    let n = T::lit(n_b as f64);
    (delta_minus - delta_plus) * n * n - (T::lit(3.0) * delta_plus + delta_minus) * n
}

/// Multimode shift including the n-independent part: −((n² + 3n + 2)Δ+ + (n − n²)Δ−).
pub fn multimode_shift_total<T: Real>(n_b: u32, delta_plus: T, delta_minus: T) -> T {
    let n = T::lit(n_b as f64);
    let two = T::lit(2.0);
    -((n * n + T::lit(3.0) * n + two) * delta_plus + (n - n * n) * delta_minus)
}

/// RWA split of the transition-frequency shift at level n: (δω⁽¹⁾, δω⁽²⁾) = (−δ−, δ−(2n + 1)).
pub fn rwa_ladder_split<T: Real>(n: u32, delta_minus: T) -> (T, T) {
    (-delta_minus, delta_minus * T::lit((2 * n + 1) as f64))
}

/// O(γ²) coefficient of a level shift extracted from dense diagonalization.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceShift {
    /// Richardson-extrapolated E⁽²⁾/γ².
    pub coefficient: f64,
    /// (γ, (E(γ) − E⁽⁰⁾)/γ²) at each coupling used.
    pub samples: Vec<(f64, f64)>,
}

/// Couplings of the extrapolation ladder.
pub const RICHARDSON_GAMMAS: [f64; 3] = [1e-3, 5e-4, 2.5e-4];

/// Ω a†a + ω b†b + γΩ(a − a†)(b² − b†²) on a field × oscillator product truncation.
pub fn two_mode_hamiltonian(omega: f64, omega_k: f64, gamma: f64, field_levels: usize, osc_levels: usize) -> DMatrix<f64> {
    let lower = |n: usize| DMatrix::from_fn(n, n, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 });
    let a = lower(field_levels);
    let b = lower(osc_levels);
    let na = a.transpose() * &a;
    let nb = b.transpose() * &b;
    let ia = DMatrix::identity(field_levels, field_levels);
    let ib = DMatrix::identity(osc_levels, osc_levels);
    let b2 = &b * &b;
    let coupling = (&a - a.transpose()).kronecker(&(&b2 - b2.transpose()));
    na.kronecker(&ib) * omega_k + ia.kronecker(&nb) * omega + coupling * (gamma * omega_k)
}

/// Extracts E⁽²⁾/γ² for |n_a, n_b⟩ by diagonalizing at three couplings and extrapolating in γ².
///
/// `omega_k` should avoid rational resonances with ω inside the truncation.
pub fn brute_force_shift(
    n_a: usize,
    n_b: usize,
    omega: f64,
    omega_k: f64,
    field_levels: usize,
    osc_levels: usize,
) -> Result<BruteForceShift> {
    if n_a + 1 >= field_levels || n_b + 2 >= osc_levels {
        return Err(Error::param("levels", "truncation must hold the intermediate states n_a + 1 and n_b + 2"));
    }
    let e0 = n_a as f64 * omega_k + n_b as f64 * omega;
    let target = n_a * osc_levels + n_b;
    let h0 = two_mode_hamiltonian(omega, omega_k, 0.0, field_levels, osc_levels);
    let degenerate = (0..h0.nrows()).filter(|&i| (h0[(i, i)] - e0).abs() < 1e-12).count();
    if degenerate != 1 {
        return Err(Error::param("omega_k", "target level is degenerate in the truncated space"));
    }
    let mut samples = Vec::with_capacity(3);
    for g in RICHARDSON_GAMMAS {
        let h = two_mode_hamiltonian(omega, omega_k, g, field_levels, osc_levels);
        let eig = h.symmetric_eigen();
        let (col, weight) = (0..eig.eigenvalues.len())
            .map(|j| (j, eig.eigenvectors[(target, j)].powi(2)))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty spectrum");
        if weight < 0.5 {
            return Err(Error::NonConvergence("perturbed level mixes strongly with a neighbour".into()));
        }
        samples.push((g, (eig.eigenvalues[col] - e0) / (g * g)));
    }
    let c: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let r1a = (4.0 * c[1] - c[0]) / 3.0;
    let r1b = (4.0 * c[2] - c[1]) / 3.0;
    let coefficient = (16.0 * r1b - r1a) / 15.0;
    Ok(BruteForceShift { coefficient, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_shift() {
        let v = single_mode_shift(0, 0, 1.0f64, 3.0, 0.1).unwrap();
        assert!((v - (-2.0 * 0.01 * 9.0 / 5.0)).abs() < 1e-15);
        assert_eq!(single_mode_shift(2, 3, 1.0, 3.0, 0.0).unwrap(), 0.0);
        assert!(single_mode_shift(0, 1, 1.0, 2.0, 0.1).is_err());
    }

    #[test]
    fn four_term_equals_consolidated() {
        for na in 0..4 {
            for nb in 0..6 {
                for w in [0.3, 1.7, 5.2] {
                    let a = single_mode_shift(na, nb, 1.0f64, w, 0.2).unwrap();
                    let b = single_mode_shift_four_term(na, nb, 1.0, w, 0.2);
                    assert!((a - b).abs() < 1e-13 * (1.0 + a.abs()), "{na} {nb} {w}");
                }
            }
        }
    }

    #[test]
    fn multimode_values() {
        assert_eq!(multimode_shift(0, 0.3, -0.2), 0.0);
        assert!((multimode_shift(1, 0.3f64, -0.2) + 4.0 * 0.3).abs() < 1e-15);
        for n in 0..8 {
            let d = multimode_shift_total(n, 0.3f64, -0.2) - multimode_shift(n, 0.3, -0.2);
            assert!((d + 2.0 * 0.3).abs() < 1e-14);
        }
    }

    #[test]
    fn rwa_split_sums_to_ladder() {
        let (a, b) = rwa_ladder_split(3, 0.01f64);
        assert!((1.0 + a + b - (1.0 + 2.0 * 3.0 * 0.01)).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        let h = two_mode_hamiltonian(1.0, 3.7, 0.01, 5, 7);
        assert!((&h - h.transpose()).amax() == 0.0);
    }

    #[test]
    fn brute_force_vacuum() {
        let bf = brute_force_shift(0, 0, 1.0, 3.7, 6, 8).unwrap();
        let pt = single_mode_shift(0, 0, 1.0, 3.7, 1.0).unwrap();
        assert!(((bf.coefficient - pt) / pt).abs() < 1e-6, "{} vs {pt}", bf.coefficient);
    }

    #[test]
    fn brute_force_matches_perturbation_theory() {
        for (na, nb) in [(0, 0), (1, 0), (0, 2), (2, 3), (1, 4)] {
            for w in [0.73, 3.7] {
                let bf = brute_force_shift(na, nb, 1.0, w, 8, 12).unwrap();
                let pt = single_mode_shift(na as u32, nb as u32, 1.0, w, 1.0).unwrap();
                assert!(((bf.coefficient - pt) / pt).abs() < 1e-4, "{na} {nb} {w}: {} vs {pt}", bf.coefficient);
            }
        }
    }

    #[test]
    fn brute_force_rejects_small_truncation() {
        assert!(brute_force_shift(0, 3, 1.0, 3.7, 4, 5).is_err());
    }

    #[test]
    fn multimode_equals_xi_full_levels() {
        use crate::coeffs::VacuumCoefficients;
        use crate::generators::liouvillian_xi_full;
        use crate::params::DimensionlessParams;
        let c = VacuumCoefficients::compute(&DimensionlessParams::new(10.0, 1e-3).unwrap()).unwrap();
        for renorm in [false, true] {
            let (dp, dm) = c.xi_pair(renorm);
            let l = liouvillian_xi_full(&c, 12, renorm).unwrap();
            for (n, e) in l.effective_hamiltonian().iter().enumerate() {
                let want = n as f64 + multimode_shift(n as u32, dp, dm);
                assert!((e - want).abs() < 1e-12, "n={n}: {e} vs {want}");
            }
        }
    }

    #[test]
    fn mode_sum_reproduces_multimode_shift() {
        use crate::coeffs::{LogReference, VacuumCoefficients};
        use crate::params::DimensionlessParams;
        use crate::quad::principal_value;
        use std::f64::consts::PI;
        let gbar = 1e-3;
        let k = gbar / (16.0 * PI);
        for lambda in [3.9, 10.0, 100.0] {
            let d = DimensionlessParams::new(lambda, gbar).unwrap();
            let c = VacuumCoefficients::compute_with(&d, LogReference::TwoOmega).unwrap();
            for nb in 0..5u32 {
                let u0 = 0.37;
                let direct = (2.0 - u0) * u0 * single_mode_shift(0, nb, 1.0, u0, 1.0).unwrap();
                let g = |u: f64| {
                    let n = nb as f64;
                    let a = n * n + 3.0 * n + 2.0;
                    let b = n - n * n;
                    u * u * u * (-a * (2.0 - u) / (2.0 + u) - b)
                };
                assert!((g(u0) - direct).abs() < 1e-14);
                let sum = k * principal_value(g, 2.0, 0.0, lambda, 64);
                let want = multimode_shift_total(nb, c.big_delta_plus, c.big_delta_minus);
                assert!((sum - want).abs() < 1e-10 * want.abs().max(gbar), "λ={lambda} n={nb}: {sum} vs {want}");
            }
        }
    }
}
