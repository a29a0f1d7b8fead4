//! Trace preservation and short-time positivity of thermal-seeded evolution.

use crate::coeffs::VacuumCoefficients;
use crate::error::{Error, Result};
use crate::fock::{min_eigenvalue, CMatrix, POSITIVITY_TOL};
use crate::generators::{liouvillian_xi_full, Liouvillian};
use crate::scalar::{cx, re, Cx, Real};

/// Upper end of the empirical n_max sweep.
pub const SWEEP_CEILING: usize = 128;

/// Largest |tr L[P]| over the Hermitian probe basis {E_ii, (E_ij + E_ji)/√2, i(E_ij − E_ji)/√2}.
pub fn check_trace_annihilation<T: Real>(l: &Liouvillian<T>) -> T {
    let n = l.dim();
    let r = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let mut worst = T::zero();
    let mut probe = |p: CMatrix<T>| {
        let t = l.apply(&p).trace();
        worst = worst.max((t.re * t.re + t.im * t.im).sqrt());
    };
    for i in 0..n {
        for j in i..n {
            if i == j {
                let mut p = CMatrix::zeros(n, n);
                p[(i, i)] = re(T::one());
                probe(p);
            } else {
                let mut p = CMatrix::zeros(n, n);
                p[(i, j)] = re(r);
                p[(j, i)] = re(r);
                probe(p);
                let mut q = CMatrix::zeros(n, n);
                q[(i, j)] = cx(T::zero(), r);
                q[(j, i)] = cx(T::zero(), -r);
                probe(q);
            }
        }
    }
    worst
}

/// Γt, Δ+t and Δ−t at the probe time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortTimeRates<T: Real> {
    pub gamma_t: T,
    pub delta_plus_t: T,
    pub delta_minus_t: T,
}

impl<T: Real> ShortTimeRates<T> {
    /// Only the dissipator: Δ±t = 0.
    pub fn dissipative(gamma_t: T) -> Self {
        ShortTimeRates { gamma_t, delta_plus_t: T::zero(), delta_minus_t: T::zero() }
    }

    /// Rates at the time t = gamma_t/Γ, with the ξ shifts of `c`.
    pub fn from_coeffs(gamma_t: T, c: &VacuumCoefficients<T>, renormalized: bool) -> Result<Self> {
        if !(c.gamma > T::zero()) {
            return Err(Error::param("gamma", "Γ must be positive to set the time from Γt"));
        }
        let t = gamma_t / c.gamma;
        let (dp, dm) = c.xi_pair(renormalized);
        Ok(ShortTimeRates { gamma_t, delta_plus_t: dp * t, delta_minus_t: dm * t })
    }
}

/// Untruncated Gibbs weights (1 − q)q^m, q = e^{−β̄}, for m = 0..len.
pub fn gibbs_weights<T: Real>(beta_bar: T, len: usize) -> Vec<T> {
    let q = (-beta_bar).exp();
    let mut w = Vec::with_capacity(len);
    let mut x = T::one() - q;
    for _ in 0..len {
        w.push(x);
        x *= q;
    }
    w
}

fn x_entry<T: Real>(s: &[T], m: usize, gamma_t: T) -> T {
    let mf = T::lit(m as f64);
    let one = T::one();
    let two = T::lit(2.0);
    s[m] + gamma_t * ((mf + one) * (mf + two) * s[m + 2] - mf * (mf - one) * s[m])
}

fn y_entry<T: Real>(s: &[T], m: usize, r: &ShortTimeRates<T>) -> Cx<T> {
    let mf = T::lit(m as f64);
    let one = T::one();
    let root = ((mf + one) * (mf + T::lit(2.0)) * (mf + T::lit(3.0)) * (mf + T::lit(4.0))).sqrt();
    let a = cx(T::zero(), r.delta_plus_t) * re(s[m] - s[m + 2]);
    let b = cx(r.gamma_t / T::lit(2.0), r.delta_minus_t) * re(s[m + 4] - s[m + 2]);
    (a + b) * re(root)
}

/// (n+1)×(n+1) matrix σ + tL[σ] for a thermal seed: diagonal x_m, fourth off-diagonal y_m.
pub fn build_sn<T: Real>(beta_bar: T, rates: &ShortTimeRates<T>, n: usize) -> CMatrix<T> {
    let s = gibbs_weights(beta_bar, n + 5);
    let mut m = CMatrix::zeros(n + 1, n + 1);
    for k in 0..=n {
        m[(k, k)] = re(x_entry(&s, k, rates.gamma_t));
    }
    for k in 0..n.saturating_sub(3) {
        let y = y_entry(&s, k, rates);
        m[(k, k + 4)] = y;
        m[(k + 4, k)] = y.conj();
    }
    m
}

/// det S_n from the continuant recursion D_k = x_k D_{k−1} − |y_{k−1}|² D_{k−2}, one chain per residue mod 4.
pub fn sn_determinant<T: Real>(s: &CMatrix<T>) -> T {
    let n = s.nrows();
    let mut det = T::one();
    for r in 0..4.min(n) {
        let (mut prev, mut cur) = (T::one(), T::one());
        let mut k = r;
        let mut first = true;
        while k < n {
            let x = s[(k, k)].re;
            let next = if first {
                x
            } else {
                let y = s[(k - 4, k)];
                x * cur - (y.re * y.re + y.im * y.im) * prev
            };
            prev = cur;
            cur = next;
            first = false;
            k += 4;
        }
        det *= cur;
    }
    det
}

/// Both parses of the closed-form bound, as floors and raw values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NMaxBound {
    pub reading_a: usize,
    pub reading_b: usize,
    pub value_a: f64,
    pub value_b: f64,
}

/// reading a: (1 + 3e + √(1 + e²) + 14e)/(2(1 − e)); reading b: (1 + 3e + √(1 + e² + 14e))/(2(1 − e)), e = e^{−2β̄}.
pub fn n_max_bound(beta_bar: f64) -> Result<NMaxBound> {
    if !(beta_bar > 0.0) {
        return Err(Error::param("beta_bar", format!("must be positive, got {beta_bar}")));
    }
    let e = (-2.0 * beta_bar).exp();
    let den = 2.0 * (1.0 - e);
    let value_a = (1.0 + 3.0 * e + (1.0 + e * e).sqrt() + 14.0 * e) / den;
    let value_b = (1.0 + 3.0 * e + (1.0 + e * e + 14.0 * e).sqrt()) / den;
    Ok(NMaxBound { reading_a: value_a.floor() as usize, reading_b: value_b.floor() as usize, value_a, value_b })
}

/// Largest real m with m(m−1) − (m+1)(m+2)e ≤ 1/(Γt); `None` when Γt = 0.
pub fn diagonal_condition_bound(beta_bar: f64, gamma_t: f64) -> Option<f64> {
    if gamma_t <= 0.0 {
        return None;
    }
    let e = (-2.0 * beta_bar).exp();
    let a = 1.0 - e;
    let b = 1.0 + 3.0 * e;
    let c = 2.0 * e + 1.0 / gamma_t;
    Some((b + (b * b + 4.0 * a * c).sqrt()) / (2.0 * a))
}

/// Outcome of the empirical positivity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub beta_bar: f64,
    pub gamma_t: f64,
    pub dim_tested: usize,
    /// Largest n whose (n+1)-level block passed.
    pub n_max: usize,
    /// Normalized minimum eigenvalue at each swept n, starting from n = 0.
    pub min_eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    pub passed: bool,
    pub bound_reading_a: usize,
    pub bound_reading_b: usize,
}

impl PositivityReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,min_eigenvalue\n");
        for (n, v) in self.min_eigenvalues.iter().enumerate() {
            s.push_str(&format!("{n},{v:.16e}\n"));
        }
        s
    }
}

fn sweep<T: Real>(s: &CMatrix<T>, weights: &[T], ceiling: usize) -> (usize, Vec<f64>) {
    let mut mins = Vec::new();
    let mut n_max = 0;
    for n in 0..=ceiling {
        if weights[n] <= T::zero() {
            break;
        }
        let block = CMatrix::from_fn(n + 1, n + 1, |i, j| {
            s[(i, j)] * re(T::one() / (weights[i] * weights[j]).sqrt())
        });
        let v = min_eigenvalue(&block).as_f64();
        mins.push(v);
        if v < -POSITIVITY_TOL {
            break;
        }
        n_max = n;
    }
    (n_max, mins)
}

/// Largest n for which σ + tL[σ] restricted to levels 0..=n is positive semidefinite.
///
/// σ is the untruncated thermal seed and L the ξ generator with all counter-rotating groups,
/// at t = Γt/Γ. Positivity is judged on D^{−1/2}(σ + tL[σ])D^{−1/2}, D = diag(σ).
pub fn empirical_n_max<T: Real>(
    beta_bar: T,
    gamma_t: T,
    c: &VacuumCoefficients<T>,
    renormalized: bool,
) -> Result<PositivityReport> {
    empirical_n_max_with(beta_bar, gamma_t, c, renormalized, SWEEP_CEILING)
}

pub fn empirical_n_max_with<T: Real>(
    beta_bar: T,
    gamma_t: T,
    c: &VacuumCoefficients<T>,
    renormalized: bool,
    ceiling: usize,
) -> Result<PositivityReport> {
    if !(gamma_t >= T::zero()) {
        return Err(Error::param("gamma_t", format!("must be non-negative, got {gamma_t}")));
    }
    let bound = n_max_bound(beta_bar.as_f64())?;
    let dim = ceiling + 5;
    let w = gibbs_weights(beta_bar, dim);
    let sigma = CMatrix::from_fn(dim, dim, |i, j| if i == j { re(w[i]) } else { Cx::default() });
    let s = if gamma_t > T::zero() {
        let t = gamma_t / c.gamma;
        let l = liouvillian_xi_full(c, dim, renormalized)?;
        &sigma + l.apply(&sigma) * re(t)
    } else {
        sigma
    };
    let (n_max, mins) = sweep(&s, &w, ceiling);
    Ok(report(beta_bar.as_f64(), gamma_t.as_f64(), n_max, mins, bound))
}

/// The same sweep on the matrix S_n assembled from the x_m, y_m formulas.
pub fn sn_n_max<T: Real>(beta_bar: T, rates: &ShortTimeRates<T>, ceiling: usize) -> Result<PositivityReport> {
    let bound = n_max_bound(beta_bar.as_f64())?;
    let w = gibbs_weights(beta_bar, ceiling + 5);
    let s = build_sn(beta_bar, rates, ceiling);
    let (n_max, mins) = sweep(&s, &w, ceiling);
    Ok(report(beta_bar.as_f64(), rates.gamma_t.as_f64(), n_max, mins, bound))
}

fn report(beta_bar: f64, gamma_t: f64, n_max: usize, mins: Vec<f64>, bound: NMaxBound) -> PositivityReport {
    let last = mins.last().copied().unwrap_or(0.0);
    PositivityReport {
        beta_bar,
        gamma_t,
        dim_tested: mins.len(),
        n_max,
        min_eigenvalue: last,
        passed: last >= -POSITIVITY_TOL,
        min_eigenvalues: mins,
        bound_reading_a: bound.reading_a,
        bound_reading_b: bound.reading_b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::VacuumCoefficients;
    use crate::generators::{build, Variant, LiouvillianBuilder};
    use crate::params::DimensionlessParams;

    fn coeffs() -> VacuumCoefficients<f64> {
        VacuumCoefficients::compute(&DimensionlessParams::new(10.0, 1e-3).unwrap()).unwrap()
    }

    #[test]
    fn generators_annihilate_trace() {
        let c = coeffs();
        for v in Variant::ALL {
            for renorm in [false, true] {
                let l = build(v, &c, 12, renorm).unwrap();
                assert!(check_trace_annihilation(&l) < 1e-12, "{v:?}");
            }
        }
        assert_eq!(check_trace_annihilation(&Liouvillian::<f64>::zero(5).unwrap()), 0.0);
    }

    #[test]
    fn corrupted_dissipator_detected() {
        let (b, _) = crate::fock::ladder::<f64>(6).unwrap();
        let b2 = b.pow(2).into_matrix();
        let bdb = b2.adjoint() * &b2;
        let l = LiouvillianBuilder::new(6)
            .unwrap()
            .sandwich(re(1.0), &b2, &b2.adjoint())
            .left(re(-0.5 * 1.01), &bdb)
            .right(re(-0.5), &bdb)
            .build_custom();
        assert!(check_trace_annihilation(&l) > 1e-3);
    }

    #[test]
    fn sn_without_time_is_thermal() {
        let s = build_sn(0.7, &ShortTimeRates::dissipative(0.0), 8);
        let w = gibbs_weights(0.7, 9);
        for i in 0..9 {
            for j in 0..9 {
                let want = if i == j { w[i] } else { 0.0 };
                assert_eq!(s[(i, j)], re(want));
            }
        }
    }

    #[test]
    fn sn_sparsity_and_real_diagonal() {
        let r = ShortTimeRates::<f64> { gamma_t: 1e-2, delta_plus_t: 3e-3, delta_minus_t: -2e-3 };
        let s = build_sn(0.4, &r, 12);
        for i in 0..13 {
            assert_eq!(s[(i, i)].im, 0.0);
            for j in 0..13 {
                if i != j && i.abs_diff(j) != 4 {
                    assert_eq!(s[(i, j)], Cx::default());
                }
            }
        }
        assert!(s[(0, 4)].norm() > 0.0);
    }

    #[test]
    fn sn_matches_generator_block() {
        let c = coeffs();
        let beta = 0.5 * std::f64::consts::LN_2;
        let gt = 1e-3;
        let r = ShortTimeRates::from_coeffs(gt, &c, true).unwrap();
        let n = 10;
        let s = build_sn(beta, &r, n);
        let w = gibbs_weights(beta, n + 5);
        let sigma = CMatrix::from_fn(n + 5, n + 5, |i, j| if i == j { re(w[i]) } else { Cx::default() });
        let l = liouvillian_xi_full(&c, n + 5, true).unwrap();
        let full = &sigma + l.apply(&sigma) * re(gt / c.gamma);
        for i in 0..=n {
            for j in 0..=n {
                assert!((full[(i, j)] - s[(i, j)]).norm() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn s4_determinant_sign() {
        let r = ShortTimeRates::<f64> { gamma_t: 0.05, delta_plus_t: 0.02, delta_minus_t: 0.01 };
        let s = build_sn(0.3, &r, 4);
        let x: Vec<f64> = (0..5).map(|k| s[(k, k)].re).collect();
        let y0 = s[(0, 4)].norm_sqr();
        let want = x[1] * x[2] * x[3] * (x[0] * x[4] - y0);
        let dense = s.determinant();
        assert!((dense.re - want).abs() < 1e-12 * want.abs());
        assert!((sn_determinant(&s) - want).abs() < 1e-12 * want.abs());
    }

    #[test]
    fn determinant_recursion_matches_dense() {
        let r = ShortTimeRates::<f64> { gamma_t: 0.02, delta_plus_t: 0.013, delta_minus_t: -0.007 };
        for n in 0..=12 {
            let s = build_sn(0.25, &r, n);
            let dense = s.determinant().re;
            let rec = sn_determinant(&s);
            assert!((dense - rec).abs() <= 1e-10 * dense.abs(), "n={n}: {dense} vs {rec}");
        }
    }

    #[test]
    fn bound_readings() {
        let b = n_max_bound(0.5 * std::f64::consts::LN_2).unwrap();
        assert!((b.value_a - 10.6180339887).abs() < 1e-8);
        assert!((b.value_b - 5.3722813233).abs() < 1e-8);
        assert_eq!((b.reading_a, b.reading_b), (10, 5));
        let cold = n_max_bound(400.0).unwrap();
        assert_eq!((cold.reading_a, cold.reading_b), (1, 1));
        assert!(n_max_bound(0.0).is_err());
    }

    #[test]
    fn diagonal_bound_root() {
        let beta = 0.5 * std::f64::consts::LN_2;
        let m = diagonal_condition_bound(beta, 1e-3).unwrap();
        let e = 0.5;
        let f = |m: f64| m * (m - 1.0) - (m + 1.0) * (m + 2.0) * e - 1e3;
        assert!(f(m).abs() < 1e-9);
        assert!(f(m - 0.1) < 0.0 && f(m + 0.1) > 0.0);
        assert!(diagonal_condition_bound(beta, 0.0).is_none());
    }

    #[test]
    fn zero_time_reaches_ceiling() {
        let r = empirical_n_max_with(0.3, 0.0, &coeffs(), true, 20).unwrap();
        assert_eq!(r.n_max, 20);
        assert!(r.passed);
    }

    #[test]
    fn generator_sweep_equals_sn_sweep() {
        let c = coeffs();
        let beta = 0.5 * std::f64::consts::LN_2;
        let a = empirical_n_max_with(beta, 1e-3, &c, true, 40).unwrap();
        let r = ShortTimeRates::from_coeffs(1e-3, &c, true).unwrap();
        let b = sn_n_max(beta, &r, 40).unwrap();
        assert_eq!(a.n_max, b.n_max);
        assert!(!a.passed);
        assert!((a.n_max as f64) <= diagonal_condition_bound(beta, 1e-3).unwrap());
    }
}
