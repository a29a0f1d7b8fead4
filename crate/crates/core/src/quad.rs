//! Composite Gauss–Legendre quadrature and principal-value integrals.

use crate::scalar::Real;

/// Nodes per Gauss–Legendre panel.
pub const GL_ORDER: usize = 16;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// ∫ₐᵇ f with `panels` equal panels of 16-point Gauss–Legendre.
pub fn integrate<T: Real>(f: impl Fn(T) -> T, a: T, b: T, panels: usize) -> T {
    let (x, w) = gauss_legendre(GL_ORDER);
    let panels = panels.max(1);
    let h = (b - a) / T::lit(panels as f64);
    let half = h / T::lit(2.0);
    let mut total = T::zero();
    for p in 0..panels {
        let mid = a + h * T::lit(p as f64) + half;
        let mut s = T::zero();
        for (xi, wi) in x.iter().zip(&w) {
            s += T::lit(*wi) * f(mid + half * T::lit(*xi));
        }
        total += s * half;
    }
    total
}

/// Principal value of ∫ₐᵇ g(u)/(pole − u) du for smooth `g` and a < pole < b.
///
/// The window symmetric about the pole is folded onto [0, r]; the remainders
/// use the substitution |u − pole| = eᵗ, which removes the 1/|u − pole| decay.
pub fn principal_value<T: Real>(g: impl Fn(T) -> T, pole: T, a: T, b: T, panels: usize) -> T {
    assert!(a < pole && pole < b, "pole must lie strictly inside the interval");
    let left = pole - a;
    let right = b - pole;
    let r = left.min(right);
    let folded = integrate(|s: T| (g(pole - s) - g(pole + s)) / s, T::zero(), r, panels);
    let mut total = folded;
    if right > r {
        total += integrate(|t: T| -g(pole + t.exp()), r.ln(), right.ln(), panels);
    }
    if left > r {
        total += integrate(|t: T| g(pole - t.exp()), r.ln(), left.ln(), panels);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_degree_31() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((s - 2.0 / 31.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn pv_of_reciprocal() {
        // PV ∫₀³ du/(1 − u) = −ln 2
        let v: f64 = principal_value(|_| 1.0, 1.0, 0.0, 3.0, 8);
        assert!((v + 2f64.ln()).abs() < 1e-14, "{v}");
        let v: f64 = principal_value(|_| 1.0, 2.0, 0.0, 3.0, 8);
        assert!((v - 2f64.ln()).abs() < 1e-14, "{v}");
    }

    #[test]
    fn pv_with_polynomial_numerator() {
        // PV ∫₀⁵ u²/(1 − u) du = −(u²/2 + u) − ln|1 − u| from 0 to 5
        let v: f64 = principal_value(|u: f64| u * u, 1.0, 0.0, 5.0, 8);
        let exact = -(12.5 + 5.0) - 4f64.ln();
        assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
    }
}
