//! Free-particle moments in units ħ = μ = 1.
//!
//! Moments are stored as ordered products ⟨p̂ᵃq̂ᵇ⟩ with every momentum factor to the left.

use crate::coeffs::Observable;
use crate::error::{Error, Result};
use crate::scalar::{cx, re, Cx, Real};

/// Ordered moments ⟨p̂ᵃq̂ᵇ⟩ for b ≤ max_b and a ≤ a_max + 3(max_b − b).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable<T: Real> {
    pub variant: Observable,
    max_b: usize,
    a_max: usize,
    /// rows[b][a]
    rows: Vec<Vec<Option<Cx<T>>>>,
}

impl<T: Real> MomentTable<T> {
    /// Empty table; every entry must be set before evolution.
    pub fn new(variant: Observable, a_max: usize, max_b: usize) -> Self {
        let rows = (0..=max_b).map(|b| vec![None; a_max + 3 * (max_b - b) + 1]).collect();
        MomentTable { variant, max_b, a_max, rows }
    }

    pub fn max_b(&self) -> usize {
        self.max_b
    }

    pub fn a_max(&self) -> usize {
        self.a_max
    }

    /// Highest momentum power tracked alongside q̂ᵇ.
    pub fn a_limit(&self, b: usize) -> usize {
        self.rows[b].len() - 1
    }

    pub fn set(&mut self, a: usize, b: usize, v: Cx<T>) -> Result<()> {
        let slot = self
            .rows
            .get_mut(b)
            .and_then(|r| r.get_mut(a))
            .ok_or_else(|| Error::param("moments", format!("⟨p^{a} q^{b}⟩ is outside the table")))?;
        *slot = Some(v);
        Ok(())
    }

    pub fn get(&self, a: usize, b: usize) -> Result<Cx<T>> {
        self.rows
            .get(b)
            .and_then(|r| r.get(a))
            .copied()
            .flatten()
            .ok_or_else(|| Error::param("moments", format!("missing seed moment ⟨p^{a} q^{b}⟩")))
    }

    /// ⟨p̂ⁿ⟩.
    pub fn momentum(&self, n: usize) -> Result<Cx<T>> {
        self.get(n, 0)
    }

    /// ⟨q̂p̂ + p̂q̂⟩ = 2⟨p̂q̂⟩ + i.
    pub fn sym_qp(&self) -> Result<Cx<T>> {
        Ok(self.get(1, 1)? * re(T::lit(2.0)) + cx(T::zero(), T::one()))
    }

    /// ⟨p̂³q̂ + q̂p̂³⟩ = 2⟨p̂³q̂⟩ + 3i⟨p̂²⟩.
    pub fn sym_p3q(&self) -> Result<Cx<T>> {
        Ok(self.get(3, 1)? * re(T::lit(2.0)) + self.get(2, 0)? * cx(T::zero(), T::lit(3.0)))
    }

    fn is_complete(&self) -> Result<()> {
        for (b, row) in self.rows.iter().enumerate() {
            for (a, v) in row.iter().enumerate() {
                if v.is_none() {
                    return Err(Error::param("moments", format!("missing seed moment ⟨p^{a} q^{b}⟩")));
                }
            }
        }
        Ok(())
    }

    fn flatten(&self) -> Vec<Cx<T>> {
        self.rows.iter().flat_map(|r| r.iter().map(|v| v.unwrap_or_default())).collect()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut o = Vec::with_capacity(self.rows.len());
        let mut acc = 0;
        for r in &self.rows {
            o.push(acc);
            acc += r.len();
        }
        o
    }

    fn unflatten(&self, v: &[Cx<T>]) -> Self {
        let mut out = self.clone();
        let off = self.offsets();
        for (b, row) in out.rows.iter_mut().enumerate() {
            for (a, slot) in row.iter_mut().enumerate() {
                *slot = Some(v[off[b] + a]);
            }
        }
        out
    }

    /// One CSV row with the given (a, b) entries as real,imag pairs.
    pub fn csv_row(&self, t: T, pairs: &[(usize, usize)]) -> Result<String> {
        let mut s = format!("{t:.16e}");
        for &(a, b) in pairs {
            let v = self.get(a, b)?;
            s.push_str(&format!(",{:.16e},{:.16e}", v.re, v.im));
        }
        Ok(s)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Gaussian state parameters: means, variances and the symmetrized covariance ½⟨{q̂,p̂}⟩ − ⟨q̂⟩⟨p̂⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSeed<T> {
    pub mean_q: T,
    pub mean_p: T,
    pub var_q: T,
    pub var_p: T,
    pub cov: T,
}

impl<T: Real> GaussianSeed<T> {
    /// Rejects states violating Vq·Vp − C² ≥ 1/4.
    pub fn validate(&self) -> Result<()> {
        let det = self.var_q * self.var_p - self.cov * self.cov;
        if !(det >= T::lit(0.25) * (T::one() - T::lit(1e-12))) {
            return Err(Error::param("seed", format!("covariance determinant {det} violates the uncertainty bound 1/4")));
        }
        Ok(())
    }
}

/// Fills a table with the ordered moments of a Gaussian state (Wick expansion with
/// the ordered contraction ⟨p̂q̂⟩ − ⟨p̂⟩⟨q̂⟩ = C − i/2).
pub fn gaussian_seed<T: Real>(variant: Observable, seed: &GaussianSeed<T>, a_max: usize, max_b: usize) -> Result<MomentTable<T>> {
    seed.validate()?;
    let mut table = MomentTable::new(variant, a_max, max_b);
    let amax = a_max + 3 * max_b;
    let c = cx(seed.cov, -T::lit(0.5));
    let vp = re(seed.var_p);
    let vq = re(seed.var_q);
    // central[a][b] = E[(p − ⟨p⟩)ᵃ (q − ⟨q⟩)ᵇ]
    let mut central = vec![vec![Cx::<T>::default(); max_b + 1]; amax + 1];
    for a in 0..=amax {
        for b in 0..=max_b {
            central[a][b] = match (a, b) {
                (0, 0) => re(T::one()),
                (0, _) => {
                    if b >= 2 {
                        vq * re(T::lit((b - 1) as f64)) * central[0][b - 2]
                    } else {
                        Cx::default()
                    }
                }
                _ => {
                    let mut s = Cx::default();
                    if a >= 2 {
                        s += vp * re(T::lit((a - 1) as f64)) * central[a - 2][b];
                    }
                    if b >= 1 {
                        s += c * re(T::lit(b as f64)) * central[a - 1][b - 1];
                    }
                    s
                }
            };
        }
    }
    for b in 0..=max_b {
        for a in 0..=table.a_limit(b) {
            let mut s = Cx::default();
            for i in 0..=a {
                for j in 0..=b {
                    let w = T::lit(binomial(a, i) * binomial(b, j));
                    let m = seed.mean_p.powi((a - i) as i32) * seed.mean_q.powi((b - j) as i32);
                    s += central[i][j] * re(w * m);
                }
            }
            table.set(a, b, s)?;
        }
    }
    Ok(table)
}

/// Mean, second moment and ⟨p̂ⁿ⟩ (n = 1..=6) of the position observable at time t.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm<T> {
    pub mean: T,
    pub second: T,
    pub momenta: Vec<T>,
}

fn momenta<T: Real>(m: &MomentTable<T>) -> Result<Vec<T>> {
    (1..=6).map(|n| m.momentum(n).map(|v| v.re)).collect()
}

/// ⟨x̂⟩(t) = ⟨x̂⟩ + (⟨p̂⟩ + Δ⟨p̂³⟩)t and
/// ⟨x̂²⟩(t) = ⟨x̂²⟩ + (⟨{x̂,p̂}⟩ + Δ⟨p̂³x̂ + x̂p̂³⟩)t + (⟨p̂²⟩ + 2Δ⟨p̂⁴⟩ + Δ²⟨p̂⁶⟩)t², seeds at t = 0.
pub fn closed_form_x<T: Real>(initial: &MomentTable<T>, delta_x: T, t: T) -> Result<ClosedForm<T>> {
    let p = |n| initial.momentum(n).map(|v| v.re);
    let mean = initial.get(0, 1)?.re + (p(1)? + delta_x * p(3)?) * t;
    let two = T::lit(2.0);
    let lin = initial.sym_qp()?.re + delta_x * initial.sym_p3q()?.re;
    let quad = p(2)? + two * delta_x * p(4)? + delta_x * delta_x * p(6)?;
    let second = initial.get(0, 2)?.re + lin * t + quad * t * t;
    Ok(ClosedForm { mean, second, momenta: momenta(initial)? })
}

/// ⟨ξ̂⟩(t) = ⟨ξ̂⟩ + ⟨p̂⟩t/μ_ξ and ⟨ξ̂²⟩(t) = ⟨ξ̂²⟩ + (1 + Δ)⟨{ξ̂,p̂}⟩t/μ_ξ + (1 − Δ)⟨p̂²⟩t²/μ_ξ².
pub fn closed_form_xi<T: Real>(initial: &MomentTable<T>, delta_xi: T, mu_xi: T, t: T) -> Result<ClosedForm<T>> {
    let one = T::one();
    let p1 = initial.momentum(1)?.re;
    let p2 = initial.momentum(2)?.re;
    let mean = initial.get(0, 1)?.re + p1 * t / mu_xi;
    let second = initial.get(0, 2)?.re
        + (one + delta_xi) * initial.sym_qp()?.re * t / mu_xi
        + (one - delta_xi) * p2 * t * t / (mu_xi * mu_xi);
    Ok(ClosedForm { mean, second, momenta: momenta(initial)? })
}

/// μ_ξ/μ = 1/(1 − Δ_ξ).
pub fn mu_xi_ratio<T: Real>(delta_xi: T) -> Result<T> {
    if !(delta_xi < T::one()) {
        return Err(Error::param("delta_xi", format!("must be below 1, got {delta_xi}")));
    }
    Ok(T::one() / (T::one() - delta_xi))
}

/// Δ_x in units ħ = μ = 1 for momentum unit p_scale: Δ_x·p_scale²/μ.
pub fn dimensionless_delta_x(delta_x: f64, mu: f64, p_scale: f64) -> f64 {
    delta_x * p_scale * p_scale / mu
}

/// Right-hand side of d⟨p̂ᵃq̂ᵇ⟩/dt as a list of ((a′, b′), coefficient).
///
/// x̂, δ = Δ_x/4:
/// b⟨pᵃ⁺¹xᵇ⁻¹⟩ + (i/2)b(b−1)⟨pᵃxᵇ⁻²⟩ + 4δb⟨pᵃ⁺³xᵇ⁻¹⟩ + 6iδb(b−1)⟨pᵃ⁺²xᵇ⁻²⟩
/// − 4δb(b−1)(b−2)⟨pᵃ⁺¹xᵇ⁻³⟩ − iδb(b−1)(b−2)(b−3)⟨pᵃxᵇ⁻⁴⟩.
///
/// ξ̂, D = Δ_ξ/4:
/// (b + 2Db(b−a))⟨pᵃ⁺¹ξᵇ⁻¹⟩ + (i/2)(b(b−1) + 2Db(b−1)(b−a))⟨pᵃξᵇ⁻²⟩.
pub fn recurrence_terms<T: Real>(variant: Observable, a: usize, b: usize, delta: T) -> Vec<((usize, usize), Cx<T>)> {
    let mut out = Vec::new();
    let bf = T::lit(b as f64);
    let af = T::lit(a as f64);
    let one = T::one();
    let two = T::lit(2.0);
    let d = delta / T::lit(4.0);
    let b1 = bf * (bf - one);
    let b2 = b1 * (bf - two);
    let b3 = b2 * (bf - T::lit(3.0));
    match variant {
        Observable::X => {
            if b >= 1 {
                out.push(((a + 1, b - 1), re(bf)));
                out.push(((a + 3, b - 1), re(T::lit(4.0) * d * bf)));
            }
            if b >= 2 {
                out.push(((a, b - 2), cx(T::zero(), b1 / two)));
                out.push(((a + 2, b - 2), cx(T::zero(), T::lit(6.0) * d * b1)));
            }
            if b >= 3 {
                out.push(((a + 1, b - 3), re(-T::lit(4.0) * d * b2)));
            }
            if b >= 4 {
                out.push(((a, b - 4), cx(T::zero(), -d * b3)));
            }
        }
        Observable::Xi => {
            if b >= 1 {
                out.push(((a + 1, b - 1), re(bf + two * d * bf * (bf - af))));
            }
            if b >= 2 {
                out.push(((a, b - 2), cx(T::zero(), b1 / two + d * b1 * (bf - af))));
            }
        }
    }
    out
}

/// Integrates the closed moment hierarchy with fixed-step RK4 up to time t.
pub fn moment_ode_oracle<T: Real>(initial: &MomentTable<T>, delta: T, t: T, dt: T) -> Result<MomentTable<T>> {
    initial.is_complete()?;
    if !(dt > T::zero()) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    let off = initial.offsets();
    let mut terms: Vec<Vec<(usize, Cx<T>)>> = Vec::new();
    for b in 0..=initial.max_b {
        for a in 0..=initial.a_limit(b) {
            let row = recurrence_terms(initial.variant, a, b, delta)
                .into_iter()
                .map(|((a2, b2), c)| {
                    assert!(a2 <= initial.a_limit(b2), "moment hierarchy is not closed at ⟨p^{a2} q^{b2}⟩");
                    (off[b2] + a2, c)
                })
                .collect();
            terms.push(row);
        }
    }
    let rhs = |y: &[Cx<T>]| -> Vec<Cx<T>> { terms.iter().map(|r| r.iter().fold(Cx::default(), |s, (j, c)| s + *c * y[*j])).collect() };
    let axpy = |y: &[Cx<T>], k: &[Cx<T>], h: T| -> Vec<Cx<T>> { y.iter().zip(k).map(|(a, b)| *a + *b * re(h)).collect() };
    let steps = (t / dt).ceil().to_usize().unwrap_or(0).max(1);
    let h = t / T::lit(steps as f64);
    let half = h / T::lit(2.0);
    let mut y = initial.flatten();
    for _ in 0..steps {
        let k1 = rhs(&y);
        let k2 = rhs(&axpy(&y, &k1, half));
        let k3 = rhs(&axpy(&y, &k2, half));
        let k4 = rhs(&axpy(&y, &k3, h));
        let sixth = h / T::lit(6.0);
        for i in 0..y.len() {
            y[i] += (k1[i] + k2[i] * re(T::lit(2.0)) + k3[i] * re(T::lit(2.0)) + k4[i]) * re(sixth);
        }
    }
    Ok(initial.unflatten(&y))
}
