//! Time evolution, stationary subspaces and long-time populations.

use nalgebra::{ComplexField, DMatrix};

use crate::error::{Error, Result};
use crate::fock::{hermiticity_error, min_eigenvalue, tol, CMatrix, DensityMatrix, POSITIVITY_TOL, TRACE_TOL};
use crate::generators::{unvectorize, vectorize, Liouvillian};
use crate::scalar::{re, Cx, Real};

/// Default leakage threshold for the top two levels.
pub const LEAKAGE_THRESHOLD: f64 = 1e-8;
/// Relative rank tolerance of the stationary-subspace computation.
pub const KERNEL_TOL: f64 = 1e-10;
/// Population-change rate below which a run counts as stationary.
pub const STATIONARY_RATE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stepper<T> {
    /// Classical fourth-order Runge–Kutta with fixed step.
    Rk4 { dt: T },
    /// Dormand–Prince 5(4) with mixed absolute/relative tolerance.
    Adaptive { tol: T, dt0: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions<T> {
    pub t_final: T,
    pub stepper: Stepper<T>,
    /// Time between recorded states (rounded to whole steps for RK4).
    pub record_every: T,
    /// Allowed growth of the top-two-level population over its initial value.
    pub leakage_threshold: T,
}

impl<T: Real> EvolveOptions<T> {
    pub fn rk4(t_final: T, dt: T, record_every: T) -> Self {
        EvolveOptions { t_final, stepper: Stepper::Rk4 { dt }, record_every, leakage_threshold: T::lit(LEAKAGE_THRESHOLD) }
    }

    pub fn adaptive(t_final: T, tol: T, record_every: T) -> Self {
        let dt0 = record_every.min(t_final) / T::lit(100.0);
        EvolveOptions { t_final, stepper: Stepper::Adaptive { tol, dt0 }, record_every, leakage_threshold: T::lit(LEAKAGE_THRESHOLD) }
    }
}

/// Health of one recorded state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics<T> {
    pub trace_drift: T,
    pub hermiticity_drift: T,
    pub min_eigenvalue: T,
    /// Top-two-level population minus its initial value.
    pub leakage: T,
}

#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<DensityMatrix<T>>,
    pub diagnostics: Vec<Diagnostics<T>>,
    /// First recorded time at which an invariant failed, with the reason.
    pub invalid: Option<(T, String)>,
}

impl<T: Real> Trajectory<T> {
    pub fn is_valid(&self) -> bool {
        self.invalid.is_none()
    }

    pub fn final_state(&self) -> &DensityMatrix<T> {
        self.states.last().expect("trajectory has the initial state")
    }

    /// ρ_nm over time.
    pub fn element(&self, n: usize, m: usize) -> Vec<Cx<T>> {
        self.states.iter().map(|s| s.matrix()[(n, m)]).collect()
    }
}

/// 10⁻³ of the period of the fastest level spacing of the commutator part.
pub fn default_dt<T: Real>(l: &Liouvillian<T>) -> T {
    let e = l.effective_hamiltonian();
    let w = e.windows(2).map(|p| (p[1] - p[0]).abs()).fold(T::one(), |a, b| a.max(b));
    T::lit(1e-3) * T::two_pi() / w
}

fn rk4_step<T: Real>(l: &Liouvillian<T>, y: &CMatrix<T>, h: T) -> CMatrix<T> {
    let half = h / T::lit(2.0);
    let k1 = l.apply(y);
    let k2 = l.apply(&(y + &k1 * re(half)));
    let k3 = l.apply(&(y + &k2 * re(half)));
    let k4 = l.apply(&(y + &k3 * re(h)));
    y + (k1 + (k2 + k3) * re(T::lit(2.0)) + k4) * re(h / T::lit(6.0))
}

const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// One Dormand–Prince step: (fifth-order solution, scaled error estimate).
fn dp_step<T: Real>(l: &Liouvillian<T>, y: &CMatrix<T>, h: T, tol: T) -> (CMatrix<T>, T) {
    let mut k: Vec<CMatrix<T>> = Vec::with_capacity(7);
    k.push(l.apply(y));
    for row in DP_A.iter() {
        let mut yi = y.clone();
        for (j, a) in row.iter().enumerate().take(k.len()) {
            if *a != 0.0 {
                yi += &k[j] * re(h * T::lit(*a));
            }
        }
        k.push(l.apply(&yi));
    }
    let mut y5 = y.clone();
    let mut err = CMatrix::zeros(y.nrows(), y.ncols());
    for j in 0..7 {
        y5 += &k[j] * re(h * T::lit(DP_B5[j]));
        err += &k[j] * re(h * T::lit(DP_B5[j] - DP_B4[j]));
    }
    let scale = y.iter().zip(y5.iter()).map(|(a, b)| a.modulus().max(b.modulus())).fold(T::zero(), |a, b| a.max(b));
    let e = err.iter().map(|z| z.modulus()).fold(T::zero(), |a, b| a.max(b)) / (tol * (T::one() + scale));
    (y5, e)
}

fn diagnose<T: Real>(y: &CMatrix<T>, trace0: Cx<T>, top0: T) -> Diagnostics<T> {
    let n = y.nrows();
    Diagnostics {
        trace_drift: (y.trace() - trace0).modulus(),
        hermiticity_drift: hermiticity_error(y),
        min_eigenvalue: min_eigenvalue(y),
        leakage: y[(n - 1, n - 1)].re + y[(n - 2, n - 2)].re - top0,
    }
}

fn violation<T: Real>(d: &Diagnostics<T>, leakage_threshold: T) -> Option<String> {
    if d.trace_drift > tol::<T>(TRACE_TOL) {
        return Some(format!("trace drift {:e}", d.trace_drift));
    }
    let herm_tol = tol::<T>(1e-10);
    if d.hermiticity_drift > herm_tol {
        return Some(format!("Hermiticity drift {:e}", d.hermiticity_drift));
    }
    if d.min_eigenvalue < -tol::<T>(POSITIVITY_TOL) {
        return Some(format!("negative eigenvalue {:e}", d.min_eigenvalue));
    }
    if d.leakage > leakage_threshold {
        return Some(format!("top-level leakage {:e}", d.leakage));
    }
    None
}

struct Recorder<T: Real> {
    traj: Trajectory<T>,
    trace0: Cx<T>,
    top0: T,
    leakage_threshold: T,
}

impl<T: Real> Recorder<T> {
    /// Records `y` at `t`; returns false once the run turned invalid.
    fn push(&mut self, t: T, y: &CMatrix<T>) -> bool {
        let d = diagnose(y, self.trace0, self.top0);
        self.traj.times.push(t);
        self.traj.states.push(DensityMatrix::new_unchecked(y.clone()).expect("square"));
        self.traj.diagnostics.push(d);
        if let Some(reason) = violation(&d, self.leakage_threshold) {
            self.traj.invalid = Some((t, reason));
            return false;
        }
        true
    }
}

/// Integrates dσ/dt = L[σ] from `rho0` up to `t_final`.
///
/// Invariant failures truncate the run and are reported in [`Trajectory::invalid`].
pub fn evolve<T: Real>(l: &Liouvillian<T>, rho0: &DensityMatrix<T>, opts: &EvolveOptions<T>) -> Result<Trajectory<T>> {
    if rho0.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), got: rho0.dim() });
    }
    if !(opts.t_final > T::zero()) {
        return Err(Error::param("t_final", "must be positive"));
    }
    if !(opts.record_every > T::zero()) {
        return Err(Error::param("record_every", "must be positive"));
    }
    let y0 = rho0.matrix().clone();
    let mut rec = Recorder {
        traj: Trajectory { times: Vec::new(), states: Vec::new(), diagnostics: Vec::new(), invalid: None },
        trace0: y0.trace(),
        top0: rho0.top_population(),
        leakage_threshold: opts.leakage_threshold,
    };
    if !rec.push(T::zero(), &y0) {
        return Ok(rec.traj);
    }
    match opts.stepper {
        Stepper::Rk4 { dt } => {
            if !(dt > T::zero()) {
                return Err(Error::param("dt", "must be positive"));
            }
            let steps = (opts.t_final / dt).ceil().as_f64().max(1.0) as usize;
            let h = opts.t_final / T::lit(steps as f64);
            let stride = ((opts.record_every / h).round().as_f64() as usize).max(1);
            let mut y = y0;
            for s in 1..=steps {
                y = rk4_step(l, &y, h);
                if (s % stride == 0 || s == steps) && !rec.push(h * T::lit(s as f64), &y) {
                    break;
                }
            }
        }
        Stepper::Adaptive { tol, dt0 } => {
            if !(tol > T::zero()) || !(dt0 > T::zero()) {
                return Err(Error::param("tol", "tolerance and initial step must be positive"));
            }
            let mut y = y0;
            let mut t = T::zero();
            let mut h = dt0;
            let mut next_record = opts.record_every.min(opts.t_final);
            let min_step = T::eps() * T::lit(16.0) * opts.t_final;
            loop {
                let target = next_record;
                let step = h.min(target - t);
                let (y_new, err) = dp_step(l, &y, step, tol);
                if err <= T::one() {
                    t += step;
                    y = y_new;
                    if (t - target).abs() <= min_step {
                        t = target;
                        if !rec.push(t, &y) || t >= opts.t_final {
                            break;
                        }
                        next_record = (target + opts.record_every).min(opts.t_final);
                    }
                }
                let factor = if err == T::zero() {
                    T::lit(5.0)
                } else {
                    (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0)).max(T::lit(0.2))
                };
                h = step * factor;
                if h < min_step {
                    return Err(Error::StepUnderflow { t: t.as_f64() });
                }
            }
        }
    }
    Ok(rec.traj)
}

/// Stationary subspace of a generator.
#[derive(Debug, Clone)]
pub struct SteadyState<T: Real> {
    /// Hermitian basis in reduced row-echelon form, trace-normalized where the trace is nonzero.
    pub basis: Vec<CMatrix<T>>,
    /// Purely oscillating, undamped eigenvalues (Re ≈ 0, Im ≠ 0), excluded from `basis`.
    pub persistent_modes: Vec<Cx<T>>,
    pub singular_values: Vec<T>,
}

impl<T: Real> SteadyState<T> {
    /// Diagonal of each basis element.
    pub fn populations(&self) -> Vec<Vec<T>> {
        self.basis.iter().map(|m| (0..m.nrows()).map(|i| m[(i, i)].re).collect()).collect()
    }
}

/// Kernel of the vectorized generator, as a canonical Hermitian basis.
pub fn steady_state<T: Real>(l: &Liouvillian<T>) -> Result<SteadyState<T>> {
    steady_state_with_tol(l, T::lit(KERNEL_TOL))
}

pub fn steady_state_with_tol<T: Real>(l: &Liouvillian<T>, rel_tol: T) -> Result<SteadyState<T>> {
    let s = l.superoperator()?.clone();
    let n = l.dim();
    let svd = s.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let smax = svd.singular_values.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let cut = rel_tol * smax;
    let hundred = T::lit(100.0);
    let mut kernel = Vec::new();
    for (i, &sv) in svd.singular_values.iter().enumerate() {
        if sv > cut / hundred && sv < cut * hundred && smax > T::zero() {
            return Err(Error::IllConditioned { value: sv.as_f64(), tolerance: cut.as_f64() });
        }
        if sv <= cut {
            let row = v_t.row(i);
            let v: Vec<Cx<T>> = row.iter().map(|z| z.conj()).collect();
            kernel.push(CMatrix::from_column_slice(n, n, &v));
        }
    }
    let basis = hermitian_basis(&kernel, n);
    let eig = s.schur().eigenvalues().expect("complex Schur converges");
    let persistent_modes = eig.iter().copied().filter(|z| z.re.abs() <= cut && z.im.abs() > cut).collect();
    Ok(SteadyState { basis, persistent_modes, singular_values: svd.singular_values.iter().copied().collect() })
}

/// The t → ∞ limit of e^{tL}ρ₀: the spectral projection of ρ₀ onto the kernel of L.
///
/// Uses left and right kernel vectors of the vectorized generator, P = R(U†R)⁻¹U†.
pub fn stationary_limit<T: Real>(l: &Liouvillian<T>, rho0: &DensityMatrix<T>) -> Result<CMatrix<T>> {
    let n = l.dim();
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rho0.dim() });
    }
    let s = l.superoperator()?.clone();
    let svd = s.svd(true, true);
    let (u, v_t) = (svd.u.as_ref().expect("requested U"), svd.v_t.as_ref().expect("requested V^T"));
    let smax = svd.singular_values.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let cut = T::lit(KERNEL_TOL) * smax;
    let hundred = T::lit(100.0);
    let mut idx = Vec::new();
    for (i, &sv) in svd.singular_values.iter().enumerate() {
        if sv > cut / hundred && sv < cut * hundred && smax > T::zero() {
            return Err(Error::IllConditioned { value: sv.as_f64(), tolerance: cut.as_f64() });
        }
        if sv <= cut {
            idx.push(i);
        }
    }
    let k = idx.len();
    let nn = n * n;
    let r = CMatrix::from_fn(nn, k, |a, j| v_t[(idx[j], a)].conj());
    let left = CMatrix::from_fn(nn, k, |a, j| u[(a, idx[j])]);
    let overlap = left.adjoint() * &r;
    let inv = overlap
        .try_inverse()
        .ok_or_else(|| Error::NonConvergence("zero eigenvalue of the generator is defective".into()))?;
    let x = vectorize(rho0.matrix());
    let y = &r * (inv * (left.adjoint() * x));
    let m = unvectorize(&y, n);
    Ok((&m + m.adjoint()) * re(T::lit(0.5)))
}

/// Real-linear Hermitian basis of a †-closed complex subspace, in reduced row-echelon form.
fn hermitian_basis<T: Real>(kernel: &[CMatrix<T>], n: usize) -> Vec<CMatrix<T>> {
    let half = T::lit(0.5);
    let mut rows: Vec<Vec<T>> = Vec::new();
    for v in kernel {
        let a = (v + v.adjoint()) * re(half);
        let b = (v - v.adjoint()) * Cx::new(T::zero(), -half);
        for h in [a, b] {
            rows.push(h.iter().flat_map(|z| [z.re, z.im]).collect());
        }
    }
    let cols = 2 * n * n;
    let mut m = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    let rank = rref(&mut m, T::lit(1e-9));
    let mut out = Vec::with_capacity(rank);
    for r in 0..rank {
        let mut h = CMatrix::from_fn(n, n, |i, j| {
            let k = 2 * (i + j * n);
            Cx::new(m[(r, k)], m[(r, k + 1)])
        });
        // restore exact Hermiticity lost to rounding
        h = (&h + h.adjoint()) * re(half);
        let tr = h.trace().re;
        let norm = if tr.abs() > T::lit(1e-9) { tr } else { h.norm() };
        out.push(h.unscale(norm));
    }
    out
}

/// In-place reduced row-echelon form with partial pivoting; returns the rank.
fn rref<T: Real>(m: &mut DMatrix<T>, eps: T) -> usize {
    let (rows, cols) = m.shape();
    let scale = m.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (p, best) = (r..rows).map(|i| (i, m[(i, c)].abs())).fold((r, T::zero()), |a, b| if b.1 > a.1 { b } else { a });
        if best <= eps * scale {
            continue;
        }
        m.swap_rows(r, p);
        let piv = m[(r, c)];
        for j in 0..cols {
            m[(r, j)] /= piv;
        }
        for i in 0..rows {
            if i != r {
                let f = m[(i, c)];
                if f != T::zero() {
                    for j in 0..cols {
                        let v = m[(r, j)];
                        m[(i, j)] -= f * v;
                    }
                }
            }
        }
        r += 1;
    }
    for i in 0..rows {
        for j in 0..cols {
            if m[(i, j)].abs() <= eps * scale {
                m[(i, j)] = T::zero();
            }
        }
    }
    r
}

/// Integrates until every population changes slower than 1e−12 per unit time.
pub fn long_time_populations<T: Real>(l: &Liouvillian<T>, rho0: &DensityMatrix<T>, horizon: T, dt: Option<T>) -> Result<Vec<T>> {
    if rho0.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), got: rho0.dim() });
    }
    let dt = dt.unwrap_or_else(|| default_dt(l));
    let check_every = ((T::one() / dt).ceil().as_f64() as usize).max(1);
    let threshold = tol::<T>(STATIONARY_RATE);
    let mut y = rho0.matrix().clone();
    let mut t = T::zero();
    let mut step = 0usize;
    loop {
        if step % check_every == 0 {
            let d = l.apply(&y);
            let rate = (0..y.nrows()).map(|i| d[(i, i)].re.abs()).fold(T::zero(), |a, b| a.max(b));
            if rate < threshold {
                return Ok((0..y.nrows()).map(|i| y[(i, i)].re).collect());
            }
        }
        if t >= horizon {
            return Err(Error::NonConvergence(format!("populations still moving at t = {}", t.as_f64())));
        }
        y = rk4_step(l, &y, dt);
        t += dt;
        step += 1;
    }
}

/// Convenience: Σ even and Σ odd populations of a diagonal.
pub fn parity_sums<T: Real>(pops: &[T]) -> (T, T) {
    pops.iter().enumerate().fold((T::zero(), T::zero()), |(e, o), (i, &p)| if i % 2 == 0 { (e + p, o) } else { (e, o + p) })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{Shifts, VacuumCoefficients};
    use crate::fock::thermal_state;
    use crate::generators::{build, lindblad_amp, lindblad_pha, liouvillian_x_rwa, LiouvillianBuilder, Variant};

    fn coeffs(g: f64, dm: f64) -> VacuumCoefficients<f64> {
        let s = Shifts { plus: 0.0, minus: dm, plus_r: 0.0, minus_r: dm };
        VacuumCoefficients::from_parts(g, s, s)
    }

    #[test]
    fn zero_generator_freezes_state() {
        let l = Liouvillian::<f64>::zero(4).unwrap();
        let r = thermal_state(0.7, 4).unwrap();
        let tr = evolve(&l, &r, &EvolveOptions::rk4(1.0, 0.01, 0.5)).unwrap();
        assert!(tr.states.iter().all(|s| s == &r));
    }

    #[test]
    fn two_level_decay() {
        let l = liouvillian_x_rwa(&coeffs(0.1, 0.0), 6, true).unwrap();
        let r = DensityMatrix::fock(2, 6).unwrap();
        let tr = evolve(&l, &r, &EvolveOptions::rk4(5.0, 1e-2, 1.0)).unwrap();
        assert!(tr.is_valid(), "{:?}", tr.invalid);
        for (t, s) in tr.times.iter().zip(&tr.states) {
            let e = (-0.2 * t).exp();
            assert!((s.matrix()[(2, 2)].re - e).abs() < 1e-8);
            assert!((s.matrix()[(0, 0)].re - (1.0 - e)).abs() < 1e-8);
        }
    }

    #[test]
    fn adaptive_matches_rk4() {
        let l = liouvillian_x_rwa(&coeffs(0.1, 0.02), 6, true).unwrap();
        let amps: Vec<_> = (0..6).map(|k| Cx::new(1.0 / (k + 1) as f64, 0.1 * k as f64)).collect();
        let r = DensityMatrix::pure(&amps).unwrap();
        let a = evolve(&l, &r, &EvolveOptions::rk4(2.0, 1e-3, 1.0)).unwrap();
        let b = evolve(&l, &r, &EvolveOptions::adaptive(2.0, 1e-11, 1.0)).unwrap();
        assert_eq!(a.times.len(), b.times.len());
        let d = (a.final_state().matrix() - b.final_state().matrix()).norm();
        assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn unitary_keeps_purity() {
        let n = crate::fock::FockOperator::<f64>::number(5).unwrap().into_matrix();
        let l = LiouvillianBuilder::new(5).unwrap().commutator(&(&n + &n * &n * re(0.1))).build_custom();
        let amps: Vec<_> = (0..5).map(|k| Cx::new(1.0, k as f64)).collect();
        let r = DensityMatrix::pure(&amps).unwrap();
        let tr = evolve(&l, &r, &EvolveOptions::rk4(3.0, 1e-3, 1.0)).unwrap();
        assert!((tr.final_state().purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rwa_kernel_is_ground_and_first() {
        let l = liouvillian_x_rwa(&coeffs(0.2, -0.03), 8, true).unwrap();
        let ss = steady_state(&l).unwrap();
        assert_eq!(ss.basis.len(), 2);
        for (k, b) in ss.basis.iter().enumerate() {
            for i in 0..8 {
                for j in 0..8 {
                    let expect = if i == j && i == k { 1.0 } else { 0.0 };
                    assert!((b[(i, j)] - Cx::new(expect, 0.0)).norm() < 1e-12);
                }
            }
        }
        assert!(ss.persistent_modes.len() >= 2);
    }

    #[test]
    fn phase_kernel_contains_diagonals() {
        let ss = steady_state(&lindblad_pha(0.3, 6).unwrap()).unwrap();
        assert!(ss.basis.len() >= 6);
    }

    #[test]
    fn parity_cascade() {
        let l = lindblad_amp(0.5, 6).unwrap();
        let p = long_time_populations(&l, &DensityMatrix::fock(3, 6).unwrap(), 200.0, Some(0.01)).unwrap();
        assert!((p[1] - 1.0).abs() < 1e-10);
        let p = long_time_populations(&l, &DensityMatrix::fock(0, 6).unwrap(), 1.0, None).unwrap();
        assert_eq!(p[0], 1.0);
        let th = thermal_state(2f64.ln(), 6).unwrap();
        let (e, o) = parity_sums(&th.populations());
        let p = long_time_populations(&l, &th, 400.0, Some(0.01)).unwrap();
        assert!((p[0] - e).abs() < 1e-8 && (p[1] - o).abs() < 1e-8);
    }

    #[test]
    fn non_convergence_reported() {
        let l = build(Variant::AmpOnly, &coeffs(0.01, 0.0), 6, true).unwrap();
        let r = DensityMatrix::fock(5, 6).unwrap();
        assert!(matches!(long_time_populations(&l, &r, 1.0, Some(0.01)), Err(Error::NonConvergence(_))));
    }

    #[test]
    fn stationary_limit_matches_integration() {
        let l = lindblad_amp(0.5, 6).unwrap();
        let th = thermal_state(2f64.ln(), 6).unwrap();
        let m = stationary_limit(&l, &th).unwrap();
        let p = long_time_populations(&l, &th, 400.0, Some(0.01)).unwrap();
        for i in 0..6 {
            assert!((m[(i, i)].re - p[i]).abs() < 1e-8);
        }
        assert!((m.trace().re - 1.0).abs() < 1e-12);
        let rwa = build(Variant::XiRwa, &coeffs(0.2, 0.03), 8, true).unwrap();
        let m = stationary_limit(&rwa, &th_8()).unwrap();
        let (e, o) = parity_sums(&th_8().populations());
        assert!((m[(0, 0)].re - e).abs() < 1e-10 && (m[(1, 1)].re - o).abs() < 1e-10);
    }

    fn th_8() -> DensityMatrix<f64> {
        thermal_state(0.5, 8).unwrap()
    }
}
