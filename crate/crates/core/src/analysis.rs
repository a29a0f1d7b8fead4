//! Observable signatures: the transition-frequency ladder, cutoff dependence of the shifts,
//! and the amplitude- vs phase-damping discriminator.

use std::collections::BTreeSet;

use nalgebra::{ComplexField, DMatrix, DVector};

pub use crate::coeffs::Observable;
use crate::coeffs::{shifts_x, shifts_xi, LogReference};
use crate::dynamics::{evolve, EvolveOptions};
use crate::error::{Error, Result};
use crate::fock::{CMatrix, DensityMatrix};
use crate::generators::{lindblad_amp, lindblad_pha, Liouvillian, DENSE_LIMIT};
use crate::params::DimensionlessParams;
use crate::scalar::{re, Cx, Real};

/// Minimum participation for an RWA eigenvalue to be assigned to a single matrix unit.
pub const RWA_PARTICIPATION: f64 = 0.9;
/// The same for generators with counter-rotating groups.
pub const FULL_PARTICIPATION: f64 = 0.7;

/// One eigenvalue that could not be assigned to a single matrix unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Ambiguity<T: Real> {
    pub eigenvalue: Cx<T>,
    /// (row, column) of the matrix unit with the largest participation.
    pub best_unit: (usize, usize),
    pub participation: T,
}

/// Transition frequencies ω_{n→n+1} (Im λ) and decay rates (−Re λ) of the |n⟩⟨n+1| rungs.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralLadder<T: Real> {
    pub levels: Vec<usize>,
    pub transition_freqs: Vec<T>,
    pub decay_rates: Vec<T>,
    pub participations: Vec<T>,
    pub threshold: T,
    pub ambiguous: Vec<Ambiguity<T>>,
}

impl<T: Real> SpectralLadder<T> {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,transition_freq,decay_rate,participation\n");
        for k in 0..self.levels.len() {
            s.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e}\n",
                self.levels[k], self.transition_freqs[k], self.decay_rates[k], self.participations[k]
            ));
        }
        s
    }
}

/// Eigenvalues and right eigenvectors of a general complex matrix, from its Schur form.
fn eigen_decomposition<T: Real>(m: CMatrix<T>) -> (Vec<Cx<T>>, CMatrix<T>) {
    let n = m.nrows();
    let scale = m.iter().fold(T::zero(), |a, z| a.max(z.modulus())).max(T::one());
    let floor = T::eps() * scale;
    let (q, t) = m.schur().unpack();
    let mut v = CMatrix::<T>::zeros(n, n);
    for k in 0..n {
        v[(k, k)] = re(T::one());
        let lk = t[(k, k)];
        for i in (0..k).rev() {
            let mut s = Cx::<T>::default();
            for j in (i + 1)..=k {
                s += t[(i, j)] * v[(j, k)];
            }
            let mut d = t[(i, i)] - lk;
            if d.modulus() < floor {
                d = re(floor);
            }
            v[(i, k)] = -s / d;
        }
        let norm = v.column(k).norm();
        v.column_mut(k).unscale_mut(norm);
    }
    let vals = (0..n).map(|k| t[(k, k)]).collect();
    (vals, q * v)
}

/// Extracts the |n⟩⟨n+1| rungs from the invariant coherence class m − n ≡ 1 (mod 4).
///
/// Each eigenvalue is assigned to the matrix unit carrying the largest participation
/// R_{iλ}(R⁻¹)_{λi}; those below the threshold are listed as ambiguous.
pub fn extract_ladder<T: Real>(l: &Liouvillian<T>) -> Result<SpectralLadder<T>> {
    let n = l.dim();
    if n > DENSE_LIMIT {
        return Err(Error::param("dim", format!("ladder extraction needs dim ≤ {DENSE_LIMIT}, got {n}")));
    }
    let threshold = T::lit(if l.variant().is_some_and(|v| v.is_full()) { FULL_PARTICIPATION } else { RWA_PARTICIPATION });
    let sup = l.superoperator()?;
    // column-major: vec index of (row i, col j) is j·n + i
    let units: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .filter(|&(i, j)| (j as i64 - i as i64).rem_euclid(4) == 1)
        .collect();
    let idx: Vec<usize> = units.iter().map(|&(i, j)| j * n + i).collect();
    let block = CMatrix::from_fn(idx.len(), idx.len(), |a, b| sup[(idx[a], idx[b])]);
    let (vals, r) = eigen_decomposition(block);
    let rinv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NonConvergence("eigenvector matrix is singular".into()))?;
    let mut best: Vec<Option<(T, Cx<T>)>> = vec![None; n.saturating_sub(1)];
    let mut ambiguous = Vec::new();
    for (e, &lambda) in vals.iter().enumerate() {
        let (unit, p) = (0..units.len())
            .map(|i| (i, (r[(i, e)] * rinv[(e, i)]).modulus()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite participation"))
            .expect("non-empty sector");
        if p < threshold {
            ambiguous.push(Ambiguity { eigenvalue: lambda, best_unit: units[unit], participation: p });
            continue;
        }
        let (i, j) = units[unit];
        if j == i + 1 && best[i].is_none_or(|(q, _)| p > q) {
            best[i] = Some((p, lambda));
        }
    }
    let mut ladder = SpectralLadder {
        levels: Vec::new(),
        transition_freqs: Vec::new(),
        decay_rates: Vec::new(),
        participations: Vec::new(),
        threshold,
        ambiguous,
    };
    for (k, b) in best.into_iter().enumerate() {
        if let Some((p, lambda)) = b {
            ladder.levels.push(k);
            ladder.transition_freqs.push(lambda.im);
            ladder.decay_rates.push(-lambda.re);
            ladder.participations.push(p);
        }
    }
    Ok(ladder)
}

/// E_{n+1} − E_n from the diagonal of the effective Hamiltonian.
pub fn hamiltonian_ladder<T: Real>(l: &Liouvillian<T>) -> Vec<T> {
    let e = l.effective_hamiltonian();
    e.windows(2).map(|p| p[1] - p[0]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// a·ln(λ − 2) + b
    Log,
    /// a·λ³ + b·λ² + c·λ + d
    Cubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    Ok,
    /// All shifts vanish (Γ = 0); nothing to fit.
    Degenerate,
}

/// Renormalized δ−^R (x) or Δ−^R (ξ) over a cutoff grid, with a model fit and a power-law exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffFit {
    pub variant: Observable,
    pub lambda_grid: Vec<f64>,
    pub shift_values: Vec<f64>,
    pub model: FitModel,
    /// Highest power first.
    pub fit_params: Vec<f64>,
    /// ‖model − data‖ / ‖data‖.
    pub residual: f64,
    /// Slope of ln|shift| against ln λ over the top decade of the grid.
    pub exponent: f64,
    pub status: FitStatus,
}

impl CutoffFit {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda,shift,model\n");
        for (l, v) in self.lambda_grid.iter().zip(&self.shift_values) {
            s.push_str(&format!("{l:.16e},{v:.16e},{:.16e}\n", self.evaluate(*l)));
        }
        s
    }

    pub fn evaluate(&self, lambda: f64) -> f64 {
        match self.model {
            FitModel::Log => self.fit_params[0] * (lambda - 2.0).ln() + self.fit_params[1],
            FitModel::Cubic => self.fit_params.iter().fold(0.0, |acc, c| acc * lambda + c),
        }
    }
}

fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let rows = y.len();
    let norms: Vec<f64> = columns.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE)).collect();
    let a = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i] / norms[j]);
    let b = DVector::from_column_slice(y);
    let x = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::NonConvergence(format!("least squares: {e}")))?;
    Ok(x.iter().zip(&norms).map(|(v, n)| v / n).collect())
}

/// Computes the renormalized minus shift on `lambda_grid` (units ω, Γ = ḡ) and fits it.
pub fn cutoff_sweep(variant: Observable, gamma_bar: f64, lambda_grid: &[f64]) -> Result<CutoffFit> {
    if lambda_grid.len() < 8 {
        return Err(Error::param("lambda_grid", format!("need at least 8 points, got {}", lambda_grid.len())));
    }
    let mut values = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        if !(lambda > 2.0) {
            return Err(Error::param("lambda_grid", format!("cutoff {lambda} is not above 2")));
        }
        let d = DimensionlessParams::new(lambda, gamma_bar)?;
        let s = match variant {
            Observable::X => shifts_x(&d, LogReference::Omega)?,
            Observable::Xi => shifts_xi(&d, LogReference::Omega)?,
        };
        values.push(s.minus_r);
    }
    let model = match variant {
        Observable::X => FitModel::Log,
        Observable::Xi => FitModel::Cubic,
    };
    let mut fit = CutoffFit {
        variant,
        lambda_grid: lambda_grid.to_vec(),
        shift_values: values,
        model,
        fit_params: vec![0.0; if model == FitModel::Log { 2 } else { 4 }],
        residual: 0.0,
        exponent: 0.0,
        status: FitStatus::Ok,
    };
    if fit.shift_values.iter().all(|v| *v == 0.0) {
        fit.status = FitStatus::Degenerate;
        return Ok(fit);
    }
    let cols: Vec<Vec<f64>> = match model {
        FitModel::Log => vec![lambda_grid.iter().map(|l| (l - 2.0).ln()).collect(), vec![1.0; lambda_grid.len()]],
        FitModel::Cubic => (0..4).rev().map(|p| lambda_grid.iter().map(|l| l.powi(p)).collect()).collect(),
    };
    fit.fit_params = least_squares(&cols, &fit.shift_values)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (l, v) in lambda_grid.iter().zip(&fit.shift_values) {
        num += (fit.evaluate(*l) - v).powi(2);
        den += v * v;
    }
    fit.residual = (num / den).sqrt();
    fit.exponent = power_law_exponent(lambda_grid, &fit.shift_values)?;
    Ok(fit)
}

/// Least-squares slope of ln|v| against ln λ over λ ≥ max(λ)/10.
pub fn power_law_exponent(lambda: &[f64], values: &[f64]) -> Result<f64> {
    let top = lambda.iter().copied().fold(f64::MIN, f64::max) / 10.0;
    let pts: Vec<(f64, f64)> = lambda
        .iter()
        .zip(values)
        .filter(|(l, v)| **l >= top && **v != 0.0)
        .map(|(l, v)| (l.ln(), v.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::param("lambda_grid", "top decade needs at least two points"));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// n log-spaced cutoffs between lo and hi.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1).max(1) as f64).exp()).collect()
}

/// Decay of ρ₂₂ and |ρ₀₂| under one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDecay {
    pub population_rate: f64,
    pub coherence_rate: f64,
    /// max over time and n of |ρ_nn(t) − ρ_nn(0)|.
    pub max_population_change: f64,
}

impl ChannelDecay {
    pub fn population_time(&self) -> f64 {
        1.0 / self.population_rate
    }

    pub fn coherence_time(&self) -> f64 {
        1.0 / self.coherence_rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelReport {
    pub amplitude: ChannelDecay,
    pub phase: ChannelDecay,
    /// Populations frozen under phase damping but not under amplitude damping.
    pub discriminated: bool,
}

fn log_slope(times: &[f64], values: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = times.iter().zip(values).filter(|(_, v)| **v > 0.0).map(|(t, v)| (*t, v.ln())).collect();
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    -sty / stt
}

fn channel_decay(l: &Liouvillian<f64>, rho0: &DensityMatrix<f64>, rate: f64, horizon: f64) -> Result<ChannelDecay> {
    let dt = (1e-3 / rate).min(horizon / 100.0);
    let traj = evolve(l, rho0, &EvolveOptions::rk4(horizon, dt, horizon / 50.0))?;
    let times: Vec<f64> = traj.times.clone();
    let p22: Vec<f64> = traj.element(2, 2).iter().map(|z| z.re).collect();
    let c02: Vec<f64> = traj.element(0, 2).iter().map(|z| z.norm()).collect();
    let p0 = rho0.populations();
    let mut change: f64 = 0.0;
    for s in &traj.states {
        for (a, b) in s.populations().iter().zip(&p0) {
            change = change.max((a - b).abs());
        }
    }
    Ok(ChannelDecay { population_rate: log_slope(&times, &p22), coherence_rate: log_slope(&times, &c02), max_population_change: change })
}

/// Evolves ρ₀ under rate·D[b̂²] and rate·D[n̂] and compares population and coherence decay.
pub fn channel_discriminator(rho0: &DensityMatrix<f64>, rate: f64, horizon: f64) -> Result<ChannelReport> {
    let n = rho0.dim();
    if n < 3 || rho0.matrix()[(0, 2)].norm() == 0.0 || rho0.populations()[2..].iter().all(|p| *p == 0.0) {
        return Err(Error::param("rho0", "needs a ρ₀₂ coherence and population above level 1"));
    }
    if !(rate > 0.0) || !(horizon > 0.0) {
        return Err(Error::param("rate", "rate and horizon must be positive"));
    }
    let amplitude = channel_decay(&lindblad_amp(rate, n)?, rho0, rate, horizon)?;
    let phase = channel_decay(&lindblad_pha(rate, n)?, rho0, rate, horizon)?;
    let frozen = 1e-12;
    Ok(ChannelReport {
        discriminated: phase.max_population_change < frozen && amplitude.max_population_change > frozen,
        amplitude,
        phase,
    })
}

/// The set of |n − m| whose coherences exceed `threshold` at any recorded time.
pub fn coherence_sectors<T: Real>(
    l: &Liouvillian<T>,
    rho0: &DensityMatrix<T>,
    opts: &EvolveOptions<T>,
    threshold: T,
) -> Result<BTreeSet<usize>> {
    let traj = evolve(l, rho0, opts)?;
    let mut seen = BTreeSet::new();
    for s in &traj.states {
        let m = s.matrix();
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                if m[(i, j)].modulus() > threshold {
                    seen.insert(j - i);
                }
            }
        }
    }
    Ok(seen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{Shifts, VacuumCoefficients};
    use crate::fock::thermal_state;
    use crate::generators::{build, liouvillian_x_rwa, liouvillian_xi_full, Variant};
    use crate::perturb::multimode_shift;

    fn coeffs(g: f64, dp: f64, dm: f64) -> VacuumCoefficients<f64> {
        let s = Shifts { plus: dp, minus: dm, plus_r: dp, minus_r: dm };
        VacuumCoefficients::from_parts(g, s, s)
    }

    #[test]
    fn free_ladder_is_flat() {
        let l = liouvillian_x_rwa(&coeffs(0.0, 0.0, 0.0), 8, false).unwrap();
        let lad = extract_ladder(&l).unwrap();
        assert_eq!(lad.levels, (0..7).collect::<Vec<_>>());
        for (f, d) in lad.transition_freqs.iter().zip(&lad.decay_rates) {
            assert!((f - 1.0).abs() < 1e-13);
            assert!(d.abs() < 1e-13);
        }
    }

    #[test]
    fn rwa_ladder_formula() {
        let l = liouvillian_x_rwa(&coeffs(0.003, 0.0, 0.01), 12, false).unwrap();
        let lad = extract_ladder(&l).unwrap();
        assert_eq!(lad.levels.len(), 11);
        assert!((lad.transition_freqs[1] - 1.02).abs() < 1e-10);
        for (k, &n) in lad.levels.iter().enumerate() {
            assert!((lad.transition_freqs[k] - (1.0 + 0.02 * n as f64)).abs() < 1e-8);
            assert!((lad.decay_rates[k] - 0.003 * (n * n) as f64).abs() < 1e-8);
        }
        let h = hamiltonian_ladder(&l);
        for (k, &n) in lad.levels.iter().enumerate() {
            assert!((h[n] - lad.transition_freqs[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn full_ladder_tracks_multimode_shift() {
        let (dp, dm) = (2e-5, -3e-5);
        let c = coeffs(1e-5, dp, dm);
        let l = liouvillian_xi_full(&c, 12, false).unwrap();
        let lad = extract_ladder(&l).unwrap();
        assert!(lad.levels.len() >= 8);
        for (k, &n) in lad.levels.iter().enumerate() {
            let want = 1.0 + multimode_shift(n as u32 + 1, dp, dm) - multimode_shift(n as u32, dp, dm);
            assert!((lad.transition_freqs[k] - want).abs() < 1e-6, "n={n}");
        }
    }

    #[test]
    fn ladder_rejects_large_dim() {
        let l = build(Variant::XRwa, &coeffs(0.0, 0.0, 0.0), 40, false).unwrap();
        assert!(extract_ladder(&l).is_err());
    }

    #[test]
    fn x_cutoff_is_logarithmic() {
        let grid = log_grid(10.0, 1e4, 40);
        let fit = cutoff_sweep(Observable::X, 1e-3, &grid).unwrap();
        assert_eq!(fit.status, FitStatus::Ok);
        assert!(fit.residual < 1e-10, "{}", fit.residual);
        assert!(fit.exponent < 0.2);
        assert!((fit.fit_params[0] + 1e-3 / (2.0 * std::f64::consts::PI)).abs() < 1e-12);
    }

    #[test]
    fn xi_cutoff_is_cubic() {
        let grid = log_grid(10.0, 1e4, 40);
        let fit = cutoff_sweep(Observable::Xi, 1e-3, &grid).unwrap();
        assert!((fit.exponent - 3.0).abs() < 0.01, "{}", fit.exponent);
        assert!(fit.residual < 1e-6);
    }

    #[test]
    fn cutoff_degenerate_and_bad_grid() {
        let grid = log_grid(10.0, 1e3, 10);
        assert_eq!(cutoff_sweep(Observable::X, 0.0, &grid).unwrap().status, FitStatus::Degenerate);
        assert!(cutoff_sweep(Observable::X, 1e-3, &grid[..5]).is_err());
        let mut bad = grid.clone();
        bad[0] = 2.0;
        assert!(cutoff_sweep(Observable::X, 1e-3, &bad).is_err());
    }

    #[test]
    fn xi_to_x_ratio_grows() {
        let ratio = |l: f64| {
            let d = DimensionlessParams::new(l, 1e-3).unwrap();
            let x = shifts_x(&d, LogReference::Omega).unwrap().minus_r;
            let xi = shifts_xi(&d, LogReference::Omega).unwrap().minus_r;
            (xi / x).abs()
        };
        assert!(ratio(10.0) > 1.0);
        assert!(ratio(100.0) > ratio(10.0));
    }

    #[test]
    fn discriminator_rates() {
        let s = 0.5f64.sqrt();
        let rho = DensityMatrix::pure(&[re(s), re(0.0), re(s), re(0.0), re(0.0)]).unwrap();
        let r = channel_discriminator(&rho, 0.1, 5.0).unwrap();
        assert!((r.amplitude.population_rate - 0.2).abs() < 1e-6);
        assert!((r.amplitude.coherence_rate - 0.1).abs() < 1e-6);
        assert!((r.phase.coherence_rate - 0.2).abs() < 1e-6);
        assert!(r.phase.max_population_change < 1e-12);
        assert!(r.discriminated);
        let fock = DensityMatrix::fock(2, 5).unwrap();
        assert!(channel_discriminator(&fock, 0.1, 5.0).is_err());
    }

    #[test]
    fn full_generators_fill_multiples_of_four() {
        let c = VacuumCoefficients::compute(&DimensionlessParams::new(10.0, 1e-3).unwrap()).unwrap();
        let rho = thermal_state(0.5, 14).unwrap();
        let opts = EvolveOptions::rk4(1.0, 1e-3, 0.1);
        let l = build(Variant::XiFull, &c, 14, true).unwrap();
        let seen = coherence_sectors(&l, &rho, &opts, 1e-12).unwrap();
        assert!(!seen.is_empty());
        assert!(seen.iter().all(|d| d % 4 == 0), "{seen:?}");
        assert!(seen.contains(&4));
        let rwa = build(Variant::XiRwa, &c, 14, true).unwrap();
        assert!(coherence_sectors(&rwa, &rho, &opts, 1e-12).unwrap().is_empty());
    }
}
