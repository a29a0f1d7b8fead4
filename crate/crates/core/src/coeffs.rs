//! Vacuum coefficients Γ, δ±, Δ± in closed form, and the mode-sum quadrature oracle.

use crate::error::{Error, Result};
use crate::params::{check_lambda, DimensionlessParams, PhysicalParams};
use crate::quad;
use crate::scalar::Real;

/// Scale inside the shift logarithms, ln|(Ω_max ± 2ω)/scale|.
///
/// `Omega` is the default. The principal-value mode integral produces `TwoOmega`;
/// the two differ by the constant (Γ/2π) ln 2 in every shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogReference {
    #[default]
    Omega,
    TwoOmega,
}

impl LogReference {
    fn scale<T: Real>(self) -> T {
        match self {
            LogReference::Omega => T::one(),
            LogReference::TwoOmega => T::lit(2.0),
        }
    }
}

/// Shift coefficients of one observable, raw and renormalized (units ω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shifts<T> {
    pub plus: T,
    pub minus: T,
    pub plus_r: T,
    pub minus_r: T,
}

/// Every coefficient of the harmonic master equations, in ω units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacuumCoefficients<T> {
    pub gamma: T,
    pub delta_plus: T,
    pub delta_minus: T,
    pub delta_plus_r: T,
    pub delta_minus_r: T,
    pub big_delta_plus: T,
    pub big_delta_minus: T,
    pub big_delta_plus_r: T,
    pub big_delta_minus_r: T,
}

impl<T: Real> VacuumCoefficients<T> {
    pub fn compute(d: &DimensionlessParams<T>) -> Result<Self> {
        Self::compute_with(d, LogReference::Omega)
    }

    pub fn compute_with(d: &DimensionlessParams<T>, reference: LogReference) -> Result<Self> {
        let x = shifts_x(d, reference)?;
        let xi = shifts_xi(d, reference)?;
        Ok(VacuumCoefficients {
            gamma: gamma_rate(d),
            delta_plus: x.plus,
            delta_minus: x.minus,
            delta_plus_r: x.plus_r,
            delta_minus_r: x.minus_r,
            big_delta_plus: xi.plus,
            big_delta_minus: xi.minus,
            big_delta_plus_r: xi.plus_r,
            big_delta_minus_r: xi.minus_r,
        })
    }

    /// Coefficients with every entry set directly; used for hand-built test generators.
    pub fn from_parts(gamma: T, x: Shifts<T>, xi: Shifts<T>) -> Self {
        VacuumCoefficients {
            gamma,
            delta_plus: x.plus,
            delta_minus: x.minus,
            delta_plus_r: x.plus_r,
            delta_minus_r: x.minus_r,
            big_delta_plus: xi.plus,
            big_delta_minus: xi.minus,
            big_delta_plus_r: xi.plus_r,
            big_delta_minus_r: xi.minus_r,
        }
    }

    pub fn zero() -> Self {
        let z = Shifts { plus: T::zero(), minus: T::zero(), plus_r: T::zero(), minus_r: T::zero() };
        Self::from_parts(T::zero(), z, z)
    }

    /// (δ+, δ−) or their renormalized values.
    pub fn x_pair(&self, renormalized: bool) -> (T, T) {
        if renormalized {
            (self.delta_plus_r, self.delta_minus_r)
        } else {
            (self.delta_plus, self.delta_minus)
        }
    }

    /// (Δ+, Δ−) or their renormalized values.
    pub fn xi_pair(&self, renormalized: bool) -> (T, T) {
        if renormalized {
            (self.big_delta_plus_r, self.big_delta_minus_r)
        } else {
            (self.big_delta_plus, self.big_delta_minus)
        }
    }
}

/// Γ in ω units; the coupling scale is already folded into `gamma_bar`.
pub fn gamma_rate<T: Real>(d: &DimensionlessParams<T>) -> T {
    d.gamma_bar
}

fn logs<T: Real>(d: &DimensionlessParams<T>, reference: LogReference) -> Result<(T, T)> {
    check_lambda(d.lambda_cut.as_f64())?;
    let two = T::lit(2.0);
    let s = reference.scale::<T>();
    let lp = ((d.lambda_cut + two) / s).ln();
    let lm = ((d.lambda_cut - two).abs() / s).ln();
    Ok((lp, lm))
}

/// δ± and δ±^(R) for the coordinate separation.
pub fn shifts_x<T: Real>(d: &DimensionlessParams<T>, reference: LogReference) -> Result<Shifts<T>> {
    let (lp, lm) = logs(d, reference)?;
    let k = d.gamma_bar / T::two_pi();
    let half = d.lambda_cut / T::lit(2.0);
    Ok(Shifts {
        plus: k * (-lp + half),
        minus: k * (-lm - half),
        plus_r: -k * lp,
        minus_r: -k * lm,
    })
}

/// Δ± and Δ±^(R) for the geodesic separation.
pub fn shifts_xi<T: Real>(d: &DimensionlessParams<T>, reference: LogReference) -> Result<Shifts<T>> {
    let (lp, lm) = logs(d, reference)?;
    let k = d.gamma_bar / T::two_pi();
    let l = d.lambda_cut;
    let lin = l / T::lit(2.0);
    let quad = l * l / T::lit(8.0);
    let cub = l * l * l / T::lit(24.0);
    Ok(Shifts {
        plus: k * (-lp + lin - quad + cub),
        minus: k * (-lm - lin - quad - cub),
        plus_r: k * (-lp + lin + cub),
        minus_r: k * (-lm - lin - cub),
    })
}

/// Free-particle constants in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParticleConstants {
    /// Δ_x (s² J⁻¹).
    pub delta_x: f64,
    /// Δ_ξ (dimensionless).
    pub delta_xi: f64,
    /// γ_ξ = Δ_ξ/(2ħ²μ).
    pub gamma_xi: f64,
    /// μ_ξ = μ/(1 − Δ_ξ) (kg).
    pub mu_xi: f64,
}

pub fn free_particle_constants(p: &PhysicalParams) -> Result<FreeParticleConstants> {
    if !(p.mu > 0.0) {
        return Err(Error::param("mu", "must be positive"));
    }
    if !(p.omega_max >= 0.0) {
        return Err(Error::param("omega_max", "must be non-negative"));
    }
    let tp2 = p.g * p.hbar / p.c.powi(5);
    let pi = std::f64::consts::PI;
    let delta_x = 32.0 / (15.0 * pi) * tp2 * p.omega_max / p.hbar;
    let delta_xi = 8.0 / (15.0 * pi) * tp2 * p.omega_max * p.omega_max;
    if delta_xi >= 1.0 {
        return Err(Error::param("omega_max", format!("Δ_ξ = {delta_xi} ≥ 1 puts μ_ξ at or past its pole")));
    }
    Ok(FreeParticleConstants {
        delta_x,
        delta_xi,
        gamma_xi: delta_xi / (2.0 * p.hbar * p.hbar * p.mu),
        mu_xi: p.mu / (1.0 - delta_xi),
    })
}

/// Coordinate separation x̂ or geodesic separation ξ̂.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    X,
    Xi,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::X => "x",
            Observable::Xi => "xi",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "x" => Some(Observable::X),
            "xi" => Some(Observable::Xi),
            _ => None,
        }
    }
}

/// Which coefficient the mode-sum oracle evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftKind {
    XPlus,
    XMinus,
    XiPlus,
    XiMinus,
}

impl ShiftKind {
    pub const ALL: [ShiftKind; 4] = [ShiftKind::XPlus, ShiftKind::XMinus, ShiftKind::XiPlus, ShiftKind::XiMinus];
}

/// ∫₀^π sin⁵θ dθ.
pub const THETA_INTEGRAL: f64 = 16.0 / 15.0;
/// ∫₀^{2π} cos²(2φ) dφ.
pub const PHI_INTEGRAL: f64 = std::f64::consts::PI;

/// Mode-sum prefactor in ω units, with G ħ/c⁵ expressed through Γ = (32/15) G ħ ω³/c⁵.
fn mode_prefactor<T: Real>(kind: ShiftKind, gamma_bar: T) -> T {
    let pi = T::pi();
    let g_hbar_over_c5 = T::lit(15.0 / 32.0) * gamma_bar;
    let angular = T::lit(THETA_INTEGRAL) * T::lit(PHI_INTEGRAL);
    let density = T::one() / (T::lit(8.0) * pi * pi * pi);
    let coupling = match kind {
        // |g_x|²/ħ² = 4π G ħ ω²/(V c² Ω) · angular
        ShiftKind::XPlus | ShiftKind::XMinus => T::lit(4.0) * pi,
        // |g_ξ|²/ħ² = π G ħ Ω/(V c²) · angular
        ShiftKind::XiPlus | ShiftKind::XiMinus => pi,
    };
    coupling * density * g_hbar_over_c5 * angular
}

fn radial_integral<T: Real>(kind: ShiftKind, lambda: T, panels: usize) -> T {
    let two = T::lit(2.0);
    let power = match kind {
        ShiftKind::XPlus | ShiftKind::XMinus => 1,
        ShiftKind::XiPlus | ShiftKind::XiMinus => 3,
    };
    let h = move |u: T| u.powi(power);
    match kind {
        ShiftKind::XPlus | ShiftKind::XiPlus => {
            // u + 2 = eᵗ
            quad::integrate(|t: T| h(t.exp() - two), two.ln(), (lambda + two).ln(), panels)
        }
        ShiftKind::XMinus | ShiftKind::XiMinus => quad::principal_value(h, two, T::zero(), lambda, panels),
    }
}

/// Principal-value mode-sum evaluation of a shift coefficient (units ω).
///
/// `n_points` Gauss–Legendre nodes per integration segment. The result is accepted when
/// doubling `n_points` changes it by at most `tol` relative.
pub fn quadrature_oracle<T: Real>(kind: ShiftKind, d: &DimensionlessParams<T>, n_points: usize, tol: T) -> Result<T> {
    if n_points < 64 {
        return Err(Error::param("n_points", format!("must be at least 64, got {n_points}")));
    }
    check_lambda(d.lambda_cut.as_f64())?;
    let pref = mode_prefactor(kind, d.gamma_bar);
    if pref == T::zero() {
        return Ok(T::zero());
    }
    let panels = n_points.div_ceil(quad::GL_ORDER);
    let coarse = pref * radial_integral(kind, d.lambda_cut, panels);
    let fine = pref * radial_integral(kind, d.lambda_cut, 2 * panels);
    let scale = fine.abs().max(T::min_value().unwrap_or(T::zero()));
    if (fine - coarse).abs() > tol * scale {
        return Err(Error::NonConvergence(format!(
            "{kind:?} changed by {:e} relative on doubling n_points = {n_points}",
            ((fine - coarse).abs() / scale).as_f64()
        )));
    }
    Ok(fine)
}

/// One CSV row of the coefficient table.
pub fn coefficient_row<T: Real>(d: &DimensionlessParams<T>, c: &VacuumCoefficients<T>) -> [T; 8] {
    [
        d.lambda_cut,
        c.gamma,
        c.delta_plus,
        c.delta_minus,
        c.delta_minus_r,
        c.big_delta_plus,
        c.big_delta_minus,
        c.big_delta_minus_r,
    ]
}

pub const COEFFICIENT_COLUMNS: [&str; 8] = [
    "lambda_cut",
    "gamma",
    "delta_plus",
    "delta_minus",
    "delta_minus_r",
    "big_delta_plus",
    "big_delta_minus",
    "big_delta_minus_r",
];
