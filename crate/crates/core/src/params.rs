//! Physical constants, experiment parameters and the ω-scaled units the dynamics run in.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Newtonian constant of gravitation, CODATA 2018 (m³ kg⁻¹ s⁻²).
pub const G_CODATA: f64 = 6.674_30e-11;
/// Reduced Planck constant, CODATA 2018 (J s).
pub const HBAR_CODATA: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum (m s⁻¹), exact.
pub const C_CODATA: f64 = 299_792_458.0;

/// Cutoff ratios closer than this to 2 are rejected.
pub const RESONANCE_GUARD: f64 = 1e-9;

/// Experiment parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Reduced mass (kg).
    pub mu: f64,
    /// Trap angular frequency (rad/s).
    pub omega: f64,
    /// UV cutoff angular frequency (rad/s).
    pub omega_max: f64,
    pub g: f64,
    pub hbar: f64,
    pub c: f64,
}

impl PhysicalParams {
    /// Parameters with CODATA constants.
    pub fn new(mu: f64, omega: f64, omega_max: f64) -> Result<Self> {
        Self::with_constants(mu, omega, omega_max, G_CODATA, HBAR_CODATA, C_CODATA)
    }

    pub fn with_constants(mu: f64, omega: f64, omega_max: f64, g: f64, hbar: f64, c: f64) -> Result<Self> {
        let p = PhysicalParams { mu, omega, omega_max, g, hbar, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::param("mu", format!("must be positive, got {}", self.mu)));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(Error::param("omega", format!("must be non-negative, got {}", self.omega)));
        }
        if !(self.omega_max > 0.0 && self.omega_max.is_finite()) {
            return Err(Error::param("omega_max", format!("must be positive, got {}", self.omega_max)));
        }
        for (name, v) in [("G", self.g), ("hbar", self.hbar), ("c", self.c)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Planck time sqrt(G ħ / c⁵) (s).
    pub fn planck_time(&self) -> f64 {
        (self.g * self.hbar / self.c.powi(5)).sqrt()
    }

    /// Vacuum decay rate Γ = (32/15) G ħ ω³ / c⁵ (s⁻¹).
    pub fn gamma_si(&self) -> f64 {
        32.0 / 15.0 * self.g * self.hbar * self.omega.powi(3) / self.c.powi(5)
    }

    /// Rejects parameters unusable for the trapped sector.
    pub fn validate_harmonic(&self) -> Result<()> {
        self.validate()?;
        if self.omega == 0.0 {
            return Err(Error::param("omega", "zero trap frequency belongs to the free-particle sector"));
        }
        check_lambda(self.omega_max / self.omega)
    }
}

/// ω-scaled parameters: time in 1/ω, rates in ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessParams<T> {
    /// Ω_max / ω.
    pub lambda_cut: T,
    /// Γ / ω including `coupling_scale`.
    pub gamma_bar: T,
    /// Artificial amplification applied to gamma_bar, logged with every run.
    pub coupling_scale: T,
}

impl<T: Real> DimensionlessParams<T> {
    pub fn new(lambda_cut: T, gamma_bar: T) -> Result<Self> {
        Self::with_scale(lambda_cut, gamma_bar, T::one())
    }

    pub fn with_scale(lambda_cut: T, gamma_bar: T, coupling_scale: T) -> Result<Self> {
        check_lambda(lambda_cut.as_f64())?;
        if !(gamma_bar >= T::zero()) || !gamma_bar.is_finite() {
            return Err(Error::param("gamma_bar", format!("must be non-negative, got {gamma_bar}")));
        }
        if !(coupling_scale >= T::zero()) {
            return Err(Error::param("coupling_scale", format!("must be non-negative, got {coupling_scale}")));
        }
        Ok(DimensionlessParams { lambda_cut, gamma_bar, coupling_scale })
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() {
        return Err(Error::param("lambda_cut", "must be finite"));
    }
    if (lambda - 2.0).abs() < RESONANCE_GUARD {
        return Err(Error::param("lambda_cut", "too close to the resonance at 2"));
    }
    if lambda <= 2.0 {
        return Err(Error::param("lambda_cut", format!("must exceed 2, got {lambda}")));
    }
    Ok(())
}

/// Converts SI parameters to ω units, applying `coupling_scale` to Γ/ω.
pub fn to_dimensionless(p: &PhysicalParams, coupling_scale: f64) -> Result<DimensionlessParams<f64>> {
    p.validate_harmonic()?;
    if !(coupling_scale >= 0.0 && coupling_scale.is_finite()) {
        return Err(Error::param("coupling_scale", format!("must be non-negative, got {coupling_scale}")));
    }
    let lambda_cut = p.omega_max / p.omega;
    let gamma_bar = coupling_scale * p.gamma_si() / p.omega;
    DimensionlessParams::with_scale(lambda_cut, gamma_bar, coupling_scale)
}
