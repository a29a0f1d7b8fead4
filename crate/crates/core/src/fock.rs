//! Truncated Fock space: ladder operators, density matrices and expectations.

use nalgebra::{ComplexField, DMatrix};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::{re, Cx, Real};

/// Complex dense matrix over `T`.
pub type CMatrix<T> = DMatrix<Cx<T>>;

/// Tolerance floor: the nominal tolerance, relaxed to what `T` can resolve.
pub(crate) fn tol<T: Real>(nominal: f64) -> T {
    T::lit(nominal).max(T::eps() * T::lit(1e3))
}

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Operator on the N-level truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator<T: Real> {
    m: CMatrix<T>,
}

impl<T: Real> FockOperator<T> {
    pub fn from_matrix(m: CMatrix<T>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        check_dim(m.nrows())?;
        Ok(FockOperator { m })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(FockOperator { m: CMatrix::identity(dim, dim) })
    }

    /// n̂ = diag(0, 1, …, N−1).
    pub fn number(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(FockOperator { m: CMatrix::from_fn(dim, dim, |i, j| if i == j { re(T::lit(i as f64)) } else { Cx::default() }) })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        FockOperator { m: self.m.adjoint() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        FockOperator { m: &self.m * &other.m }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = CMatrix::identity(self.dim(), self.dim());
        for _ in 0..k {
            out = &out * &self.m;
        }
        FockOperator { m: out }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::param("dim", format!("Fock truncation needs at least 2 levels, got {dim}")));
    }
    Ok(())
}

/// Annihilation and creation operators: b̂ has √(n+1) on the first superdiagonal.
pub fn ladder<T: Real>(dim: usize) -> Result<(FockOperator<T>, FockOperator<T>)> {
    check_dim(dim)?;
    let lower = CMatrix::from_fn(dim, dim, |i, j| if j == i + 1 { re(T::lit(j as f64).sqrt()) } else { Cx::default() });
    let raise = lower.adjoint();
    Ok((FockOperator { m: lower }, FockOperator { m: raise }))
}

/// Hermitian, unit-trace, positive semidefinite state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    m: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        let rho = Self::new_unchecked(m)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Square-shape check only; the caller owns the physical invariants.
    pub fn new_unchecked(m: CMatrix<T>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        check_dim(m.nrows())?;
        Ok(DensityMatrix { m })
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_error();
        if h > tol(HERMITICITY_TOL) {
            return Err(Error::Invariant(format!("density matrix not Hermitian (error {h:e})")));
        }
        let t = (self.trace().re - T::one()).abs();
        if t > tol(TRACE_TOL) || self.trace().im.abs() > tol(TRACE_TOL) {
            return Err(Error::Invariant(format!("density matrix trace off by {t:e}")));
        }
        let e = self.min_eigenvalue();
        if e < -tol::<T>(POSITIVITY_TOL) {
            return Err(Error::Invariant(format!("density matrix has eigenvalue {e:e}")));
        }
        Ok(())
    }

    /// |n⟩⟨n|.
    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if n >= dim {
            return Err(Error::param("fock", format!("level {n} outside truncation {dim}")));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(n, n)] = Cx::new(T::one(), T::zero());
        Ok(DensityMatrix { m })
    }

    /// |ψ⟩⟨ψ| for the normalized amplitude vector `amps` (length = dim).
    pub fn pure(amps: &[Cx<T>]) -> Result<Self> {
        check_dim(amps.len())?;
        let norm = amps.iter().map(|a| a.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
        if norm == T::zero() {
            return Err(Error::param("superposition", "zero vector"));
        }
        let v: Vec<Cx<T>> = amps.iter().map(|a| a.unscale(norm)).collect();
        let n = v.len();
        Ok(DensityMatrix { m: CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()) })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.m
    }

    pub fn trace(&self) -> Cx<T> {
        self.m.trace()
    }

    pub fn populations(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> T {
        hermiticity_error(&self.m)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> T {
        min_eigenvalue(&self.m)
    }

    pub fn purity(&self) -> T {
        (&self.m * &self.m).trace().re
    }

    /// Combined population of the top two levels.
    pub fn top_population(&self) -> T {
        let n = self.dim();
        self.m[(n - 1, n - 1)].re + self.m[(n - 2, n - 2)].re
    }

    /// `dim=N` header, then one row per matrix row of interleaved (re, im).
    pub fn to_csv(&self) -> String {
        let mut s = format!("dim={}\n", self.dim());
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .flat_map(|j| {
                    let z = self.m[(i, j)];
                    [format!("{:.16e}", z.re), format!("{:.16e}", z.im)]
                })
                .collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }
}

pub(crate) fn hermiticity_error<T: Real>(m: &CMatrix<T>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).modulus());
        }
    }
    worst
}

pub(crate) fn min_eigenvalue<T: Real>(m: &CMatrix<T>) -> T {
    let h = (m + m.adjoint()).scale(T::lit(0.5));
    h.symmetric_eigenvalues().iter().copied().fold(T::max_value().unwrap(), |a, b| a.min(b))
}

/// Gibbs state with weights e^{−n β̄}, normalized over the truncated space. `f64::INFINITY` gives |0⟩⟨0|.
pub fn thermal_state<T: Real>(beta_bar: T, dim: usize) -> Result<DensityMatrix<T>> {
    check_dim(dim)?;
    if !(beta_bar > T::zero()) {
        return Err(Error::param("beta_bar", format!("must be positive, got {beta_bar}")));
    }
    if beta_bar.as_f64().is_infinite() {
        return DensityMatrix::fock(0, dim);
    }
    let w = thermal_weights(beta_bar, dim);
    let m = CMatrix::from_fn(dim, dim, |i, j| if i == j { re(w[i]) } else { Cx::default() });
    Ok(DensityMatrix { m })
}

/// Truncated, normalized Gibbs weights.
pub fn thermal_weights<T: Real>(beta_bar: T, dim: usize) -> Vec<T> {
    let q = (-beta_bar).exp();
    let mut w = Vec::with_capacity(dim);
    let mut x = T::one();
    for _ in 0..dim {
        w.push(x);
        x *= q;
    }
    let z = w.iter().fold(T::zero(), |a, &b| a + b);
    w.into_iter().map(|x| x / z).collect()
}

/// trace(op · ρ).
pub fn expectation<T: Real>(op: &FockOperator<T>, rho: &DensityMatrix<T>) -> Result<Cx<T>> {
    if op.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), got: rho.dim() });
    }
    let (a, b) = (op.matrix(), rho.matrix());
    let n = op.dim();
    let mut s = Cx::default();
    for i in 0..n {
        for k in 0..n {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    Ok(s)
}
