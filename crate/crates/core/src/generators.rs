//! Master-equation generators as superoperators on the truncated Fock space.
//!
//! Every generator is stored as L[σ] = Lσ + σR + Σⱼ Aⱼ σ Bⱼ and can be materialized as an
//! N²×N² matrix under column-major vectorization, vec(AσB) = (Bᵀ ⊗ A) vec(σ).

use std::sync::OnceLock;

use crate::coeffs::VacuumCoefficients;
use crate::error::{Error, Result};
use crate::fock::{ladder, CMatrix, DensityMatrix, FockOperator};
use crate::scalar::{cx, im, re, Cx, Real};

/// Largest dimension for which the dense superoperator is materialized.
pub const DENSE_LIMIT: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    XFull,
    XRwa,
    XiFull,
    XiRwa,
    AmpOnly,
    PhaseOnly,
}

impl Variant {
    pub const ALL: [Variant; 6] =
        [Variant::XFull, Variant::XRwa, Variant::XiFull, Variant::XiRwa, Variant::AmpOnly, Variant::PhaseOnly];

    pub fn name(self) -> &'static str {
        match self {
            Variant::XFull => "x_full",
            Variant::XRwa => "x_rwa",
            Variant::XiFull => "xi_full",
            Variant::XiRwa => "xi_rwa",
            Variant::AmpOnly => "amp_only",
            Variant::PhaseOnly => "phase_only",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }

    pub fn is_full(self) -> bool {
        matches!(self, Variant::XFull | Variant::XiFull)
    }

    pub fn is_rwa(self) -> bool {
        matches!(self, Variant::XRwa | Variant::XiRwa)
    }

    pub fn min_dim(self) -> usize {
        match self {
            Variant::XFull | Variant::XiFull => 6,
            Variant::XRwa | Variant::XiRwa => 4,
            Variant::AmpOnly | Variant::PhaseOnly => 2,
        }
    }
}

/// A linear generator σ ↦ L[σ].
#[derive(Debug, Clone)]
pub struct Liouvillian<T: Real> {
    dim: usize,
    variant: Option<Variant>,
    coeffs: VacuumCoefficients<T>,
    renormalized: bool,
    left: CMatrix<T>,
    right: CMatrix<T>,
    sandwiches: Vec<(CMatrix<T>, CMatrix<T>)>,
    dense: OnceLock<CMatrix<T>>,
}

/// Assembles a generator term by term.
#[derive(Debug, Clone)]
pub struct LiouvillianBuilder<T: Real> {
    dim: usize,
    left: CMatrix<T>,
    right: CMatrix<T>,
    sandwiches: Vec<(CMatrix<T>, CMatrix<T>)>,
}

impl<T: Real> LiouvillianBuilder<T> {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::param("dim", format!("need at least 2 levels, got {dim}")));
        }
        Ok(LiouvillianBuilder {
            dim,
            left: CMatrix::zeros(dim, dim),
            right: CMatrix::zeros(dim, dim),
            sandwiches: Vec::new(),
        })
    }

    /// c·Aσ.
    pub fn left(mut self, c: Cx<T>, a: &CMatrix<T>) -> Self {
        self.left += a * c;
        self
    }

    /// c·σB.
    pub fn right(mut self, c: Cx<T>, b: &CMatrix<T>) -> Self {
        self.right += b * c;
        self
    }

    /// c·AσB; terms sharing the same right factor B are merged.
    pub fn sandwich(mut self, c: Cx<T>, a: &CMatrix<T>, b: &CMatrix<T>) -> Self {
        if let Some(slot) = self.sandwiches.iter_mut().find(|(_, bb)| bb == b) {
            slot.0 += a * c;
        } else {
            self.sandwiches.push((a * c, b.clone()));
        }
        self
    }

    /// −i[H, σ].
    pub fn commutator(self, h: &CMatrix<T>) -> Self {
        let one = T::one();
        self.left(im(-one), h).right(im(one), h)
    }

    /// rate·(JσJ† − ½J†Jσ − ½σJ†J).
    pub fn dissipator(self, rate: T, j: &CMatrix<T>) -> Self {
        let jd = j.adjoint();
        let jdj = &jd * j;
        let half = re(-rate / T::lit(2.0));
        self.sandwich(re(rate), j, &jd).left(half, &jdj).right(half, &jdj)
    }

    pub fn build(self, variant: Option<Variant>, coeffs: VacuumCoefficients<T>, renormalized: bool) -> Liouvillian<T> {
        Liouvillian {
            dim: self.dim,
            variant,
            coeffs,
            renormalized,
            left: self.left,
            right: self.right,
            sandwiches: self.sandwiches,
            dense: OnceLock::new(),
        }
    }

    /// Generator not tied to any named variant.
    pub fn build_custom(self) -> Liouvillian<T> {
        self.build(None, VacuumCoefficients::zero(), false)
    }
}

struct Ops<T: Real> {
    b2: CMatrix<T>,
    bd2: CMatrix<T>,
    b4: CMatrix<T>,
    bd4: CMatrix<T>,
    n: CMatrix<T>,
    n2: CMatrix<T>,
}

fn ops<T: Real>(dim: usize) -> Result<Ops<T>> {
    let (b, bd) = ladder::<T>(dim)?;
    let n = FockOperator::<T>::number(dim)?.into_matrix();
    let b2 = b.pow(2).into_matrix();
    let bd2 = bd.pow(2).into_matrix();
    Ok(Ops { b4: &b2 * &b2, bd4: &bd2 * &bd2, n2: &n * &n, b2, bd2, n })
}

fn check_variant_dim(v: Variant, dim: usize) -> Result<()> {
    if dim < v.min_dim() {
        return Err(Error::param("dim", format!("{} needs dim ≥ {}, got {dim}", v.name(), v.min_dim())));
    }
    Ok(())
}

fn rwa<T: Real>(
    variant: Variant,
    c: &VacuumCoefficients<T>,
    dim: usize,
    renormalized: bool,
) -> Result<Liouvillian<T>> {
    check_variant_dim(variant, dim)?;
    let o = ops::<T>(dim)?;
    let (_, dm) = match variant {
        Variant::XRwa => c.x_pair(renormalized),
        _ => c.xi_pair(renormalized),
    };
    let h = &o.n * re(T::one() - dm) + &o.n2 * re(dm);
    Ok(LiouvillianBuilder::new(dim)?.commutator(&h).dissipator(c.gamma, &o.b2).build(Some(variant), *c, renormalized))
}

fn full<T: Real>(
    variant: Variant,
    c: &VacuumCoefficients<T>,
    dim: usize,
    renormalized: bool,
) -> Result<Liouvillian<T>> {
    check_variant_dim(variant, dim)?;
    let o = ops::<T>(dim)?;
    let ((dp, dm), s) = match variant {
        Variant::XFull => (c.x_pair(renormalized), -T::one()),
        _ => (c.xi_pair(renormalized), T::one()),
    };
    let three = T::lit(3.0);
    let half_g = c.gamma / T::lit(2.0);
    let h = &o.n * re(T::one() - dm - three * dp) - &o.n2 * re(dp - dm);
    let cp = im(s * dp);
    let c4 = cx(s * half_g, s * dm);
    let cd4 = cx(-s * half_g, s * dm);
    let l = LiouvillianBuilder::new(dim)?
        .commutator(&h)
        .dissipator(c.gamma, &o.b2)
        .sandwich(cp, &o.bd2, &o.bd2)
        .left(-cp, &o.bd4)
        .right(cp, &o.b4)
        .sandwich(-cp, &o.b2, &o.b2)
        .left(c4, &o.b4)
        .sandwich(-c4, &o.b2, &o.b2)
        .sandwich(cd4, &o.bd2, &o.bd2)
        .right(-cd4, &o.bd4);
    Ok(l.build(Some(variant), *c, renormalized))
}

/// Coordinate-separation generator in the rotating-wave limit.
pub fn liouvillian_x_rwa<T: Real>(c: &VacuumCoefficients<T>, dim: usize, renormalized: bool) -> Result<Liouvillian<T>> {
    rwa(Variant::XRwa, c, dim, renormalized)
}

/// Geodesic-separation generator in the rotating-wave limit.
pub fn liouvillian_xi_rwa<T: Real>(c: &VacuumCoefficients<T>, dim: usize, renormalized: bool) -> Result<Liouvillian<T>> {
    rwa(Variant::XiRwa, c, dim, renormalized)
}

/// Coordinate-separation generator with all counter-rotating groups.
pub fn liouvillian_x_full<T: Real>(c: &VacuumCoefficients<T>, dim: usize, renormalized: bool) -> Result<Liouvillian<T>> {
    full(Variant::XFull, c, dim, renormalized)
}

/// Geodesic-separation generator with all counter-rotating groups.
pub fn liouvillian_xi_full<T: Real>(c: &VacuumCoefficients<T>, dim: usize, renormalized: bool) -> Result<Liouvillian<T>> {
    full(Variant::XiFull, c, dim, renormalized)
}

fn check_rate<T: Real>(rate: T) -> Result<()> {
    if !(rate >= T::zero()) {
        return Err(Error::param("rate", format!("must be non-negative, got {rate}")));
    }
    Ok(())
}

/// rate·D[b̂²].
pub fn lindblad_amp<T: Real>(rate: T, dim: usize) -> Result<Liouvillian<T>> {
    check_rate(rate)?;
    let o = ops::<T>(dim)?;
    let mut c = VacuumCoefficients::zero();
    c.gamma = rate;
    Ok(LiouvillianBuilder::new(dim)?.dissipator(rate, &o.b2).build(Some(Variant::AmpOnly), c, false))
}

/// rate·D[n̂].
pub fn lindblad_pha<T: Real>(rate: T, dim: usize) -> Result<Liouvillian<T>> {
    check_rate(rate)?;
    let o = ops::<T>(dim)?;
    let mut c = VacuumCoefficients::zero();
    c.gamma = rate;
    Ok(LiouvillianBuilder::new(dim)?.dissipator(rate, &o.n).build(Some(Variant::PhaseOnly), c, false))
}

/// Builds any variant; `AmpOnly`/`PhaseOnly` use `c.gamma` as their rate.
pub fn build<T: Real>(variant: Variant, c: &VacuumCoefficients<T>, dim: usize, renormalized: bool) -> Result<Liouvillian<T>> {
    match variant {
        Variant::XFull | Variant::XiFull => full(variant, c, dim, renormalized),
        Variant::XRwa | Variant::XiRwa => rwa(variant, c, dim, renormalized),
        Variant::AmpOnly => lindblad_amp(c.gamma, dim),
        Variant::PhaseOnly => lindblad_pha(c.gamma, dim),
    }
}

impl<T: Real> Liouvillian<T> {
    pub fn zero(dim: usize) -> Result<Self> {
        Ok(LiouvillianBuilder::new(dim)?.build_custom())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn variant(&self) -> Option<Variant> {
        self.variant
    }

    pub fn coeffs(&self) -> &VacuumCoefficients<T> {
        &self.coeffs
    }

    pub fn renormalized(&self) -> bool {
        self.renormalized
    }

    /// L[σ] for an arbitrary N×N matrix.
    pub fn apply(&self, sigma: &CMatrix<T>) -> CMatrix<T> {
        let mut out = &self.left * sigma + sigma * &self.right;
        for (a, b) in &self.sandwiches {
            out += a * sigma * b;
        }
        out
    }

    pub fn apply_state(&self, rho: &DensityMatrix<T>) -> Result<CMatrix<T>> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: rho.dim() });
        }
        Ok(self.apply(rho.matrix()))
    }

    /// Dense N²×N² matrix (column-major vectorization).
    pub fn superoperator(&self) -> Result<&CMatrix<T>> {
        if self.dim > DENSE_LIMIT {
            return Err(Error::param("dim", format!("dense superoperator limited to dim ≤ {DENSE_LIMIT}")));
        }
        Ok(self.dense.get_or_init(|| {
            let id = CMatrix::<T>::identity(self.dim, self.dim);
            let mut m = id.kronecker(&self.left) + self.right.transpose().kronecker(&id);
            for (a, b) in &self.sandwiches {
                m += b.transpose().kronecker(a);
            }
            m
        }))
    }

    /// Level energies E_n of the commutator part, referenced to E_0 = 0.
    ///
    /// The left and right factors carry ∓iE_n on their diagonals, plus real dissipative parts.
    pub fn effective_hamiltonian(&self) -> Vec<T> {
        let half = T::lit(0.5);
        let e: Vec<T> = (0..self.dim).map(|n| (self.right[(n, n)].im - self.left[(n, n)].im) * half).collect();
        e.iter().map(|&x| x - e[0]).collect()
    }
}

/// vec(σ) under column-major ordering.
pub fn vectorize<T: Real>(m: &CMatrix<T>) -> nalgebra::DVector<Cx<T>> {
    nalgebra::DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize<T: Real>(v: &nalgebra::DVector<Cx<T>>, dim: usize) -> CMatrix<T> {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}
