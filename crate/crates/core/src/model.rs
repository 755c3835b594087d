//! Physical parameters of the model and the dimensionless quantities of the
//! radial equation.
//!
//! Natural units (ħ = c = 1) are used throughout. The particle has the
//! position-dependent mass `m + nu * rho`, lives in the screw-dislocation
//! line element
//!
//! ```text
//! ds² = -dt² + dρ² + ρ² dφ² + (dz + χ dφ)²
//! ```
//!
//! and may couple to a Coulomb-like scalar `q A_0 = b / rho` or to an
//! Aharonov-Bohm flux line `A_phi = Phi_B / 2 pi`. Defect, Coulomb and flux
//! enter the radial problem only through an effective angular momentum.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Rest mass and linear slope of the position-dependent mass `m(ρ) = m + νρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassProfile {
    pub m: f64,
    pub nu: f64,
}

impl MassProfile {
    pub fn new(m: f64, nu: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidInput(format!("rest mass must be positive, got {m}")));
        }
        if !nu.is_finite() {
            return Err(Error::InvalidInput(format!("slope must be finite, got {nu}")));
        }
        Ok(Self { m, nu })
    }

    /// `√ν`, the scale of the dimensionless radius `ξ = √ν ρ`.
    pub fn sqrt_slope(&self) -> Result<f64> {
        if self.nu > 0.0 {
            Ok(self.nu.sqrt())
        } else {
            Err(Error::NonPositiveSlope { nu: self.nu })
        }
    }

    /// Mass at radius `rho`.
    pub fn mass_at(&self, rho: f64) -> f64 {
        self.m + self.nu * rho
    }
}

/// Torsion parameter of the space-like dislocation.
///
/// `chi = 0` is Minkowski spacetime. When the Burgers vector magnitude is
/// known, `chi = burgers / 2π`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DefectGeometry {
    pub chi: f64,
    pub burgers: Option<f64>,
}

impl DefectGeometry {
    pub fn minkowski() -> Self {
        Self::default()
    }

    pub fn from_chi(chi: f64) -> Self {
        Self { chi, burgers: None }
    }

    pub fn from_burgers(burgers: f64) -> Self {
        Self {
            chi: burgers / (2.0 * PI),
            burgers: Some(burgers),
        }
    }

    pub fn is_minkowski(&self) -> bool {
        self.chi == 0.0
    }
}

/// External couplings: signed Coulomb strength `b`, charge `q` and
/// Aharonov-Bohm flux `phi_b`.
///
/// The Coulomb strength is stored with its sign; attractive and repulsive
/// cases are both `b`, not `|b|`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Couplings {
    pub b: f64,
    pub q: f64,
    pub phi_b: f64,
}

impl Couplings {
    pub fn free() -> Self {
        Self::default()
    }

    pub fn coulomb(b: f64) -> Self {
        Self { b, ..Self::default() }
    }

    pub fn aharonov_bohm(q: f64, phi_b: f64) -> Self {
        Self { b: 0.0, q, phi_b }
    }

    /// Unit charge with the flux given as the dimensionless ratio `q Φ_B / 2π`.
    pub fn with_flux_ratio(ratio: f64) -> Self {
        Self {
            b: 0.0,
            q: 1.0,
            phi_b: 2.0 * PI * ratio,
        }
    }

    /// `q Φ_B / 2π`.
    pub fn flux_ratio(&self) -> f64 {
        self.q * self.phi_b / (2.0 * PI)
    }

    pub fn is_free(&self) -> bool {
        self.b == 0.0 && self.flux_ratio() == 0.0
    }
}

/// Quantum numbers `(n, l, k)`: truncation order `n ≥ 1`, integer angular
/// momentum `l`, and real longitudinal wavenumber `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumNumbers {
    pub n: u32,
    pub l: i32,
    pub k: f64,
}

impl QuantumNumbers {
    pub fn new(n: u32, l: i32, k: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("radial index n starts at 1".into()));
        }
        if !k.is_finite() {
            return Err(Error::InvalidInput(format!("k must be finite, got {k}")));
        }
        Ok(Self { n, l, k })
    }

    pub fn ground(l: i32, k: f64) -> Self {
        Self { n: 1, l, k }
    }
}

/// Dimensionless parameters of the radial equation in `ξ = √ν ρ`:
///
/// ```text
/// R'' + R'/ξ − (ν_abs²/ξ²) R + (μ/ξ) R − α ξ R − ξ² R + β R = 0
/// ```
///
/// `nu_abs` is `|γ|`, `|ς|` or `|η|` depending on the scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeunParams {
    pub nu_abs: f64,
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
}

impl HeunParams {
    /// `λ̄ = β + α²/4 − 2 − 2|ν|`.
    pub fn lambda(&self) -> f64 {
        self.beta + 0.25 * self.alpha * self.alpha - 2.0 - 2.0 * self.nu_abs
    }

    /// `τ̄ = (α/2)(2|ν| + 1) − μ`.
    pub fn tau(&self) -> f64 {
        0.5 * self.alpha * (2.0 * self.nu_abs + 1.0) - self.mu
    }
}

/// Effective angular momentum `ς = l − χk + qΦ_B/2π`.
///
/// With no flux this is the torsion-shifted `γ = l − χk`.
pub fn effective_angular_momentum(l: i32, k: f64, geom: &DefectGeometry, coup: &Couplings) -> f64 {
    (l as f64 - geom.chi * k) + coup.flux_ratio()
}

/// `|η| = √(γ_eff² + b²)`.
pub fn coulomb_eta(gamma_eff: f64, b: f64) -> f64 {
    gamma_eff.hypot(b)
}

/// Assemble `(|ν|, α, β, μ)` for energy `energy` and wavenumber `k`.
pub fn heun_params(mass: &MassProfile, energy: f64, k: f64, b: f64, eff_abs: f64) -> Result<HeunParams> {
    let root = mass.sqrt_slope()?;
    Ok(HeunParams {
        nu_abs: eff_abs.abs(),
        alpha: 2.0 * mass.m / root,
        beta: (energy * energy - mass.m * mass.m - k * k) / mass.nu,
        mu: 2.0 * b * energy / root,
    })
}
