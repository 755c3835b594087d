//! Persistent currents from the flux dependence of the spectrum.
//!
//! The Byers-Yang relation gives the current carried by a state as
//! `I = −∂E/∂Φ_B`. For the ground state the derivative is available in
//! closed form; for any other state it is taken numerically from the solved
//! spectrum, which also accounts for the flux dependence of `ν_{n,l,k}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{effective_angular_momentum, Couplings, DefectGeometry, QuantumNumbers};
use crate::quantization::{energy_ground_free, solve_state};

/// Default central-difference step, in units of `q Φ_B / 2π`.
pub const DEFAULT_FLUX_STEP: f64 = 1e-5;

/// Which sign of the energy pair is differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

/// Current of one state at one flux value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentPoint {
    pub qn: QuantumNumbers,
    pub phi_b: f64,
    pub current: f64,
    pub branch: Branch,
}

/// Closed-form ground-state current
///
/// ```text
/// I = ∓ (q/4π) sgn(ς) m (4|ς| + 7) / √((2|ς|+3)(|ς|+2) + k²/m²)
/// ```
///
/// where the upper sign belongs to the positive-energy branch.
pub fn persistent_current_ground(mass_m: f64, k: f64, sigma: f64, q: f64, branch: Branch) -> Result<f64> {
    if sigma.abs() < 1e-14 {
        return Err(Error::UndefinedAtZeroFlux { sigma });
    }
    let a = sigma.abs();
    let root = ((2.0 * a + 3.0) * (a + 2.0) + k * k / (mass_m * mass_m)).sqrt();
    Ok(-branch.sign() * q / (4.0 * PI) * sigma.signum() * mass_m * (4.0 * a + 7.0) / root)
}

/// A flux-dependent energy level.
pub trait FluxSpectrum {
    fn energy(&self, phi_b: f64) -> Result<f64>;

    /// Effective angular momentum at `phi_b`, when known. Used to refuse
    /// derivatives across the `|ς|` kink.
    fn sigma(&self, _phi_b: f64) -> Option<f64> {
        None
    }
}

/// Wraps a plain `Φ_B ↦ E` function.
pub struct FnSpectrum<F>(pub F);

impl<F: Fn(f64) -> f64> FluxSpectrum for FnSpectrum<F> {
    fn energy(&self, phi_b: f64) -> Result<f64> {
        Ok((self.0)(phi_b))
    }
}

/// Ground-state energy in closed form as a function of flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundFluxSpectrum {
    pub mass_m: f64,
    pub l: i32,
    pub k: f64,
    pub geom: DefectGeometry,
    pub q: f64,
    pub branch: Branch,
}

impl FluxSpectrum for GroundFluxSpectrum {
    fn energy(&self, phi_b: f64) -> Result<f64> {
        let sigma = self.sigma(phi_b).unwrap_or_default();
        let (e, _) = energy_ground_free(self.mass_m, sigma, self.k);
        Ok(self.branch.sign() * e)
    }

    fn sigma(&self, phi_b: f64) -> Option<f64> {
        let coup = Couplings::aharonov_bohm(self.q, phi_b);
        Some(effective_angular_momentum(self.l, self.k, &self.geom, &coup))
    }
}

/// Energy of the `root`-th solved state for `qn`, re-solved at every flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolvedFluxSpectrum {
    pub qn: QuantumNumbers,
    pub mass_m: f64,
    pub geom: DefectGeometry,
    pub q: f64,
    pub root: usize,
    pub branch: Branch,
}

impl FluxSpectrum for SolvedFluxSpectrum {
    fn energy(&self, phi_b: f64) -> Result<f64> {
        let coup = Couplings::aharonov_bohm(self.q, phi_b);
        let points = solve_state(self.qn, self.mass_m, &self.geom, &coup)?;
        let point = points.get(self.root).ok_or(Error::NoRoots {
            alpha_min: 0.0,
            alpha_max: f64::INFINITY,
        })?;
        let e = point.energies.representative().abs();
        Ok(self.branch.sign() * e)
    }

    fn sigma(&self, phi_b: f64) -> Option<f64> {
        let coup = Couplings::aharonov_bohm(self.q, phi_b);
        Some(effective_angular_momentum(self.qn.l, self.qn.k, &self.geom, &coup))
    }
}

/// Flux step equivalent to `ratio_step` in units of `q Φ_B / 2π`.
pub fn flux_step(q: f64, ratio_step: f64) -> f64 {
    2.0 * PI * ratio_step / q.abs()
}

/// `−[E(Φ_B + h) − E(Φ_B − h)] / 2h`.
pub fn persistent_current_numeric(spectrum: &impl FluxSpectrum, phi_b: f64, step: f64) -> Result<f64> {
    if let (Some(lo), Some(mid), Some(hi)) = (
        spectrum.sigma(phi_b - step),
        spectrum.sigma(phi_b),
        spectrum.sigma(phi_b + step),
    ) {
        if mid == 0.0 || lo.signum() != hi.signum() || lo == 0.0 || hi == 0.0 {
            return Err(Error::KinkDetected { phi_b });
        }
    }
    let up = spectrum.energy(phi_b + step)?;
    let down = spectrum.energy(phi_b - step)?;
    Ok(-(up - down) / (2.0 * step))
}
