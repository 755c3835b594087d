//! Quantization of the slope `ν` and the energy.
//!
//! Polynomial solutions need two conditions at once. `λ̄ = 2n` ties the
//! energy to the slope,
//!
//! ```text
//! E = ±√(2ν (n + |ν_eff| + 1) + k²),
//! ```
//!
//! and `a_{n+1} = 0` selects the allowed slopes `ν_{n,l,k}`. For `n = 1`
//! both are solved in closed form; for higher `n` the slope is found by
//! scanning `α = 2m/√ν` for sign changes of the normalized `a_{n+1}`.
//!
//! The three scenarios differ only in the effective angular momentum:
//! `|γ|` (free), `|ς|` (flux) or `|η| = √(ς² + b²)` (Coulomb), and in the
//! Coulomb case the signed energy also enters through `μ = 2bE/√ν`.

use crate::error::{Error, Result};
use crate::heun::{build_coefficients, RadialWavefunction, DEFAULT_ORDER};
use crate::model::{
    coulomb_eta, effective_angular_momentum, heun_params, Couplings, DefectGeometry, HeunParams, MassProfile,
    QuantumNumbers,
};

/// Which couplings are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    Free,
    Coulomb,
    AbFlux,
}

impl Scenario {
    pub fn classify(coup: &Couplings) -> Self {
        if coup.b != 0.0 {
            Scenario::Coulomb
        } else if coup.flux_ratio() != 0.0 {
            Scenario::AbFlux
        } else {
            Scenario::Free
        }
    }
}

/// Energies attached to one solved slope.
///
/// Without Coulomb coupling both signs share one slope. With it, the slope
/// depends on the sign of `E` and each solution carries a single energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Energies {
    PlusMinus(f64),
    Signed(f64),
}

impl Energies {
    pub fn plus(&self) -> Option<f64> {
        match *self {
            Energies::PlusMinus(e) => Some(e),
            Energies::Signed(e) if e >= 0.0 => Some(e),
            Energies::Signed(_) => None,
        }
    }

    pub fn minus(&self) -> Option<f64> {
        match *self {
            Energies::PlusMinus(e) => Some(-e),
            Energies::Signed(e) if e < 0.0 => Some(e),
            Energies::Signed(_) => None,
        }
    }

    /// The energy used to build the radial parameters.
    pub fn representative(&self) -> f64 {
        match *self {
            Energies::PlusMinus(e) | Energies::Signed(e) => e,
        }
    }
}

/// A solved state: quantum numbers, slope, energies and wavefunction.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPoint {
    pub qn: QuantumNumbers,
    pub scenario: Scenario,
    /// Signed `γ` or `ς`.
    pub eff: f64,
    /// `|γ|`, `|ς|` or `|η|`, whichever enters the radial equation.
    pub eff_abs: f64,
    pub nu_solved: f64,
    pub energies: Energies,
    pub params: HeunParams,
    pub wavefunction: RadialWavefunction,
    /// Position among the roots for these quantum numbers, ascending in `ν`.
    pub root_index: usize,
}

impl SpectrumPoint {
    /// `|λ̄ − 2n|` recomputed from the stored parameters.
    pub fn lambda_error(&self) -> f64 {
        (self.params.lambda() - 2.0 * self.qn.n as f64).abs()
    }

    /// `|a_{n+1}| / max_{j≤n} |a_j|`.
    pub fn truncation_residual(&self) -> f64 {
        self.wavefunction.coefficients.relative_residual(self.qn.n as usize)
    }

    pub fn mass(&self, m: f64) -> MassProfile {
        MassProfile { m, nu: self.nu_solved }
    }
}

/// `E = ±√(2ν(n + |ν_eff| + 1) + k²)`, from `λ̄ = 2n`.
pub fn energy_from_lambda(nu: f64, n: u32, eff_abs: f64, k: f64) -> Result<(f64, f64)> {
    if nu.is_nan() || nu <= 0.0 {
        return Err(Error::NonPositiveSlope { nu });
    }
    let e = (2.0 * nu * (n as f64 + eff_abs.abs() + 1.0) + k * k).sqrt();
    Ok((e, -e))
}

/// Ground-state slope without Coulomb coupling: `ν₁ = m²(|ν_eff| + 3/2)`.
pub fn nu_ground_free(mass_m: f64, eff: f64) -> f64 {
    mass_m * mass_m * (eff.abs() + 1.5)
}

/// Ground-state energies without Coulomb coupling:
/// `±m √((2|ν_eff|+3)(|ν_eff|+2) + k²/m²)`.
pub fn energy_ground_free(mass_m: f64, eff: f64, k: f64) -> (f64, f64) {
    let a = eff.abs();
    let e = mass_m * ((2.0 * a + 3.0) * (a + 2.0) + k * k / (mass_m * mass_m)).sqrt();
    (e, -e)
}

/// Ground-state slope with Coulomb coupling at energy `energy`:
///
/// ```text
/// ν₁ = (m²/2)(2|η|+3) − 2mbE (2|η|+2)/(2|η|+1) + 2b²E²/(2|η|+1)
/// ```
pub fn nu_ground_coulomb(mass_m: f64, b: f64, eta_abs: f64, energy: f64) -> f64 {
    let eta = eta_abs.abs();
    let s = 2.0 * eta + 1.0;
    0.5 * mass_m * mass_m * (2.0 * eta + 3.0) - 2.0 * mass_m * b * energy * (2.0 * eta + 2.0) / s
        + 2.0 * b * b * energy * energy / s
}

/// Sign in front of the radical of the Coulomb ground-state quadratic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RadicalSign {
    Upper,
    Lower,
}

/// One root of the Coulomb ground-state quadratic and its slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombBranch {
    pub sign: RadicalSign,
    pub energy: f64,
    pub nu: f64,
}

impl CoulombBranch {
    /// Only positive slopes describe a confining mass profile.
    pub fn is_confining(&self) -> bool {
        self.nu > 0.0
    }
}

/// `4b²|η| + 8b² − 2|η| − 1`.
pub fn coulomb_denominator(b: f64, eta_abs: f64) -> f64 {
    let eta = eta_abs.abs();
    4.0 * b * b * eta + 8.0 * b * b - 2.0 * eta - 1.0
}

/// The quantity under the square root of the ground-state Coulomb energy.
pub fn coulomb_radicand(mass_m: f64, b: f64, eta_abs: f64, k: f64) -> f64 {
    let eta = eta_abs.abs();
    let d = coulomb_denominator(b, eta);
    let m2 = mass_m * mass_m;
    let c = m2 * (eta + 2.0) * (2.0 * eta + 3.0) + k * k;
    let w = (eta + 2.0) * (2.0 * eta + 2.0);
    1.0 - d * c * (2.0 * eta + 1.0) / (4.0 * m2 * b * b * w * w)
}

/// Both ground-state energies with Coulomb coupling,
///
/// ```text
/// E = 2mb(|η|+2)(2|η|+2)/D · [1 ± √(1 − D (m²(|η|+2)(2|η|+3) + k²)(2|η|+1) / (4m²b²(|η|+2)²(2|η|+2)²))]
/// ```
///
/// with `D = 4b²|η| + 8b² − 2|η| − 1`. Returns `[upper, lower]`. At `b = 0`
/// the free pair `[+E, −E]` is returned instead.
pub fn energy_ground_coulomb(mass_m: f64, b: f64, eta_abs: f64, k: f64) -> Result<[CoulombBranch; 2]> {
    let eta = eta_abs.abs();
    if b == 0.0 {
        let (plus, minus) = energy_ground_free(mass_m, eta, k);
        let nu = nu_ground_free(mass_m, eta);
        return Ok([
            CoulombBranch {
                sign: RadicalSign::Upper,
                energy: plus,
                nu,
            },
            CoulombBranch {
                sign: RadicalSign::Lower,
                energy: minus,
                nu,
            },
        ]);
    }

    let d = coulomb_denominator(b, eta);
    if d.abs() < 1e-12 {
        return Err(Error::DegenerateDenominator { denominator: d });
    }
    let radicand = coulomb_radicand(mass_m, b, eta, k);
    if radicand < 0.0 {
        return Err(Error::NoRealSolution { radicand });
    }
    let prefactor = 2.0 * mass_m * b * (eta + 2.0) * (2.0 * eta + 2.0) / d;
    let root = radicand.sqrt();
    let branch = |sign, energy: f64| CoulombBranch {
        sign,
        energy,
        nu: nu_ground_coulomb(mass_m, b, eta, energy),
    };
    Ok([
        branch(RadicalSign::Upper, prefactor * (1.0 + root)),
        branch(RadicalSign::Lower, prefactor * (1.0 - root)),
    ])
}

/// Search window and series depth for [`solve_general_n_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub alpha_max: f64,
    pub alpha_step: f64,
    pub series_order: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            alpha_max: 50.0,
            alpha_step: 0.01,
            series_order: DEFAULT_ORDER,
        }
    }
}

/// Effective momenta `(signed ς, |ν_eff|)` and scenario for a state.
pub fn effective_momenta(qn: &QuantumNumbers, geom: &DefectGeometry, coup: &Couplings) -> (f64, f64, Scenario) {
    let eff = effective_angular_momentum(qn.l, qn.k, geom, coup);
    let scenario = Scenario::classify(coup);
    let eff_abs = match scenario {
        Scenario::Coulomb => coulomb_eta(eff, coup.b),
        _ => eff.abs(),
    };
    (eff, eff_abs, scenario)
}

/// Everything needed to evaluate the truncation condition at a trial slope.
struct Problem {
    qn: QuantumNumbers,
    m: f64,
    b: f64,
    eff_abs: f64,
    /// `+1` or `−1`: sign of the energy branch (only matters when `b ≠ 0`).
    branch: f64,
}

impl Problem {
    fn nu_of_alpha(&self, alpha: f64) -> f64 {
        4.0 * self.m * self.m / (alpha * alpha)
    }

    fn energy(&self, nu: f64) -> Result<f64> {
        let (e, _) = energy_from_lambda(nu, self.qn.n, self.eff_abs, self.qn.k)?;
        Ok(self.branch * e)
    }

    fn params(&self, nu: f64) -> Result<HeunParams> {
        let mass = MassProfile { m: self.m, nu };
        heun_params(&mass, self.energy(nu)?, self.qn.k, self.b, self.eff_abs)
    }

    /// `a_{n+1} / max_{j≤n} |a_j|` at `α`; continuous and sign-preserving.
    fn residual(&self, alpha: f64) -> f64 {
        let n = self.qn.n as usize;
        match self.params(self.nu_of_alpha(alpha)) {
            Ok(p) => {
                let s = build_coefficients(&p, n + 1);
                s.coeffs()[n + 1] / s.scale_through(n)
            }
            Err(_) => f64::NAN,
        }
    }

    /// Bisection down to round-off, then a few guarded Newton steps.
    fn polish(&self, mut lo: f64, mut hi: f64) -> f64 {
        let mut f_lo = self.residual(lo);
        for _ in 0..200 {
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let f_mid = self.residual(mid);
            if f_mid == 0.0 {
                return mid;
            }
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        let mut best = 0.5 * (lo + hi);
        let mut f_best = self.residual(best);
        for _ in 0..3 {
            let h = 1e-7 * best;
            let slope = (self.residual(best + h) - self.residual(best - h)) / (2.0 * h);
            if !(slope.is_finite() && slope != 0.0) {
                break;
            }
            let trial = best - f_best / slope;
            if !(trial >= lo && trial <= hi) {
                break;
            }
            let f_trial = self.residual(trial);
            if f_trial.abs() < f_best.abs() {
                best = trial;
                f_best = f_trial;
            } else {
                break;
            }
        }
        best
    }

    fn roots(&self, opts: &SolverOptions) -> Vec<f64> {
        let steps = (opts.alpha_max / opts.alpha_step).round() as usize;
        let grid: Vec<f64> = (1..=steps).map(|j| j as f64 * opts.alpha_step).collect();
        let values: Vec<f64> = grid.iter().map(|&a| self.residual(a)).collect();

        let mut roots = Vec::new();
        let mut j = 0;
        while j + 1 < grid.len() {
            let (fa, fb) = (values[j], values[j + 1]);
            if fa == 0.0 {
                roots.push(grid[j]);
            } else if fb != 0.0 && fa.is_finite() && fb.is_finite() && fa.signum() != fb.signum() {
                roots.push(self.polish(grid[j], grid[j + 1]));
            }
            j += 1;
        }
        if values.last() == Some(&0.0) {
            roots.push(grid[grid.len() - 1]);
        }
        roots
    }
}

#[allow(clippy::too_many_arguments)]
fn build_point(
    qn: QuantumNumbers,
    m: f64,
    scenario: Scenario,
    eff: f64,
    eff_abs: f64,
    b: f64,
    nu: f64,
    energies: Energies,
    series_order: usize,
) -> Result<SpectrumPoint> {
    let mass = MassProfile { m, nu };
    let params = heun_params(&mass, energies.representative(), qn.k, b, eff_abs)?;
    let coefficients = build_coefficients(&params, series_order.max(qn.n as usize + 1));
    Ok(SpectrumPoint {
        qn,
        scenario,
        eff,
        eff_abs,
        nu_solved: nu,
        energies,
        params,
        wavefunction: RadialWavefunction::new(coefficients, Some(qn.n as usize)),
        root_index: 0,
    })
}

fn check_inputs(qn: &QuantumNumbers, mass_m: f64) -> Result<()> {
    if qn.n == 0 {
        return Err(Error::InvalidInput("radial index n starts at 1".into()));
    }
    if !(mass_m.is_finite() && mass_m > 0.0) {
        return Err(Error::InvalidInput(format!("rest mass must be positive, got {mass_m}")));
    }
    Ok(())
}

fn sort_and_index(mut points: Vec<SpectrumPoint>) -> Vec<SpectrumPoint> {
    points.sort_by(|a, b| {
        a.nu_solved
            .total_cmp(&b.nu_solved)
            .then(a.energies.representative().total_cmp(&b.energies.representative()))
    });
    for (i, p) in points.iter_mut().enumerate() {
        p.root_index = i;
    }
    points
}

/// All positive slopes `ν` for which the Heun series truncates at order `n`,
/// found numerically, with default [`SolverOptions`].
pub fn solve_general_n(
    qn: QuantumNumbers,
    mass_m: f64,
    geom: &DefectGeometry,
    coup: &Couplings,
) -> Result<Vec<SpectrumPoint>> {
    solve_general_n_with(qn, mass_m, geom, coup, &SolverOptions::default())
}

/// [`solve_general_n`] with an explicit search window.
///
/// The scan runs over `α ∈ (0, α_max]`; every sign change of the normalized
/// `a_{n+1}(α)` is bisected and polished. In the Coulomb case the two signs
/// of `E` are separate problems because `μ` depends on the signed energy.
pub fn solve_general_n_with(
    qn: QuantumNumbers,
    mass_m: f64,
    geom: &DefectGeometry,
    coup: &Couplings,
    opts: &SolverOptions,
) -> Result<Vec<SpectrumPoint>> {
    check_inputs(&qn, mass_m)?;
    let (eff, eff_abs, scenario) = effective_momenta(&qn, geom, coup);
    let branches: &[f64] = if scenario == Scenario::Coulomb {
        &[1.0, -1.0]
    } else {
        &[1.0]
    };

    let mut points = Vec::new();
    for &branch in branches {
        let problem = Problem {
            qn,
            m: mass_m,
            b: coup.b,
            eff_abs,
            branch,
        };
        for alpha in problem.roots(opts) {
            let nu = problem.nu_of_alpha(alpha);
            let energy = problem.energy(nu)?;
            let energies = if scenario == Scenario::Coulomb {
                Energies::Signed(energy)
            } else {
                Energies::PlusMinus(energy)
            };
            points.push(build_point(
                qn,
                mass_m,
                scenario,
                eff,
                eff_abs,
                coup.b,
                nu,
                energies,
                opts.series_order,
            )?);
        }
    }

    if points.is_empty() {
        return Err(Error::NoRoots {
            alpha_min: 0.0,
            alpha_max: opts.alpha_max,
        });
    }
    Ok(sort_and_index(points))
}

/// Solved states for `qn`: closed forms at `n = 1`, numerical roots above.
pub fn solve_state(
    qn: QuantumNumbers,
    mass_m: f64,
    geom: &DefectGeometry,
    coup: &Couplings,
) -> Result<Vec<SpectrumPoint>> {
    if qn.n != 1 {
        return solve_general_n(qn, mass_m, geom, coup);
    }
    check_inputs(&qn, mass_m)?;
    let (eff, eff_abs, scenario) = effective_momenta(&qn, geom, coup);
    let order = DEFAULT_ORDER;

    let points = match scenario {
        Scenario::Coulomb => {
            let branches = energy_ground_coulomb(mass_m, coup.b, eff_abs, qn.k)?;
            let confining: Vec<_> = branches.iter().filter(|br| br.is_confining()).collect();
            if confining.is_empty() {
                return Err(Error::NoRoots {
                    alpha_min: 0.0,
                    alpha_max: f64::INFINITY,
                });
            }
            confining
                .into_iter()
                .map(|br| {
                    build_point(
                        qn,
                        mass_m,
                        scenario,
                        eff,
                        eff_abs,
                        coup.b,
                        br.nu,
                        Energies::Signed(br.energy),
                        order,
                    )
                })
                .collect::<Result<Vec<_>>>()?
        }
        _ => {
            let nu = nu_ground_free(mass_m, eff_abs);
            let (e, _) = energy_ground_free(mass_m, eff_abs, qn.k);
            vec![build_point(
                qn,
                mass_m,
                scenario,
                eff,
                eff_abs,
                0.0,
                nu,
                Energies::PlusMinus(e),
                order,
            )?]
        }
    };
    Ok(sort_and_index(points))
}
