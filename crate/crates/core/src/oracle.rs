//! Independent checks of the analytic states.
//!
//! * [`ode_residual`] plugs a wavefunction back into the radial equation in
//!   `ξ`, using exact derivatives of the envelope and the polynomial.
//! * [`fd_eigensolve_free`] discretizes the radial equation in `ρ` at a fixed
//!   slope and returns the lowest `E²`; it never sees the Heun series.
//! * [`normalization`] integrates `|R|² ξ` to confirm the state is bound.

use crate::error::{Error, Result};
use crate::heun::RadialWavefunction;
use crate::model::{HeunParams, MassProfile};

/// Relative eigenvalue tolerance used by the refinement check.
pub const FD_TOLERANCE: f64 = 1e-3;

/// Uniform grid on `[xi_min, xi_max]` with the origin excluded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    xi_min: f64,
    xi_max: f64,
    n_points: usize,
}

impl RadialGrid {
    pub fn new(xi_min: f64, xi_max: f64, n_points: usize) -> Result<Self> {
        if !(xi_min > 0.0 && xi_max > xi_min && xi_max.is_finite()) || n_points < 3 {
            return Err(Error::InvalidInput(format!(
                "radial grid needs 0 < xi_min < xi_max and at least 3 points, got [{xi_min}, {xi_max}] x {n_points}"
            )));
        }
        Ok(Self {
            xi_min,
            xi_max,
            n_points,
        })
    }

    /// `[0.01, 8·max(1, √(n + |ν_eff|))]` with 2000 points.
    pub fn for_state(n: u32, eff_abs: f64) -> Self {
        let xi_max = 8.0 * (n as f64 + eff_abs).sqrt().max(1.0);
        Self::new(0.01, xi_max, 2000).expect("valid default grid")
    }

    pub fn xi_min(&self) -> f64 {
        self.xi_min
    }

    pub fn xi_max(&self) -> f64 {
        self.xi_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        (self.xi_max - self.xi_min) / (self.n_points - 1) as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.spacing();
        (0..self.n_points).map(move |i| self.xi_min + i as f64 * h)
    }
}

/// Largest residual of
///
/// ```text
/// R'' + R'/ξ − (|ν|²/ξ²) R + (μ/ξ) R − α ξ R − ξ² R + β R
/// ```
///
/// over the grid, divided by `max |R|` on the grid.
pub fn ode_residual(wf: &RadialWavefunction, params: &HeunParams, grid: &RadialGrid) -> f64 {
    let nu2 = params.nu_abs * params.nu_abs;
    let (mut worst, mut peak) = (0.0f64, 0.0f64);
    for xi in grid.points() {
        let (r, dr, d2r) = wf.derivatives(xi);
        let res = d2r + dr / xi - nu2 / (xi * xi) * r + params.mu / xi * r - params.alpha * xi * r - xi * xi * r
            + params.beta * r;
        worst = worst.max(res.abs());
        peak = peak.max(r.abs());
    }
    if peak == 0.0 {
        0.0
    } else {
        worst / peak
    }
}

/// Trapezoidal `∫ |R(ξ)|² ξ dξ` over the grid.
pub fn normalization(wf: &RadialWavefunction, grid: &RadialGrid) -> f64 {
    let h = grid.spacing();
    let values: Vec<f64> = grid
        .points()
        .map(|xi| {
            let r = wf.evaluate(xi);
            r * r * xi
        })
        .collect();
    let interior: f64 = values[1..values.len() - 1].iter().sum();
    h * (interior + 0.5 * (values[0] + values[values.len() - 1]))
}

/// Cell-centred grid on `[0, rho_max]` for the finite-difference oracle.
///
/// Nodes sit at `(i − ½)h`, so the origin is a cell face and is never
/// evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdGrid {
    pub rho_max: f64,
    pub cells: usize,
}

impl FdGrid {
    pub fn new(rho_max: f64, cells: usize) -> Result<Self> {
        if !(rho_max > 0.0 && rho_max.is_finite()) || cells < 3 {
            return Err(Error::InvalidInput(format!(
                "finite-difference grid needs rho_max > 0 and at least 3 cells, got {rho_max} x {cells}"
            )));
        }
        Ok(Self { rho_max, cells })
    }

    /// `rho_max = 10/√ν · max(1, √(n + |ν_eff|))` with 4000 cells.
    pub fn for_state(nu: f64, n: u32, eff_abs: f64) -> Self {
        let rho_max = 10.0 / nu.sqrt() * (n as f64 + eff_abs).sqrt().max(1.0);
        Self::new(rho_max, 4000).expect("valid default grid")
    }

    pub fn spacing(&self) -> f64 {
        self.rho_max / self.cells as f64
    }

    pub fn refined(&self) -> Self {
        Self {
            rho_max: self.rho_max,
            cells: 2 * self.cells,
        }
    }
}

/// Symmetric tridiagonal matrix for `E² − m² − k²` at fixed slope.
///
/// Writing `R = ρ^p w` with `p = |ν_eff|` turns the radial operator into the
/// Sturm-Liouville form `−ρ^{−s} (ρ^s w')' + (2mνρ + ν²ρ²) w` with
/// `s = 2p + 1`. Second-order central differences on cell faces, scaled by
/// `√(ρ_i^s)`, give a symmetric matrix acting on `u_i = √ρ_i R_i`. The
/// weight vanishes at the origin face; the outer neighbour is Dirichlet.
fn fd_matrix(mass: &MassProfile, eff_abs: f64, grid: &FdGrid) -> (Vec<f64>, Vec<f64>) {
    let h = grid.spacing();
    let s = 2.0 * eff_abs.abs() + 1.0;
    let n = grid.cells;
    let node = |i: usize| (i as f64 + 0.5) * h;
    let weight = |rho: f64| rho.powf(s);

    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n - 1);
    for i in 0..n {
        let rho = node(i);
        let w_c = weight(rho);
        let w_in = if i == 0 { 0.0 } else { weight(rho - 0.5 * h) };
        let w_out = weight(rho + 0.5 * h);
        let potential = 2.0 * mass.m * mass.nu * rho + mass.nu * mass.nu * rho * rho;
        diag.push((w_in + w_out) / (h * h * w_c) + potential);
        if i + 1 < n {
            let w_next = weight(node(i + 1));
            off.push(-w_out / (h * h * (w_c * w_next).sqrt()));
        }
    }
    (diag, off)
}

/// Lowest `count` eigenvalues of a symmetric tridiagonal matrix, ascending,
/// by Sturm-sequence bisection.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64], count: usize) -> Vec<f64> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n, "off-diagonal must have n - 1 entries");
    let count = count.min(n);

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let radius = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * hi.abs().max(lo.abs()) * 1e-3);

    // number of eigenvalues strictly below x
    let below = |x: f64| -> usize {
        let mut count = 0;
        let mut q = diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            q = diag[i] - x - off[i - 1] * off[i - 1] / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };

    (0..count)
        .map(|j| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if b - a <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) || mid == a || mid == b {
                    break;
                }
                if below(mid) > j {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

fn fd_energies_squared(mass: &MassProfile, eff_abs: f64, k: f64, grid: &FdGrid, n_eigs: usize) -> Vec<f64> {
    let (diag, off) = fd_matrix(mass, eff_abs, grid);
    let shift = mass.m * mass.m + k * k;
    tridiagonal_eigenvalues(&diag, &off, n_eigs)
        .into_iter()
        .map(|e| e + shift)
        .collect()
}

/// Lowest `n_eigs` values of `E²` for the radial equation at the fixed
/// slope `mass.nu`, from the finite-difference discretization.
///
/// The same eigenvalues are recomputed on a grid with twice as many cells;
/// if any moves by more than [`FD_TOLERANCE`] (relative) the grid is
/// rejected as too coarse.
pub fn fd_eigensolve_free(mass: &MassProfile, eff_abs: f64, k: f64, grid: &FdGrid, n_eigs: usize) -> Result<Vec<f64>> {
    mass.sqrt_slope()?;
    let coarse = fd_energies_squared(mass, eff_abs, k, grid, n_eigs);
    let fine = fd_energies_squared(mass, eff_abs, k, &grid.refined(), n_eigs);
    for (&c, &f) in coarse.iter().zip(&fine) {
        if (c - f).abs() > FD_TOLERANCE * f.abs() {
            return Err(Error::GridTooCoarse { coarse: c, fine: f });
        }
    }
    Ok(coarse)
}

/// Smallest relative distance `|λ − target| / |target|` over `eigenvalues`.
pub fn nearest_relative(eigenvalues: &[f64], target: f64) -> f64 {
    eigenvalues
        .iter()
        .map(|e| (e - target).abs() / target.abs())
        .fold(f64::INFINITY, f64::min)
}
