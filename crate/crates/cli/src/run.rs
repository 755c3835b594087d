//! The `spectrum`, `current` and `verify` commands.
//!
//! Each builds a [`Table`] and an exit status. Rows are computed in
//! parallel and collected in the order of [`RunConfig::tasks`].

use dislocation_kg::error::Error;
use dislocation_kg::heun::{build_coefficients, RadialWavefunction, DEFAULT_ORDER};
use dislocation_kg::model::{
    coulomb_eta, effective_angular_momentum, heun_params, DefectGeometry, MassProfile, QuantumNumbers,
};
use dislocation_kg::observables::{
    flux_step, persistent_current_ground, persistent_current_numeric, Branch, FluxSpectrum, SolvedFluxSpectrum,
    DEFAULT_FLUX_STEP,
};
use dislocation_kg::oracle::{fd_eigensolve_free, nearest_relative, ode_residual, FdGrid, RadialGrid, FD_TOLERANCE};
use dislocation_kg::quantization::{
    effective_momenta, energy_from_lambda, energy_ground_free, nu_ground_coulomb, solve_state, Energies, SpectrumPoint,
};
use rayon::prelude::*;

use crate::config::{RunConfig, ScenarioArg, Task, UsageError};
use crate::table::{Cell, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

pub const ODE_TOLERANCE: f64 = 1e-8;
pub const CASCADE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub exit_code: i32,
}

pub fn status_of(err: &Error) -> &'static str {
    match err {
        Error::NoRealSolution { .. } => "NO_REAL_SOLUTION",
        Error::NoRoots { .. } => "NO_ROOTS",
        Error::DegenerateDenominator { .. } => "DEGENERATE",
        Error::KinkDetected { .. } | Error::UndefinedAtZeroFlux { .. } => "KINK",
        _ => "ERROR",
    }
}

fn solve(cfg: &RunConfig, task: &Task) -> Result<Vec<SpectrumPoint>, Error> {
    let qn = QuantumNumbers::new(task.n, task.l, task.k)?;
    solve_state(qn, cfg.mass_m, &cfg.geometry(), &cfg.couplings(task.flux))
}

/// `(E_+, E_−)` columns of a solved point.
fn energy_pair(p: &SpectrumPoint) -> (Option<f64>, Option<f64>) {
    match p.energies {
        Energies::PlusMinus(e) => (Some(e), Some(-e)),
        Energies::Signed(e) if e >= 0.0 => (Some(e), None),
        Energies::Signed(e) => (None, Some(e)),
    }
}

/// ODE residual of `p`, after scaling its slope by `1 + detune`.
pub fn point_ode_residual(cfg: &RunConfig, p: &SpectrumPoint, b: f64) -> f64 {
    let grid = RadialGrid::for_state(p.qn.n, p.eff_abs);
    if cfg.detune == 0.0 {
        return ode_residual(&p.wavefunction, &p.params, &grid);
    }
    let nu = p.nu_solved * (1.0 + cfg.detune);
    let detuned = MassProfile::new(cfg.mass_m, nu)
        .and_then(|mass| heun_params(&mass, p.energies.representative(), p.qn.k, b, p.eff_abs));
    match detuned {
        Ok(params) => {
            let wf = RadialWavefunction::new(build_coefficients(&params, DEFAULT_ORDER), Some(p.qn.n as usize));
            ode_residual(&wf, &params, &grid)
        }
        Err(_) => f64::INFINITY,
    }
}

/// Relative distance from `E²` to the nearest finite-difference eigenvalue,
/// for states without Coulomb coupling.
pub fn point_fd_match(cfg: &RunConfig, p: &SpectrumPoint, b: f64) -> Option<f64> {
    if b != 0.0 {
        return None;
    }
    let mass = MassProfile::new(cfg.mass_m, p.nu_solved).ok()?;
    let grid = FdGrid::for_state(p.nu_solved, p.qn.n, p.eff_abs);
    let count = p.qn.n as usize + 3;
    let eigs = fd_eigensolve_free(&mass, p.eff_abs, p.qn.k, &grid, count).ok()?;
    let e = p.energies.representative();
    Some(nearest_relative(&eigs, e * e))
}

pub const SPECTRUM_COLUMNS: [&str; 9] = [
    "n",
    "l",
    "k",
    "flux",
    "root",
    "eff_momentum",
    "nu_solved",
    "E_plus",
    "E_minus",
];

pub fn spectrum(cfg: &RunConfig) -> Outcome {
    let mut columns = SPECTRUM_COLUMNS.to_vec();
    columns.push("truncation_residual");
    if cfg.oracle {
        columns.extend(["ode_residual", "fd_match"]);
    }
    columns.push("status");

    let unit = cfg.unit();
    let geom = cfg.geometry();
    let tasks = cfg.tasks();
    let blocks: Vec<(Vec<Vec<Cell>>, bool)> = tasks
        .par_iter()
        .map(|task| {
            let head = |root: Option<usize>| {
                vec![
                    Cell::Int(task.n as i64),
                    Cell::Int(task.l as i64),
                    Cell::float(task.k),
                    Cell::float(task.flux),
                    root.map_or(Cell::Float(None), |r| Cell::Int(r as i64)),
                ]
            };
            let coup = cfg.couplings(task.flux);
            match solve(cfg, task) {
                Ok(points) => {
                    let rows = points
                        .iter()
                        .map(|p| {
                            let (plus, minus) = energy_pair(p);
                            let mut row = head(Some(p.root_index));
                            row.extend([
                                Cell::float(p.eff),
                                Cell::float(p.nu_solved),
                                Cell::opt(plus.map(|e| e * unit)),
                                Cell::opt(minus.map(|e| e * unit)),
                                Cell::float(p.truncation_residual()),
                            ]);
                            if cfg.oracle {
                                row.push(Cell::float(point_ode_residual(cfg, p, coup.b)));
                                row.push(Cell::opt(point_fd_match(cfg, p, coup.b)));
                            }
                            row.push(Cell::text("OK"));
                            row
                        })
                        .collect();
                    (rows, true)
                }
                Err(err) => {
                    let qn = QuantumNumbers {
                        n: task.n,
                        l: task.l,
                        k: task.k,
                    };
                    let (eff, _, _) = effective_momenta(&qn, &geom, &coup);
                    let mut row = head(None);
                    row.push(Cell::float(eff));
                    row.extend(std::iter::repeat_n(Cell::Float(None), if cfg.oracle { 6 } else { 4 }));
                    row.push(Cell::text(status_of(&err)));
                    (vec![row], false)
                }
            }
        })
        .collect();

    let mut table = Table::new(columns);
    let mut ok = true;
    for (rows, good) in blocks {
        ok &= good;
        rows.into_iter().for_each(|r| table.push(r));
    }
    Outcome {
        table,
        exit_code: if ok { EXIT_OK } else { EXIT_SOLVER },
    }
}

pub fn current(cfg: &RunConfig) -> Result<Outcome, UsageError> {
    if cfg.scenario != ScenarioArg::Ab {
        return Err(UsageError("current requires --scenario ab".into()));
    }
    let branch: Branch = cfg.branch.into();
    let unit = cfg.unit();
    let geom = cfg.geometry();
    let step = flux_step(cfg.q, DEFAULT_FLUX_STEP);

    let blocks: Vec<(Vec<Vec<Cell>>, bool)> = cfg
        .tasks()
        .par_iter()
        .map(|task| {
            let qn = QuantumNumbers {
                n: task.n,
                l: task.l,
                k: task.k,
            };
            let phi = cfg.phi_b(task.flux);
            let sigma = effective_angular_momentum(task.l, task.k, &geom, &cfg.couplings(task.flux));
            let head = |root: Option<usize>| {
                vec![
                    Cell::Int(task.n as i64),
                    Cell::Int(task.l as i64),
                    Cell::float(task.k),
                    Cell::float(task.flux),
                    root.map_or(Cell::Float(None), |r| Cell::Int(r as i64)),
                    Cell::float(sigma),
                ]
            };
            let roots = match solve(cfg, task) {
                Ok(points) => points.len(),
                Err(err) => {
                    let mut row = head(None);
                    row.extend([Cell::Float(None), Cell::Float(None), Cell::Float(None)]);
                    row.push(Cell::text(status_of(&err)));
                    return (vec![row], false);
                }
            };
            let mut good = true;
            let rows = (0..roots)
                .map(|root| {
                    let spectrum = SolvedFluxSpectrum {
                        qn,
                        mass_m: cfg.mass_m,
                        geom,
                        q: cfg.q,
                        root,
                        branch,
                    };
                    let analytic = if task.n == 1 {
                        persistent_current_ground(cfg.mass_m, task.k, sigma, cfg.q, branch).ok()
                    } else {
                        None
                    };
                    let mut row = head(Some(root));
                    match persistent_current_numeric(&spectrum, phi, step) {
                        Ok(numeric) => {
                            row.push(Cell::opt(analytic.map(|i| i * unit)));
                            row.push(Cell::float(numeric * unit));
                            row.push(Cell::opt(analytic.map(|i| (i - numeric).abs() * unit)));
                            row.push(Cell::text("OK"));
                        }
                        Err(err) => {
                            let status = status_of(&err);
                            good &= status == "KINK";
                            row.extend([Cell::Float(None), Cell::Float(None), Cell::Float(None)]);
                            row.push(Cell::text(status));
                        }
                    }
                    row
                })
                .collect();
            (rows, good)
        })
        .collect();

    let mut table = Table::new(vec![
        "n",
        "l",
        "k",
        "flux",
        "root",
        "sigma",
        "current_analytic",
        "current_numeric",
        "discrepancy",
        "status",
    ]);
    let mut ok = true;
    for (rows, good) in blocks {
        ok &= good;
        rows.into_iter().for_each(|r| table.push(r));
    }
    Ok(Outcome {
        table,
        exit_code: if ok { EXIT_OK } else { EXIT_SOLVER },
    })
}

/// Worst case of one invariant over the configured sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    pub measured: f64,
    pub threshold: f64,
}

impl Check {
    fn new(name: &'static str, threshold: f64) -> Self {
        Self {
            name,
            cases: 0,
            measured: 0.0,
            threshold,
        }
    }

    fn record(&mut self, value: f64) {
        self.cases += 1;
        // NaN counts as a failure
        if value.is_nan() || value > self.measured {
            self.measured = if value.is_nan() { f64::INFINITY } else { value };
        }
    }

    pub fn status(&self) -> &'static str {
        if self.cases == 0 {
            "SKIP"
        } else if self.measured < self.threshold {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// Run every invariant that applies to the configuration.
pub fn verify_checks(cfg: &RunConfig) -> Vec<Check> {
    let geom = cfg.geometry();
    let tasks = cfg.tasks();
    let solved: Vec<(Task, Vec<SpectrumPoint>)> = tasks
        .par_iter()
        .filter_map(|t| solve(cfg, t).ok().map(|p| (*t, p)))
        .collect();

    let mut composition = Check::new("closed_form_composition", 1e-12);
    let mut cascade = Check::new("truncation_cascade", CASCADE_TOLERANCE);
    let mut residual = Check::new("ode_residual", ODE_TOLERANCE);
    let mut fd = Check::new("fd_match", FD_TOLERANCE);
    let mut coulomb = Check::new("coulomb_fixed_point", 1e-10);
    let mut periodicity = Check::new("flux_periodicity", 1e-12);
    // measured is 1 when any spectrum differs bitwise, else 0
    let mut minkowski = Check::new("minkowski_reduction", 0.5);
    let mut currents = Check::new("persistent_current", 1e-8);

    let per_point: Vec<(f64, f64, Option<f64>)> = solved
        .par_iter()
        .flat_map_iter(|(task, points)| {
            let b = cfg.couplings(task.flux).b;
            points.iter().map(move |p| {
                (
                    p.wavefunction.coefficients.tail_ratio(p.qn.n as usize),
                    point_ode_residual(cfg, p, b),
                    point_fd_match(cfg, p, b),
                )
            })
        })
        .collect();
    for (tail, res, fdm) in per_point {
        cascade.record(tail);
        residual.record(res);
        if let Some(x) = fdm {
            fd.record(x);
        }
    }

    for (task, points) in &solved {
        let b = cfg.couplings(task.flux).b;
        for p in points.iter().filter(|p| p.qn.n == 1) {
            if b == 0.0 {
                let (closed, _) = energy_ground_free(cfg.mass_m, p.eff_abs, p.qn.k);
                match energy_from_lambda(p.nu_solved, 1, p.eff_abs, p.qn.k) {
                    Ok((e, _)) => composition.record(rel(e, closed)),
                    Err(_) => composition.record(f64::INFINITY),
                }
            } else {
                let e = p.energies.representative();
                let eta = coulomb_eta(p.eff, b);
                let nu = nu_ground_coulomb(cfg.mass_m, b, eta, e);
                match energy_from_lambda(nu, 1, eta, p.qn.k) {
                    Ok((back, _)) => coulomb.record(rel(back.copysign(e), e)),
                    Err(_) => coulomb.record(f64::INFINITY),
                }
            }
        }
    }

    if cfg.scenario == ScenarioArg::Ab {
        let shifted = |task: &Task, dl: i32, dt: f64| {
            let t = Task {
                l: task.l + dl,
                flux: task.flux + dt,
                ..*task
            };
            solve(cfg, &t).map(|ps| ps.iter().map(|p| p.energies.representative()).collect::<Vec<_>>())
        };
        let diffs: Vec<f64> = tasks
            .par_iter()
            .filter_map(|task| {
                let (a, b) = (shifted(task, 0, 1.0).ok()?, shifted(task, 1, 0.0).ok()?);
                if a.len() != b.len() {
                    return Some(f64::INFINITY);
                }
                Some(a.iter().zip(&b).map(|(x, y)| rel(*x, *y)).fold(0.0, f64::max))
            })
            .collect();
        diffs.into_iter().for_each(|d| periodicity.record(d));

        let step = flux_step(cfg.q, DEFAULT_FLUX_STEP);
        let branch: Branch = cfg.branch.into();
        for task in tasks.iter().filter(|t| t.n == 1) {
            let qn = QuantumNumbers::ground(task.l, task.k);
            let spectrum = SolvedFluxSpectrum {
                qn,
                mass_m: cfg.mass_m,
                geom,
                q: cfg.q,
                root: 0,
                branch,
            };
            let phi = cfg.phi_b(task.flux);
            let Some(sigma) = spectrum.sigma(phi) else { continue };
            if sigma.abs() <= 10.0 * DEFAULT_FLUX_STEP {
                continue;
            }
            let analytic = persistent_current_ground(cfg.mass_m, task.k, sigma, cfg.q, branch);
            let numeric = persistent_current_numeric(&spectrum, phi, step);
            match (analytic, numeric) {
                (Ok(a), Ok(n)) => currents.record(rel(n, a)),
                _ => currents.record(f64::INFINITY),
            }
        }
    }

    // k = 0 leaves γ = l for any torsion
    let flat = DefectGeometry::minkowski();
    for task in &tasks {
        let qn = QuantumNumbers {
            n: task.n,
            l: task.l,
            k: 0.0,
        };
        let coup = cfg.couplings(task.flux);
        let (a, b) = (
            solve_state(qn, cfg.mass_m, &geom, &coup),
            solve_state(qn, cfg.mass_m, &flat, &coup),
        );
        if let (Ok(a), Ok(b)) = (a, b) {
            let same = a.len() == b.len()
                && a.iter().zip(&b).all(|(x, y)| {
                    x.nu_solved.to_bits() == y.nu_solved.to_bits()
                        && x.energies.representative().to_bits() == y.energies.representative().to_bits()
                });
            minkowski.record(if same { 0.0 } else { 1.0 });
        }
    }

    vec![
        composition,
        cascade,
        residual,
        fd,
        coulomb,
        periodicity,
        minkowski,
        currents,
    ]
}

pub fn verify(cfg: &RunConfig) -> Outcome {
    let checks = verify_checks(cfg);
    let mut table = Table::new(vec!["check", "cases", "measured", "threshold", "status"]);
    let mut ok = true;
    for c in &checks {
        ok &= c.status() != "FAIL";
        table.push(vec![
            Cell::text(c.name),
            Cell::Int(c.cases as i64),
            Cell::float(c.measured),
            Cell::float(c.threshold),
            Cell::text(c.status()),
        ]);
    }
    Outcome {
        table,
        exit_code: if ok { EXIT_OK } else { EXIT_VERIFY },
    }
}
