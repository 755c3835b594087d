//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::Command;

use dislocation_kg::heun::{build_coefficients, RadialWavefunction, DEFAULT_ORDER};
use dislocation_kg::model::{
    coulomb_eta, effective_angular_momentum, heun_params, Couplings, DefectGeometry, MassProfile, QuantumNumbers,
};
use dislocation_kg::observables::{
    flux_step, persistent_current_ground, persistent_current_numeric, Branch, GroundFluxSpectrum, SolvedFluxSpectrum,
};
use dislocation_kg::oracle::{fd_eigensolve_free, ode_residual, FdGrid, RadialGrid};
use dislocation_kg::quantization::{
    energy_from_lambda, energy_ground_coulomb, energy_ground_free, nu_ground_coulomb, nu_ground_free, solve_state,
    SpectrumPoint,
};
use dislocation_kg::Error;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn solve(n: u32, l: i32, k: f64, m: f64, chi: f64, coup: &Couplings) -> Vec<SpectrumPoint> {
    let qn = QuantumNumbers::new(n, l, k).unwrap();
    solve_state(qn, m, &DefectGeometry::from_chi(chi), coup).unwrap_or_default()
}

/// Every point used by the cascade and residual criteria.
fn solved_points() -> Vec<(SpectrumPoint, f64, f64)> {
    let mut out = Vec::new();
    for n in 1..=3 {
        for l in 0..=2 {
            for k in [0.0, 1.0] {
                for chi in [0.0, 0.5] {
                    for m in [0.5, 1.0, 2.0] {
                        for p in solve(n, l, k, m, chi, &Couplings::free()) {
                            out.push((p, m, 0.0));
                        }
                    }
                }
            }
        }
    }
    for b in [-0.2, -0.1, -0.05, 0.05, 0.1, 0.2] {
        for l in [0, 1] {
            for k in [0.0, 1.0] {
                for chi in [0.0, 0.5] {
                    for p in solve(1, l, k, 1.0, chi, &Couplings::coulomb(b)) {
                        out.push((p, 1.0, b));
                    }
                }
            }
        }
    }
    for t in [0.3, 0.7, 1.3] {
        for l in -2..=2 {
            for k in [0.0, 1.0] {
                for p in solve(1, l, k, 1.0, 0.5, &Couplings::with_flux_ratio(t)) {
                    out.push((p, 1.0, 0.0));
                }
            }
        }
    }
    out
}

fn closed_form_composition() -> Verdict {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for m in [0.5, 1.0, 2.0] {
        for l in -3..=3 {
            for k in [-1.0, 0.0, 1.0] {
                for chi in [0.0, 0.25, 1.0] {
                    let geom = DefectGeometry::from_chi(chi);
                    let eff = effective_angular_momentum(l, k, &geom, &Couplings::free()).abs();
                    let nu = nu_ground_free(m, eff);
                    let (e, minus) = energy_from_lambda(nu, 1, eff, k).unwrap();
                    let (closed, closed_minus) = energy_ground_free(m, eff, k);
                    let direct = m * ((2.0 * eff + 3.0) * (eff + 2.0) + k * k / (m * m)).sqrt();
                    worst = worst
                        .max(rel(e, closed))
                        .max(rel(minus, closed_minus))
                        .max(rel(closed, direct));
                    cases += 1;
                }
            }
        }
    }
    verdict(
        worst < 1e-12,
        format!("{cases} cases, max rel err {worst:.2e} (< 1e-12)"),
    )
}

fn truncation_cascade(points: &[(SpectrumPoint, f64, f64)]) -> Verdict {
    let mut worst = 0.0f64;
    let mut short = false;
    for (p, _, _) in points {
        let c = &p.wavefunction.coefficients;
        short |= c.order() < 64;
        worst = worst.max(c.tail_ratio(p.qn.n as usize));
    }
    verdict(
        worst < 1e-10 && !short,
        format!(
            "{} states, max |a_j|/max|a_i| over n<j<=64: {worst:.2e} (< 1e-10)",
            points.len()
        ),
    )
}

fn ode_residuals(points: &[(SpectrumPoint, f64, f64)]) -> Verdict {
    let mut worst = 0.0f64;
    let mut weakest_detune = f64::INFINITY;
    for (p, m, b) in points {
        let grid = RadialGrid::for_state(p.qn.n, p.eff_abs);
        worst = worst.max(ode_residual(&p.wavefunction, &p.params, &grid));

        let mass = MassProfile::new(*m, p.nu_solved * 1.01).unwrap();
        let params = heun_params(&mass, p.energies.representative(), p.qn.k, *b, p.eff_abs).unwrap();
        let wf = RadialWavefunction::new(build_coefficients(&params, DEFAULT_ORDER), Some(p.qn.n as usize));
        weakest_detune = weakest_detune.min(ode_residual(&wf, &params, &grid));
    }
    verdict(
        worst < 1e-8 && weakest_detune > 1e-4,
        format!(
            "{} states, max residual {worst:.2e} (< 1e-8), min residual at 1% detune {weakest_detune:.2e} (> 1e-4)",
            points.len()
        ),
    )
}

fn fd_match() -> Verdict {
    let mut worst = 0.0f64;
    let (mut lo_ratio, mut hi_ratio) = (f64::INFINITY, 0.0f64);
    for l in 0..=2 {
        for k in [0.0, 1.0] {
            for chi in [0.0, 0.5] {
                let eff = (l as f64 - chi * k).abs();
                let nu = nu_ground_free(1.0, eff);
                let (e, _) = energy_ground_free(1.0, eff, k);
                let target = e * e;
                let mass = MassProfile::new(1.0, nu).unwrap();
                let grid = FdGrid::new(10.0, 4000).unwrap();
                let coarse = match fd_eigensolve_free(&mass, eff, k, &grid, 1) {
                    Ok(v) => v[0],
                    Err(_) => return verdict(false, format!("grid rejected at l={l} k={k} chi={chi}")),
                };
                let fine = fd_eigensolve_free(&mass, eff, k, &grid.refined(), 1).unwrap()[0];
                let (err_c, err_f) = (rel(coarse, target), rel(fine, target));
                worst = worst.max(err_c);
                let ratio = err_c / err_f;
                lo_ratio = lo_ratio.min(ratio);
                hi_ratio = hi_ratio.max(ratio);
            }
        }
    }
    verdict(
        worst < 1e-3 && lo_ratio >= 3.5 && hi_ratio <= 4.5,
        format!("12 cases, max rel err {worst:.2e} (< 1e-3), refinement ratio in [{lo_ratio:.3}, {hi_ratio:.3}] (within [3.5, 4.5])"),
    )
}

fn coulomb_fixed_point() -> Verdict {
    let mut worst = 0.0f64;
    let (mut branches, mut skipped) = (0, 0);
    for b in [-0.2, -0.1, -0.05, 0.05, 0.1, 0.2] {
        for l in [0, 1] {
            for k in [0.0, 1.0] {
                for chi in [0.0, 0.5] {
                    let eta = coulomb_eta(l as f64 - chi * k, b);
                    let pair = match energy_ground_coulomb(1.0, b, eta, k) {
                        Ok(p) => p,
                        Err(Error::NoRealSolution { .. }) => {
                            skipped += 1;
                            continue;
                        }
                        Err(e) => return verdict(false, format!("b={b} l={l} k={k} chi={chi}: {e}")),
                    };
                    for br in pair.iter().filter(|br| br.is_confining()) {
                        let nu = nu_ground_coulomb(1.0, b, eta, br.energy);
                        let (back, _) = energy_from_lambda(nu, 1, eta, k).unwrap();
                        let back = back.copysign(br.energy);
                        // the slope must also truncate the series at degree 1
                        let params = heun_params(&MassProfile::new(1.0, nu).unwrap(), br.energy, k, b, eta).unwrap();
                        let coeffs = build_coefficients(&params, 4);
                        worst = worst
                            .max(rel(back, br.energy))
                            .max(rel(nu, br.nu))
                            .max(coeffs.relative_residual(1));
                        branches += 1;
                    }
                }
            }
        }
    }

    // b -> 0: error against the free pair shrinks linearly
    let (free, _) = energy_ground_free(1.0, 0.5, 1.0);
    let errs: Vec<f64> = (2..=7)
        .map(|j| {
            let b = 10f64.powi(-j);
            let pair = energy_ground_coulomb(1.0, b, coulomb_eta(0.5, b), 1.0).unwrap();
            let e = pair.iter().map(|br| br.energy).fold(f64::MIN, f64::max);
            (e - free).abs()
        })
        .collect();
    let slopes: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log10()).collect();
    let linear = slopes.iter().all(|s| (s - 1.0).abs() < 0.05);
    let c = errs[errs.len() - 1] / 1e-7;
    verdict(
        worst < 1e-10 && linear && branches > 0,
        format!(
            "{branches} confining branches ({skipped} parameter sets without real roots), max loop err {worst:.2e} (< 1e-10); \
             b->0 error ~ {c:.3}*b, decade slopes {:.3}..{:.3}",
            slopes.iter().copied().fold(f64::INFINITY, f64::min),
            slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ),
    )
}

fn flux_periodicity() -> Verdict {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for t in [0.0, 0.3, 0.7] {
        for n in [1, 2] {
            for k in [0.0, 1.0] {
                for l in -5..5 {
                    let a = solve(n, l, k, 1.0, 0.5, &Couplings::with_flux_ratio(t + 1.0));
                    let b = solve(n, l + 1, k, 1.0, 0.5, &Couplings::with_flux_ratio(t));
                    if a.len() != b.len() {
                        return verdict(false, format!("root count differs at t={t} n={n} l={l} k={k}"));
                    }
                    for (x, y) in a.iter().zip(&b) {
                        worst = worst
                            .max(rel(x.energies.representative(), y.energies.representative()))
                            .max(rel(x.nu_solved, y.nu_solved));
                        cases += 1;
                    }
                }
            }
        }
    }
    verdict(
        worst < 1e-12,
        format!("{cases} states, max rel diff {worst:.2e} (< 1e-12)"),
    )
}

fn minkowski_reduction() -> Verdict {
    let flat = DefectGeometry::minkowski();
    let mut mismatches = 0;
    let mut cases = 0;
    for chi in [0.25, 0.5, 1.0, -0.75] {
        let geom = DefectGeometry::from_chi(chi);
        for l in -3..=3 {
            let eff = effective_angular_momentum(l, 0.0, &geom, &Couplings::free());
            mismatches += usize::from(eff.to_bits() != (l as f64).to_bits());
            for n in 1..=2 {
                let qn = QuantumNumbers::new(n, l, 0.0).unwrap();
                for coup in [
                    Couplings::free(),
                    Couplings::coulomb(0.1),
                    Couplings::with_flux_ratio(0.3),
                ] {
                    let (a, b) = (solve_state(qn, 1.0, &geom, &coup), solve_state(qn, 1.0, &flat, &coup));
                    match (a, b) {
                        (Ok(a), Ok(b)) => {
                            cases += 1;
                            let same = a.len() == b.len()
                                && a.iter().zip(&b).all(|(x, y)| {
                                    x.params == y.params
                                        && x.nu_solved.to_bits() == y.nu_solved.to_bits()
                                        && x.energies == y.energies
                                });
                            mismatches += usize::from(!same);
                        }
                        (Err(a), Err(b)) => {
                            cases += 1;
                            mismatches += usize::from(a.to_string() != b.to_string());
                        }
                        _ => mismatches += 1,
                    }
                }
            }
        }
    }
    verdict(
        mismatches == 0,
        format!("{cases} spectra, {mismatches} bitwise mismatches"),
    )
}

fn persistent_current() -> Verdict {
    let h = flux_step(1.0, 1e-5);
    let mut worst = 0.0f64;
    let mut flips = true;
    for sigma in [-1.3, -0.5, -0.1, 0.1, 0.5, 1.3] {
        for k in [0.0, 1.0] {
            for branch in [Branch::Plus, Branch::Minus] {
                let spectrum = GroundFluxSpectrum {
                    mass_m: 1.0,
                    l: 0,
                    k,
                    geom: DefectGeometry::minkowski(),
                    q: 1.0,
                    branch,
                };
                let phi = 2.0 * PI * sigma;
                let analytic = persistent_current_ground(1.0, k, sigma, 1.0, branch).unwrap();
                let numeric = persistent_current_numeric(&spectrum, phi, h).unwrap();
                let solved = SolvedFluxSpectrum {
                    qn: QuantumNumbers::ground(0, k),
                    mass_m: 1.0,
                    geom: DefectGeometry::minkowski(),
                    q: 1.0,
                    root: 0,
                    branch,
                };
                let numeric_solved = persistent_current_numeric(&solved, phi, h).unwrap();
                worst = worst.max(rel(numeric, analytic)).max(rel(numeric_solved, analytic));

                let mirrored = persistent_current_ground(1.0, k, -sigma, 1.0, branch).unwrap();
                let swapped = persistent_current_ground(1.0, k, sigma, 1.0, branch.flipped()).unwrap();
                flips &= mirrored == -analytic && swapped == -analytic;
            }
        }
    }
    verdict(
        worst < 1e-8 && flips,
        format!(
            "24 cases, max rel err {worst:.2e} (< 1e-8), sign flips {}",
            if flips { "hold" } else { "broken" }
        ),
    )
}

fn determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_dislocation-kg");
    let run = |format: &str| {
        Command::new(bin)
            .args([
                "spectrum",
                "--scenario",
                "ab",
                "--chi",
                "0.5",
                "--flux",
                "0:1:0.25",
                "--l=-1..1",
                "--k",
                "0,1",
                "--n",
                "1..2",
                "--oracle",
                "--format",
                format,
            ])
            .output()
            .expect("running the binary")
    };
    let mut detail = Vec::new();
    let mut pass = true;
    for format in ["csv", "json"] {
        let (a, b) = (run(format), run(format));
        let same = a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
        pass &= same;
        detail.push(format!(
            "{format}: {} bytes {}",
            a.stdout.len(),
            if same { "identical" } else { "differ" }
        ));
    }
    verdict(pass, detail.join(", "))
}

fn main() {
    let points = solved_points();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        (
            "ground-state closed-form composition",
            Box::new(closed_form_composition),
        ),
        ("truncation cascade", Box::new(|| truncation_cascade(&points))),
        (
            "ODE residual and detuning sensitivity",
            Box::new(|| ode_residuals(&points)),
        ),
        ("finite-difference oracle match", Box::new(fd_match)),
        ("Coulomb fixed point and b->0 limit", Box::new(coulomb_fixed_point)),
        ("flux periodicity", Box::new(flux_periodicity)),
        ("Minkowski reduction", Box::new(minkowski_reduction)),
        ("persistent current", Box::new(persistent_current)),
        ("determinism", Box::new(determinism)),
    ];

    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!v.pass);
        println!(
            "[{tag}] {}. {name}: {} ({:.2}s)",
            i + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
