//! Run configuration: flags, an optional JSON file, and sweep parsing.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use dislocation_kg::model::{Couplings, DefectGeometry};
use dislocation_kg::observables::Branch;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioArg {
    Free,
    Coulomb,
    Ab,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BranchArg {
    Plus,
    Minus,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Plus => Branch::Plus,
            BranchArg::Minus => Branch::Minus,
        }
    }
}

/// Command-line flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Coupling scenario
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioArg>,
    /// Rest mass m
    #[arg(long)]
    pub m: Option<f64>,
    /// Torsion parameter χ (Burgers vector over 2π)
    #[arg(long, allow_hyphen_values = true)]
    pub chi: Option<f64>,
    /// Coulomb-like coupling b
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Charge q
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<f64>,
    /// Flux ratio qΦ_B/2π: a value, a comma list, or start:stop:step
    #[arg(long, allow_hyphen_values = true)]
    pub flux: Option<String>,
    /// Angular quantum number: a value, a comma list, or lo..hi
    #[arg(long, allow_hyphen_values = true)]
    pub l: Option<String>,
    /// Axial momentum: comma list
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    /// Radial order n ≥ 1: a value, a comma list, or lo..hi
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Add ODE-residual and finite-difference columns
    #[arg(long)]
    pub oracle: bool,
    /// Report energies and currents in absolute units instead of units of m
    #[arg(long)]
    pub absolute: bool,
    /// Energy branch used by `current`
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    /// JSON file with any of the fields above; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output path (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Relative slope perturbation applied before residual checks
    #[arg(long, hide = true, allow_hyphen_values = true)]
    pub detune: Option<f64>,
}

/// A sweep as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Number(f64),
    List(Vec<f64>),
    Text(String),
}

impl SweepValue {
    fn as_text(&self) -> String {
        match self {
            SweepValue::Number(x) => format!("{x}"),
            SweepValue::List(xs) => xs.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(","),
            SweepValue::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scenario: Option<ScenarioArg>,
    pub mass_m: Option<f64>,
    pub chi: Option<f64>,
    pub b: Option<f64>,
    pub q: Option<f64>,
    pub flux: Option<SweepValue>,
    pub l: Option<SweepValue>,
    pub k: Option<SweepValue>,
    pub n: Option<SweepValue>,
    pub format: Option<Format>,
    pub oracle: Option<bool>,
    pub absolute: Option<bool>,
    pub branch: Option<BranchArg>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Fully resolved run parameters. Sweeps are sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: ScenarioArg,
    pub mass_m: f64,
    pub chi: f64,
    pub b: f64,
    pub q: f64,
    pub flux: Vec<f64>,
    pub l: Vec<i32>,
    pub k: Vec<f64>,
    pub n: Vec<u32>,
    pub format: Format,
    pub oracle: bool,
    pub absolute: bool,
    pub branch: BranchArg,
    pub detune: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioArg::Free,
            mass_m: 1.0,
            chi: 0.0,
            b: 0.0,
            q: 1.0,
            flux: vec![0.0],
            l: vec![0],
            k: vec![0.0],
            n: vec![1],
            format: Format::Csv,
            oracle: false,
            absolute: false,
            branch: BranchArg::Plus,
            detune: 0.0,
        }
    }
}

impl RunConfig {
    /// Defaults, overridden by the config file, overridden by flags.
    pub fn resolve(args: &RunArgs) -> Result<Self, UsageError> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let mut cfg = RunConfig::default();

        cfg.scenario = args.scenario.or(file.scenario).unwrap_or(cfg.scenario);
        cfg.mass_m = args.m.or(file.mass_m).unwrap_or(cfg.mass_m);
        cfg.chi = args.chi.or(file.chi).unwrap_or(cfg.chi);
        cfg.b = args.b.or(file.b).unwrap_or(cfg.b);
        cfg.q = args.q.or(file.q).unwrap_or(cfg.q);
        cfg.format = args.format.or(file.format).unwrap_or(cfg.format);
        cfg.branch = args.branch.or(file.branch).unwrap_or(cfg.branch);
        cfg.oracle = args.oracle || file.oracle.unwrap_or(false);
        cfg.absolute = args.absolute || file.absolute.unwrap_or(false);
        cfg.detune = args.detune.unwrap_or(0.0);

        let pick = |flag: &Option<String>, from_file: &Option<SweepValue>| {
            flag.clone().or_else(|| from_file.as_ref().map(SweepValue::as_text))
        };
        if let Some(s) = pick(&args.flux, &file.flux) {
            cfg.flux = parse_flux(&s)?;
        }
        if let Some(s) = pick(&args.l, &file.l) {
            cfg.l = parse_int_sweep(&s, "l")?;
        }
        if let Some(s) = pick(&args.k, &file.k) {
            cfg.k = parse_list(&s, "k")?;
        }
        if let Some(s) = pick(&args.n, &file.n) {
            let ns = parse_int_sweep(&s, "n")?;
            if ns.iter().any(|&n| n < 1) {
                return Err(usage("n must be at least 1"));
            }
            cfg.n = ns.into_iter().map(|n| n as u32).collect();
        }

        cfg.normalize();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply the scenario constraints and sort every sweep.
    pub fn normalize(&mut self) {
        match self.scenario {
            ScenarioArg::Free => {
                self.b = 0.0;
                self.flux = vec![0.0];
            }
            ScenarioArg::Coulomb => self.flux = vec![0.0],
            ScenarioArg::Ab => self.b = 0.0,
        }
        self.flux.sort_by(f64::total_cmp);
        self.flux.dedup();
        self.k.sort_by(f64::total_cmp);
        self.k.dedup();
        self.l.sort_unstable();
        self.l.dedup();
        self.n.sort_unstable();
        self.n.dedup();
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(usage(format!("{name} must be finite")))
            }
        };
        finite("m", self.mass_m)?;
        finite("chi", self.chi)?;
        finite("b", self.b)?;
        finite("q", self.q)?;
        finite("detune", self.detune)?;
        if self.mass_m <= 0.0 {
            return Err(usage("m must be positive"));
        }
        if self.scenario == ScenarioArg::Ab && self.q == 0.0 {
            return Err(usage("q must be nonzero with --scenario ab"));
        }
        for (name, empty) in [
            ("flux", self.flux.is_empty()),
            ("l", self.l.is_empty()),
            ("k", self.k.is_empty()),
            ("n", self.n.is_empty()),
        ] {
            if empty {
                return Err(usage(format!("{name} sweep is empty")));
            }
        }
        for &x in self.flux.iter().chain(&self.k) {
            finite("sweep value", x)?;
        }
        Ok(())
    }

    pub fn geometry(&self) -> DefectGeometry {
        DefectGeometry::from_chi(self.chi)
    }

    /// Couplings at flux ratio `t = qΦ_B/2π`.
    pub fn couplings(&self, t: f64) -> Couplings {
        match self.scenario {
            ScenarioArg::Free => Couplings::free(),
            ScenarioArg::Coulomb => Couplings::coulomb(self.b),
            ScenarioArg::Ab => Couplings::aharonov_bohm(self.q, self.phi_b(t)),
        }
    }

    pub fn phi_b(&self, t: f64) -> f64 {
        2.0 * PI * t / self.q
    }

    /// Factor applied to reported energies and currents.
    pub fn unit(&self) -> f64 {
        if self.absolute {
            1.0
        } else {
            1.0 / self.mass_m
        }
    }

    /// Every `(n, l, k, flux)` tuple in sorted order.
    pub fn tasks(&self) -> Vec<Task> {
        let mut out = Vec::with_capacity(self.n.len() * self.l.len() * self.k.len() * self.flux.len());
        for &n in &self.n {
            for &l in &self.l {
                for &k in &self.k {
                    for &flux in &self.flux {
                        out.push(Task { n, l, k, flux });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Task {
    pub n: u32,
    pub l: i32,
    pub k: f64,
    pub flux: f64,
}

fn parse_f64(s: &str, name: &str) -> Result<f64, UsageError> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| usage(format!("{name}: cannot parse '{s}' as a number")))?;
    if !x.is_finite() {
        return Err(usage(format!("{name}: '{s}' is not finite")));
    }
    Ok(x)
}

/// Comma-separated numbers.
pub fn parse_list(s: &str, name: &str) -> Result<Vec<f64>, UsageError> {
    let items: Vec<&str> = s.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    if items.is_empty() {
        return Err(usage(format!("{name} sweep is empty")));
    }
    items.into_iter().map(|t| parse_f64(t, name)).collect()
}

/// A single value, a comma list, or `start:stop:step` with both ends included.
pub fn parse_flux(s: &str) -> Result<Vec<f64>, UsageError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [_] => parse_list(s, "flux"),
        [start, stop, step] => {
            let (start, stop, step) = (
                parse_f64(start, "flux")?,
                parse_f64(stop, "flux")?,
                parse_f64(step, "flux")?,
            );
            if step <= 0.0 {
                return Err(usage("flux: step must be positive"));
            }
            if stop < start {
                return Err(usage("flux: empty range"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(usage("flux: too many points"));
            }
            Ok((0..count).map(|i| start + step * i as f64).collect())
        }
        _ => Err(usage(format!("flux: expected a value or start:stop:step, got '{s}'"))),
    }
}

/// A single integer, a comma list, or an inclusive range `lo..hi`.
pub fn parse_int_sweep(s: &str, name: &str) -> Result<Vec<i32>, UsageError> {
    let int = |t: &str| {
        t.trim()
            .parse::<i32>()
            .map_err(|_| usage(format!("{name}: cannot parse '{t}' as an integer")))
    };
    if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (int(lo)?, int(hi.trim_start_matches('='))?);
        if hi < lo {
            return Err(usage(format!("{name}: empty range {lo}..{hi}")));
        }
        return Ok((lo..=hi).collect());
    }
    let items: Vec<&str> = s.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    if items.is_empty() {
        return Err(usage(format!("{name} sweep is empty")));
    }
    items.into_iter().map(int).collect()
}
