//! Power-series solution of the biconfluent Heun equation.
//!
//! After factoring the asymptotic envelope out of the radial function,
//!
//! ```text
//! R(ξ) = exp(−ξ²/2) · exp(−αξ/2) · ξ^|ν| · G(ξ),
//! ```
//!
//! the remaining factor `G(ξ) = Σ a_k ξ^k` obeys the three-term recurrence
//!
//! ```text
//! a_{k+2} = [α(k+1) + τ̄] a_{k+1} / [(k+2)(k+2+2|ν|)]
//!         − [λ̄ − 2k]     a_k     / [(k+2)(k+2+2|ν|)]
//! a_1     = τ̄ / (1 + 2|ν|) · a_0,      a_0 = 1.
//! ```
//!
//! The same recurrence covers the free and flux cases (`μ = 0`) and the
//! Coulomb case (`μ ≠ 0`). The series terminates at degree `n` exactly when
//! `λ̄ = 2n` and `a_{n+1} = 0`.

use crate::error::{Error, Result};
use crate::model::HeunParams;

/// Default number of series coefficients beyond `a_0`.
pub const DEFAULT_ORDER: usize = 64;

/// Relative size `|a_{n+1}| / max_{j≤n} |a_j|` below which the series is
/// declared truncated at degree `n`.
pub const TRUNCATION_TOL: f64 = 1e-10;

/// Tolerance on `|λ̄ − 2n|`, relative to the magnitudes that enter `λ̄`.
pub const LAMBDA_TOL: f64 = 1e-10;

/// Coefficients `a_0..=a_N` of the Heun series for one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCoefficients {
    coeffs: Vec<f64>,
    params: HeunParams,
    lambda: f64,
    tau: f64,
}

impl SeriesCoefficients {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn params(&self) -> &HeunParams {
        &self.params
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Highest index computed.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Partial sum through the last computed coefficient.
    pub fn evaluate(&self, xi: f64) -> f64 {
        self.evaluate_through(xi, self.order())
    }

    /// Partial sum `Σ_{j≤degree} a_j ξ^j`.
    pub fn evaluate_through(&self, xi: f64, degree: usize) -> f64 {
        let top = degree.min(self.order());
        self.coeffs[..=top].iter().rev().fold(0.0, |acc, &a| acc * xi + a)
    }

    /// `(G, G', G'')` of the partial sum through `degree`, by Horner.
    pub fn derivatives_through(&self, xi: f64, degree: usize) -> (f64, f64, f64) {
        let top = degree.min(self.order());
        let (mut g, mut dg, mut d2g) = (0.0, 0.0, 0.0);
        for &a in self.coeffs[..=top].iter().rev() {
            d2g = d2g * xi + 2.0 * dg;
            dg = dg * xi + g;
            g = g * xi + a;
        }
        (g, dg, d2g)
    }

    /// `max_{j≤n} |a_j|`, the scale used for relative truncation checks.
    pub fn scale_through(&self, n: usize) -> f64 {
        let top = n.min(self.order());
        self.coeffs[..=top].iter().fold(0.0f64, |acc, a| acc.max(a.abs()))
    }

    /// `|a_{n+1}| / max_{j≤n} |a_j|`.
    pub fn relative_residual(&self, n: usize) -> f64 {
        match self.coeffs.get(n + 1) {
            Some(a) => a.abs() / self.scale_through(n),
            None => 0.0,
        }
    }

    /// Largest `|a_j| / max_{i≤n} |a_i|` over `j` in `n+1..=N`.
    pub fn tail_ratio(&self, n: usize) -> f64 {
        let scale = self.scale_through(n);
        self.coeffs
            .iter()
            .skip(n + 1)
            .fold(0.0f64, |acc, a| acc.max(a.abs() / scale))
    }

    /// Whether the series is a degree-`n` polynomial within [`TRUNCATION_TOL`].
    pub fn is_truncated_at(&self, n: usize) -> bool {
        self.tail_ratio(n) <= TRUNCATION_TOL
    }
}

/// Run the recurrence from `a_0 = 1` up to `a_{n_max}` (at least `a_1`).
pub fn build_coefficients(params: &HeunParams, n_max: usize) -> SeriesCoefficients {
    let n_max = n_max.max(1);
    let lambda = params.lambda();
    let tau = params.tau();
    let two_nu = 2.0 * params.nu_abs;

    let mut coeffs = Vec::with_capacity(n_max + 1);
    coeffs.push(1.0);
    coeffs.push(tau / (1.0 + two_nu));
    for k in 0..n_max - 1 {
        let kf = k as f64;
        let denom = (kf + 2.0) * (kf + 2.0 + two_nu);
        let next = ((params.alpha * (kf + 1.0) + tau) * coeffs[k + 1] - (lambda - 2.0 * kf) * coeffs[k]) / denom;
        coeffs.push(next);
    }

    SeriesCoefficients {
        coeffs,
        params: *params,
        lambda,
        tau,
    }
}

/// Check `λ̄ = 2n` for the given parameters.
pub fn check_lambda(params: &HeunParams, n: u32) -> Result<()> {
    let lambda = params.lambda();
    let expected = 2.0 * n as f64;
    let scale = 1.0 + params.beta.abs() + 0.25 * params.alpha * params.alpha + 2.0 * params.nu_abs;
    let tolerance = LAMBDA_TOL * scale;
    if (lambda - expected).abs() > tolerance {
        return Err(Error::LambdaMismatch {
            lambda,
            expected,
            tolerance,
        });
    }
    Ok(())
}

/// `a_{n+1}` for parameters whose `λ̄` is already fixed to `2n`.
///
/// Zero (to round-off) exactly when the slope satisfies the quantization
/// condition for order `n`.
pub fn truncation_residual(params: &HeunParams, n: u32) -> Result<f64> {
    check_lambda(params, n)?;
    let series = build_coefficients(params, n as usize + 1);
    Ok(series.coeffs[n as usize + 1])
}

/// Radial function `R(ξ) = A · exp(−ξ²/2 − αξ/2) · ξ^|ν| · G(ξ)`.
///
/// With `truncation_order = Some(n)` the factor `G` is the degree-`n`
/// Heun polynomial; the computed tail `a_{j>n}` is round-off and is not
/// summed.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialWavefunction {
    pub coefficients: SeriesCoefficients,
    pub alpha: f64,
    pub nu_abs: f64,
    pub truncation_order: Option<usize>,
    pub amplitude: f64,
}

impl RadialWavefunction {
    pub fn new(coefficients: SeriesCoefficients, truncation_order: Option<usize>) -> Self {
        let params = *coefficients.params();
        Self {
            coefficients,
            alpha: params.alpha,
            nu_abs: params.nu_abs,
            truncation_order,
            amplitude: 1.0,
        }
    }

    /// Same state with its overall amplitude multiplied by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.amplitude *= factor;
        self
    }

    fn degree(&self) -> usize {
        self.truncation_order.unwrap_or_else(|| self.coefficients.order())
    }

    /// The series factor `G(ξ)`.
    pub fn series(&self, xi: f64) -> f64 {
        self.coefficients.evaluate_through(xi, self.degree())
    }

    /// `A · exp(−ξ²/2 − αξ/2) · ξ^|ν|`.
    pub fn envelope(&self, xi: f64) -> f64 {
        self.amplitude * (-0.5 * xi * xi - 0.5 * self.alpha * xi).exp() * xi.powf(self.nu_abs)
    }

    /// `R(ξ)` for `ξ ≥ 0`.
    pub fn evaluate(&self, xi: f64) -> f64 {
        self.envelope(xi) * self.series(xi)
    }

    /// `(R, R', R'')` at `ξ > 0` from exact derivatives of envelope and
    /// polynomial.
    pub fn derivatives(&self, xi: f64) -> (f64, f64, f64) {
        let (g, dg, d2g) = self.coefficients.derivatives_through(xi, self.degree());
        let env = self.envelope(xi);
        // log-derivative of the envelope and its derivative
        let f1 = -xi - 0.5 * self.alpha + self.nu_abs / xi;
        let f2 = -1.0 - self.nu_abs / (xi * xi);
        let r = env * g;
        let dr = env * (f1 * g + dg);
        let d2r = env * ((f2 + f1 * f1) * g + 2.0 * f1 * dg + d2g);
        (r, dr, d2r)
    }
}

/// `G(ξ)` as a partial sum of the series.
pub fn evaluate_g(coeffs: &SeriesCoefficients, xi: f64) -> f64 {
    coeffs.evaluate(xi)
}

/// `R(ξ)` of a wavefunction.
pub fn evaluate_r(wf: &RadialWavefunction, xi: f64) -> f64 {
    wf.evaluate(xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(nu_abs: f64, alpha: f64, beta: f64, mu: f64) -> HeunParams {
        HeunParams {
            nu_abs,
            alpha,
            beta,
            mu,
        }
    }

    /// Free-case parameters with `λ = 2n` imposed.
    fn free_params(n: u32, gamma: f64, alpha: f64) -> HeunParams {
        let beta = 2.0 * (n as f64 + gamma + 1.0) - 0.25 * alpha * alpha;
        params(gamma, alpha, beta, 0.0)
    }

    #[test]
    fn first_coefficients_match_closed_forms() {
        let p = params(0.7, 1.3, 2.1, 0.0);
        let s = build_coefficients(&p, 4);
        let g = p.nu_abs;
        let lambda = p.beta + p.alpha * p.alpha / 4.0 - 2.0 - 2.0 * g;
        assert_eq!(s.coeffs()[0], 1.0);
        assert_relative_eq!(s.coeffs()[1], p.alpha / 2.0, max_relative = 1e-15);
        let a2 = p.alpha * p.alpha * (2.0 * g + 3.0) / (8.0 * (2.0 + 2.0 * g)) - lambda / (2.0 * (2.0 + 2.0 * g));
        assert_relative_eq!(s.coeffs()[2], a2, max_relative = 1e-14);
    }

    #[test]
    fn coulomb_d2_matches_closed_form() {
        let p = params(1.1, 1.7, 0.4, 0.3);
        let s = build_coefficients(&p, 3);
        let eta = p.nu_abs;
        let tau = p.alpha / 2.0 * (2.0 * eta + 1.0) - p.mu;
        let lambda = p.lambda();
        assert_relative_eq!(s.coeffs()[1], tau / (1.0 + 2.0 * eta), max_relative = 1e-15);
        let d2 =
            tau * (p.alpha + tau) / (2.0 * (2.0 + 2.0 * eta) * (1.0 + 2.0 * eta)) - lambda / (2.0 * (2.0 + 2.0 * eta));
        assert_relative_eq!(s.coeffs()[2], d2, max_relative = 1e-14);
    }

    #[test]
    fn massless_limit_zeroes_odd_seed() {
        let p = params(0.5, 0.0, 3.0, 0.0);
        let s = build_coefficients(&p, 2);
        assert_eq!(s.coeffs()[1], 0.0);
        assert_relative_eq!(
            s.coeffs()[2],
            -p.lambda() / (2.0 * (2.0 + 2.0 * 0.5)),
            max_relative = 1e-15
        );
    }

    #[test]
    fn series_evaluation_examples() {
        let s = build_coefficients(&params(0.3, 1.2, 0.5, 0.0), 10);
        assert_eq!(s.evaluate(0.0), 1.0);
        assert_relative_eq!(
            s.evaluate_through(2.0, 1),
            1.0 + 2.0 * s.coeffs()[1],
            max_relative = 1e-15
        );

        // ground free solution: α² = 8/(2|γ|+3), G = 1 + αξ/2
        for gamma in [0.0f64, 0.5, 2.0] {
            let alpha = (8.0 / (2.0 * gamma + 3.0)).sqrt();
            let s = build_coefficients(&free_params(1, gamma, alpha), 12);
            for xi in [0.3, 1.0, 2.5] {
                assert_relative_eq!(s.evaluate_through(xi, 1), 1.0 + 0.5 * alpha * xi, max_relative = 1e-14);
                assert_relative_eq!(s.evaluate(xi), 1.0 + 0.5 * alpha * xi, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn radial_function_examples() {
        let s = build_coefficients(&params(1.0, 1.0, 0.0, 0.0), 4);
        assert_eq!(RadialWavefunction::new(s, None).evaluate(0.0), 0.0);

        let s = build_coefficients(&params(0.0, 0.0, 2.0, 0.0), 4);
        let wf = RadialWavefunction::new(s, Some(0));
        assert_relative_eq!(wf.evaluate(1.0), (-0.5f64).exp(), max_relative = 1e-15);
        assert_eq!(wf.evaluate(0.0), 1.0);

        // m = 1, ν = 1.5, γ = 0
        let alpha = 2.0 / 1.5f64.sqrt();
        let wf = RadialWavefunction::new(build_coefficients(&free_params(1, 0.0, alpha), 8), Some(1));
        let expected = (-0.5f64).exp() * (-alpha / 2.0).exp() * (1.0 + alpha / 2.0);
        assert_relative_eq!(wf.evaluate(1.0), expected, max_relative = 1e-14);
    }

    #[test]
    fn truncation_residual_examples() {
        // ν = m²(|γ|+3/2) with m = 1
        for gamma in [0.0, 0.5, 1.0, 3.25] {
            let nu: f64 = gamma + 1.5;
            let p = free_params(1, gamma, 2.0 / nu.sqrt());
            assert!(truncation_residual(&p, 1).unwrap().abs() < 1e-14);
            let p = free_params(1, gamma, 2.0 / (2.0 * nu).sqrt());
            assert!(truncation_residual(&p, 1).unwrap().abs() > 1e-2);
        }
    }

    #[test]
    fn lambda_mismatch_is_reported() {
        let p = params(0.0, 1.0, 1.0, 0.0);
        assert!(matches!(truncation_residual(&p, 1), Err(Error::LambdaMismatch { .. })));
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let s = build_coefficients(&params(0.8, 1.4, 1.9, -0.2), 20);
        let wf = RadialWavefunction::new(s, None);
        let h = 1e-4;
        for xi in [0.2, 0.9, 1.7] {
            let (r, dr, d2r) = wf.derivatives(xi);
            assert_relative_eq!(r, wf.evaluate(xi), max_relative = 1e-14);
            let fd1 = (wf.evaluate(xi + h) - wf.evaluate(xi - h)) / (2.0 * h);
            let fd2 = (wf.evaluate(xi + h) - 2.0 * r + wf.evaluate(xi - h)) / (h * h);
            assert_relative_eq!(dr, fd1, max_relative = 1e-7);
            assert_relative_eq!(d2r, fd2, max_relative = 1e-5);
        }
    }

    proptest! {
        #[test]
        fn recurrence_is_self_consistent(
            g in 0.0f64..4.0, alpha in 0.0f64..4.0, beta in -5.0f64..10.0, mu in -2.0f64..2.0,
        ) {
            let p = params(g, alpha, beta, mu);
            let s = build_coefficients(&p, 40);
            let a = s.coeffs();
            let (lam, tau) = (s.lambda(), s.tau());
            let r0 = (1.0 + 2.0 * g) * a[1] - tau * a[0];
            prop_assert!(r0.abs() <= 1e-13 * (tau.abs() + 1.0));
            for k in 0..a.len() - 2 {
                let kf = k as f64;
                let lhs = (kf + 2.0) * (kf + 2.0 + 2.0 * g) * a[k + 2];
                let t1 = (alpha * (kf + 1.0) + tau) * a[k + 1];
                let t2 = (lam - 2.0 * kf) * a[k];
                let scale = lhs.abs().max(t1.abs()).max(t2.abs()).max(f64::MIN_POSITIVE);
                prop_assert!((lhs - t1 + t2).abs() <= 1e-13 * scale);
            }
        }

        #[test]
        fn mu_zero_reproduces_free_seed(g in 0.0f64..4.0, alpha in 0.0f64..4.0, beta in -5.0f64..10.0) {
            let s = build_coefficients(&params(g, alpha, beta, 0.0), 3);
            prop_assert!((s.coeffs()[1] - alpha / 2.0).abs() <= 1e-15 * (1.0 + alpha));
        }

        #[test]
        fn truncated_state_decays(g in 0.0f64..3.0, n in 1u32..4, alpha in 0.1f64..3.0) {
            let s = build_coefficients(&free_params(n, g, alpha), 10);
            let wf = RadialWavefunction::new(s, Some(n as usize));
            let far = wf.evaluate(30.0).abs();
            prop_assert!(far < 1e-100);
        }
    }
}
