//! Bound states of a relativistic scalar particle whose mass grows linearly
//! with the distance from a screw dislocation.
//!
//! The Klein-Gordon equation with mass `m + νρ` in the dislocation line
//! element reduces to a biconfluent Heun equation. Polynomial solutions
//! quantize the slope `ν` together with the energy, optionally in the
//! presence of a Coulomb-like scalar `b/ρ` or an Aharonov-Bohm flux line.
//!
//! * [`model`]: parameters and the effective angular momentum
//! * [`heun`]: series recurrence and radial wavefunctions
//! * [`quantization`]: closed-form and numerical slope/energy solutions
//! * [`oracle`]: ODE residuals and a finite-difference eigensolver
//! * [`observables`]: persistent currents
//!
//! ```
//! use dislocation_kg::prelude::*;
//!
//! let qn = QuantumNumbers::ground(0, 0.0);
//! let states = solve_state(qn, 1.0, &DefectGeometry::minkowski(), &Couplings::free()).unwrap();
//! assert_eq!(states[0].nu_solved, 1.5);
//! assert!((states[0].energies.plus().unwrap() - 6f64.sqrt()).abs() < 1e-15);
//! ```

pub mod error;
pub mod heun;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod quantization;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::heun::{build_coefficients, truncation_residual, RadialWavefunction, SeriesCoefficients};
    pub use crate::model::{
        coulomb_eta, effective_angular_momentum, heun_params, Couplings, DefectGeometry, HeunParams, MassProfile,
        QuantumNumbers,
    };
    pub use crate::observables::{persistent_current_ground, persistent_current_numeric, Branch, FluxSpectrum};
    pub use crate::oracle::{fd_eigensolve_free, normalization, ode_residual, FdGrid, RadialGrid};
    pub use crate::quantization::{
        energy_from_lambda, energy_ground_coulomb, energy_ground_free, nu_ground_coulomb, nu_ground_free,
        solve_general_n, solve_state, Energies, Scenario, SpectrumPoint,
    };
}

// The guide's snippets run as doctests so the book cannot drift from the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/heun.md")]
    mod heun {}
    #[doc = include_str!("../../../book/src/quantization.md")]
    mod quantization {}
    #[doc = include_str!("../../../book/src/coulomb.md")]
    mod coulomb {}
    #[doc = include_str!("../../../book/src/flux.md")]
    mod flux {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
