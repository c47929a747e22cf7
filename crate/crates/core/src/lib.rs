//! Variational solution of the one-electron Dirac equation by the
//! constrained-component min-max principle.
//!
//! For a fixed upper component `u`, the energy is maximized over the lower
//! component `l = Ωu`; the result is then minimized over `u`. The positive
//! stationary value is an upper bound to the bound-state energy and cannot
//! collapse into the negative continuum. The crate also carries the
//! finite-basis machinery (kinetic balance, partitioned min-max, the
//! negative-energy pseudopotential) used to contrast it with plain
//! diagonalization.
//!
//! All routines are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`, which is what the accuracy targets
//! in the documentation assume.
//!
//! ```
//! use dirac_minmax::{outer_minimize, Constants64, CouplingFamily, PotentialSpec64, Scan1DConfig, TrialFamily};
//!
//! let k = Constants64::default();
//! let v = PotentialSpec64::coulomb(1.0, &k).unwrap();
//! let range = Scan1DConfig::new(0.25, 4.0, 41).unwrap();
//! let res = outer_minimize(TrialFamily::Sto(1), CouplingFamily::KineticBalance, &v, &k, &range).unwrap();
//! let c = k.c();
//! assert!((res.shift - (-0.5 - 1.0 / (8.0 * c * c))).abs() < 1e-9);
//! assert!((res.zeta_star - 1.0).abs() < 1e-4);
//! ```

pub mod driver;
pub mod error;
pub mod functional;
pub mod integrals;
pub mod linalg;
pub mod matrix;
pub mod model;
pub mod optimize;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod stationary;

pub use driver::{
    dft_fallacy_scan, fig5_scan, inner_maximize, inner_minimize, maxmin_spurious, outer_minimize, shower_scan,
    virial_check, MinMaxResult, Scan1DConfig, ScanRecord, TrialFamily,
};
pub use error::{Error, Result};
pub use functional::{
    coupling_curvature, energy, materialize_lower, CouplingFamily, CouplingProfile, CouplingSpec, EnergyBreakdown,
};
pub use model::{
    charge_conjugate, gamma_kappa, sigma_p_apply, Component, Constants, PotentialSpec, RadialFunction, RadialTerm,
    SpinorChannel, SpinorTrial, SPEED_OF_LIGHT_AU,
};
pub use linalg::{generalized_eigen, Matrix};
pub use matrix::{
    build_blocks, collapse_demo, diagonalize, kinetic_balance_basis, nepp_apply, partitioned_minmax, BasisSet,
    LowerFamily, MatrixBlocks,
};
pub use optimize::OptimizerConfig;
pub use quadrature::QuadratureConfig;
pub use scalar::Real;
pub use stationary::{optimal_lower, series_energy, stationary_negative, stationary_positive, Branch, StationarySolution};

pub type Constants64 = Constants<f64>;
pub type RadialFunction64 = RadialFunction<f64>;
pub type Component64 = Component<f64>;
pub type PotentialSpec64 = PotentialSpec<f64>;
pub type CouplingSpec64 = CouplingSpec<f64>;
pub type BasisSet64 = BasisSet<f64>;
pub type MatrixBlocks64 = MatrixBlocks<f64>;
pub type MinMaxResult64 = MinMaxResult<f64>;
pub type StationarySolution64 = StationarySolution<f64>;
