//! Characteristic-function toolkit: closed-form characteristic functions,
//! Gaussian-mollified densities, Fourier inversion of integrable
//! characteristic functions, and weak-convergence diagnostics built on L¹
//! distances between mollified densities.

pub mod charfn;
pub mod distribution;
pub mod error;
pub mod grid;
pub mod mollify;
pub mod converge;
pub mod oracle;
pub mod selfcheck;
pub mod special;

pub use charfn::{convolve, gaussian_mollify_cf, make_cf, CharFn, Integrability};
pub use distribution::DistributionSpec;
pub use error::{Error, Result};
pub use grid::{Axis, DensityField, Grid};
pub use mollify::{
    cf_l1_bound, invert_density_at, invert_density_grid, mollified_density_at, mollified_density_grid,
    truncation_radius, MollificationParams, QuadratureRule,
};
pub use converge::{
    cf_sup_error, convergence_certificate, gaussian_tail_prob, l1_distance, mass_in_box, tv_distance,
    ConvergenceReport,
};
pub use oracle::{empirical_cf, mc_tail_prob, mollified_histogram, sample, SampleBatch};
