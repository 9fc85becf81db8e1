//! Fast-forwarding of non-unitary blocks `e^{-L t}`.

pub mod amplitude;
pub mod gaussian;
pub mod stochastic;

pub use amplitude::{amplitude_composite, approximate_exp_at_amplitude, AmplitudeOptions, BlockEvaluation};
pub use gaussian::{gaussian_cutoff, gaussian_ff, GaussianQuadrature};
pub use stochastic::{piecewise_stochastic_ff, StochasticEstimate, StochasticOptions};
