//! Fourier-side propagators, spatial synthesis and decay fits.

pub mod experiment;
pub mod kernel;
pub mod spectral;

pub use experiment::{
    fit_exponent, geometric_ladder, run_decay_experiment, synthesize, DecayFit, Experiment, FitMode,
    Measure, NormSample, PropagatorRun,
};
pub use kernel::{companion, kernel_row, min_gap, propagator, propagator_poly, vandermonde_amplitudes};
pub use spectral::{inverse_transform, inverse_transform_above, CauchyData, Profile, SpatialField, SpectralGrid, Window};
