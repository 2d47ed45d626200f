//! Spectral theory of periodic Schrödinger operators `Δ + V` on `Z^d`.

pub mod bands;
pub mod certify;
pub mod constructions;
pub mod dos;
pub mod error;
pub mod floquet;
pub mod lattice;
pub mod linalg;
pub mod poly;

pub use error::{Error, ErrorClass, Result};
pub use floquet::{
    build_momentum, build_space, eigensystem, refinement_partition, Basis, FloquetMatrix,
    MomentumBuilder, Quasimomentum,
};
pub use lattice::{
    fourier_forward, fourier_inverse, reperiodize, unit_phase, FourierCoefficients, PeriodVector,
    PeriodicPotential,
};
pub use linalg::EigenSystem;
pub use bands::{
    band_extrema, band_length_bound, compute_bands, increase_points, overlap_margin, spectrum,
    spectrum_and_gaps, BandStructure, BrillouinGrid, Interval, SpectrumResult,
};
pub use dos::{
    density_ratio, density_ratio_bound, dos_stieltjes, ids, ids_finite_volume, moments,
    spectral_density, DensityRatio, FiberSamples, IdsCurve, SourceVector, SpectralMeasure,
    WeightedSamples,
};
pub use certify::{
    certify_simplicity, char_poly_e_derivative_in_v, char_poly_in_u, char_poly_in_v,
    normality_residual, root_asymptotics_check, CertificateReport, RootAsymptoticsReport,
    TorusOperator, Variable, Verdict,
};
pub use poly::{sylvester_resultant, sylvester_resultant_log, Resultant, UnivariatePoly};
pub use constructions::{
    bs_interval_check, checkerboard, lp_builder, staircase, verify_checkerboard_gap,
    CheckerboardReport, LimitPeriodicPlan, PlanStage, RandomGenerator, StageGenerator,
    ZeroGenerator,
};
