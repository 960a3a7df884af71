//! Complex-time continuation of real-analytic autonomous ODEs.
//!
//! A real system `dx/dt = f(x)` is continued to `dz/dt = F(z)` over complex
//! time `t = sigma + i tau`. The crate integrates the holomorphic flow along
//! polylines in the time plane, samples Riemann-surface meshes of solution
//! trajectories, and classifies initial values as on or off a slow invariant
//! manifold from the Fourier spectrum of their imaginary-time trajectories.

pub mod eigen;
pub mod export;
pub mod expr;
pub mod fft;
pub mod field;
pub mod integrator;
pub mod sim;
pub mod spectral;
pub mod surface;
pub mod svg;

pub use num_complex::Complex64;

pub use eigen::{jacobian_spectrum, EigenError, JacobianSpectrum};
pub use expr::{parse_expression, EvalError, Expr, Params, ParseError, Span};
pub use field::{ComplexVector, FieldError, VectorField};
pub use integrator::{
    integrate_path, path_commutativity_defect, IntegrateError, IntegratorConfig, Status, TimePath,
    Trajectory,
};
pub use sim::{
    benchmark_truth, classifier_validation, invariance_residual, ConfusionTable, PointOutcome,
    SimError, SimGraph, Truth, TruthReport, ValidationSettings,
};
pub use spectral::{
    classify_sim_membership, imaginary_time_spectrum, suggest_fast_band, ClassificationReport,
    SpectralError, Spectrum, SpectrumSettings, Verdict, Window,
};
pub use surface::{
    cauchy_riemann_residual, sample_surface, CauchyRiemannResidual, Node, Rect, SurfaceError,
    SurfaceMesh,
};
pub use svg::{project_surface_svg, surface_svg, Axis, Projection, SvgError};
