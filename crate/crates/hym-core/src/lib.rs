//! Spectral solvers for prescribed trace-of-curvature (Hermitian-Yang-Mills
//! tensor) equations on flat Kähler tori.
//!
//! The crate covers, for the model bundle E = L^⊕r over T²ⁿ (n = 1, 2):
//!
//! - flat-torus spectral calculus (derivatives, Laplacian, Poisson
//!   inversion, quadrature) in [`geometry`];
//! - pointwise Hermitian matrix-field algebra in [`matrix`];
//! - the curvature operators of the model bundle together with their
//!   linearization in [`curvature`];
//! - Newton continuation solvers for the matrix equation Φ_H = Φ and the
//!   scalar equation e^{-φ}(F₀ + Δφ) = G, the reference normalization and
//!   the comparison check, in [`solver`];
//! - Chern-Weil integrals and quantitative Chern number inequalities on T⁴
//!   in [`chern`];
//! - the two-solution and nonexistence demonstrations for sign-changing
//!   scalar prescriptions in [`experiments`];
//! - HYMF binary persistence plus CSV reports in [`io`], and seeded
//!   band-limited random data in [`synth`].

pub mod chern;
pub mod curvature;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod solver;
pub mod synth;

pub use chern::{
    bundle_chern_integrals, bundle_inequality_check, bundle_invariants,
    kahler_invariants_and_check, random_kahler_curvature, BundleInvariants, ChernReport,
    CurvatureField, CurvatureKind,
};
pub use curvature::{
    connection_form, curvature_from_metric, hym_endomorphism, hym_endomorphism_raw, hym_residual,
    linearized_apply, scalar_line_curvature, BundleData, HymTarget,
};
pub use error::{HymError, Result};
pub use experiments::{
    build_cusp_profile, counterexample_pipeline, nonexistence_demo, q_of_t,
    CounterexampleArtifacts, CounterexampleOptions, NonexistenceReport,
};
pub use geometry::{Deriv, ScalarField, TorusGeometry};
pub use matrix::{MatrixField, OneFormMatrixField, POSITIVITY_FLOOR};
pub use solver::{
    comparison_check, normalize_reference, solve_kazdan_warner, solve_prescribed,
    IterateDiagnostics, SolveOptions, SolveReport, SolveStatus, COMPARISON_TOL,
};
