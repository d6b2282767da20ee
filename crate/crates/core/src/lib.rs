//! Exact wave-interaction solution for two-component zone electrophoresis
//! (two diffusionless conservation laws with Riemann invariants), built with
//! the hodograph method, plus a finite-volume reference solver.
//!
//! The piecewise-constant initial plateau breaks into shocks and rarefaction
//! fans whose interactions are resolved in closed form ([`hodograph`]),
//! organised into zones and events ([`wavefield`]) and sampled on level lines
//! ([`isochrone`]). [`cauchy_general`] marches level lines for arbitrary
//! piecewise-constant data and [`fv_reference`] provides an independent
//! numerical check.

pub mod cauchy_general;
pub mod error;
pub mod fv_reference;
pub mod hodograph;
pub mod invariants;
pub mod isochrone;
pub mod numerics;
pub mod par;
pub mod profile;
pub mod wavefield;

pub use cauchy_general::{
    level_map, march_isochrone, seed_on_ray, seed_point, AbPlaneState, March, MarchOptions,
    PiecewiseInitialData,
};
pub use error::{Constraint, Error, Result};
pub use fv_reference::{fv_run, fv_run_with, l1_error, FvField, Grid1D, NumericalFlux};
pub use hodograph::{
    goursat_solution, riemann_green, CharacteristicBoundaryData, ImplicitSolution,
};
pub use invariants::{
    concentrations_to_invariants, invariants_to_concentrations, lambda_k, lax_admissible,
    rh_residual, validate_params, ConcentrationPair, Family, InvariantPair, MixtureParams,
};
pub use isochrone::{profile_at, profile_in, ShockBoundaryState};
pub use par::Execution;
pub use profile::{Profile, Sample, Tag, CSV_HEADER};
pub use wavefield::{
    CurveId, CurveKind, Event, EventLabel, EventTimes, Timeline, Wavefield, ZoneId,
};
