//! Stationary boundary layers of the one-dimensional full compressible
//! Navier–Stokes equations for the inflow problem: existence decision,
//! existence curves in the `(u, θ)` phase plane, and layer profiles.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod gas;
pub mod integrator;
pub mod linear;
pub mod portrait;
pub mod sweep;
pub mod system;
pub mod tracer;

pub use engine::{
    compute_profile, decide, verify_decay, verify_residual, DecayReport, Engine, Outcome, Profile,
    Query, Reason, Tolerances, Verdict,
};
pub use error::{Error, Result};
pub use gas::{
    check_flux_condition, classify_regime, mach, pressure, EndState, FluxCheck, GasParams, Regime,
    RegimeKind,
};
pub use integrator::{
    integrate, Direction, Event, EventKind, EventSpec, IntegrationSettings, Trajectory,
};
pub use linear::{
    classify_degenerate, classify_transonic, eigen_2x2, tangent_line, transonic_frame,
    DegenerateClass, DegenerateKind, EigenPair, TangentBasis, TangentLine, TransonicFrame,
};
pub use portrait::{build_scene, portrait_svg, render_svg, PortraitOptions, Scene};
pub use sweep::{sweep, write_sweep_csv, SweepRow, SweepSpec};
pub use system::{build_system, PhasePoint, Region, SystemData};
pub use tracer::{
    curve_membership, trace_gamma, trace_sigma, Curve, CurveLabel, GammaBranch, Membership,
    Terminal, TraceOptions,
};
