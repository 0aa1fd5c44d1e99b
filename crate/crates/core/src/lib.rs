//! Secrecy metrics of RIS-assisted wiretap links with an eavesdropper at
//! an unknown position in an annulus around the surface.
//!
//! Each metric is available three ways: closed forms built on Meijer G
//! functions ([`metrics`]), direct quadrature of the defining integrals
//! ([`quad`]), and Monte-Carlo simulation of the physical channel ([`mc`]).

// `!(x > 0.0)` style guards reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod error;
pub mod mc;
pub mod metrics;
pub mod quad;
pub mod specfun;
pub mod stats;
pub mod validate;

pub use channel::{
    dist_gamma_b, dist_gamma_e, eve_distance_power_pdf, CascadeLaw, Distribution, Geometry,
    PhaseDesign, SecrecyThreshold, SystemParams,
};
pub use error::{Error, Result};
pub use mc::{estimate_metric, EstimateResult, Execution};
pub use metrics::{
    pnz, secrecy_capacity, sop_exact, sop_lower, Method, MetricKind, MetricResult, SeriesPolicy,
};
