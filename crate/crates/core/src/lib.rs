//! Numerical laboratory for Hilbert geometries on strictly convex projective
//! domains: the metric and its Finsler norm, the exact geodesic flow and its
//! parallel transport, Lyapunov/transport exponents, projective group
//! machinery (reflection families, conjugacy enumeration, periodic-orbit
//! closed forms), and entropy estimators (volume growth, orbit counting,
//! boundary-shape bounds).
//!
//! The crate is organized around the chord-endpoint oracle of [`domain`]: all
//! metric quantities reduce to the euclidean distances from a point to the
//! two boundary hits of a line, and the flow, transport and curvature then
//! have closed forms that are evaluated, never integrated.

pub mod boundary;
pub mod config;
pub mod domain;
pub mod entropy;
pub mod flow;
pub mod group;
pub mod metric;
pub mod numerics;
pub mod projective;
pub mod report;
pub mod rng;
pub mod transport;

pub use domain::{ChordEndpoints, ConvexDomain, DomainSpec};
pub use flow::{flip, flow_point, curvature_scalar, FlowState, TangentVector};
pub use group::{GroupElement, Presentation};
pub use metric::MetricContext;
pub use projective::{adapted_chart, cross_ratio, AffineChart, Homography, ProjectivePoint};
pub use transport::{anosov_rates, eta_estimate, transport_norm_curve, OrbitRecord};
