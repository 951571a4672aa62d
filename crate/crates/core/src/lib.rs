//! Volumes, divisorial filtrations and stability invariants of big line
//! bundles.
//!
//! Two exactly computable backends implement [`GeometryModel`]: smooth
//! projective surfaces given by a Néron–Severi lattice ([`SurfaceModel`]),
//! and smooth projective toric varieties given by a fan ([`ToricModel`]).
//! On top of them, [`filtrations`] computes expected vanishing orders and
//! finite-level jumping numbers, and [`stability`] computes norms of
//! divisorial measures, their directional derivatives, β and δ invariants
//! and solutions of the non-Archimedean Monge–Ampère equation.

pub mod catalog;
pub mod error;
pub mod filtrations;
pub mod geometry;
pub mod linalg;
pub mod par;
pub mod polytope;
pub mod quadrature;
pub mod rational;
pub mod stability;
pub mod surface;
pub mod toric;

/// Version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, ErrorKind, Result};
pub use filtrations::{ExpectedOrder, FiltrationSpec, JumpingProfile};
pub use geometry::{DivisorClass, DivisorialMeasure, GeometryModel, OrderModel, Threshold, Tolerances, Valuation};
pub use par::Execution;
pub use rational::Rational;
pub use surface::{SurfaceModel, ZariskiDecomposition};
pub use toric::ToricModel;
