//! Theta functions on elliptic curves, the theta sections of the primary
//! Kodaira fibrations over them, and the projective embeddings and
//! symplectic forms those sections define.
//!
//! Everything numeric is generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases below fix `f64`.

pub mod bundles;
pub mod embedding;
pub mod error;
pub mod linalg;
pub mod quadrature;
pub mod scalar;
pub mod symplectic;
pub mod theta_core;
pub mod theta_m;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Bundle = bundles::BundleType<f64>;
pub type Point = bundles::TotalPoint<f64>;
pub type Policy = theta_core::TruncationPolicy<f64>;
pub type TauF64 = theta_core::Tau<f64>;
pub type Sections = theta_m::ThetaM<f64>;
pub type TwoForm = symplectic::TwoFormMatrix<f64>;
