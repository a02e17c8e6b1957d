//! Approximate-incidence voting for robust geometric model fitting.
//!
//! Data items become parametric surfaces `x_j = F_j(x; t) + f_j` in a
//! normalized voting cube `[0,1]^d`. [`voting::naive_vote`] renders every
//! surface on an ε-grid; [`voting::generalized_vote`] subdivides the cube
//! recursively and merges surfaces that are indistinguishable at the current
//! scale. Both report the point with the most ε-close surfaces together with
//! the ids of the data items behind them.
//!
//! Everything is generic over the scalar type (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`.

pub mod baselines;
pub mod datagen;
pub mod error;
pub mod geometry;
pub mod interval;
pub mod scalar;
pub mod surface;
pub mod surfaces;
pub mod voting;

pub use error::{DomainError, Error, Result};
pub use geometry::{subdivide, AaBox, Coords};
pub use interval::Interval;
pub use scalar::{Real, Scalar};
pub use surface::{Dims, Family, Model, ModelTag, ParametricSurface, SpaceMap};
pub use surfaces::AnyModel;

pub type Surface = ParametricSurface<f64>;
pub type Box64 = AaBox<f64>;
pub type Map64 = SpaceMap<f64>;
pub type Correspondence64 = surfaces::Correspondence<f64>;
pub type PoseHypothesis64 = surfaces::PoseHypothesis<f64>;
