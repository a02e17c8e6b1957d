//! Surface families.

pub mod line;
pub mod pose;
pub mod ray;
pub mod registry;
pub mod reprojection;
pub mod rotation;
pub mod similarity;

pub use line::{hyperplane_surface_eval, Hyperplane, Line2};
pub use pose::{
    pose5_surface_eval, pose6_surface_eval, pose7_surface_eval, radial5_surface_eval, Correspondence,
    Pose5, Pose6, Pose7, Radial5,
};
pub use ray::{ray_surface_eval, Ray3, RayFamily};
pub use registry::AnyModel;
pub use reprojection::{angular_error, reprojection_angular_error, PoseHypothesis};
pub use similarity::{similarity_surface_eval, Sim2, SimilarityParams};
