//! Seeded synthetic instances with planted ground truth, their text
//! serialization, and a brute-force voting reference.
//!
//! All generators draw from `ChaCha8Rng::seed_from_u64(seed)`, so a seed
//! reproduces the same instance on every platform.

mod format;
mod generators;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::surface::{ModelTag, ParametricSurface, SpaceMap};
use crate::surfaces::line::{hyperplane_surface_from_point, line_surface_from_point};
use crate::surfaces::pose::{pose5_surface, projective_surface, radial5_surface, Correspondence};
use crate::surfaces::ray::{ray_surface, Ray3};
use crate::surfaces::similarity::similarity_surface;
use crate::surfaces::AnyModel;

pub use oracle::brute_force_vote;
pub use format::{load_instance, parse_instance, save_instance, write_instance};
pub use generators::{
    gen_alignment_instance, gen_correspondence_free_instance, gen_hyperplane_instance,
    gen_line_instance, gen_pose_instance, gen_ray_instance, AlignmentBracket,
};

/// Input items of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Items<T> {
    /// Data points for line and hyperplane fitting, `d` coordinates each.
    Points(Vec<Vec<T>>),
    Correspondences(Vec<Correspondence<T>>),
    Rays(Vec<Ray3<T>>),
    /// Hypothetical matches `p -> q` for similarity alignment.
    Pairs(Vec<([T; 2], [T; 2])>),
}

impl<T> Items<T> {
    pub fn len(&self) -> usize {
        match self {
            Items::Points(v) => v.len(),
            Items::Correspondences(v) => v.len(),
            Items::Rays(v) => v.len(),
            Items::Pairs(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Planted solution: a physical voting-space point and the ids of the items
/// generated consistent with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth<T> {
    pub params: Vec<T>,
    pub inlier_ids: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance<T> {
    pub model_tag: ModelTag,
    pub items: Items<T>,
    pub ground_truth: Option<GroundTruth<T>>,
    pub noise_sigma: T,
    pub seed: u64,
    pub space_map: SpaceMap<T>,
    /// Nominal focal length of pose instances.
    pub f0: Option<T>,
}

impl<T: Scalar> ProblemInstance<T> {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.space_map.dim()
    }

    /// The default model of the instance's family over its space map.
    pub fn model(&self) -> Result<AnyModel<T>> {
        AnyModel::new(self.model_tag, self.space_map.clone())
    }

    /// One surface per item, with the item index as id. Items that cannot
    /// form a surface (a similarity source at the origin) are skipped.
    pub fn surfaces(&self, model: &AnyModel<T>) -> Result<Vec<ParametricSurface<T>>> {
        if model.tag() != self.model_tag {
            return Err(Error::MixedModels(self.model_tag, model.tag()));
        }
        let id = |i: usize| i as u32;
        Ok(match (model, &self.items) {
            (AnyModel::Line2(m), Items::Points(p)) => p
                .iter()
                .enumerate()
                .map(|(i, p)| line_surface_from_point(m, [p[0], p[1]], id(i)))
                .collect(),
            (AnyModel::Hyperplane(m), Items::Points(p)) => p
                .iter()
                .enumerate()
                .map(|(i, p)| hyperplane_surface_from_point(m, p, id(i)))
                .collect(),
            (AnyModel::Pose5(m), Items::Correspondences(c)) => {
                c.iter().enumerate().map(|(i, c)| pose5_surface(m, c, id(i))).collect()
            }
            (AnyModel::Pose6(m), Items::Correspondences(c)) => {
                c.iter().enumerate().map(|(i, c)| projective_surface(m, c, id(i))).collect()
            }
            (AnyModel::Pose7(m), Items::Correspondences(c)) => {
                c.iter().enumerate().map(|(i, c)| projective_surface(m, c, id(i))).collect()
            }
            (AnyModel::Radial5(m), Items::Correspondences(c)) => {
                c.iter().enumerate().map(|(i, c)| radial5_surface(m, c, id(i))).collect()
            }
            (AnyModel::Ray3(m), Items::Rays(r)) => {
                r.iter().enumerate().map(|(i, r)| ray_surface(m, r, id(i))).collect()
            }
            (AnyModel::Sim2(m), Items::Pairs(p)) => p
                .iter()
                .enumerate()
                .filter_map(|(i, (p, q))| similarity_surface(m, *p, *q, id(i)).ok())
                .collect(),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "items do not match model {}",
                    self.model_tag
                )))
            }
        })
    }

    /// The same instance in another scalar type.
    pub fn cast<U: Scalar>(&self) -> ProblemInstance<U> {
        let c = |v: T| U::from_f64(v.to_f64_lossy()).unwrap_or_else(U::nan);
        let cv = |v: &[T]| v.iter().map(|&x| c(x)).collect::<Vec<U>>();
        let items = match &self.items {
            Items::Points(p) => Items::Points(p.iter().map(|p| cv(p)).collect()),
            Items::Correspondences(cs) => Items::Correspondences(
                cs.iter()
                    .map(|k| Correspondence::new(k.w.map(c), c(k.xi), c(k.eta)))
                    .collect(),
            ),
            Items::Rays(rs) => Items::Rays(
                rs.iter()
                    .map(|r| Ray3 { a: c(r.a), b: c(r.b), c: c(r.c), d: c(r.d) })
                    .collect(),
            ),
            Items::Pairs(ps) => Items::Pairs(ps.iter().map(|(p, q)| (p.map(c), q.map(c))).collect()),
        };
        ProblemInstance {
            model_tag: self.model_tag,
            items,
            ground_truth: self.ground_truth.as_ref().map(|g| GroundTruth {
                params: cv(&g.params),
                inlier_ids: g.inlier_ids.clone(),
            }),
            noise_sigma: c(self.noise_sigma),
            seed: self.seed,
            space_map: SpaceMap { lo: cv(&self.space_map.lo), hi: cv(&self.space_map.hi) },
            f0: self.f0.map(c),
        }
    }

    /// Planted parameters in normalized coordinates.
    pub fn truth_unit(&self) -> Option<Vec<T>> {
        self.ground_truth
            .as_ref()
            .map(|g| self.space_map.point_to_unit(&g.params))
    }
}
