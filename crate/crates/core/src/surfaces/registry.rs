//! Runtime selection of a surface family by tag.

use crate::error::Result;
use crate::scalar::Scalar;
use crate::surface::{Dims, Model, ModelTag, SpaceMap};
use crate::surfaces::{Hyperplane, Line2, Pose5, Pose6, Pose7, Radial5, RayFamily, Sim2};

/// A model of any registered family.
#[derive(Debug, Clone)]
pub enum AnyModel<T> {
    Line2(Model<T, Line2>),
    Hyperplane(Model<T, Hyperplane>),
    Pose5(Model<T, Pose5<T>>),
    Pose6(Model<T, Pose6>),
    Pose7(Model<T, Pose7<T>>),
    Radial5(Model<T, Radial5<T>>),
    Ray3(Model<T, RayFamily>),
    Sim2(Model<T, Sim2<T>>),
}

/// Runs `$body` with `$m` bound to the concrete model inside an [`AnyModel`].
#[macro_export]
macro_rules! with_model {
    ($any:expr, $m:ident => $body:expr) => {
        match $any {
            $crate::surfaces::AnyModel::Line2($m) => $body,
            $crate::surfaces::AnyModel::Hyperplane($m) => $body,
            $crate::surfaces::AnyModel::Pose5($m) => $body,
            $crate::surfaces::AnyModel::Pose6($m) => $body,
            $crate::surfaces::AnyModel::Pose7($m) => $body,
            $crate::surfaces::AnyModel::Radial5($m) => $body,
            $crate::surfaces::AnyModel::Ray3($m) => $body,
            $crate::surfaces::AnyModel::Sim2($m) => $body,
        }
    };
}

impl<T: Scalar> AnyModel<T> {
    /// Default family configuration for `tag` over `map`. Hyperplanes take
    /// their dimension from the map.
    pub fn new(tag: ModelTag, map: SpaceMap<T>) -> Result<Self> {
        Ok(match tag {
            ModelTag::Line2 => AnyModel::Line2(Model::new(Line2, map)?),
            ModelTag::Hyperplane => {
                AnyModel::Hyperplane(Model::new(Hyperplane::new(map.dim())?, map)?)
            }
            ModelTag::Pose5 => AnyModel::Pose5(Model::new(Pose5::default(), map)?),
            ModelTag::Pose6 => AnyModel::Pose6(Model::new(Pose6, map)?),
            ModelTag::Pose7 => AnyModel::Pose7(Model::new(Pose7::default(), map)?),
            ModelTag::Radial5 => AnyModel::Radial5(Model::new(Radial5::default(), map)?),
            ModelTag::Ray3 => AnyModel::Ray3(Model::new(RayFamily, map)?),
            ModelTag::Sim2 => AnyModel::Sim2(Model::new(Sim2::default(), map)?),
        })
    }

    pub fn tag(&self) -> ModelTag {
        with_model!(self, m => m.tag())
    }

    pub fn dims(&self) -> Dims {
        with_model!(self, m => m.dims())
    }

    pub fn map(&self) -> &SpaceMap<T> {
        with_model!(self, m => &m.map)
    }

    pub fn free_axes(&self) -> Vec<usize> {
        with_model!(self, m => m.free_axes().to_vec())
    }

    pub fn dep_axes(&self) -> Vec<usize> {
        with_model!(self, m => m.dep_axes().to_vec())
    }

    pub fn axis_names(&self) -> Vec<String> {
        with_model!(self, m => m.axis_names())
    }
}
