//! Instance families: CircleSquare lattices, grayscale images, color images
//! and weighted embedding clouds.
//!
//! Real-valued distances are quantized to integer costs with
//! `round(scale * euclidean distance)`. The default scales below put the cost
//! ranges of the generated families in the same bands as the reference
//! benchmark tables; they are calibrated guesses and are recorded in every
//! instance file header.

mod circle_square;
mod cloud;
mod image;
pub mod synth;

pub use circle_square::{disk_points, gen_circle_square, gen_circle_square_with, grid_points};
pub use cloud::{format_embeddings, parse_embeddings, read_embeddings};
pub use image::{
    color_image_to_points, image_to_distribution, parse_pnm, read_pnm, write_pgm, write_ppm,
    GrayImage, Pnm, RgbImage,
};

use thiserror::Error;

use crate::model::{validate_instance, ModelError, OTInstance};

pub const CIRCLE_SQUARE_SCALE: u64 = 10_000;
pub const MNIST_SCALE: u64 = 6;
pub const CIFAR_SCALE: u64 = 292;
pub const NLP_SCALE: u64 = 1_000_000;
/// Target total mass for image weight normalization.
pub const IMAGE_TOTAL_MASS: i64 = 1_000_000;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{0} is not a perfect square")]
    NotPerfectSquare(usize),
    #[error("image has no nonzero pixels")]
    BlankImage,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("weights unbalanced after rebalancing: {0} vs {1}")]
    Unbalanced(i64, i64),
    #[error("cannot rebalance: side with {total} total has too little slack to drop {excess}")]
    CannotRebalance { total: i64, excess: i64 },
    #[error("point cloud has {points} points but {weights} weights")]
    WeightCount { points: usize, weights: usize },
    #[error("weight {0} is not positive")]
    NonPositiveWeight(i64),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Weighted points in `dim`-dimensional space, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloudDistribution {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<i64>,
}

impl PointCloudDistribution {
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<i64>) -> Result<Self, DatasetError> {
        let points = coords.len().checked_div(dim).unwrap_or(0);
        if dim == 0 || !coords.len().is_multiple_of(dim) || points != weights.len() {
            return Err(DatasetError::WeightCount {
                points,
                weights: weights.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|&&w| w < 1) {
            return Err(DatasetError::NonPositiveWeight(w));
        }
        Ok(Self {
            dim,
            coords,
            weights,
        })
    }

    pub fn from_points(points: &[Vec<f64>], weights: Vec<i64>) -> Result<Self, DatasetError> {
        let dim = points.first().map_or(0, Vec::len);
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(DatasetError::DimensionMismatch(dim, p.len()));
        }
        Self::new(dim, points.concat(), weights)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.coords[k * self.dim..(k + 1) * self.dim]
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn total_weight(&self) -> i64 {
        self.weights.iter().sum()
    }

    /// Rescales weights to `max(1, floor(w * total / W))`.
    pub fn rescale(&mut self, total: i64) {
        let sum = self.total_weight() as i128;
        for w in &mut self.weights {
            *w = ((*w as i128 * total as i128 / sum) as i64).max(1);
        }
    }

    /// Removes `excess` units of mass, always from the currently largest
    /// weight, never dropping a weight below one.
    pub fn drop_mass(&mut self, mut excess: i64) -> Result<(), DatasetError> {
        let total = self.total_weight();
        if excess > total - self.weights.len() as i64 {
            return Err(DatasetError::CannotRebalance { total, excess });
        }
        while excess > 0 {
            let (k, &w) = self
                .weights
                .iter()
                .enumerate()
                .max_by_key(|&(k, &w)| (w, std::cmp::Reverse(k)))
                .expect("non-empty cloud");
            let take = excess.min(w - 1);
            self.weights[k] -= take;
            excess -= take;
        }
        Ok(())
    }
}

/// Distance-to-integer scale and target mass for image weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantizationPolicy {
    pub scale: u64,
    pub total_mass: i64,
}

impl QuantizationPolicy {
    pub fn new(scale: u64, total_mass: i64) -> Self {
        assert!(scale >= 1 && total_mass >= 1, "scale and mass must be >= 1");
        Self { scale, total_mass }
    }

    pub fn circle_square() -> Self {
        Self::new(CIRCLE_SQUARE_SCALE, 1)
    }

    pub fn mnist() -> Self {
        Self::new(MNIST_SCALE, IMAGE_TOTAL_MASS)
    }

    pub fn cifar() -> Self {
        Self::new(CIFAR_SCALE, 1)
    }

    pub fn nlp() -> Self {
        Self::new(NLP_SCALE, 1)
    }
}

/// Lowers the heavier side so both clouds carry the same total mass.
pub fn balance_pair(
    a: &mut PointCloudDistribution,
    b: &mut PointCloudDistribution,
) -> Result<(), DatasetError> {
    let (ta, tb) = (a.total_weight(), b.total_weight());
    match ta.cmp(&tb) {
        std::cmp::Ordering::Greater => a.drop_mass(ta - tb),
        std::cmp::Ordering::Less => b.drop_mass(tb - ta),
        std::cmp::Ordering::Equal => Ok(()),
    }
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `round(scale * distance)` as an integer cost.
#[inline]
pub fn quantize_distance(distance: f64, scale: u64) -> i64 {
    (distance * scale as f64).round() as i64
}

/// Pairwise quantized Euclidean costs between two balanced clouds.
pub fn build_instance(
    name: impl Into<String>,
    a: &PointCloudDistribution,
    b: &PointCloudDistribution,
    policy: QuantizationPolicy,
) -> Result<OTInstance, DatasetError> {
    if a.dim != b.dim {
        return Err(DatasetError::DimensionMismatch(a.dim, b.dim));
    }
    let (ta, tb) = (a.total_weight(), b.total_weight());
    if ta != tb {
        return Err(DatasetError::Unbalanced(ta, tb));
    }
    let mut cost = Vec::with_capacity(a.len() * b.len());
    for i in 0..a.len() {
        let p = a.point(i);
        cost.extend(
            (0..b.len()).map(|j| quantize_distance(euclidean(p, b.point(j)), policy.scale)),
        );
    }
    let inst = OTInstance::new(
        name,
        a.len(),
        b.len(),
        cost,
        a.weights.clone(),
        b.weights.clone(),
    )?
    .with_scale(policy.scale);
    debug_assert!(validate_instance(&inst).is_ok());
    Ok(inst)
}

/// Two images reduced to sparse pixel clouds, rebalanced, then costed.
pub fn image_pair_instance(
    name: impl Into<String>,
    a: &GrayImage,
    b: &GrayImage,
    policy: QuantizationPolicy,
) -> Result<OTInstance, DatasetError> {
    let mut da = image_to_distribution(a, policy)?;
    let mut db = image_to_distribution(b, policy)?;
    balance_pair(&mut da, &mut db)?;
    build_instance(name, &da, &db, policy)
}

/// Two color images as unit-weight `(x, y, r, g, b)` clouds.
pub fn color_pair_instance(
    name: impl Into<String>,
    a: &RgbImage,
    b: &RgbImage,
    policy: QuantizationPolicy,
) -> Result<OTInstance, DatasetError> {
    let da = color_image_to_points(a);
    let db = color_image_to_points(b);
    build_instance(name, &da, &db, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_instance;

    #[test]
    fn one_point_clouds_round_distance() {
        let a = PointCloudDistribution::from_points(&[vec![0.0, 0.0]], vec![1]).unwrap();
        let b = PointCloudDistribution::from_points(&[vec![1.5, 0.0]], vec![1]).unwrap();
        let inst = build_instance("d", &a, &b, QuantizationPolicy::new(10, 1)).unwrap();
        assert_eq!(inst.costs(), &[15]);
        assert_eq!(inst.scale(), Some(10));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = PointCloudDistribution::from_points(&[vec![0.0, 0.0]], vec![1]).unwrap();
        let b = PointCloudDistribution::from_points(&[vec![0.0]], vec![1]).unwrap();
        assert!(matches!(
            build_instance("d", &a, &b, QuantizationPolicy::new(1, 1)),
            Err(DatasetError::DimensionMismatch(2, 1))
        ));
    }

    #[test]
    fn unbalanced_clouds_are_rejected() {
        let a = PointCloudDistribution::from_points(&[vec![0.0]], vec![2]).unwrap();
        let b = PointCloudDistribution::from_points(&[vec![0.0]], vec![1]).unwrap();
        assert!(build_instance("d", &a, &b, QuantizationPolicy::new(1, 1)).is_err());
    }

    #[test]
    fn balance_drops_from_largest_weights() {
        let mut a =
            PointCloudDistribution::from_points(&[vec![0.0], vec![1.0], vec![2.0]], vec![5, 9, 2])
                .unwrap();
        let mut b = PointCloudDistribution::from_points(&[vec![0.0]], vec![12]).unwrap();
        balance_pair(&mut a, &mut b).unwrap();
        assert_eq!(a.weights(), &[5, 5, 2]);
        assert_eq!(a.total_weight(), b.total_weight());
    }

    #[test]
    fn identical_clouds_give_zero_diagonal() {
        let pts = vec![vec![0.1, 0.2], vec![0.7, 0.3], vec![0.4, 0.9]];
        let a = PointCloudDistribution::from_points(&pts, vec![1; 3]).unwrap();
        let inst = build_instance("same", &a, &a, QuantizationPolicy::new(1000, 1)).unwrap();
        assert!(validate_instance(&inst).is_ok());
        for i in 0..3 {
            assert_eq!(inst.cost(i, i), 0);
        }
    }

    #[test]
    fn zero_weight_rejected() {
        assert!(PointCloudDistribution::from_points(&[vec![0.0]], vec![0]).is_err());
    }
}
