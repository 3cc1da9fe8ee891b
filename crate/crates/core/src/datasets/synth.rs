//! Deterministic stand-ins for the image and text corpora.
//!
//! The handwritten-digit, photo and word-embedding inputs are not shipped with
//! the crate. These generators produce inputs with the same structure: sparse
//! 28x28 grayscale strokes, dense 32x32 color images, and weighted embedding
//! clouds with heavy-tailed token counts. Every generator is a pure function
//! of its seed.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{
    balance_pair, build_instance, color_pair_instance, image_pair_instance, DatasetError,
    GrayImage, PointCloudDistribution, QuantizationPolicy, RgbImage,
};
use crate::model::OTInstance;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x6f74_6265_6e63_6800)
}

/// A 28x28 digit-like image: a few thick quadratic strokes on black.
pub fn mnist_like_image(seed: u64) -> GrayImage {
    const SIZE: usize = 28;
    let mut rng = rng(seed);
    let mut acc = vec![0.0f64; SIZE * SIZE];
    let strokes = rng.random_range(1..=3);
    for _ in 0..strokes {
        let mut pt = || (rng.random_range(6.0..22.0), rng.random_range(5.0..23.0));
        let (p0, p1, p2) = (pt(), pt(), pt());
        for step in 0..=60 {
            let t = step as f64 / 60.0;
            let s = 1.0 - t;
            let x = s * s * p0.0 + 2.0 * s * t * p1.0 + t * t * p2.0;
            let y = s * s * p0.1 + 2.0 * s * t * p1.1 + t * t * p2.1;
            for py in (y as i64 - 2).max(0)..=(y as i64 + 2).min(SIZE as i64 - 1) {
                for px in (x as i64 - 2).max(0)..=(x as i64 + 2).min(SIZE as i64 - 1) {
                    let d2 = (px as f64 - x).powi(2) + (py as f64 - y).powi(2);
                    let v = (-d2 / 1.2).exp();
                    let cell = &mut acc[py as usize * SIZE + px as usize];
                    *cell = cell.max(v);
                }
            }
        }
    }
    let pixels = acc
        .iter()
        .map(|&v| {
            let p = (v * 255.0).round() as u32;
            if p < 24 {
                0
            } else {
                p
            }
        })
        .collect();
    GrayImage::new(SIZE, SIZE, pixels)
}

/// A 32x32 color image: a two-color gradient with a few soft colored blobs.
pub fn cifar_like_image(seed: u64) -> RgbImage {
    const SIZE: usize = 32;
    let mut rng = rng(seed);
    let mut color = || -> [f64; 3] {
        [
            rng.random_range(0.0..255.0),
            rng.random_range(0.0..255.0),
            rng.random_range(0.0..255.0),
        ]
    };
    let (top, bottom) = (color(), color());
    let blobs: Vec<([f64; 3], f64, f64, f64)> = (0..rng.random_range(2..=4))
        .map(|_| {
            (
                [
                    rng.random_range(0.0..255.0),
                    rng.random_range(0.0..255.0),
                    rng.random_range(0.0..255.0),
                ],
                rng.random_range(0.0..32.0),
                rng.random_range(0.0..32.0),
                rng.random_range(3.0..9.0),
            )
        })
        .collect();
    let noise = Normal::new(0.0, 6.0).expect("valid sigma");
    let mut pixels = Vec::with_capacity(SIZE * SIZE);
    for y in 0..SIZE {
        let t = y as f64 / (SIZE - 1) as f64;
        for x in 0..SIZE {
            let mut c = [0.0; 3];
            for k in 0..3 {
                c[k] = top[k] * (1.0 - t) + bottom[k] * t;
            }
            for (bc, bx, by, br) in &blobs {
                let d2 = (x as f64 - bx).powi(2) + (y as f64 - by).powi(2);
                let w = (-d2 / (2.0 * br * br)).exp();
                for k in 0..3 {
                    c[k] = c[k] * (1.0 - w) + bc[k] * w;
                }
            }
            pixels.push(c.map(|v| (v + noise.sample(&mut rng)).clamp(0.0, 255.0).round() as u32));
        }
    }
    RgbImage::new(SIZE, SIZE, pixels)
}

/// Shape of a synthetic document pair.
#[derive(Debug, Clone, Copy)]
pub struct TextPairShape {
    pub vocabulary: usize,
    pub tokens_a: usize,
    pub tokens_b: usize,
    pub dim: usize,
    /// Count of the most frequent token; counts decay like `top / rank`.
    pub top_count: i64,
}

impl Default for TextPairShape {
    fn default() -> Self {
        Self {
            vocabulary: 4000,
            tokens_a: 1400,
            tokens_b: 1600,
            dim: 100,
            top_count: 7000,
        }
    }
}

/// Two weighted embedding clouds drawn from a shared topical vocabulary.
pub fn nlp_like_pair(
    seed: u64,
    shape: TextPairShape,
) -> Result<(PointCloudDistribution, PointCloudDistribution), DatasetError> {
    assert!(shape.tokens_a <= shape.vocabulary && shape.tokens_b <= shape.vocabulary);
    let mut rng = rng(seed);
    let topics = 24;
    let center = Normal::new(0.0, 0.45).expect("valid sigma");
    let spread = Normal::new(0.0, 0.3).expect("valid sigma");
    let centers: Vec<Vec<f64>> = (0..topics)
        .map(|_| (0..shape.dim).map(|_| center.sample(&mut rng)).collect())
        .collect();
    let vocab: Vec<Vec<f64>> = (0..shape.vocabulary)
        .map(|w| {
            let c = &centers[w % topics];
            c.iter().map(|&v| v + spread.sample(&mut rng)).collect()
        })
        .collect();

    let mut doc = |tokens: usize| -> Result<PointCloudDistribution, DatasetError> {
        let mut ids: Vec<usize> = (0..shape.vocabulary).collect();
        // partial Fisher-Yates: the first `tokens` ids are a uniform sample
        for k in 0..tokens {
            let pick = rng.random_range(k..shape.vocabulary);
            ids.swap(k, pick);
        }
        let mut coords = Vec::with_capacity(tokens * shape.dim);
        let mut weights = Vec::with_capacity(tokens);
        for (rank, &w) in ids[..tokens].iter().enumerate() {
            coords.extend_from_slice(&vocab[w]);
            let jitter = rng.random_range(0.8..1.25);
            weights.push(((shape.top_count as f64 * jitter / (rank + 1) as f64) as i64).max(1));
        }
        PointCloudDistribution::new(shape.dim, coords, weights)
    };
    let mut a = doc(shape.tokens_a)?;
    let mut b = doc(shape.tokens_b)?;
    balance_pair(&mut a, &mut b)?;
    Ok((a, b))
}

/// `mnist{index}`: two digit-like images at the default image policy.
pub fn mnist_pair(index: u64) -> Result<OTInstance, DatasetError> {
    let a = mnist_like_image(2 * index + 1000);
    let b = mnist_like_image(2 * index + 1001);
    image_pair_instance(format!("mnist{index}"), &a, &b, QuantizationPolicy::mnist())
}

/// `CIFAR{index}`: two color images as unit-capacity 1024-point clouds.
pub fn cifar_pair(index: u64) -> Result<OTInstance, DatasetError> {
    let a = cifar_like_image(2 * index + 2000);
    let b = cifar_like_image(2 * index + 2001);
    color_pair_instance(format!("CIFAR{index}"), &a, &b, QuantizationPolicy::cifar())
}

/// `NLP{index}` with the given document shape.
pub fn nlp_pair(index: u64, shape: TextPairShape) -> Result<OTInstance, DatasetError> {
    let (a, b) = nlp_like_pair(index + 3000, shape)?;
    build_instance(format!("NLP{index}"), &a, &b, QuantizationPolicy::nlp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_instance;

    #[test]
    fn mnist_like_is_sparse_and_deterministic() {
        let a = mnist_like_image(7);
        assert_eq!(a, mnist_like_image(7));
        let nz = a.nonzero();
        assert!(nz > 20 && nz < 400, "nonzero pixels {nz}");
    }

    #[test]
    fn mnist_pair_is_balanced_with_sparse_nodes() {
        let inst = mnist_pair(0).unwrap();
        assert!(validate_instance(&inst).is_ok());
        assert_eq!(inst.n(), mnist_like_image(1000).nonzero());
        assert_eq!(inst.m(), mnist_like_image(1001).nonzero());
        assert!(inst.total_supply() <= 1_000_000 && inst.total_supply() > 990_000);
        assert!(inst.max_cost() <= 6 * 39);
    }

    #[test]
    fn cifar_pair_is_unit_1024() {
        let inst = cifar_pair(1).unwrap();
        assert_eq!((inst.n(), inst.m()), (1024, 1024));
        assert!(inst.is_unit());
        assert!(inst.max_cost() <= 654);
    }

    #[test]
    fn nlp_pair_is_balanced() {
        let shape = TextPairShape {
            vocabulary: 300,
            tokens_a: 80,
            tokens_b: 100,
            dim: 10,
            top_count: 500,
        };
        let inst = nlp_pair(1, shape).unwrap();
        assert!(validate_instance(&inst).is_ok());
        assert_eq!((inst.n(), inst.m()), (80, 100));
    }
}
