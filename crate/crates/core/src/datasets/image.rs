use std::path::Path;

use super::{DatasetError, PointCloudDistribution, QuantizationPolicy};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    /// Row-major intensities.
    pub pixels: Vec<u32>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u32>) -> Self {
        assert_eq!(pixels.len(), width * height, "pixel count");
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.pixels[y * self.width + x]
    }

    pub fn nonzero(&self) -> usize {
        self.pixels.iter().filter(|&&p| p > 0).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u32; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u32; 3]>) -> Self {
        assert_eq!(pixels.len(), width * height, "pixel count");
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn solid(width: usize, height: usize, color: [u32; 3]) -> Self {
        Self::new(width, height, vec![color; width * height])
    }
}

/// Sparse pixel cloud of a grayscale image.
///
/// Points are the `(x, y)` positions of nonzero pixels. Each weight is
/// `max(1, floor(intensity * T / total intensity))`, so totals land at or a
/// little below `T`; pairs are equalized afterwards with
/// [`balance_pair`](super::balance_pair).
pub fn image_to_distribution(
    image: &GrayImage,
    policy: QuantizationPolicy,
) -> Result<PointCloudDistribution, DatasetError> {
    let total: u128 = image.pixels.iter().map(|&p| p as u128).sum();
    if total == 0 {
        return Err(DatasetError::BlankImage);
    }
    let mass = policy.total_mass as u128;
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for y in 0..image.height {
        for x in 0..image.width {
            let p = image.get(x, y);
            if p == 0 {
                continue;
            }
            coords.push(x as f64);
            coords.push(y as f64);
            weights.push(((p as u128 * mass / total) as i64).max(1));
        }
    }
    PointCloudDistribution::new(2, coords, weights)
}

/// Unit-weight `(x, y, r, g, b)` cloud with each coordinate min-max scaled to
/// `[0, 1]` over the image. A constant coordinate maps to 0.
pub fn color_image_to_points(image: &RgbImage) -> PointCloudDistribution {
    let count = image.width * image.height;
    let mut raw = Vec::with_capacity(count * 5);
    for y in 0..image.height {
        for x in 0..image.width {
            let [r, g, b] = image.pixels[y * image.width + x];
            raw.extend_from_slice(&[x as f64, y as f64, r as f64, g as f64, b as f64]);
        }
    }
    for d in 0..5 {
        let (lo, hi) = raw
            .iter()
            .skip(d)
            .step_by(5)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let span = hi - lo;
        for v in raw.iter_mut().skip(d).step_by(5) {
            *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
        }
    }
    PointCloudDistribution::new(5, raw, vec![1; count]).expect("five coordinates per pixel")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pnm {
    Gray(GrayImage),
    Rgb(RgbImage),
}

/// Parses plain (ASCII) PGM `P2` and PPM `P3` images. `#` starts a comment
/// that runs to the end of the line.
pub fn parse_pnm(text: &str) -> Result<Pnm, DatasetError> {
    let mut tokens = text.lines().enumerate().flat_map(|(ln, line)| {
        let line = line.split('#').next().unwrap_or("");
        line.split_whitespace().map(move |t| (ln + 1, t))
    });
    let (ln, magic) = tokens.next().ok_or(DatasetError::Parse {
        line: 1,
        msg: "empty image".into(),
    })?;
    let channels = match magic {
        "P2" => 1,
        "P3" => 3,
        other => {
            return Err(DatasetError::Parse {
                line: ln,
                msg: format!("unsupported magic {other:?}, expected P2 or P3"),
            })
        }
    };
    let mut next_num = |what: &str| -> Result<u32, DatasetError> {
        let (ln, tok) = tokens.next().ok_or_else(|| DatasetError::Parse {
            line: 0,
            msg: format!("unexpected end of image reading {what}"),
        })?;
        tok.parse::<u32>().map_err(|e| DatasetError::Parse {
            line: ln,
            msg: format!("bad {what} {tok:?}: {e}"),
        })
    };
    let width = next_num("width")? as usize;
    let height = next_num("height")? as usize;
    let maxval = next_num("maxval")?;
    let mut values = Vec::with_capacity(width * height * channels);
    for _ in 0..width * height * channels {
        let v = next_num("sample")?;
        if v > maxval {
            return Err(DatasetError::Parse {
                line: 0,
                msg: format!("sample {v} exceeds maxval {maxval}"),
            });
        }
        values.push(v);
    }
    Ok(if channels == 1 {
        Pnm::Gray(GrayImage::new(width, height, values))
    } else {
        let pixels = values.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Pnm::Rgb(RgbImage::new(width, height, pixels))
    })
}

pub fn read_pnm(path: impl AsRef<Path>) -> Result<Pnm, DatasetError> {
    parse_pnm(&std::fs::read_to_string(path)?)
}

fn max_sample(it: impl Iterator<Item = u32>) -> u32 {
    it.max().unwrap_or(0).max(1)
}

pub fn write_pgm(image: &GrayImage) -> String {
    let maxval = max_sample(image.pixels.iter().copied()).max(255);
    let mut out = format!("P2\n{} {}\n{}\n", image.width, image.height, maxval);
    for row in image.pixels.chunks(image.width.max(1)) {
        let line: Vec<String> = row.iter().map(u32::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_ppm(image: &RgbImage) -> String {
    let maxval = max_sample(image.pixels.iter().flatten().copied()).max(255);
    let mut out = format!("P3\n{} {}\n{}\n", image.width, image.height, maxval);
    for row in image.pixels.chunks(image.width.max(1)) {
        let line: Vec<String> = row.iter().map(|[r, g, b]| format!("{r} {g} {b}")).collect();
        out.push_str(&line.join("  "));
        out.push('\n');
    }
    out
}
