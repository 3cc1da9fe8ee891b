use super::{euclidean, quantize_distance, DatasetError, QuantizationPolicy};
use crate::model::OTInstance;

/// The `s x s` lattice `{-s/2, .., s-1-s/2}^2` in row-major order.
///
/// For odd `s` the lattice is centered exactly on the origin; for even `s` the
/// center sits half a unit below and left of it, the closest an integral grid
/// can get.
pub fn grid_points(s: usize) -> Vec<(i64, i64)> {
    let lo = -((s / 2) as i64);
    let mut pts = Vec::with_capacity(s * s);
    for y in 0..s as i64 {
        for x in 0..s as i64 {
            pts.push((lo + x, lo + y));
        }
    }
    pts
}

fn angle(x: i64, y: i64) -> f64 {
    let a = (y as f64).atan2(x as f64);
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// The `k` integral points closest to the origin, ties broken by
/// (radius, angle from the positive x-axis, x, y).
pub fn disk_points(k: usize) -> Vec<(i64, i64)> {
    if k == 0 {
        return Vec::new();
    }
    let mut radius = ((k as f64 / std::f64::consts::PI).sqrt().ceil() as i64).max(1);
    loop {
        let r2 = radius * radius;
        let mut pts: Vec<(i64, i64)> = (-radius..=radius)
            .flat_map(|x| (-radius..=radius).map(move |y| (x, y)))
            .filter(|&(x, y)| x * x + y * y <= r2)
            .collect();
        if pts.len() >= k {
            pts.sort_by(|&(ax, ay), &(bx, by)| {
                (ax * ax + ay * ay)
                    .cmp(&(bx * bx + by * by))
                    .then(angle(ax, ay).total_cmp(&angle(bx, by)))
                    .then(ax.cmp(&bx))
                    .then(ay.cmp(&by))
            });
            pts.truncate(k);
            return pts;
        }
        radius += 1;
    }
}

/// CircleSquare instance `CS{k}` at the default cost scale.
pub fn gen_circle_square(k: usize) -> Result<OTInstance, DatasetError> {
    gen_circle_square_with(k, QuantizationPolicy::circle_square())
}

/// Unit-capacity matching between the square lattice and the disk of the same
/// size, costed by scaled Euclidean distance.
pub fn gen_circle_square_with(
    k: usize,
    policy: QuantizationPolicy,
) -> Result<OTInstance, DatasetError> {
    let s = (k as f64).sqrt().round() as usize;
    if k == 0 || s * s != k {
        return Err(DatasetError::NotPerfectSquare(k));
    }
    let square = grid_points(s);
    let disk = disk_points(k);
    let mut cost = Vec::with_capacity(k * k);
    for &(px, py) in &square {
        let p = [px as f64, py as f64];
        cost.extend(disk.iter().map(|&(qx, qy)| {
            quantize_distance(euclidean(&p, &[qx as f64, qy as f64]), policy.scale)
        }));
    }
    Ok(
        OTInstance::new(format!("CS{k}"), k, k, cost, vec![1; k], vec![1; k])?
            .with_scale(policy.scale),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_instance;

    #[test]
    fn singleton_is_origin_to_origin() {
        let inst = gen_circle_square_with(1, QuantizationPolicy::new(1, 1)).unwrap();
        assert_eq!(inst.costs(), &[0]);
    }

    #[test]
    fn cs100_shape() {
        let inst = gen_circle_square(100).unwrap();
        assert_eq!((inst.n(), inst.m(), inst.total_demand()), (100, 100, 100));
        assert!(inst.is_unit());
        assert!(validate_instance(&inst).is_ok());
        assert_eq!(inst.name(), "CS100");
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            gen_circle_square(10),
            Err(DatasetError::NotPerfectSquare(10))
        ));
        assert!(gen_circle_square(0).is_err());
    }

    #[test]
    fn disk_points_are_nearest_and_distinct() {
        let pts = disk_points(50);
        assert_eq!(pts.len(), 50);
        let max_r2 = pts.iter().map(|&(x, y)| x * x + y * y).max().unwrap();
        // nothing strictly inside the boundary radius was left out
        let inside = (-10..=10i64)
            .flat_map(|x| (-10..=10i64).map(move |y| (x, y)))
            .filter(|&(x, y)| x * x + y * y < max_r2)
            .count();
        assert!(inside <= 50);
        let mut sorted = pts.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 50);
        assert_eq!(pts[0], (0, 0));
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            gen_circle_square(144).unwrap(),
            gen_circle_square(144).unwrap()
        );
    }
}
