use crate::model::{residue, Flow, OTInstance};

/// Projects a near-feasible plan onto the transport polytope.
///
/// Rows over their supply are scaled down to it, then columns over their
/// demand; the remaining deficits are filled by the rank-one plan
/// `err_r * err_c^T / |err_r|_1`. Costs move by at most `residue * max C`.
/// A plan already feasible to `1e-12 * S` is returned unchanged.
pub fn round_flow(inst: &OTInstance, x: &Flow) -> Flow {
    let (n, m) = (inst.n(), inst.m());
    let total = inst.total_demand() as f64;
    if residue(inst, x) <= 1e-12 * total {
        return x.clone();
    }
    let mut dense = x.to_dense();
    for i in 0..n {
        let row = &mut dense[i * m..(i + 1) * m];
        let sum: f64 = row.iter().sum();
        let r = inst.supplies()[i] as f64;
        if sum > r {
            let a = r / sum;
            row.iter_mut().for_each(|v| *v *= a);
        }
    }
    let mut col_sums = vec![0.0; m];
    for i in 0..n {
        for (s, v) in col_sums.iter_mut().zip(&dense[i * m..(i + 1) * m]) {
            *s += v;
        }
    }
    let col_scale: Vec<f64> = col_sums
        .iter()
        .zip(inst.demands())
        .map(|(&s, &c)| if s > c as f64 { c as f64 / s } else { 1.0 })
        .collect();
    let mut row_sums = vec![0.0; n];
    for i in 0..n {
        for (j, v) in dense[i * m..(i + 1) * m].iter_mut().enumerate() {
            *v *= col_scale[j];
            row_sums[i] += *v;
        }
    }
    let mut col_sums = vec![0.0; m];
    for i in 0..n {
        for (s, v) in col_sums.iter_mut().zip(&dense[i * m..(i + 1) * m]) {
            *s += v;
        }
    }
    let err_r: Vec<f64> = inst
        .supplies()
        .iter()
        .zip(&row_sums)
        .map(|(&r, s)| (r as f64 - s).max(0.0))
        .collect();
    let err_c: Vec<f64> = inst
        .demands()
        .iter()
        .zip(&col_sums)
        .map(|(&c, s)| (c as f64 - s).max(0.0))
        .collect();
    let mass: f64 = err_r.iter().sum();
    if mass > 0.0 {
        for i in 0..n {
            if err_r[i] == 0.0 {
                continue;
            }
            let a = err_r[i] / mass;
            for (v, e) in dense[i * m..(i + 1) * m].iter_mut().zip(&err_c) {
                *v += a * e;
            }
        }
    }
    Flow::from_dense(n, m, &dense).expect("rounded plan is nonnegative")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit2() -> OTInstance {
        OTInstance::assignment("u", &[vec![1, 3], vec![2, 1]]).unwrap()
    }

    #[test]
    fn feasible_is_unchanged() {
        let x = Flow::new(2, 2, [(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert_eq!(round_flow(&unit2(), &x), x);
    }

    #[test]
    fn rank_one_fill() {
        let x = Flow::new(2, 2, [(0, 0, 1.0)]).unwrap();
        let y = round_flow(&unit2(), &x);
        assert_eq!(y, Flow::new(2, 2, [(0, 0, 1.0), (1, 1, 1.0)]).unwrap());
    }

    #[test]
    fn overfull_row_is_scaled() {
        let x = Flow::new(2, 2, [(0, 0, 2.0), (0, 1, 2.0)]).unwrap();
        let y = round_flow(&unit2(), &x);
        assert!(residue(&unit2(), &y) < 1e-12);
        let d = y.to_dense();
        assert!((d[0] - 0.5).abs() < 1e-15 && (d[3] - 0.5).abs() < 1e-15);
    }
}
