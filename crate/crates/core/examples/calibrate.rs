//! Per-dataset parameter calibration: the smallest eta and quantization
//! level that reach a 1.1-approximation, and the largest auction epsilon
//! that stays exact. Results are cached by content hash.

use otbench::bench::{calibrate_all, CalibrateOptions};
use otbench::datasets::gen_circle_square;
use otbench::datasets::synth::{cifar_pair, mnist_pair};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cache = std::env::temp_dir().join("otbench-params.csv");
    let opts = CalibrateOptions {
        cache: Some(cache.clone()),
        ..Default::default()
    };
    let instances = vec![gen_circle_square(100)?, mnist_pair(0)?, cifar_pair(0)?];
    for rec in calibrate_all(&instances, &opts)? {
        let show = |x: Option<String>| x.unwrap_or_else(|| "-".into());
        println!(
            "{:<8} hash {}  eta {:>8}  B {:>4}  epsilon {:>9}  {}",
            rec.dataset,
            rec.hash,
            show(rec.eta.map(|v| v.to_string())),
            show(rec.levels.map(|v| v.to_string())),
            show(rec.epsilon.map(|v| v.to_string())),
            rec.note
        );
    }
    println!("cached in {}", cache.display());
    Ok(())
}
