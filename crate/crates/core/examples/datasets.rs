//! The generated instance families, written to a directory in the `.ot`
//! format that `otbench bench --suite` reads.

use std::path::PathBuf;

use otbench::datasets::gen_circle_square;
use otbench::datasets::synth::{cifar_pair, mnist_pair, nlp_pair, TextPairShape};
use otbench::io::{read_instance, write_instance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("otbench-suite"));
    std::fs::create_dir_all(&dir)?;
    let small_text = TextPairShape {
        vocabulary: 600,
        tokens_a: 150,
        tokens_b: 180,
        ..Default::default()
    };
    let instances = vec![
        gen_circle_square(100)?,
        gen_circle_square(400)?,
        mnist_pair(0)?,
        mnist_pair(1)?,
        cifar_pair(0)?,
        nlp_pair(1, small_text)?,
    ];
    for inst in &instances {
        let path = dir.join(format!("{}.ot", inst.name()));
        write_instance(&path, inst)?;
        let back = read_instance(&path)?;
        assert_eq!(back.costs(), inst.costs());
        println!(
            "{:<8} {:>4} x {:<4} unit {:<5} mass {:>8} max cost {:>9}  -> {}",
            inst.name(),
            inst.n(),
            inst.m(),
            inst.is_unit(),
            inst.total_demand(),
            inst.max_cost(),
            path.display()
        );
    }
    Ok(())
}
