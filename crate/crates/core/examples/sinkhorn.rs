//! Entropic transport between two handwritten-digit-like images: Sinkhorn
//! and Greenkhorn at a few regularization strengths.

use otbench::datasets::synth::mnist_pair;
use otbench::netsimplex::solve_network_simplex;
use otbench::scaling::{greenkhorn, sinkhorn, ScalingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = mnist_pair(0)?;
    let exact = solve_network_simplex(&inst)?.objective.value();
    println!(
        "{}: {} x {} nodes, total mass {}, exact {exact}",
        inst.name(),
        inst.n(),
        inst.m(),
        inst.total_demand()
    );
    for eta in [5.0, 20.0, 80.0] {
        let cfg = ScalingConfig::new(eta);
        let s = sinkhorn(&inst, &cfg)?;
        let g = greenkhorn(&inst, &cfg)?;
        println!(
            "eta {eta:>4}: sinkhorn ratio {:.4} in {} passes, greenkhorn ratio {:.4} in {} updates",
            s.objective.value() / exact,
            s.iterations,
            g.objective.value() / exact,
            g.iterations
        );
    }
    Ok(())
}
