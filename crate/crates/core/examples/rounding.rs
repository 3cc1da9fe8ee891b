//! Turning a slightly infeasible Sinkhorn plan into a feasible one, and the
//! objective change against its `residue * max cost` bound.

use otbench::datasets::synth::mnist_pair;
use otbench::model::{objective, residue};
use otbench::scaling::{round_flow, sinkhorn, ScalingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = mnist_pair(1)?;
    let cfg = ScalingConfig {
        eps_fraction: 0.01,
        ..ScalingConfig::new(30.0)
    };
    let res = sinkhorn(&inst, &cfg)?;
    let eps = residue(&inst, &res.flow);
    let rounded = round_flow(&inst, &res.flow);
    let before = res.objective.value();
    let after = objective(&inst, &rounded)?.value();
    println!(
        "residue before {eps:.3}, after {:.3e}",
        residue(&inst, &rounded)
    );
    println!(
        "objective {before:.1} -> {after:.1}, change {:.1} <= bound {:.1}",
        (after - before).abs(),
        eps * inst.max_cost() as f64
    );
    Ok(())
}
