//! Accuracy against cost of the regularization strength: approximation
//! ratio and iteration counts of both scaling solvers over an eta grid.

use otbench::bench::eta_sweep;
use otbench::datasets::gen_circle_square;
use otbench::netsimplex::solve_network_simplex;
use otbench::scaling::ScalingConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = gen_circle_square(100)?;
    let exact = solve_network_simplex(&inst)?.objective.value();
    let etas: Vec<f64> = (0..8).map(|k| 2f64.powi(k)).collect();
    let rows = eta_sweep(&inst, &etas, exact, &ScalingConfig::new(1.0))?;
    println!(
        "{:>6} {:<11} {:>9} {:>10}",
        "eta", "solver", "ratio", "iterations"
    );
    for r in &rows {
        println!(
            "{:>6} {:<11} {:>9} {:>10}",
            r.eta,
            r.solver.name(),
            r.ratio
                .map(|x| format!("{x:.4}"))
                .unwrap_or_else(|| "-".into()),
            r.iterations
        );
    }
    Ok(())
}
