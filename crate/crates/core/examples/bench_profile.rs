//! A small benchmark run and its performance profile: for each solver, how
//! many datasets it solved within a factor `f` of the fastest solver.

use otbench::bench::{
    calibrate_all, performance_profile, run_suite, BenchConfig, CalibrateOptions, SolverKind,
};
use otbench::datasets::gen_circle_square;
use otbench::datasets::synth::mnist_pair;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let instances = vec![
        gen_circle_square(64)?,
        gen_circle_square(100)?,
        mnist_pair(0)?,
        mnist_pair(2)?,
    ];
    let params = calibrate_all(&instances, &CalibrateOptions::default())?;
    let cfg = BenchConfig {
        repeats: 3,
        params: params
            .iter()
            .map(|p| (p.dataset.clone(), p.params()))
            .collect(),
        ..Default::default()
    };
    let records = run_suite(&instances, &SolverKind::ALL, &cfg)?;
    for r in &records {
        println!("{}", otbench::bench::describe(r));
    }
    println!();
    for curve in performance_profile(&records)? {
        let pts: Vec<String> = curve
            .points
            .iter()
            .map(|(f, k)| format!("{f:.2}:{k}"))
            .collect();
        println!("{:<16} {}", curve.solver.name(), pts.join(" "));
    }
    Ok(())
}
