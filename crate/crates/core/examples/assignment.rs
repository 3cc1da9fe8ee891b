//! Kuhn-Munkres and its batched, quantized variant on a circle-square
//! matching instance: exact cost against the speed/accuracy knob `B`.

use otbench::datasets::gen_circle_square;
use otbench::hungarian::{solve_batched_km, solve_km};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = gen_circle_square(100)?;
    let exact = solve_km(&inst)?;
    println!(
        "km          cost {:>10}  {:.4}s",
        exact.objective, exact.wall_time
    );
    let opt = exact.objective.value();
    for levels in [4, 16, 64, 256, inst.max_cost() * inst.n() as i64] {
        let res = solve_batched_km(&inst, levels)?;
        println!(
            "batched B={levels:<9} cost {:>10}  ratio {:.4}  {:.4}s",
            res.objective,
            res.objective.value() / opt,
            res.wall_time
        );
    }
    Ok(())
}
