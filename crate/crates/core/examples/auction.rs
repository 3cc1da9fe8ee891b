//! Gauss-Seidel auction with and without epsilon scaling. With integral
//! costs any `epsilon < 1/n` gives an exact matching.

use otbench::auction::{default_scaling, solve_auction, solve_auction_scaled};
use otbench::datasets::gen_circle_square;
use otbench::hungarian::solve_km;
use otbench::oracle::check_epsilon_cs;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = gen_circle_square(100)?;
    let opt = solve_km(&inst)?.objective.value();
    let n = inst.n() as f64;
    println!("optimum {opt}, n*epsilon bound shown per run");
    for eps in [inst.max_cost() as f64 / 8.0, 10.0, 1.0 / (n + 1.0)] {
        let plain = solve_auction(&inst, eps)?;
        let (eps0, theta) = default_scaling(&inst, eps);
        let scaled = solve_auction_scaled(&inst, eps0, theta, eps)?;
        for res in [&plain, &scaled] {
            check_epsilon_cs(&inst, &res.flow, res.certificate.as_ref().unwrap())?;
            println!(
                "{:<15} eps {:>10.4}  gap {:>8} <= {:>10.1}  bids {:>8}  exact {}",
                res.solver,
                eps,
                res.objective.value() - opt,
                n * eps,
                res.iterations,
                res.exact
            );
        }
    }
    Ok(())
}
