//! Exact transport on a small general instance, with the optimality
//! certificate checked independently.

use otbench::model::{Certificate, OTInstance};
use otbench::netsimplex::solve_network_simplex;
use otbench::oracle::check_potentials;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // three warehouses, four stores
    let inst = OTInstance::from_rows(
        "depots",
        &[vec![4, 6, 9, 5], vec![2, 7, 3, 8], vec![6, 1, 4, 4]],
        vec![30, 25, 45],
        vec![20, 40, 15, 25],
    )?;
    let res = solve_network_simplex(&inst)?;
    println!(
        "objective {} after {} pivots",
        res.objective, res.iterations
    );
    for e in res.flow.entries() {
        println!("  supply {} -> demand {}: {}", e.row, e.col, e.amount);
    }
    let cert = res
        .certificate
        .as_ref()
        .expect("network simplex returns potentials");
    check_potentials(&inst, &res.flow, cert)?;
    if let Certificate::Potentials { supply, demand } = cert {
        println!("potentials: supply {supply:?}, demand {demand:?}");
    }
    println!("all reduced costs are nonnegative");
    Ok(())
}
