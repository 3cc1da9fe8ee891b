use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use otbench::bench::{self, BenchConfig, CalibrateOptions, SolverKind, SolverParams};
use otbench::datasets::{
    self, balance_pair, build_instance, color_pair_instance, image_pair_instance, read_embeddings,
    read_pnm, Pnm, QuantizationPolicy,
};
use otbench::io::{read_instance, write_instance};
use otbench::model::{Deadline, OTInstance};
use otbench::netsimplex::solve_network_simplex;
use otbench::scaling::{self, ScalingConfig};

/// Optimal transport solvers and benchmark harness.
#[derive(Parser)]
#[command(name = "otbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen {
        #[command(subcommand)]
        family: Family,
    },
    /// Solve one instance and print a summary.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value = "network_simplex")]
        solver: String,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        levels: Option<i64>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Take unset parameters from a calibration CSV.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Round the output of scaling solvers to a feasible plan.
        #[arg(long)]
        round: bool,
        #[arg(long, default_value_t = 3600.0)]
        timeout: f64,
    },
    /// Time solvers on every `*.ot` file of a directory.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, default_value = "network_simplex,sinkhorn")]
        solvers: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, default_value_t = 3600.0)]
        timeout: f64,
    },
    /// Performance profile of a results CSV.
    Profile {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ratio and iteration counts of the scaling solvers over an eta grid.
    Sweep {
        #[arg(long)]
        instance: PathBuf,
        /// Comma-separated list, or `start:stop:factor` for a geometric grid.
        #[arg(long)]
        etas: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Calibrate eta, B and auction epsilon per dataset (cached in `--out`).
    Calibrate {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum Family {
    /// Square lattice to disk matching on k points.
    Circlesquare {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        scale: Option<u64>,
        /// Must equal k: capacities are unit.
        #[arg(long)]
        total_mass: Option<i64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pair of plain PGM (grayscale) or PPM (color) images.
    Image {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        scale: Option<u64>,
        #[arg(long)]
        total_mass: Option<i64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pair of weighted embedding files (`count v1 .. vd` per line).
    Cloud {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        scale: Option<u64>,
        /// Rescale both clouds to this total weight before balancing.
        #[arg(long)]
        total_mass: Option<i64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into())
}

fn generate(family: Family) -> Result<()> {
    let (inst, out) = match family {
        Family::Circlesquare {
            k,
            scale,
            total_mass,
            out,
        } => {
            if total_mass.is_some_and(|t| t != k as i64) {
                bail!("circle-square capacities are unit, so the total mass is k = {k}");
            }
            let policy = QuantizationPolicy::new(scale.unwrap_or(datasets::CIRCLE_SQUARE_SCALE), 1);
            (datasets::gen_circle_square_with(k, policy)?, out)
        }
        Family::Image {
            a,
            b,
            scale,
            total_mass,
            out,
        } => {
            let name = stem(&out);
            let inst = match (read_pnm(&a)?, read_pnm(&b)?) {
                (Pnm::Gray(x), Pnm::Gray(y)) => {
                    let policy = QuantizationPolicy::new(
                        scale.unwrap_or(datasets::MNIST_SCALE),
                        total_mass.unwrap_or(datasets::IMAGE_TOTAL_MASS),
                    );
                    image_pair_instance(name, &x, &y, policy)?
                }
                (Pnm::Rgb(x), Pnm::Rgb(y)) => {
                    if total_mass.is_some() {
                        bail!("color images are unit-weight point clouds; --total-mass does not apply");
                    }
                    let policy = QuantizationPolicy::new(scale.unwrap_or(datasets::CIFAR_SCALE), 1);
                    color_pair_instance(name, &x, &y, policy)?
                }
                _ => bail!("both images must be grayscale (P2) or both color (P3)"),
            };
            (inst, out)
        }
        Family::Cloud {
            a,
            b,
            scale,
            total_mass,
            out,
        } => {
            let (mut x, mut y) = (read_embeddings(&a)?, read_embeddings(&b)?);
            if let Some(t) = total_mass {
                x.rescale(t);
                y.rescale(t);
            }
            balance_pair(&mut x, &mut y)?;
            let policy = QuantizationPolicy::new(scale.unwrap_or(datasets::NLP_SCALE), 1);
            (build_instance(stem(&out), &x, &y, policy)?, out)
        }
    };
    write_instance(&out, &inst)?;
    println!(
        "wrote {} ({} x {}, total mass {}, max cost {})",
        out.display(),
        inst.n(),
        inst.m(),
        inst.total_demand(),
        inst.max_cost()
    );
    Ok(())
}

fn load_params(path: &Option<PathBuf>) -> Result<HashMap<String, SolverParams>> {
    let Some(path) = path else {
        return Ok(HashMap::new());
    };
    Ok(bench::read_params(path)
        .with_context(|| format!("reading {}", path.display()))?
        .into_iter()
        .map(|r| (r.dataset.clone(), r.params()))
        .collect())
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (start, stop, factor): (f64, f64, f64) =
            (parts[0].parse()?, parts[1].parse()?, parts[2].parse()?);
        if !(start > 0.0 && factor > 1.0) {
            bail!("geometric grid needs start > 0 and factor > 1");
        }
        let mut grid = Vec::new();
        let mut x = start;
        while x <= stop * (1.0 + 1e-12) {
            grid.push(x);
            x *= factor;
        }
        return Ok(grid);
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("bad eta `{t}`"))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn solve_one(
    path: &Path,
    solver: &str,
    eta: Option<f64>,
    levels: Option<i64>,
    epsilon: Option<f64>,
    params: &Option<PathBuf>,
    round: bool,
    timeout: f64,
) -> Result<()> {
    let inst = read_instance(path)?;
    let kind: SolverKind = solver.parse()?;
    let cached = load_params(params)?.remove(inst.name()).unwrap_or_default();
    let given = SolverParams {
        eta: eta.or(cached.eta),
        levels: levels.or(cached.levels),
        epsilon: epsilon.or(cached.epsilon),
    };
    let deadline = Deadline::after(Duration::from_secs_f64(timeout));
    let mut res = bench::solve(kind, &inst, &given, deadline)?;
    if round && !kind.feasible_output() {
        let flow = scaling::round_flow(&inst, &res.flow);
        res.objective = otbench::model::objective(&inst, &flow)?;
        res.residue = otbench::model::residue(&inst, &flow);
        res.flow = flow;
    }
    let used = given.resolved(kind, &inst);
    println!("instance   {} ({} x {})", inst.name(), inst.n(), inst.m());
    println!("solver     {}", kind.name());
    if let Some(e) = used.eta {
        println!("eta        {e}");
    }
    if let Some(b) = used.levels {
        println!("levels     {b}");
    }
    if let Some(e) = used.epsilon {
        println!("epsilon    {e}");
    }
    println!("objective  {}", res.objective);
    println!("residue    {}", res.residue);
    println!("iterations {}", res.iterations);
    println!("wall_time  {:.6}s", res.wall_time);
    println!(
        "status     {:?}{}",
        res.status,
        if res.exact { " (exact)" } else { "" }
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen { family } => generate(family),
        Command::Solve {
            instance,
            solver,
            eta,
            levels,
            epsilon,
            params,
            round,
            timeout,
        } => solve_one(
            &instance, &solver, eta, levels, epsilon, &params, round, timeout,
        ),
        Command::Bench {
            suite,
            solvers,
            out,
            params,
            repeats,
            timeout,
        } => {
            let instances = bench::load_suite(&suite)?;
            if instances.is_empty() {
                bail!("no *.ot files in {}", suite.display());
            }
            let cfg = BenchConfig {
                repeats,
                timeout: Duration::from_secs_f64(timeout),
                params: load_params(&params)?,
            };
            let records = bench::run_suite(&instances, &SolverKind::parse_list(&solvers)?, &cfg)?;
            for r in &records {
                println!("{}", bench::describe(r));
            }
            bench::write_results(&out, &records)?;
            Ok(())
        }
        Command::Profile { input, out } => {
            let curves = bench::performance_profile(&bench::read_results(&input)?)?;
            bench::write_profile(&out, &curves)?;
            for c in &curves {
                let last = c.points.last().map(|p| p.1).unwrap_or(0);
                println!(
                    "{:<16} {} points, finished {}",
                    c.solver.name(),
                    c.points.len(),
                    last
                );
            }
            Ok(())
        }
        Command::Sweep {
            instance,
            etas,
            out,
        } => {
            let inst: OTInstance = read_instance(&instance)?;
            let exact = solve_network_simplex(&inst)?.objective.value();
            let rows =
                bench::eta_sweep(&inst, &parse_grid(&etas)?, exact, &ScalingConfig::new(1.0))?;
            for r in &rows {
                println!(
                    "eta {:>10} {:<11} ratio {:>10} iterations {}",
                    r.eta,
                    r.solver.name(),
                    r.ratio.map(|x| format!("{x:.6}")).unwrap_or("-".into()),
                    r.iterations
                );
            }
            bench::write_sweep(&out, &rows)?;
            Ok(())
        }
        Command::Calibrate { suite, out } => {
            let instances = bench::load_suite(&suite)?;
            let opts = CalibrateOptions {
                cache: Some(out.clone()),
                ..Default::default()
            };
            for r in bench::calibrate_all(&instances, &opts)? {
                println!(
                    "{:<12} eta {:>8} B {:>6} eps {:>10} {}",
                    r.dataset,
                    r.eta.map(|x| x.to_string()).unwrap_or("-".into()),
                    r.levels.map(|x| x.to_string()).unwrap_or("-".into()),
                    r.epsilon.map(|x| x.to_string()).unwrap_or("-".into()),
                    r.note
                );
            }
            Ok(())
        }
    }
}
