use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode as ProcessExit;

use ckm_cli::bench::{run_bench, write_csv, BenchParams};
use ckm_cli::format::{read_json, to_json, write_text, InstanceFile, Problem, SolutionFile};
use ckm_cli::generate::{generate, generate_ckl, GenParams, Geometry};
use ckm_cli::render::render_trace;
use ckm_cli::{CliError, ExitCode};
use ckm_core::ckl::{solve_ckl, verify_ckl};
use ckm_core::trace::{build_trace, Trace};
use ckm_core::verify::load_factor;
use ckm_core::{solve, Instance, SolveOutcome};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "ckm",
    version,
    about = "Bicriteria LP rounding for hard uniform capacitated k-median"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    /// Locations are both clients and candidate centers.
    Ckm,
    /// Separate facilities and clients.
    Ckl,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file and write the solution next to it.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value_t = 4.0)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = Model::Ckm)]
        model: Model,
        /// Also write a step-by-step document with every checked invariant.
        #[arg(long)]
        trace: bool,
        /// Solution file; defaults to `<instance>.solution.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        demand_max: u32,
        #[arg(long)]
        capacity: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value_t = Geometry::Plane)]
        geometry: Geometry,
        /// Draw this many separate facilities (facility/client model); `n`
        /// is then the number of clients.
        #[arg(long)]
        facilities: Option<usize>,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run and verify a batch of generated plane instances, printing CSV.
    Bench {
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Inclusive size range `lo..hi`.
        #[arg(long, default_value = "6..12", value_parser = parse_range)]
        n_range: (usize, usize),
        /// Comma-separated values of α.
        #[arg(long, value_delimiter = ',', default_value = "4")]
        alpha_list: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected lo..hi, got {s:?}"))?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(lo)?, parse(hi)?))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Write {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn write_trace(solution: &Path, trace: &Trace) -> Result<PathBuf, CliError> {
    let path = solution.with_extension("trace.txt");
    write_text(&path, &render_trace(trace))?;
    Ok(path)
}

fn report(
    k: usize,
    out: &SolveOutcome,
    cost: f64,
    max_load_ratio: f64,
    centers: usize,
    lp_cost: f64,
) {
    let ratio = if lp_cost > 0.0 { cost / lp_cost } else { 1.0 };
    println!("path:           {}", out.path);
    println!("k:              {k}");
    println!("centers opened: {centers}");
    println!(
        "max load ratio: {max_load_ratio} (bound {})",
        load_factor(out.alpha)
    );
    println!("cost:           {cost}");
    println!("C_LP:           {lp_cost}");
    println!("cost / C_LP:    {ratio}");
}

fn cmd_solve(
    instance: &Path,
    alpha: f64,
    model: Model,
    trace: bool,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let file: InstanceFile = read_json(instance)?;
    let problem = file.into_problem()?;
    let out_path = out.unwrap_or_else(|| instance.with_extension("solution.json"));
    match (model, problem) {
        (Model::Ckm, Problem::Ckm(inst)) => solve_ckm(&inst, alpha, trace, &out_path),
        (Model::Ckl, Problem::Ckl(ckl)) => {
            let run = solve_ckl(&ckl, alpha)?;
            let check = verify_ckl(&ckl, &run, alpha);
            if !check.all_ok() {
                return Err(CliError::Verifier {
                    context: instance.display().to_string(),
                    detail: format!("{check:?}"),
                });
            }
            let sol = SolutionFile::from_ckl(&run.solution, alpha, run.ckm.path, run.lp_cost);
            write_text(&out_path, &to_json(&sol))?;
            report(
                ckl.budget(),
                &run.ckm,
                run.solution.cost,
                run.solution.max_load_ratio,
                run.solution.centers(),
                run.lp_cost,
            );
            if trace {
                let t = build_trace(&run.reduced, &run.ckm)?;
                println!("trace:          {}", write_trace(&out_path, &t)?.display());
            }
            println!("solution:       {}", out_path.display());
            Ok(())
        }
        (Model::Ckm, Problem::Ckl(_)) => Err(CliError::Format(
            "file has `facilities`; solve it with --model ckl".into(),
        )),
        (Model::Ckl, Problem::Ckm(_)) => Err(CliError::Format(
            "--model ckl needs a `facilities` field".into(),
        )),
    }
}

fn solve_ckm(inst: &Instance, alpha: f64, trace: bool, out_path: &Path) -> Result<(), CliError> {
    let run = solve(inst, alpha)?;
    let check = run.verify(inst);
    if !check.all_ok() {
        return Err(CliError::Verifier {
            context: out_path.display().to_string(),
            detail: format!("{check:?}"),
        });
    }
    let sol = SolutionFile::from_ckm(&run.solution, alpha, run.path, run.lp_cost());
    write_text(out_path, &to_json(&sol))?;
    report(
        inst.budget(),
        &run,
        run.solution.cost,
        run.solution.max_load_ratio,
        run.solution.centers(),
        run.lp_cost(),
    );
    if trace {
        let t = build_trace(inst, &run)?;
        println!("trace:          {}", write_trace(out_path, &t)?.display());
    }
    println!("solution:       {}", out_path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve {
            instance,
            alpha,
            model,
            trace,
            out,
        } => cmd_solve(&instance, alpha, model, trace, out),
        Command::Gen {
            n,
            seed,
            demand_max,
            capacity,
            k,
            geometry,
            facilities,
            out,
        } => {
            let params = GenParams {
                n,
                seed,
                demand_max,
                capacity,
                k,
                geometry,
            };
            let file = match facilities {
                Some(f) => InstanceFile::from_ckl(&generate_ckl(&params, f)?),
                None => InstanceFile::from_instance(&generate(&params)?),
            };
            emit(out.as_deref(), &to_json(&file))
        }
        Command::Bench {
            count,
            n_range,
            alpha_list,
            seed,
            out,
        } => {
            let rows = run_bench(&BenchParams {
                count,
                n_min: n_range.0,
                n_max: n_range.1,
                alphas: alpha_list,
                seed,
            })?;
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            emit(
                out.as_deref(),
                &String::from_utf8(buf).expect("CSV is UTF-8"),
            )
        }
    }
}

fn main() -> ProcessExit {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() {
                ExitCode::Usage
            } else {
                ExitCode::Success
            };
            return ProcessExit::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ProcessExit::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ProcessExit::from(e.exit_code() as u8)
        }
    }
}
