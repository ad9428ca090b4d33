//! Implementations of the four subcommands.

use std::sync::Arc;

use anyhow::{Context, Result};
use serde_json::json;

use svie_core::brownian::{NoiseMode, RngSpec};
use svie_core::monte_carlo::{self, SweepOutput, TrialStatistics};
use svie_core::opmat::OperationalSet;
use svie_core::problems::{self, RegistryOptions};
use svie_core::solver::{solve_on_path, SvieProblem};
use svie_core::walsh::{reconstruct, WalshBasis};

use crate::output::{matrix_block, matrix_json, num, row};
use crate::{
    problem_file, ConvergenceArgs, MatricesArgs, MonteCarloArgs, OutputFormat, ProblemSource,
    RandomnessArgs, SolveArgs,
};

fn load_problem(source: &ProblemSource, paper_prefactor: bool) -> Result<SvieProblem> {
    match (&source.problem, &source.file) {
        (Some(name), None) => Ok(problems::lookup_with(
            name,
            RegistryOptions { paper_prefactor },
        )?),
        (None, Some(path)) => problem_file::load(path),
        _ => unreachable!("clap enforces exactly one problem source"),
    }
}

fn noise_mode(randomness: &RandomnessArgs) -> NoiseMode {
    if randomness.zero_noise {
        NoiseMode::Zero
    } else {
        NoiseMode::Gaussian
    }
}

fn write_output(path: &std::path::Path, content: &str) -> Result<()> {
    std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

struct SolutionRow {
    t: f64,
    x_approx: f64,
    x_exact: Option<f64>,
    abs_err: Option<f64>,
}

pub fn solve(args: SolveArgs) -> Result<()> {
    let problem = load_problem(&args.source, args.paper_prefactor)?;
    let basis = Arc::new(problem.basis(args.k)?);
    let spec = RngSpec::new(args.randomness.seed, 0);
    let path = noise_mode(&args.randomness).build_path(
        spec,
        basis.size(),
        args.randomness.refine,
        problem.horizon,
    );
    let result = solve_on_path(&problem, &basis, &path, spec)?;

    let mut rows = Vec::new();
    let mut push_row = |t: f64, x_approx: f64| -> Result<()> {
        let x_exact = match &problem.exact {
            Some(exact) => Some(exact(t, Some(&path))?),
            None => None,
        };
        rows.push(SolutionRow {
            t,
            x_approx,
            x_exact,
            abs_err: x_exact.map(|e| (e - x_approx).abs()),
        });
        Ok(())
    };
    for i in 0..basis.size() {
        push_row(basis.midpoint(i), result.cell_values.get(i))?;
    }
    for t in monte_carlo::probe_points(problem.horizon) {
        push_row(t, reconstruct(&result.cell_values, &basis, t)?)?;
    }

    let content = match args.output.format {
        OutputFormat::Csv => {
            let mut out = String::from("t,x_approx,x_exact,abs_err\n");
            for r in &rows {
                out.push_str(&row(&[
                    num(r.t),
                    num(r.x_approx),
                    r.x_exact.map(num).unwrap_or_default(),
                    r.abs_err.map(num).unwrap_or_default(),
                ]));
                out.push('\n');
            }
            out
        }
        OutputFormat::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|r| {
                    json!({
                        "t": r.t,
                        "x_approx": r.x_approx,
                        "x_exact": r.x_exact,
                        "abs_err": r.abs_err,
                    })
                })
                .collect();
            let doc = json!({
                "problem": problem.name,
                "k": args.k,
                "m": basis.size(),
                "seed": args.randomness.seed,
                "refine": args.randomness.refine,
                "zero_noise": args.randomness.zero_noise,
                "residual": result.residual,
                "rows": rows,
            });
            format!("{doc:#}\n")
        }
    };
    write_output(&args.output.out, &content)
}

fn statistics_csv(rows: &[TrialStatistics]) -> String {
    let mut out = String::from("m,n,mean_error,std_error,ci_lower,ci_upper,seed\n");
    for s in rows {
        out.push_str(&row(&[
            s.m.to_string(),
            s.n.to_string(),
            num(s.mean_error),
            num(s.std_error),
            num(s.ci_lower),
            num(s.ci_upper),
            s.seed.seed.to_string(),
        ]));
        out.push('\n');
    }
    out
}

fn statistics_json(problem: &str, rows: &[TrialStatistics]) -> String {
    let rows: Vec<_> = rows
        .iter()
        .map(|s| {
            json!({
                "m": s.m,
                "n": s.n,
                "mean_error": s.mean_error,
                "std_error": s.std_error,
                "ci_lower": s.ci_lower,
                "ci_upper": s.ci_upper,
                "seed": s.seed.seed,
            })
        })
        .collect();
    let doc = json!({ "problem": problem, "rows": rows });
    format!("{doc:#}\n")
}

pub fn monte_carlo(args: MonteCarloArgs) -> Result<()> {
    let problem = load_problem(&args.source, args.paper_prefactor)?;
    let base = RngSpec::new(args.randomness.seed, 0);
    let mode = noise_mode(&args.randomness);
    let mut stats = Vec::new();
    for &level in &args.k {
        for &n in &args.n {
            stats.push(monte_carlo::run_trials_with(
                &problem,
                level,
                n,
                base,
                args.randomness.refine,
                mode,
            )?);
        }
    }
    let content = match args.output.format {
        OutputFormat::Csv => statistics_csv(&stats),
        OutputFormat::Json => statistics_json(&problem.name, &stats),
    };
    write_output(&args.output.out, &content)
}

pub fn convergence(args: ConvergenceArgs) -> Result<()> {
    let problem = load_problem(&args.source, args.paper_prefactor)?;
    let base = RngSpec::new(args.randomness.seed, 0);
    let mode = noise_mode(&args.randomness);
    let sweep = monte_carlo::convergence_sweep_with(
        &problem,
        &args.k,
        args.n,
        base,
        args.randomness.refine,
        mode,
    )?;
    let content = match sweep {
        SweepOutput::Statistics(stats) => match args.output.format {
            OutputFormat::Csv => statistics_csv(&stats),
            OutputFormat::Json => statistics_json(&problem.name, &stats),
        },
        SweepOutput::ProbeTable(levels) => match args.output.format {
            OutputFormat::Csv => {
                let mut header = vec!["t".to_string()];
                header.extend(levels.iter().map(|l| format!("m{}", l.m)));
                let mut out = row(&header);
                out.push('\n');
                let probes = levels[0].points.len();
                for p in 0..probes {
                    let mut cells = vec![num(levels[0].points[p].t)];
                    cells.extend(levels.iter().map(|l| num(l.points[p].mean_value)));
                    out.push_str(&row(&cells));
                    out.push('\n');
                }
                out
            }
            OutputFormat::Json => {
                let levels: Vec<_> = levels
                    .iter()
                    .map(|l| {
                        json!({
                            "m": l.m,
                            "points": l.points.iter().map(|p| json!({
                                "t": p.t,
                                "mean": p.mean_value,
                            })).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                let doc = json!({ "problem": problem.name, "n": args.n, "levels": levels });
                format!("{doc:#}\n")
            }
        },
    };
    write_output(&args.output.out, &content)
}

pub fn matrices(args: MatricesArgs) -> Result<()> {
    let horizon = match (&args.problem, &args.file) {
        (Some(name), None) => problems::lookup(name)?.horizon,
        (None, Some(path)) => problem_file::load(path)?.horizon,
        (None, None) => 1.0,
        _ => unreachable!("clap rejects --problem with --file"),
    };
    let basis = WalshBasis::new(args.k, horizon)?;
    let spec = RngSpec::new(args.randomness.seed, 0);
    let path = noise_mode(&args.randomness).build_path(
        spec,
        basis.size(),
        args.randomness.refine,
        horizon,
    );
    let ops = OperationalSet::build(&basis, &path)?;

    let content = match args.output.format {
        OutputFormat::Csv => {
            let mut out = matrix_block("T_W", &basis.transform_mat(), |v| format!("{}", v as i64));
            out.push('\n');
            out.push_str(&matrix_block("P", ops.p(), num));
            out.push('\n');
            out.push_str(&matrix_block("P_S", ops.p_s(), num));
            out.push('\n');
            out.push_str(&matrix_block("LAMBDA", ops.lambda(), num));
            out.push('\n');
            out.push_str(&matrix_block("LAMBDA_S", ops.lambda_s(), num));
            out
        }
        OutputFormat::Json => {
            let doc = json!({
                "k": args.k,
                "m": basis.size(),
                "horizon": horizon,
                "seed": args.randomness.seed,
                "zero_noise": args.randomness.zero_noise,
                "t_w": matrix_json(&basis.transform_mat()),
                "p": matrix_json(ops.p()),
                "p_s": matrix_json(ops.p_s()),
                "lambda": matrix_json(ops.lambda()),
                "lambda_s": matrix_json(ops.lambda_s()),
            });
            format!("{doc:#}\n")
        }
    };
    write_output(&args.output.out, &content)
}
