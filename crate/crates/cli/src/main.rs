//! Batch command-line front end: generate benchmark models, run the exact
//! and approximate solvers, verify the method's guarantees, and run paired
//! policy simulations.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage/input error,
//! 3 capacity (budget) exceeded.

mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use minimax_is::approx::{build_quantizer, solve_approx_dp, uniform_quantizer, SigmaMode, Variant};
use minimax_is::bounds::{check_value_bounds, dominance_rows, measured_bounds, theoretical_bounds};
use minimax_is::dump::{
    dump_approx, dump_infostate, dump_memory, policy_from_dump, read_solution, write_solution,
};
use minimax_is::error::Error;
use minimax_is::exact::{
    check_dp_equivalence, sigma_conditional_range, sigma_identity, solve_infostate_dp_scoped,
    solve_memory_dp, verify_information_state, SolveBudget,
};
use minimax_is::gridworld::{build_gridworld, default_obstacles, GridworldConfig};
use minimax_is::instances::{random_instance, InstanceConfig, Observability};
use minimax_is::io::{load_model, model_digest, save_model};
use minimax_is::model::SystemModel;
use minimax_is::rollout::{
    check_policy_bounds, compare_policies, evaluate_policy_worstcase, RuntimePolicy,
};
use minimax_is::scalar::{Rational, Scalar};
use report::{Phase, RunReport};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "minimax-is",
    version,
    about = "Worst-case control for finite partially observed systems: exact and quantized information-state solvers with certified error bounds"
)]
struct Cli {
    /// Worker threads (default: the MINIMAX_IS_THREADS variable, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a pursuit-benchmark model file and show its layout.
    Gridworld(GridworldArgs),
    /// Solve a model and write the solution/policy file.
    Solve(SolveArgs),
    /// Run a verification suite; exits 1 on any violated assertion.
    Verify(VerifyArgs),
    /// Paired policy simulation with seeded random disturbances.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct GridworldArgs {
    #[arg(long, default_value_t = 9)]
    width: usize,
    #[arg(long, default_value_t = 9)]
    height: usize,
    /// Obstacle cells "(c,r);(c,r);..."; "default" for the built-in layout,
    /// "none" for an open grid.
    #[arg(long, default_value = "default")]
    obstacles: String,
    /// Agent start cell "(c,r)".
    #[arg(long, default_value = "(-2,-3)")]
    agent_start: String,
    /// Initially observed target cell "(c,r)".
    #[arg(long, default_value = "(-4,3)")]
    y0: String,
    #[arg(long, default_value_t = 6)]
    horizon: usize,
    /// Output model file.
    #[arg(long, default_value = "gridworld.json")]
    out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Method {
    Memory,
    Infostate,
    Approx,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    /// Pick from the model: perfect when observations reveal the state,
    /// otherwise partial.
    Auto,
    Perfect,
    Partial,
    /// Partial with the initial observation pinned into the state encoding.
    Gridworld,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SigmaArg {
    Recursive,
    QuantizeExact,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum)]
    method: Method,
    /// Quantization radius (approx method only).
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Auto)]
    variant: VariantArg,
    #[arg(long, value_enum, default_value_t = SigmaArg::Recursive)]
    sigma_hat: SigmaArg,
    /// Restrict the solve to one initial observation (index or exact label).
    #[arg(long)]
    y0: Option<String>,
    /// Node budget for exhaustive enumerations.
    #[arg(long, default_value_t = SolveBudget::default().max_nodes)]
    budget: usize,
    /// Output solution/policy file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Suite {
    /// Memory-DP vs conditional-range-DP equality on every reachable memory.
    Theorem1,
    /// Information-state properties of the conditional range and of the
    /// memory itself.
    Def1,
    /// Measured approximation gaps plus the accumulated value and policy
    /// bounds.
    Def2,
    /// Measured gaps vs the closed-form radius formulas.
    Bounds,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Theorem1 => "theorem1",
            Suite::Def1 => "def1",
            Suite::Def2 => "def2",
            Suite::Bounds => "bounds",
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Verify this model file...
    #[arg(long, conflicts_with = "random")]
    model: Option<PathBuf>,
    /// ...or this many random instances.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Auto)]
    variant: VariantArg,
    #[arg(long, value_enum)]
    sigma_hat: Option<SigmaArg>,
    #[arg(long, default_value_t = SolveBudget::default().max_nodes)]
    budget: usize,
    /// Machine-readable report file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Gap-ledger file (def2 and bounds suites).
    #[arg(long)]
    ledger_out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    policy_a: PathBuf,
    #[arg(long)]
    policy_b: PathBuf,
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Condition every run on this initial observation (index or label).
    #[arg(long)]
    y0: Option<String>,
    /// Per-run CSV (run, cost_a, cost_b, diff).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Difference histogram CSV (diff, count).
    #[arg(long)]
    hist_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("MINIMAX_IS_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let outcome = match cli.command {
        Command::Gridworld(args) => cmd_gridworld(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Capacity { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn parse_cell(text: &str) -> Result<(i64, i64), Error> {
    let trimmed = text.trim().trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<&str> = trimmed.split(',').collect();
    let bad = || Error::Schema {
        field: "cell".into(),
        detail: format!("expected \"(col,row)\", got `{text}`"),
    };
    if parts.len() != 2 {
        return Err(bad());
    }
    let c = parts[0].trim().parse().map_err(|_| bad())?;
    let r = parts[1].trim().parse().map_err(|_| bad())?;
    Ok((c, r))
}

fn parse_obstacles(text: &str) -> Result<Vec<(i64, i64)>, Error> {
    match text.trim() {
        "default" => Ok(default_obstacles()),
        "none" | "" => Ok(vec![]),
        list => list.split(';').map(parse_cell).collect(),
    }
}

fn cmd_gridworld(args: GridworldArgs) -> Result<ExitCode, Error> {
    let started = Instant::now();
    let cfg = GridworldConfig {
        width: args.width,
        height: args.height,
        obstacles: parse_obstacles(&args.obstacles)?,
        agent_start: parse_cell(&args.agent_start)?,
        initial_observation: parse_cell(&args.y0)?,
        horizon: args.horizon,
    };
    let gw = build_gridworld::<f64>(&cfg)?;
    let build_secs = started.elapsed().as_secs_f64();
    let write_started = Instant::now();
    save_model(&gw.model, &args.out)?;
    let digest = model_digest(&gw.model)?;

    let layout = &gw.layout;
    println!(
        "gridworld {}x{} horizon {}: {} free cells, {} obstacles, {} composite states",
        cfg.width,
        cfg.height,
        cfg.horizon,
        layout.n_free(),
        cfg.obstacles.len(),
        gw.model.n_states(0),
    );
    println!(
        "agent start {:?}, observed target {:?}, initial observation index {}",
        layout.coord_of(layout.agent_start),
        layout.coord_of(layout.observed_target_start),
        layout.initial_observation_index(),
    );

    // Cell-level cover with radius 1: the dotted cells of the coarse grid.
    let dots = build_quantizer(&layout.cell_metric, 1.0);
    println!(
        "radius-1 cell cover: {} representatives (marked '*')",
        dots.representatives.len()
    );
    let dot_cells: Vec<u32> = dots.representatives.iter().collect();
    print_grid(&cfg, layout, &dot_cells);

    let report = RunReport::new("gridworld", &digest)
        .phase(Phase::new("build", build_secs))
        .phase(Phase::new("write", write_started.elapsed().as_secs_f64()))
        .output(&args.out);
    print!("{report}");
    Ok(ExitCode::SUCCESS)
}

fn print_grid(
    cfg: &GridworldConfig,
    layout: &minimax_is::gridworld::GridLayout<f64>,
    dots: &[u32],
) {
    let offset_c = minimax_is::grid::coord_offset(cfg.width);
    let offset_r = minimax_is::grid::coord_offset(cfg.height);
    for row in (0..cfg.height as i64).rev() {
        let r = row - offset_r;
        let mut line = String::new();
        for col in 0..cfg.width as i64 {
            let c = col - offset_c;
            let ch = match layout.free_index_of((c, r)) {
                None => '#',
                Some(free) => {
                    if free == layout.agent_start {
                        'A'
                    } else if free == layout.observed_target_start {
                        'T'
                    } else if dots.contains(&free) {
                        '*'
                    } else {
                        '.'
                    }
                }
            };
            line.push(ch);
            line.push(' ');
        }
        println!("  {line}");
    }
}

fn resolve_y0(model: &SystemModel<f64>, text: &str) -> Result<u32, Error> {
    if let Ok(index) = text.parse::<u32>() {
        if (index as usize) < model.n_observations(0) {
            return Ok(index);
        }
        return Err(Error::IndexOutOfRange {
            index: index as usize,
            size: model.n_observations(0),
        });
    }
    model.observation_spaces[0]
        .index_of(text)
        .map(|i| i as u32)
        .ok_or_else(|| Error::Schema {
            field: "y0".into(),
            detail: format!("`{text}` is neither an index nor an observation label"),
        })
}

fn resolve_variant(model: &SystemModel<f64>, arg: VariantArg, sigma: SigmaArg) -> Variant {
    let sigma = match sigma {
        SigmaArg::Recursive => SigmaMode::Recursive,
        SigmaArg::QuantizeExact => SigmaMode::QuantizeExact,
    };
    match arg {
        VariantArg::Perfect => Variant::PerfectlyObserved,
        VariantArg::Partial => Variant::PartiallyObserved {
            sigma,
            pin_y0: false,
        },
        VariantArg::Gridworld => Variant::PartiallyObserved {
            sigma,
            pin_y0: true,
        },
        VariantArg::Auto => {
            if model.is_perfectly_observed() {
                Variant::PerfectlyObserved
            } else {
                Variant::PartiallyObserved {
                    sigma,
                    pin_y0: false,
                }
            }
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode, Error> {
    let started = Instant::now();
    let model = load_model(&args.model)?;
    let digest = model_digest(&model)?;
    let load_secs = started.elapsed().as_secs_f64();

    let roots_vec;
    let roots: Option<&[u32]> = match &args.y0 {
        Some(text) => {
            roots_vec = vec![resolve_y0(&model, text)?];
            Some(&roots_vec)
        }
        None => None,
    };
    let budget = SolveBudget {
        max_nodes: args.budget,
    };

    let mut solve_started = Instant::now();
    let mut quantize_secs = 0.0;
    let (dump, roots_table, method_name) = match args.method {
        Method::Memory => {
            let solution = solve_memory_dp(&model, budget)?;
            let table: Vec<(u32, f64)> = solution
                .tree
                .roots
                .iter()
                .map(|&(y0, id)| (y0, solution.v[0][id as usize]))
                .collect();
            (dump_memory(&solution, &digest), table, "memory")
        }
        Method::Infostate => {
            let solution = solve_infostate_dp_scoped(&model, roots, budget)?;
            let table: Vec<(u32, f64)> = solution
                .roots
                .iter()
                .map(|&(y0, sid)| (y0, solution.v[0][sid as usize]))
                .collect();
            (dump_infostate(&solution, &digest), table, "infostate")
        }
        Method::Approx => {
            let variant = resolve_variant(&model, args.variant, args.sigma_hat);
            let scheme = uniform_quantizer(&model, args.gamma);
            quantize_secs = solve_started.elapsed().as_secs_f64();
            let dp_started = Instant::now();
            let solution = solve_approx_dp(&model, &scheme, variant, roots, budget)?;
            let table: Vec<(u32, f64)> = solution
                .roots
                .iter()
                .map(|&(y0, sid)| (y0, solution.v[0][sid as usize]))
                .collect();
            let out = (dump_approx(&solution, &digest), table, "approx");
            solve_started = dp_started;
            out
        }
    };
    let solve_secs = solve_started.elapsed().as_secs_f64();

    let write_started = Instant::now();
    if let Some(out) = &args.out {
        write_solution(&dump, out)?;
    }
    let write_secs = write_started.elapsed().as_secs_f64();

    println!("method {method_name}: {} root value(s)", roots_table.len());
    for (y0, value) in &roots_table {
        let label = model.observation_spaces[0].label(*y0 as usize);
        println!("  y0 {y0} [{label}]  value {value}");
    }
    let mut report = RunReport::new("solve", &digest).phase(Phase::new("load", load_secs));
    if args.method == Method::Approx {
        report = report.phase(Phase::new("quantize", quantize_secs));
    }
    report = report
        .phase(Phase::new("solve", solve_secs))
        .phase(Phase::new("write", write_secs));
    if let Some(out) = &args.out {
        report = report.output(out);
    }
    print!("{report}");
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct CheckRow {
    name: String,
    passed: bool,
    detail: String,
}

fn instance_models(args: &VerifyArgs) -> Result<Vec<(String, SystemModel<f64>)>, Error> {
    if let Some(path) = &args.model {
        return Ok(vec![(path.display().to_string(), load_model(path)?)]);
    }
    let count = args.random.unwrap_or(100);
    let base = match args.suite {
        Suite::Theorem1 | Suite::Def1 => InstanceConfig::equivalence(),
        Suite::Def2 | Suite::Bounds => InstanceConfig::bounds(),
    };
    Ok((0..count)
        .map(|k| {
            let seed = args.seed.wrapping_add(k as u64);
            let mut cfg = base.clone();
            // Alternate observability so both formula regimes are covered.
            if matches!(args.suite, Suite::Def2 | Suite::Bounds) && k % 3 == 2 {
                cfg.observability = Observability::Perfect;
            }
            (format!("seed {seed}"), random_instance(seed, &cfg))
        })
        .collect())
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    let started = Instant::now();
    let budget = SolveBudget {
        max_nodes: args.budget,
    };
    let models = instance_models(&args)?;
    let mut checks: Vec<CheckRow> = Vec::new();
    let mut ledgers: Vec<serde_json::Value> = Vec::new();

    for (name, model) in &models {
        match args.suite {
            Suite::Theorem1 => {
                let report = check_dp_equivalence(model, budget)?;
                checks.push(CheckRow {
                    name: format!("{name}: memory vs conditional-range DP"),
                    passed: report.passed(),
                    detail: format!(
                        "{} values compared over {} memories ({})",
                        report.checked_values, report.checked_memories, report.scope
                    ),
                });
            }
            Suite::Def1 => {
                let range = verify_information_state(model, sigma_conditional_range, budget)?;
                checks.push(CheckRow {
                    name: format!("{name}: conditional range is an information state"),
                    passed: range.passed(),
                    detail: format!(
                        "terminal checks {}, evolution checks {} ({})",
                        range.terminal_cost_property.checked,
                        range.evolution_property.checked,
                        range.scope
                    ),
                });
                let identity = verify_information_state(model, sigma_identity, budget)?;
                checks.push(CheckRow {
                    name: format!("{name}: memory is an information state"),
                    passed: identity.passed(),
                    detail: String::new(),
                });
            }
            Suite::Def2 => {
                let exact = model.convert::<Rational>()?;
                let variant = resolve_variant(
                    model,
                    args.variant,
                    args.sigma_hat.unwrap_or(SigmaArg::Recursive),
                );
                let gamma = Rational::from_f64_value(args.gamma)
                    .ok_or(Error::ScalarConversion(args.gamma))?;
                let scheme = uniform_quantizer(&exact, gamma);
                let out = measured_bounds(&exact, &scheme, variant, None, budget)?;
                let memory = solve_memory_dp(&exact, budget)?;
                let values =
                    check_value_bounds(&exact, &memory, &out.solution, &out.ledger.alphas)?;
                checks.push(CheckRow {
                    name: format!("{name}: value tables within accumulated bound"),
                    passed: values.passed(),
                    detail: format!(
                        "eps_T {} alpha_0 {} over {} checks",
                        out.ledger.epsilon_terminal.to_f64_value(),
                        out.ledger.alphas[0].to_f64_value(),
                        values.checked
                    ),
                });
                let policy = RuntimePolicy::from_approx(&out.solution);
                let eval = evaluate_policy_worstcase(&exact, &policy, None, budget)?;
                let policy_check =
                    check_policy_bounds(&exact, &memory, &eval, &out.ledger.alphas)?;
                checks.push(CheckRow {
                    name: format!("{name}: policy loss within twice the bound"),
                    passed: policy_check.passed(),
                    detail: format!("{} checks", policy_check.checked),
                });
                ledgers.push(serde_json::json!({
                    "instance": name,
                    "measured": minimax_is::dump::dump_ledger(&out.ledger),
                    "records": minimax_is::dump::dump_records(&out.records),
                }));
            }
            Suite::Bounds => {
                let exact = model.convert::<Rational>()?;
                let variant = if model.is_perfectly_observed() {
                    Variant::PerfectlyObserved
                } else {
                    resolve_variant(
                        model,
                        args.variant,
                        args.sigma_hat.unwrap_or(SigmaArg::QuantizeExact),
                    )
                };
                let gamma = Rational::from_f64_value(args.gamma)
                    .ok_or(Error::ScalarConversion(args.gamma))?;
                let scheme = uniform_quantizer(&exact, gamma);
                let measured = measured_bounds(&exact, &scheme, variant, None, budget)?;
                let theoretical = theoretical_bounds(&exact, &scheme, variant, None, budget)?;
                ledgers.push(serde_json::json!({
                    "instance": name,
                    "measured": minimax_is::dump::dump_ledger(&measured.ledger),
                    "theoretical": minimax_is::dump::dump_ledger(&theoretical),
                }));
                for row in dominance_rows(&measured.ledger, &theoretical) {
                    checks.push(CheckRow {
                        name: format!("{name}: measured {} within formula", row.name),
                        passed: row.holds,
                        detail: format!(
                            "measured {} vs {}",
                            row.measured.to_f64_value(),
                            row.theoretical.to_f64_value()
                        ),
                    });
                }
            }
        }
    }

    let all_passed = checks.iter().all(|c| c.passed);
    for check in &checks {
        let flag = if check.passed { "PASS" } else { "FAIL" };
        if check.detail.is_empty() {
            println!("{flag} {}", check.name);
        } else {
            println!("{flag} {} ({})", check.name, check.detail);
        }
    }
    println!(
        "suite {}: {}/{} checks passed in {:.2}s",
        args.suite.name(),
        checks.iter().filter(|c| c.passed).count(),
        checks.len(),
        started.elapsed().as_secs_f64()
    );

    if let Some(out) = &args.ledger_out {
        std::fs::write(out, minimax_is::io::canonical_json_bytes(&ledgers)?)?;
    }
    if let Some(out) = &args.out {
        #[derive(serde::Serialize)]
        struct CheckDump<'a> {
            name: &'a str,
            passed: bool,
            detail: &'a str,
        }
        #[derive(serde::Serialize)]
        struct ReportDump<'a> {
            schema: &'a str,
            suite: &'a str,
            passed: bool,
            checks: Vec<CheckDump<'a>>,
        }
        let doc = ReportDump {
            schema: "minimax-is/verify/v1",
            suite: args.suite.name(),
            passed: all_passed,
            checks: checks
                .iter()
                .map(|c| CheckDump {
                    name: &c.name,
                    passed: c.passed,
                    detail: &c.detail,
                })
                .collect(),
        };
        std::fs::write(out, minimax_is::io::canonical_json_bytes(&doc)?)?;
    }

    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode, Error> {
    let started = Instant::now();
    let model = load_model(&args.model)?;
    let digest = model_digest(&model)?;
    let dump_a = read_solution(&args.policy_a)?;
    let dump_b = read_solution(&args.policy_b)?;
    let policy_a = policy_from_dump(&model, &dump_a)?;
    let policy_b = policy_from_dump(&model, &dump_b)?;
    let load_secs = started.elapsed().as_secs_f64();

    let condition_y0 = match &args.y0 {
        Some(text) => Some(resolve_y0(&model, text)?),
        None => {
            // A single shared root conditions the runs implicitly.
            match (&dump_a.roots[..], &dump_b.roots[..]) {
                ([a], [b]) if a.y0 == b.y0 => Some(a.y0),
                _ => None,
            }
        }
    };

    let sim_started = Instant::now();
    let comparison = compare_policies(
        &model,
        &policy_a,
        &policy_b,
        args.runs,
        args.seed,
        condition_y0,
    )?;
    let sim_secs = sim_started.elapsed().as_secs_f64();

    let write_started = Instant::now();
    if let Some(out) = &args.out {
        let mut writer = csv::Writer::from_path(out).map_err(csv_err)?;
        writer
            .write_record(["run", "cost_a", "cost_b", "diff"])
            .map_err(csv_err)?;
        for row in &comparison.rows {
            writer
                .write_record([
                    row.run.to_string(),
                    row.cost_a.to_string(),
                    row.cost_b.to_string(),
                    row.diff.to_string(),
                ])
                .map_err(csv_err)?;
        }
        writer.flush()?;
    }
    if let Some(out) = &args.hist_out {
        let mut writer = csv::Writer::from_path(out).map_err(csv_err)?;
        writer.write_record(["diff", "count"]).map_err(csv_err)?;
        for (diff, count) in &comparison.histogram {
            writer
                .write_record([diff.to_string(), count.to_string()])
                .map_err(csv_err)?;
        }
        writer.flush()?;
    }
    let write_secs = write_started.elapsed().as_secs_f64();

    // Worst-case values and the difference distribution, benchmark style.
    let value_of = |dump: &minimax_is::dump::SolutionDump| -> Option<f64> {
        match condition_y0 {
            Some(y0) => dump.roots.iter().find(|r| r.y0 == y0).map(|r| r.value),
            None => dump
                .roots
                .iter()
                .map(|r| r.value)
                .max_by(|a, b| a.partial_cmp(b).unwrap()),
        }
    };
    println!(
        "policies: a={} ({}), b={} ({})",
        args.policy_a.display(),
        dump_a.method,
        args.policy_b.display(),
        dump_b.method
    );
    if let Some(y0) = condition_y0 {
        println!(
            "conditioned on y0 {y0} [{}]",
            model.observation_spaces[0].label(y0 as usize)
        );
    }
    match (value_of(&dump_a), value_of(&dump_b)) {
        (Some(va), Some(vb)) => println!("worst-case values: a {va}  b {vb}"),
        _ => println!("worst-case values unavailable for the chosen scope"),
    }
    println!("runs {}: cost difference (a - b)", comparison.rows.len());
    println!(
        "  min {}  max {}  mode {}  mean {:.4}",
        fmt_opt(&comparison.min_diff),
        fmt_opt(&comparison.max_diff),
        fmt_opt(&comparison.mode_diff),
        comparison.mean_diff
    );
    if !comparison.histogram.is_empty() {
        println!("  diff  count");
        for (diff, count) in &comparison.histogram {
            println!("  {diff:>5}  {count}");
        }
    }
    let mut report = RunReport::new("simulate", &digest)
        .phase(Phase::new("load", load_secs))
        .phase(Phase::new("simulate", sim_secs))
        .phase(Phase::new("write", write_secs));
    if let Some(out) = &args.out {
        report = report.output(out);
    }
    if let Some(out) = &args.hist_out {
        report = report.output(out);
    }
    print!("{report}");
    Ok(ExitCode::SUCCESS)
}

fn fmt_opt(v: &Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| x.to_string())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Schema {
        field: "csv".into(),
        detail: e.to_string(),
    }
}
