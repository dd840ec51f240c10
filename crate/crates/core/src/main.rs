use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lsc_core::catalog;
use lsc_core::cellgraph::{build_graph, ConductanceRule, GraphOptions, RegionSelector};
use lsc_core::claims;
use lsc_core::experiment::{inequality_probe, run_experiment, Budget, ExperimentPlan, Problem};
use lsc_core::geometry::{hausdorff_dimension, validate_lsc};
use lsc_core::ifs_file::{parse_ifs, write_ifs};
use lsc_core::potential::{
    capacity, dense, effective_resistance, hausdorff_masses, poincare_constant, resistance_constant, EnergyForm,
    Weighting, DEFAULT_TOL,
};
use lsc_core::{Error, IFSystem};

#[derive(Parser)]
#[command(name = "lsc", version, about = "Carpet-like fractal workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SystemArgs {
    /// Built-in system name (sc8, carpet104)
    #[arg(long, conflicts_with = "ifs", required_unless_present = "ifs")]
    system: Option<String>,
    /// IFS description file
    #[arg(long)]
    ifs: Option<PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long, default_value = "unit")]
    rule: String,
    /// Include point contacts as edges
    #[arg(long)]
    corner_edges: bool,
    /// Override the maximum level for this system
    #[arg(long)]
    budget: Option<usize>,
    /// TOML file with a `[budget]` table
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct OutArgs {
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightingArg {
    Uniform,
    Hausdorff,
}

#[derive(Subcommand)]
enum Command {
    /// Check the carpet axioms exactly
    Validate {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Similarity dimension
    Dim {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Build and export the level-n cell graph
    Graph {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        level: usize,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Effective resistance between two selections
    Resistance {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Also report the dense direct solve
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Poincare constant of the level-n graph
    Poincare {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        level: usize,
        #[arg(long, value_enum, default_value = "uniform")]
        weighting: WeightingArg,
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Resistance constant R_n truncated at level m
    Rnconst {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Solve every word instead of one per symmetry orbit
        #[arg(long)]
        no_symmetry: bool,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Discrete capacity of a selection
    Capacity {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        set: String,
        #[arg(long, value_enum, default_value = "hausdorff")]
        weighting: WeightingArg,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Verify both energy claims and certify their contradiction
    Claims {
        #[command(flatten)]
        sys: SystemArgs,
        /// Certificate file; the derivation log goes to stdout
        #[command(flatten)]
        out: OutArgs,
    },
    /// Multi-level experiment with CSV output and exponent fits
    Scan {
        #[command(flatten)]
        sys: SystemArgs,
        /// Inclusive range `a..b`
        #[arg(long)]
        levels: String,
        /// Comma-separated: crossing, corner, poincare, poincare-hausdorff,
        /// rnconst[:m], <label>=<from>~<to>
        #[arg(long, default_value = "crossing,corner")]
        problems: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Record wall-clock seconds in the CSV
        #[arg(long)]
        timing: bool,
        /// Also run the R_n / lambda_n inequality probe for n, m up to this
        #[arg(long)]
        probe: Option<usize>,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Write a system in the IFS file format
    ExportIfs {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownSystem(_)
            | Error::Parse(_)
            | Error::FileFormat { .. }
            | Error::BudgetExceeded { .. }
            | Error::InvalidRadicand(_) => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn load_system(args: &SystemArgs) -> CliResult<IFSystem> {
    match (&args.system, &args.ifs) {
        (Some(name), _) => Ok(catalog::build(name)?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            Ok(parse_ifs(&text)?)
        }
        (None, None) => Err(Failure::Usage("one of --system or --ifs is required".into())),
    }
}

fn budget_of(sys: &IFSystem, g: &GraphArgs) -> CliResult<Budget> {
    let mut budget = match &g.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            Budget::from_toml(&text)?
        }
        None => Budget::default(),
    };
    if let Some(b) = g.budget {
        budget.levels.insert(sys.name.clone(), b);
    }
    Ok(budget)
}

fn graph_options(g: &GraphArgs) -> CliResult<GraphOptions> {
    Ok(GraphOptions {
        rule: ConductanceRule::parse(&g.rule)?,
        corner_edges: g.corner_edges,
        ..GraphOptions::default()
    })
}

fn checked_options(sys: &IFSystem, g: &GraphArgs, level: usize) -> CliResult<GraphOptions> {
    budget_of(sys, g)?.check(&sys.name, level)?;
    graph_options(g)
}

fn selector(s: &str, sys: &IFSystem) -> CliResult<RegionSelector> {
    RegionSelector::parse(s, sys.radicand).map_err(|e| Failure::Usage(e.to_string()))
}

fn heuristic_note(opts: &GraphOptions, lines: &mut Vec<String>) {
    if let ConductanceRule::Theta(_) = opts.rule {
        lines.push("note heuristic conductance rule".into());
    }
}

fn emit(out: &OutArgs, text: &str) -> CliResult<()> {
    match &out.out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::Compute(format!("{}: {e}", path.display())))
}

fn join(lines: &[String]) -> String {
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

/// Splits on commas outside parentheses so `rect:(...)` stays whole.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_levels(s: &str) -> CliResult<std::ops::RangeInclusive<usize>> {
    let bad = || Failure::Usage(format!("expected --levels a..b, got `{s}`"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    Ok(a..=b)
}

fn weighting(arg: WeightingArg, g: &lsc_core::cellgraph::CellGraph, sys: &IFSystem) -> CliResult<Weighting> {
    Ok(match arg {
        WeightingArg::Uniform => Weighting::Uniform,
        WeightingArg::Hausdorff => {
            let d = hausdorff_dimension(sys, 1e-12)?.dimension;
            Weighting::Hausdorff(hausdorff_masses(g, sys, d)?)
        }
    })
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Validate { sys, out } => {
            let sys = load_system(&sys)?;
            let report = validate_lsc(&sys)?;
            let mut lines = vec![format!("system {} maps {}", sys.name, sys.len())];
            lines.extend(report.lines());
            emit(&out, &join(&lines))?;
            Ok(report.all_passed())
        }
        Command::Dim { sys, tol, out } => {
            let sys = load_system(&sys)?;
            let d = hausdorff_dimension(&sys, tol)?;
            let lines = vec![
                format!("system {}", sys.name),
                format!("dimension {}", d.dimension),
                format!("residual {}", d.residual),
                format!("bracket {} {}", d.bracket.0, d.bracket.1),
            ];
            emit(&out, &join(&lines))?;
            Ok(true)
        }
        Command::Graph { sys, level, graph, out } => {
            let sys = load_system(&sys)?;
            let opts = checked_options(&sys, &graph, level)?;
            let g = build_graph(&sys, level, opts)?;
            eprintln!("vertices {} edges {}", g.vertex_count(), g.edges.len());
            emit(&out, &g.export())?;
            Ok(true)
        }
        Command::Resistance { sys, level, from, to, tol, oracle, graph, out } => {
            let sys = load_system(&sys)?;
            let (from, to) = (selector(&from, &sys)?, selector(&to, &sys)?);
            let opts = checked_options(&sys, &graph, level)?;
            let g = build_graph(&sys, level, opts)?;
            let form = EnergyForm::from_graph(&g);
            let (a, b) = (g.select(&from), g.select(&to));
            let r = effective_resistance(&form, &a, &b, tol)?;
            let mut lines = vec![
                format!("system {} level {} rule {}", sys.name, level, opts.rule),
                format!("from {from} cells {}", a.len()),
                format!("to {to} cells {}", b.len()),
                format!("R {}", r.resistance),
                format!("energy {}", r.solution.energy),
                format!("flux {}", r.solution.flux),
                format!("residual {}", r.solution.residual),
                format!("iterations {}", r.solution.iterations),
            ];
            if oracle {
                match dense::resistance(&form, &a, &b) {
                    Ok(v) => lines.push(format!("oracle {v}")),
                    Err(e) => lines.push(format!("oracle unavailable: {e}")),
                }
            }
            heuristic_note(&opts, &mut lines);
            emit(&out, &join(&lines))?;
            Ok(true)
        }
        Command::Poincare { sys, level, weighting: w, oracle, graph, out } => {
            let sys = load_system(&sys)?;
            let opts = checked_options(&sys, &graph, level)?;
            let g = build_graph(&sys, level, opts)?;
            let form = EnergyForm::from_graph(&g);
            let wt = weighting(w, &g, &sys)?;
            let p = poincare_constant(&form, &wt)?;
            let mut lines = vec![
                format!("system {} level {} rule {} weighting {}", sys.name, level, opts.rule, p.weighting),
                format!("lambda {}", p.lambda),
                format!("sigma {}", p.sigma),
                format!("residual {}", p.residual),
                format!("iterations {}", p.iterations),
            ];
            if oracle {
                let masses = match &wt {
                    Weighting::Uniform => None,
                    Weighting::Hausdorff(m) => Some(m.as_slice()),
                };
                match dense::poincare(&form, masses) {
                    Ok(v) => lines.push(format!("oracle {v}")),
                    Err(e) => lines.push(format!("oracle unavailable: {e}")),
                }
            }
            heuristic_note(&opts, &mut lines);
            emit(&out, &join(&lines))?;
            Ok(true)
        }
        Command::Rnconst { sys, n, m, tol, no_symmetry, graph, out } => {
            let sys = load_system(&sys)?;
            let opts = checked_options(&sys, &graph, n + m)?;
            let rc = resistance_constant(&sys, n, m, opts, tol, !no_symmetry)?;
            let mut lines = vec![
                format!("system {} n {} m {} rule {}", sys.name, n, m, opts.rule),
                format!("truncated infimum over m = {m}"),
                format!("R {}", rc.value),
                format!("argmin {}", rc.argmin),
            ];
            for (w, r) in &rc.representatives {
                lines.push(format!("word {w} {r}"));
            }
            for w in &rc.skipped {
                lines.push(format!("skipped {w}"));
            }
            heuristic_note(&opts, &mut lines);
            emit(&out, &join(&lines))?;
            Ok(true)
        }
        Command::Capacity { sys, level, set, weighting: w, tol, graph, out } => {
            let sys = load_system(&sys)?;
            let sel = selector(&set, &sys)?;
            let opts = checked_options(&sys, &graph, level)?;
            let g = build_graph(&sys, level, opts)?;
            let form = EnergyForm::from_graph(&g);
            let masses = match weighting(w, &g, &sys)? {
                Weighting::Uniform => vec![1.0 / g.vertex_count() as f64; g.vertex_count()],
                Weighting::Hausdorff(m) => m,
            };
            let a = g.select(&sel);
            let c = capacity(&form, &masses, &a, tol)?;
            let mut lines = vec![
                format!("system {} level {} rule {}", sys.name, level, opts.rule),
                format!("set {sel} cells {}", a.len()),
                format!("capacity {}", c.value),
                format!("residual {}", c.residual),
                format!("iterations {}", c.iterations),
            ];
            heuristic_note(&opts, &mut lines);
            emit(&out, &join(&lines))?;
            Ok(true)
        }
        Command::Claims { sys, out } => {
            let sys = load_system(&sys)?;
            let report = claims::run_claims(&sys)?;
            print!("{}", report.log());
            match &out.out {
                Some(path) => write_file(path, &report.certificate.text())?,
                None => {
                    println!("certificate:");
                    print!("{}", report.certificate.text());
                }
            }
            Ok(true)
        }
        Command::Scan { sys, levels, problems, tol, timing, probe, graph, out } => {
            let sys = load_system(&sys)?;
            let levels = parse_levels(&levels)?;
            let problems = split_top_level(&problems)
                .into_iter()
                .map(|p| Problem::parse(p.trim(), sys.radicand))
                .collect::<Result<Vec<_>, _>>()?;
            let opts = graph_options(&graph)?;
            let budget = budget_of(&sys, &graph)?;
            let mut plan = ExperimentPlan::new(sys.clone(), levels, problems);
            plan.options = opts;
            plan.tol = tol;
            plan.budget = budget.clone();
            plan.timing = timing;
            let report = run_experiment(&plan)?;
            emit(&out, &report.csv())?;
            let mut summary = report.fits_csv();
            for (label, q) in &report.quotients {
                let cells: Vec<String> = q.iter().map(|(l, v)| format!("{l}:{v}")).collect();
                summary.push_str(&format!("quotient {label} {}\n", cells.join(" ")));
            }
            if let ConductanceRule::Theta(_) = opts.rule {
                summary.push_str("note heuristic conductance rule\n");
            }
            if let Some(k) = probe {
                let p = inequality_probe(&sys, k, opts, tol, &budget)?;
                summary.push_str(&join(&p.lines()));
            }
            match &out.out {
                Some(path) => {
                    let mut fits = path.clone().into_os_string();
                    fits.push(".fits");
                    write_file(Path::new(&fits), &summary)?;
                }
                None => print!("{summary}"),
            }
            Ok(true)
        }
        Command::ExportIfs { sys, out } => {
            let sys = load_system(&sys)?;
            emit(&out, &write_ifs(&sys))?;
            Ok(true)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("LSC_THREADS") {
        let n: usize = v.parse().map_err(|_| format!("LSC_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            return Err("LSC_THREADS must be positive".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
