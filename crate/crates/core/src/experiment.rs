//! Scaling experiments: per-level solves, CSV reports and exponent fits.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::ops::RangeInclusive;
use std::time::Instant;

use crate::cellgraph::{build_graph, GraphOptions, RegionSelector};
use crate::error::{Error, Result};
use crate::geometry::{hausdorff_dimension, IFSystem, Side, Word};
use crate::potential::{
    effective_resistance, hausdorff_masses, poincare_constant, resistance_constant, EnergyForm, Resistance, Weighting,
};

pub const CSV_HEADER: &str = "system,level,rule,problem,setA,setB,R,energy,residual,iters,seconds";
pub const FIT_HEADER: &str = "problem,levels,slope,intercept,residual,ratios";

/// Maximum level per system; systems without an entry are limited only by
/// the graph vertex cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    pub levels: BTreeMap<String, usize>,
}

impl Default for Budget {
    fn default() -> Self {
        let levels = [("carpet104".to_string(), 3), ("sc8".to_string(), 6)].into_iter().collect();
        Budget { levels }
    }
}

impl Budget {
    /// Reads `[budget]` entries from TOML, e.g. `budget.carpet104 = 2`.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        let mut budget = Budget::default();
        if let Some(entries) = table.get("budget") {
            let entries = entries
                .as_table()
                .ok_or_else(|| Error::Parse("`budget` must be a table".into()))?;
            for (name, v) in entries {
                let level = v
                    .as_integer()
                    .filter(|&l| l >= 0)
                    .ok_or_else(|| Error::Parse(format!("budget.{name} must be a non-negative integer")))?;
                budget.levels.insert(name.clone(), level as usize);
            }
        }
        Ok(budget)
    }

    pub fn limit(&self, system: &str) -> Option<usize> {
        self.levels.get(system).copied()
    }

    pub fn check(&self, system: &str, level: usize) -> Result<()> {
        match self.limit(system) {
            Some(b) if level > b => Err(Error::BudgetExceeded {
                system: system.to_string(),
                level: level as u32,
                budget: b as u32,
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemKind {
    /// Resistance between the left and right edges.
    Crossing,
    /// Resistance between the cells `F_1 K` and `F_26 K`.
    Corner,
    Poincare(WeightKind),
    /// `R_n` at `n` = row level, truncated at `m`.
    RnConst { m: usize },
    Pair { from: RegionSelector, to: RegionSelector },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightKind {
    Uniform,
    Hausdorff,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub label: String,
    pub kind: ProblemKind,
}

impl Problem {
    /// `crossing`, `corner`, `poincare`, `poincare-hausdorff`, `rnconst`,
    /// `rnconst:<m>` or `<label>=<from>~<to>`.
    pub fn parse(s: &str, radicand: u64) -> Result<Self> {
        let kind = match s {
            "crossing" => ProblemKind::Crossing,
            "corner" => ProblemKind::Corner,
            "poincare" => ProblemKind::Poincare(WeightKind::Uniform),
            "poincare-hausdorff" => ProblemKind::Poincare(WeightKind::Hausdorff),
            "rnconst" => ProblemKind::RnConst { m: 1 },
            _ => {
                if let Some(m) = s.strip_prefix("rnconst:") {
                    let m = m
                        .parse()
                        .ok()
                        .filter(|&m: &usize| m >= 1)
                        .ok_or_else(|| Error::Parse(format!("bad truncation level in `{s}`")))?;
                    ProblemKind::RnConst { m }
                } else if let Some((label, pair)) = s.split_once('=') {
                    let (a, b) = pair
                        .split_once('~')
                        .ok_or_else(|| Error::Parse(format!("expected <label>=<from>~<to>, got `{s}`")))?;
                    return Ok(Problem {
                        label: label.to_string(),
                        kind: ProblemKind::Pair {
                            from: RegionSelector::parse(a, radicand)?,
                            to: RegionSelector::parse(b, radicand)?,
                        },
                    });
                } else {
                    return Err(Error::Parse(format!("unknown problem `{s}`")));
                }
            }
        };
        Ok(Problem { label: s.to_string(), kind })
    }

    /// Highest graph level needed at row level `level`.
    fn graph_level(&self, level: usize) -> usize {
        match self.kind {
            ProblemKind::RnConst { m } => level + m,
            _ => level,
        }
    }

    fn selectors(&self, sys: &IFSystem) -> Option<(RegionSelector, RegionSelector)> {
        match &self.kind {
            ProblemKind::Crossing => Some((RegionSelector::Edge(Side::Left), RegionSelector::Edge(Side::Right))),
            ProblemKind::Corner => {
                let last = sys.len().min(26) as u32;
                Some((RegionSelector::Prefix(Word(vec![1])), RegionSelector::Prefix(Word(vec![last]))))
            }
            ProblemKind::Pair { from, to } => Some((from.clone(), to.clone())),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub system: IFSystem,
    pub levels: RangeInclusive<usize>,
    pub problems: Vec<Problem>,
    pub options: GraphOptions,
    pub tol: f64,
    pub budget: Budget,
    /// Record wall-clock seconds; otherwise the column is 0 so reports are
    /// reproducible byte for byte.
    pub timing: bool,
}

impl ExperimentPlan {
    pub fn new(system: IFSystem, levels: RangeInclusive<usize>, problems: Vec<Problem>) -> Self {
        ExperimentPlan {
            system,
            levels,
            problems,
            options: GraphOptions::default(),
            tol: crate::potential::DEFAULT_TOL,
            budget: Budget::default(),
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || *self.levels.start() == 0 {
            return Err(Error::InvalidSet(format!(
                "levels {}..{} must be a nonempty range starting at 1 or more",
                self.levels.start(),
                self.levels.end()
            )));
        }
        if self.problems.is_empty() {
            return Err(Error::InvalidSet("no problems given".into()));
        }
        for p in &self.problems {
            for level in self.levels.clone() {
                self.budget.check(&self.system.name, p.graph_level(level))?;
            }
        }
        Ok(())
    }
}

/// Numeric CSV cell: shortest round-trip decimal, or `inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Finite(f64),
    Infinite,
}

impl Value {
    pub fn finite(self) -> Option<f64> {
        match self {
            Value::Finite(x) => Some(x),
            Value::Infinite => None,
        }
    }
}

impl From<Resistance> for Value {
    fn from(r: Resistance) -> Self {
        match r {
            Resistance::Finite(x) => Value::Finite(x),
            Resistance::Infinite => Value::Infinite,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(x) if x.is_finite() => write!(f, "{x}"),
            _ => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub system: String,
    pub level: usize,
    pub rule: String,
    pub problem: String,
    pub set_a: String,
    pub set_b: String,
    pub value: Value,
    pub energy: Value,
    pub residual: f64,
    pub iterations: usize,
    pub seconds: f64,
}

/// Quotes a CSV field when it contains a comma or a quote.
fn field(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl ReportRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            field(&self.system),
            self.level,
            self.rule,
            field(&self.problem),
            field(&self.set_a),
            field(&self.set_b),
            self.value,
            self.energy,
            self.residual,
            self.iterations,
            self.seconds
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub levels: Vec<usize>,
    pub values: Vec<f64>,
    /// Least-squares slope of `ln value` against level.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log fit.
    pub residual: f64,
    /// `values[k+1] / values[k]`.
    pub ratios: Vec<f64>,
}

impl FitResult {
    pub fn fit(levels: &[usize], values: &[f64]) -> Result<Self> {
        if levels.len() != values.len() || levels.len() < 2 {
            return Err(Error::InvalidSet("a fit needs at least two levels".into()));
        }
        if values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidSet("fitted values must be positive and finite".into()));
        }
        let k = levels.len() as f64;
        let xs: Vec<f64> = levels.iter().map(|&l| l as f64).collect();
        let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let mx = xs.iter().sum::<f64>() / k;
        let my = ys.iter().sum::<f64>() / k;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        if sxx == 0.0 {
            return Err(Error::InvalidSet("a fit needs two distinct levels".into()));
        }
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        Ok(FitResult {
            levels: levels.to_vec(),
            values: values.to_vec(),
            slope,
            intercept,
            residual: (ss / k).sqrt(),
            ratios: values.windows(2).map(|w| w[1] / w[0]).collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    /// Fits per problem label; problems with fewer than two finite
    /// positive values are omitted.
    pub fits: Vec<(String, FitResult)>,
    /// Values of one problem divided by another, per level.
    pub quotients: Vec<(String, Vec<(usize, f64)>)>,
}

impl ExperimentReport {
    pub fn csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv());
            s.push('\n');
        }
        s
    }

    pub fn fits_csv(&self) -> String {
        let mut s = String::from(FIT_HEADER);
        s.push('\n');
        for (label, f) in &self.fits {
            let ratios: Vec<String> = f.ratios.iter().map(|r| r.to_string()).collect();
            writeln!(
                s,
                "{},{}..{},{},{},{},{}",
                field(label),
                f.levels[0],
                f.levels[f.levels.len() - 1],
                f.slope,
                f.intercept,
                f.residual,
                ratios.join(" ")
            )
            .unwrap();
        }
        s
    }

    pub fn values(&self, problem: &str) -> Vec<(usize, Value)> {
        self.rows.iter().filter(|r| r.problem == problem).map(|r| (r.level, r.value)).collect()
    }

    /// `numerator / denominator` at each level where both are finite.
    pub fn quotient(&self, numerator: &str, denominator: &str) -> Vec<(usize, f64)> {
        let den = self.values(denominator);
        self.values(numerator)
            .into_iter()
            .filter_map(|(l, v)| {
                let d = den.iter().find(|(k, _)| *k == l)?.1.finite()?;
                Some((l, v.finite()? / d))
            })
            .collect()
    }
}

fn solve_problem(plan: &ExperimentPlan, problem: &Problem, level: usize, dimension: Option<f64>) -> Result<ReportRow> {
    let sys = &plan.system;
    let start = Instant::now();
    let mut row = ReportRow {
        system: sys.name.clone(),
        level,
        rule: plan.options.rule.to_string(),
        problem: problem.label.clone(),
        set_a: "-".into(),
        set_b: "-".into(),
        value: Value::Infinite,
        energy: Value::Infinite,
        residual: 0.0,
        iterations: 0,
        seconds: 0.0,
    };
    match &problem.kind {
        ProblemKind::Poincare(w) => {
            let g = build_graph(sys, level, plan.options)?;
            let form = EnergyForm::from_graph(&g);
            let weighting = match w {
                WeightKind::Uniform => Weighting::Uniform,
                WeightKind::Hausdorff => {
                    let d = dimension.expect("dimension computed for hausdorff weighting");
                    Weighting::Hausdorff(hausdorff_masses(&g, sys, d)?)
                }
            };
            let p = poincare_constant(&form, &weighting)?;
            row.set_a = p.weighting.to_string();
            row.value = Value::Finite(p.lambda);
            row.energy = Value::Finite(p.sigma);
            row.residual = p.residual;
            row.iterations = p.iterations;
        }
        ProblemKind::RnConst { m } => {
            let rc = resistance_constant(sys, level, *m, plan.options, plan.tol, true)?;
            row.set_a = rc.argmin.to_string();
            row.set_b = format!("m={m}");
            row.value = rc.value.into();
            row.energy = match rc.value {
                Resistance::Finite(r) if r > 0.0 => Value::Finite(1.0 / r),
                _ => Value::Finite(0.0),
            };
            row.iterations = rc.representatives.len();
        }
        _ => {
            let (from, to) = problem.selectors(sys).expect("pair problem");
            let g = build_graph(sys, level, plan.options)?;
            let form = EnergyForm::from_graph(&g);
            let (a, b) = (g.select(&from), g.select(&to));
            row.set_a = from.to_string();
            row.set_b = to.to_string();
            let r = effective_resistance(&form, &a, &b, plan.tol)?;
            row.value = r.resistance.into();
            row.energy = Value::Finite(r.solution.energy);
            row.residual = r.solution.residual;
            row.iterations = r.solution.iterations;
        }
    }
    if plan.timing {
        row.seconds = start.elapsed().as_secs_f64();
    }
    Ok(row)
}

/// Runs every problem at every level in plan order.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    plan.validate()?;
    let needs_dimension = plan
        .problems
        .iter()
        .any(|p| p.kind == ProblemKind::Poincare(WeightKind::Hausdorff));
    let dimension = if needs_dimension {
        Some(hausdorff_dimension(&plan.system, 1e-12)?.dimension)
    } else {
        None
    };
    let mut rows = Vec::new();
    for level in plan.levels.clone() {
        for p in &plan.problems {
            rows.push(solve_problem(plan, p, level, dimension)?);
        }
    }
    let mut report = ExperimentReport { rows, fits: Vec::new(), quotients: Vec::new() };
    for p in &plan.problems {
        let pts: Vec<(usize, f64)> = report
            .values(&p.label)
            .into_iter()
            .filter_map(|(l, v)| v.finite().filter(|&x| x > 0.0).map(|x| (l, x)))
            .collect();
        let (ls, vs): (Vec<usize>, Vec<f64>) = pts.into_iter().unzip();
        if let Ok(f) = FitResult::fit(&ls, &vs) {
            report.fits.push((p.label.clone(), f));
        }
    }
    let has = |k: &ProblemKind| plan.problems.iter().find(|p| &p.kind == k).map(|p| p.label.clone());
    if let (Some(corner), Some(crossing)) = (has(&ProblemKind::Corner), has(&ProblemKind::Crossing)) {
        let q = report.quotient(&corner, &crossing);
        report.quotients.push((format!("{corner}/{crossing}"), q));
    }
    Ok(report)
}

/// Empirical constants for `R_n λ_m ≤ C λ_{n+m}` and `λ_{n+m} ≤ C λ_n λ_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct InequalityProbe {
    pub system: String,
    /// `(level, λ_level)`.
    pub lambda: Vec<(usize, f64)>,
    /// `(n, R_n)`, truncated at `m = 1`.
    pub resistance: Vec<(usize, f64)>,
    /// `(n, m, R_n λ_m / λ_{n+m}, λ_{n+m} / (λ_n λ_m))`.
    pub entries: Vec<(usize, usize, f64, f64)>,
    pub lower_constant: f64,
    pub upper_constant: f64,
}

impl InequalityProbe {
    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (l, v) in &self.lambda {
            out.push(format!("lambda {l} {v}"));
        }
        for (n, v) in &self.resistance {
            out.push(format!("rnconst {n} {v}"));
        }
        for (n, m, lo, hi) in &self.entries {
            out.push(format!("pair {n} {m} lower {lo} upper {hi}"));
        }
        out.push(format!("constant lower {}", self.lower_constant));
        out.push(format!("constant upper {}", self.upper_constant));
        out
    }
}

/// Probe over `n, m ∈ 1..=max_nm`; needs graphs up to level `2·max_nm`.
pub fn inequality_probe(sys: &IFSystem, max_nm: usize, options: GraphOptions, tol: f64, budget: &Budget) -> Result<InequalityProbe> {
    if max_nm == 0 {
        return Err(Error::InvalidSet("probe range must be at least 1".into()));
    }
    budget.check(&sys.name, 2 * max_nm)?;
    let mut lambda = Vec::new();
    for level in 1..=2 * max_nm {
        let g = build_graph(sys, level, options)?;
        let p = poincare_constant(&EnergyForm::from_graph(&g), &Weighting::Uniform)?;
        lambda.push((level, p.lambda));
    }
    let mut resistance = Vec::new();
    for n in 1..=max_nm {
        let rc = resistance_constant(sys, n, 1, options, tol, true)?;
        let Resistance::Finite(v) = rc.value else {
            return Err(Error::InvalidSet(format!("R_{n} is infinite")));
        };
        resistance.push((n, v));
    }
    let lam = |k: usize| lambda[k - 1].1;
    let mut entries = Vec::new();
    for n in 1..=max_nm {
        for m in 1..=max_nm {
            let r = resistance[n - 1].1;
            entries.push((n, m, r * lam(m) / lam(n + m), lam(n + m) / (lam(n) * lam(m))));
        }
    }
    let lower_constant = entries.iter().map(|e| e.2).fold(0.0, f64::max);
    let upper_constant = entries.iter().map(|e| e.3).fold(0.0, f64::max);
    Ok(InequalityProbe { system: sys.name.clone(), lambda, resistance, entries, lower_constant, upper_constant })
}
