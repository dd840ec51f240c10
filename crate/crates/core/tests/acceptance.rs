//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the summary is always printed. Set
//! `LSC_ACCEPT_LEVEL3=1` to include the optional level-3 scan.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use astro_float::{BigFloat, Consts, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use lsc_core::catalog::{self, carpet104_a, CARPET104_STRIP};
use lsc_core::cellgraph::{build_graph, level1_permutations, GraphOptions, RegionSelector};
use lsc_core::claims::{self, BoundValue, CellAssignment, Symbols, Verdict};
use lsc_core::experiment::{inequality_probe, run_experiment, Budget, ExperimentPlan, Problem};
use lsc_core::geometry::{classify, hausdorff_dimension, validate_lsc, Contact, Side};
use lsc_core::potential::{dense, effective_resistance, poincare_constant, EnergyForm, Resistance, Weighting};
use lsc_core::{Isometry, QuadNumber, Rounding};

use common::{disjoint_sets, form, random_connected, rel_err, rng};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn q(n: i64, d: i64) -> QuadNumber {
    QuadNumber::rational(n, d)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn construction_audit() -> Check {
    let sys = catalog::carpet104();
    ensure(sys.len() == 104, format!("{} maps", sys.len()))?;
    let a = carpet104_a();
    let a2 = &a * &a;
    let census = sys.ratio_census();
    let count = |r: &QuadNumber| census.iter().find(|(x, _)| x == r).map_or(0, |(_, c)| *c);
    let counts = (count(&a), count(&a2), count(&q(1, 4)));
    ensure(counts == (44, 48, 12) && census.len() == 3, format!("ratio census {counts:?}"))?;
    let report = validate_lsc(&sys).map_err(|e| e.to_string())?;
    ensure(report.all_passed(), format!("{:?}", report.lines()))?;
    ensure(&q(6, 1) * &(&a2 + &a) == q(1, 4), "6(a^2 + a) != 1/4")?;
    ensure(sys.ratio_square_sum() < QuadNumber::one(), "sum of squared ratios >= 1")?;

    // F_1..F_26 tile the bottom edge left to right, and nothing else meets it
    let squares = sys.squares();
    let mut x = QuadNumber::zero();
    for (i, sq) in squares.iter().enumerate().take(26) {
        ensure(sq.y0.is_zero() && sq.x0 == x, format!("F_{} breaks the bottom tiling", i + 1))?;
        x = sq.x1();
    }
    ensure(x == QuadNumber::one(), "bottom tiling does not reach 1")?;
    let others = squares[26..].iter().filter(|sq| sq.y0.is_zero()).count();
    ensure(others == 0, format!("{others} further cells meet the bottom edge"))?;
    Ok(format!("census 44/48/12, {}", report.lines().join(", ")))
}

fn strip_identity() -> Check {
    let sys = catalog::carpet104();
    let squares = sys.squares();
    let strip: Vec<_> = CARPET104_STRIP.iter().map(|&i| &squares[i - 1]).collect();
    let (y0, y1) = (q(1, 4), q(3, 4));
    for (k, sq) in strip.iter().enumerate() {
        ensure(
            sq.inside_rect(&QuadNumber::zero(), &y0, &QuadNumber::one(), &y1),
            format!("F_{} leaves the strip", CARPET104_STRIP[k]),
        )?;
    }
    for i in 0..strip.len() {
        for j in i + 1..strip.len() {
            ensure(classify(strip[i], strip[j]) != Contact::Overlap, "strip cells overlap")?;
        }
    }
    let area = strip.iter().fold(QuadNumber::zero(), |acc, sq| &acc + &(&sq.side * &sq.side));
    ensure(area == q(1, 2), format!("strip area {area}"))?;
    // selecting the rectangle at level 1 gives exactly the strip
    let g = build_graph(&sys, 1, GraphOptions::default()).map_err(|e| e.to_string())?;
    let sel = g.select(&RegionSelector::Rect([QuadNumber::zero(), y0, QuadNumber::one(), y1]));
    let expected: Vec<usize> = CARPET104_STRIP.iter().map(|i| i - 1).collect();
    ensure(sel == expected, format!("rect selection {sel:?}"))?;
    Ok("8 cells tile [0,1]x[1/4,3/4] with area 1/2".into())
}

fn claim_reproduction() -> Check {
    let sys = catalog::carpet104();
    let symbols = Symbols::carpet104();
    let strip = claims::strip_spec(&sys).map_err(|e| e.to_string())?;
    let e1 = claims::energy_expression(&sys, &strip).map_err(|e| e.to_string())?;
    ensure(e1.render(&symbols) == "(1/2)·4^θ·e_h", e1.render(&symbols))?;
    let corner = claims::corner_spec(&sys).map_err(|e| e.to_string())?;
    let e2 = claims::energy_expression(&sys, &corner).map_err(|e| e.to_string())?;
    ensure(e2.render(&symbols) == "(1/5)·a^(-θ)·e_f", e2.render(&symbols))?;

    let report = claims::run_claims(&sys).map_err(|e| e.to_string())?;
    let c = &report.certificate;
    ensure(c.upper.value == BoundValue::Rational(rat(1, 2)), "upper bound is not exactly 1/2")?;
    ensure(
        c.lower.value == BoundValue::LogRatio { coefficient: rat(1, 5), base: carpet104_a() },
        "lower bound is not -log5/log a",
    )?;
    let (lo, hi) = c.lower.enclosure;
    ensure(0.5002 <= lo && hi <= 0.5003 && lo <= hi, format!("enclosure [{lo}, {hi}]"))?;
    let w = c.witness.as_ref().ok_or("no witness")?;
    ensure(w.to_string() == "26250 > 26244" && w.sign > 0, format!("witness {w}"))?;
    // the witness itself, in arbitrary precision: 25^2 * 42 > 162^2
    ensure(
        BigInt::from(25).pow(2) * BigInt::from(42) == BigInt::from(26250) && BigInt::from(162).pow(2) == BigInt::from(26244),
        "witness integers",
    )?;
    ensure(c.verdict == Verdict::Contradiction, "verdict")?;

    let mut mutated = 0;
    for base in [&strip, &corner] {
        for idx in 0..base.cells.len() {
            let mut spec = base.clone();
            match &mut spec.cells[idx].1 {
                CellAssignment::Constant(v) => *v += rat(1, 10),
                CellAssignment::Copy { beta, .. } => *beta += rat(1, 10),
            }
            let r = claims::verify_continuity(&sys, &spec).map_err(|e| e.to_string())?;
            ensure(!r.passed(), format!("{} cell {} mutation not detected", spec.name, spec.cells[idx].0))?;
            mutated += 1;
        }
    }
    Ok(format!("bounds 1/2 and [{lo:.7}, {hi:.7}], witness {w}, {mutated} mutations rejected"))
}

/// Bisection for `Σ ρ_i^d = 1` on the census of `carpet104`, 200 bits.
fn carpet104_dimension_oracle() -> f64 {
    let p = 200;
    let rm = RoundingMode::ToEven;
    let mut cc = Consts::new().unwrap();
    let int = |n: u64| BigFloat::from_word(n, p);
    let a = int(42).sqrt(p, rm).sub(&int(6), p, rm).div(&int(12), p, rm);
    let ln_a = a.ln(p, rm, &mut cc);
    let ln_q = int(1).div(&int(4), p, rm).ln(p, rm, &mut cc);
    let one = int(1);
    let mut phi = |d: &BigFloat| {
        let t1 = int(44).mul(&d.mul(&ln_a, p, rm).exp(p, rm, &mut cc), p, rm);
        let t2 = int(48).mul(&d.mul(&ln_a, p, rm).mul(&int(2), p, rm).exp(p, rm, &mut cc), p, rm);
        let t3 = int(12).mul(&d.mul(&ln_q, p, rm).exp(p, rm, &mut cc), p, rm);
        t1.add(&t2, p, rm).add(&t3, p, rm)
    };
    let (mut lo, mut hi) = (int(1), int(2));
    for _ in 0..200 {
        let mid = lo.add(&hi, p, rm).div(&int(2), p, rm);
        if phi(&mid).cmp(&one).unwrap() > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = format!("{}", lo.add(&hi, p, rm).div(&int(2), p, rm));
    // astro-float prints `1.87...e+0`
    let (m, e) = s.split_once('e').unwrap_or((&s, "0"));
    m.parse::<f64>().unwrap() * 10f64.powi(e.parse::<i32>().unwrap())
}

fn dimension() -> Check {
    let sc8 = hausdorff_dimension(&catalog::sc8(), 1e-14).map_err(|e| e.to_string())?;
    let exact = 8f64.ln() / 3f64.ln();
    ensure((sc8.dimension - exact).abs() <= 1e-9, format!("sc8 {}", sc8.dimension))?;
    let sys = catalog::carpet104();
    let d = hausdorff_dimension(&sys, 1e-14).map_err(|e| e.to_string())?.dimension;
    ensure(d > 1.87 && d < 1.88, format!("carpet104 {d}"))?;
    let a = carpet104_a().to_f64(Rounding::Nearest);
    let phi = 44.0 * a.powf(d) + 48.0 * a.powf(2.0 * d) + 12.0 * 0.25f64.powf(d);
    ensure((phi - 1.0).abs() <= 1e-9, format!("|phi(d) - 1| = {}", (phi - 1.0).abs()))?;
    let oracle = carpet104_dimension_oracle();
    ensure((oracle - d).abs() <= 1e-12, format!("oracle {oracle} vs {d}"))?;
    Ok(format!("sc8 {:.12}, carpet104 {d:.12} (oracle {oracle:.12})", sc8.dimension))
}

fn solver_correctness() -> Check {
    let mut r = rng(5);
    // series and parallel closed forms
    for _ in 0..20 {
        let k = r.gen_range(1..30);
        let cs: Vec<f64> = (0..k).map(|_| r.gen_range(0.1..10.0)).collect();
        let edges: Vec<_> = cs.iter().enumerate().map(|(i, &c)| (i, i + 1, c)).collect();
        let res = effective_resistance(&form(k + 1, &edges), &[0], &[k], 1e-12).map_err(|e| e.to_string())?;
        let expected: f64 = cs.iter().map(|c| 1.0 / c).sum();
        ensure(rel_err(res.resistance.value(), expected) <= 1e-10, "series closed form")?;
        // k parallel two-edge paths
        let mut edges = Vec::new();
        let mut inv = 0.0;
        for (i, &c) in cs.iter().enumerate() {
            let d = r.gen_range(0.1..10.0);
            edges.push((0, i + 2, c));
            edges.push((i + 2, 1, d));
            inv += 1.0 / (1.0 / c + 1.0 / d);
        }
        let res = effective_resistance(&form(k + 2, &edges), &[0], &[1], 1e-12).map_err(|e| e.to_string())?;
        ensure(rel_err(res.resistance.value(), 1.0 / inv) <= 1e-10, "parallel closed form")?;
    }

    let mut worst = 0.0f64;
    let mut worst_re = 0.0f64;
    for trial in 0..50 {
        let n = r.gen_range(2..=200);
        let edges = random_connected(&mut r, n);
        let f = form(n, &edges);
        let (a, b) = disjoint_sets(&mut r, n);
        let sparse = effective_resistance(&f, &a, &b, 1e-12).map_err(|e| e.to_string())?;
        let Resistance::Finite(rs) = sparse.resistance else {
            return Err(format!("trial {trial}: infinite resistance on a connected graph"));
        };
        let rd = dense::resistance(&f, &a, &b).map_err(|e| e.to_string())?;
        worst = worst.max(rel_err(rs, rd));
        let pot = &sparse.solution.potentials;
        ensure(pot.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)), format!("trial {trial}: maximum principle"))?;
        let re = (rs * sparse.solution.energy - 1.0).abs();
        worst_re = worst_re.max(re);
        ensure(re <= 1e-8, format!("trial {trial}: R*E - 1 = {re}"))?;
    }
    ensure(worst <= 1e-10, format!("sparse vs dense {worst:e}"))?;

    // Rayleigh monotonicity under random deletions that keep the graph connected
    let n = 120;
    let mut edges = random_connected(&mut r, n);
    let (a, b) = disjoint_sets(&mut r, n);
    let mut prev = effective_resistance(&form(n, &edges), &a, &b, 1e-12).map_err(|e| e.to_string())?.resistance.value();
    let mut deletions = 0;
    while deletions < 20 {
        let k = r.gen_range(0..edges.len());
        let mut fewer = edges.clone();
        fewer.remove(k);
        let f = form(n, &fewer);
        if !f.is_connected() {
            continue;
        }
        let next = effective_resistance(&f, &a, &b, 1e-12).map_err(|e| e.to_string())?.resistance.value();
        ensure(next >= prev * (1.0 - 1e-10), format!("deletion {deletions}: {prev} -> {next}"))?;
        prev = next;
        edges = fewer;
        deletions += 1;
    }
    Ok(format!("max sparse/dense rel err {worst:.1e}, max |RE-1| {worst_re:.1e}, 20 deletions monotone"))
}

fn poincare_correctness() -> Check {
    let k2 = form(2, &[(0, 1, 1.0)]);
    let p3 = form(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
    let l2 = poincare_constant(&k2, &Weighting::Uniform).map_err(|e| e.to_string())?.lambda;
    let l3 = poincare_constant(&p3, &Weighting::Uniform).map_err(|e| e.to_string())?.lambda;
    ensure((l2 - 0.25).abs() <= 1e-10 && (l3 - 1.0 / 3.0).abs() <= 1e-10, format!("K2 {l2}, P3 {l3}"))?;

    let mut graphs: Vec<(String, EnergyForm, Option<Vec<f64>>)> = Vec::new();
    let mut r = rng(6);
    for i in 0..50 {
        let n = r.gen_range(2..=200);
        let edges = random_connected(&mut r, n);
        let masses = (i % 2 == 1).then(|| (0..n).map(|_| r.gen_range(0.2..5.0)).collect());
        graphs.push((format!("random {i}"), form(n, &edges), masses));
    }
    for (name, level) in [("sc8", 1), ("sc8", 2), ("carpet104", 1)] {
        let sys = catalog::build(name).unwrap();
        let g = build_graph(&sys, level, GraphOptions::default()).map_err(|e| e.to_string())?;
        graphs.push((format!("{name} level {level}"), EnergyForm::from_graph(&g), None));
    }
    let mut worst = 0.0f64;
    for (name, f, masses) in &graphs {
        let w = match masses {
            Some(m) => Weighting::Hausdorff(m.clone()),
            None => Weighting::Uniform,
        };
        let sparse = poincare_constant(f, &w).map_err(|e| format!("{name}: {e}"))?.lambda;
        let oracle = dense::poincare(f, masses.as_deref()).map_err(|e| e.to_string())?;
        let err = rel_err(sparse, oracle);
        worst = worst.max(err);
        ensure(err <= 1e-8, format!("{name}: {sparse} vs {oracle}"))?;
    }
    Ok(format!("K2 1/4, P3 1/3, {} graphs, max rel err {worst:.1e}", graphs.len()))
}

fn symmetry_suite() -> Check {
    let mut checked = 0;
    for (name, max_level) in [("carpet104", 2), ("sc8", 4)] {
        let sys = catalog::build(name).unwrap();
        let perms = level1_permutations(&sys).map_err(|e| e.to_string())?;
        ensure(perms.len() == 8, format!("{name}: {} isometries", perms.len()))?;
        for level in 1..=max_level {
            let opts = GraphOptions { corner_edges: true, ..GraphOptions::default() };
            let g = build_graph(&sys, level, opts).map_err(|e| e.to_string())?;
            for (iso, p) in &perms {
                let vmap = g.isometry_vertex_map(p).ok_or(format!("{name} {level} {iso}: no vertex map"))?;
                ensure(g.is_automorphism(&vmap), format!("{name} level {level}: {iso} is not an automorphism"))?;
                checked += 1;
            }
            let g = build_graph(&sys, level, GraphOptions::default()).map_err(|e| e.to_string())?;
            let f = EnergyForm::from_graph(&g);
            let a = g.select(&RegionSelector::Edge(Side::Left));
            let b = g.select(&RegionSelector::Edge(Side::Right));
            let sol = effective_resistance(&f, &a, &b, 1e-10).map_err(|e| e.to_string())?.solution;
            let h = &perms.iter().find(|(iso, _)| *iso == Isometry::H).unwrap().1;
            let vmap = g.isometry_vertex_map(h).unwrap();
            let dev = (0..g.vertex_count())
                .map(|v| (sol.potentials[v] + sol.potentials[vmap[v]] - 1.0).abs())
                .fold(0.0, f64::max);
            ensure(dev <= 1e-6, format!("{name} level {level}: f + f o h deviates by {dev}"))?;
        }
    }
    Ok(format!("{checked} isometry/level pairs are automorphisms; f + f o h = 1 holds"))
}

fn phenomenon_scan() -> Check {
    let problems = vec![Problem::parse("crossing", 42).unwrap(), Problem::parse("corner", 42).unwrap()];
    let last = if std::env::var_os("LSC_ACCEPT_LEVEL3").is_some() { 3 } else { 2 };
    let plan = ExperimentPlan::new(catalog::carpet104(), 1..=last, problems);
    let report = run_experiment(&plan).map_err(|e| e.to_string())?;
    let ratios = report.quotient("corner", "crossing");
    ensure(ratios.len() == last, "missing levels")?;
    ensure(ratios.windows(2).all(|w| w[1].1 > w[0].1), format!("ratio not increasing: {ratios:?}"))?;

    let probe = inequality_probe(&catalog::sc8(), 2, GraphOptions::default(), 1e-10, &Budget::default())
        .map_err(|e| e.to_string())?;
    let bounded = |c: f64| c.is_finite() && c > 0.0 && c < 100.0;
    ensure(bounded(probe.lower_constant) && bounded(probe.upper_constant), format!("{:?}", probe.lines()))?;
    let shown: Vec<String> = ratios.iter().map(|(l, v)| format!("{l}:{v:.3}")).collect();
    Ok(format!(
        "corner/crossing {}; sc8 constants {:.3} and {:.3}",
        shown.join(" "),
        probe.lower_constant,
        probe.upper_constant
    ))
}

fn determinism() -> Check {
    let exe = env!("CARGO_BIN_EXE_lsc");
    let runs: &[&[&str]] = &[
        &["validate", "--system", "carpet104"],
        &["dim", "--system", "carpet104"],
        &["graph", "--system", "sc8", "--level", "2", "--corner-edges"],
        &["resistance", "--system", "carpet104", "--level", "2", "--from", "prefix:1", "--to", "prefix:26"],
        &["poincare", "--system", "sc8", "--level", "3"],
        &["rnconst", "--system", "sc8", "--n", "1"],
        &["capacity", "--system", "carpet104", "--level", "1", "--set", "edge:bottom"],
        &["claims", "--system", "carpet104"],
        &["scan", "--system", "carpet104", "--levels", "1..2"],
        &["scan", "--system", "sc8", "--levels", "1..2", "--problems", "crossing,poincare,rnconst", "--probe", "1"],
        &["export-ifs", "--system", "carpet104"],
    ];
    for args in runs {
        let run = || {
            Command::new(exe)
                .args(*args)
                .env("LSC_THREADS", "2")
                .output()
                .map_err(|e| e.to_string())
        };
        let (x, y) = (run()?, run()?);
        ensure(x.status.success(), format!("{args:?} failed: {}", String::from_utf8_lossy(&x.stderr)))?;
        ensure(x.stdout == y.stdout && !x.stdout.is_empty(), format!("{args:?} differs between runs"))?;
    }
    Ok(format!("{} subcommand reports byte-identical", runs.len()))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Check); 9] = [
        ("exact construction audit", Duration::from_secs(1), construction_audit),
        ("strip identity", Duration::from_secs(1), strip_identity),
        ("claim reproduction", Duration::from_secs(1), claim_reproduction),
        ("dimension", Duration::from_secs(1), dimension),
        ("solver correctness", Duration::from_secs(10), solver_correctness),
        ("poincare correctness", Duration::from_secs(30), poincare_correctness),
        ("symmetry suite", Duration::from_secs(60), symmetry_suite),
        ("counterexample phenomenon scan", Duration::from_secs(30), phenomenon_scan),
        ("determinism", Duration::from_secs(120), determinism),
    ];
    let mut failed = 0;
    for (k, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed();
        let limit = if k == 7 && std::env::var_os("LSC_ACCEPT_LEVEL3").is_some() { Duration::from_secs(600) } else { *limit };
        let line = match outcome {
            Ok(detail) if secs <= limit => format!("PASS {} {name} ({:.2}s): {detail}", k + 1, secs.as_secs_f64()),
            Ok(detail) => {
                failed += 1;
                format!("FAIL {} {name} ({:.2}s > {}s): {detail}", k + 1, secs.as_secs_f64(), limit.as_secs())
            }
            Err(msg) => {
                failed += 1;
                format!("FAIL {} {name} ({:.2}s): {msg}", k + 1, secs.as_secs_f64())
            }
        };
        println!("{line}");
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
