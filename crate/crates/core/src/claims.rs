//! Exact verification of the two energy-scaling claims for `carpet104` and
//! of the contradiction between them.
//!
//! A gluing assigns to every level-1 cell either a constant or a rescaled
//! copy `α·u(γ(F_i⁻¹x)) + β` of a reference function `u`. Reference
//! functions are known only through constant traces on some regions and a
//! set of isometries they are invariant under, so energies stay symbolic:
//! a copy on a cell of ratio `ρ` contributes `α²·ρ^(-θ)·e_u`.

use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::catalog::{carpet104_a, CARPET104_STRIP};
use crate::error::{Error, Result};
use crate::exactnum::{QuadNumber, Rounding, SignWitness};
use crate::geometry::{classify, validate_lsc, Contact, IFSystem, Isometry, Point, Segment, Side, Square};
use crate::hiprec::{self, HiPrec};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn quad_of(r: &BigRational) -> QuadNumber {
    QuadNumber::from_big_rational(r.numer().clone(), r.denom().clone()).expect("nonzero denominator")
}

/// Closed axis-aligned box, possibly degenerate.
#[derive(Clone, Debug)]
struct Rect {
    x0: QuadNumber,
    y0: QuadNumber,
    x1: QuadNumber,
    y1: QuadNumber,
}

impl Rect {
    fn of_square(sq: &Square) -> Rect {
        Rect { x0: sq.x0.clone(), y0: sq.y0.clone(), x1: sq.x1(), y1: sq.y1() }
    }

    fn of_points(a: &Point, b: &Point) -> Rect {
        Rect {
            x0: (&a.x).min(&b.x).clone(),
            y0: (&a.y).min(&b.y).clone(),
            x1: (&a.x).max(&b.x).clone(),
            y1: (&a.y).max(&b.y).clone(),
        }
    }

    fn inside(&self, other: &Rect) -> bool {
        other.x0 <= self.x0 && self.x1 <= other.x1 && other.y0 <= self.y0 && self.y1 <= other.y1
    }

    fn meets(&self, other: &Rect) -> bool {
        self.x0 <= other.x1 && other.x0 <= self.x1 && self.y0 <= other.y1 && other.y0 <= self.y1
    }

    fn mapped(&self, g: Isometry) -> Rect {
        let a = g.apply(&Point::new(self.x0.clone(), self.y0.clone()));
        let b = g.apply(&Point::new(self.x1.clone(), self.y1.clone()));
        Rect::of_points(&a, &b)
    }
}

/// Where a reference function has a known constant value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceRegion {
    /// The square of level-1 cell `k` (1-based).
    Cell(usize),
    /// A full side of the unit square.
    Edge(Side),
}

impl TraceRegion {
    fn rect(&self, sys: &IFSystem) -> Result<Rect> {
        match self {
            TraceRegion::Cell(k) => Ok(Rect::of_square(&sys.map(*k)?.square())),
            TraceRegion::Edge(side) => {
                let s = side.segment();
                Ok(Rect::of_points(&s.a, &s.b))
            }
        }
    }
}

impl fmt::Display for TraceRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceRegion::Cell(k) => write!(f, "F_{k}"),
            TraceRegion::Edge(side) => write!(f, "{} edge", side.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceFunction {
    pub name: String,
    pub traces: Vec<(TraceRegion, BigRational)>,
    /// Isometries `γ` with `u ∘ γ = u`.
    pub symmetries: Vec<Isometry>,
}

impl ReferenceFunction {
    pub fn energy_symbol(&self) -> String {
        format!("e_{}", self.name)
    }

    /// Declared traces must not contradict each other under the declared
    /// symmetries.
    pub fn check_consistent(&self, sys: &IFSystem) -> Result<()> {
        let rects: Vec<Rect> = self.traces.iter().map(|(r, _)| r.rect(sys)).collect::<Result<_>>()?;
        for g in std::iter::once(Isometry::Id).chain(self.symmetries.iter().copied()) {
            for (i, (ri, ci)) in self.traces.iter().enumerate() {
                for (j, (rj, cj)) in self.traces.iter().enumerate() {
                    if ci != cj && rects[i].mapped(g).meets(&rects[j]) {
                        return Err(Error::Gluing(format!(
                            "{}: trace {ci} on {ri} meets trace {cj} on {rj} under {g}",
                            self.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn images(&self) -> impl Iterator<Item = Isometry> + '_ {
        std::iter::once(Isometry::Id).chain(self.symmetries.iter().copied())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CellAssignment {
    Constant(BigRational),
    /// `α·u(pre(F_i⁻¹ x)) + β` on cell `i`.
    Copy {
        reference: String,
        pre: Isometry,
        alpha: BigRational,
        beta: BigRational,
    },
}

impl CellAssignment {
    fn copy(reference: &str, pre: Isometry, alpha: BigRational, beta: BigRational) -> Self {
        CellAssignment::Copy { reference: reference.to_string(), pre, alpha, beta }
    }

    /// The assignment of a cell seen through `x ↦ g(x)` where `g` maps this
    /// cell onto the target cell and the glued function satisfies
    /// `value(x) = scale·value(g x) + shift`.
    fn transported(&self, g: Isometry, scale: &BigRational, shift: &BigRational) -> Self {
        match self {
            CellAssignment::Constant(c) => CellAssignment::Constant(scale * c + shift),
            CellAssignment::Copy { reference, pre, alpha, beta } => CellAssignment::Copy {
                reference: reference.clone(),
                pre: pre.compose(g),
                alpha: scale * alpha,
                beta: scale * beta + shift,
            },
        }
    }
}

impl fmt::Display for CellAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellAssignment::Constant(c) => write!(f, "constant {c}"),
            CellAssignment::Copy { reference, pre, alpha, beta } => {
                write!(f, "{alpha}*{reference}({pre} o F^-1) + {beta}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingSpec {
    pub name: String,
    pub references: Vec<ReferenceFunction>,
    /// Level-1 cells (1-based) on which the glued function lives.
    pub domain: Vec<usize>,
    pub cells: Vec<(usize, CellAssignment)>,
}

impl GluingSpec {
    pub fn assignment(&self, cell: usize) -> Option<&CellAssignment> {
        self.cells.iter().find(|(c, _)| *c == cell).map(|(_, a)| a)
    }

    pub fn assignment_mut(&mut self, cell: usize) -> Option<&mut CellAssignment> {
        self.cells.iter_mut().find(|(c, _)| *c == cell).map(|(_, a)| a)
    }

    fn reference(&self, name: &str) -> Result<&ReferenceFunction> {
        self.references
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::Gluing(format!("{}: unknown reference function `{name}`", self.name)))
    }

    fn check_complete(&self, sys: &IFSystem) -> Result<()> {
        let mut seen = vec![0usize; sys.len() + 1];
        for (c, a) in &self.cells {
            if *c == 0 || *c > sys.len() {
                return Err(Error::Gluing(format!("{}: cell {c} out of range", self.name)));
            }
            seen[*c] += 1;
            if let CellAssignment::Copy { reference, .. } = a {
                self.reference(reference)?;
            }
        }
        for &d in &self.domain {
            match seen.get(d) {
                Some(1) => {}
                Some(0) => return Err(Error::Gluing(format!("{}: cell {d} is not assigned", self.name))),
                _ => return Err(Error::Gluing(format!("{}: cell {d} is assigned more than once", self.name))),
            }
        }
        if let Some((c, _)) = self.cells.iter().find(|(c, _)| !self.domain.contains(c)) {
            return Err(Error::Gluing(format!("{}: cell {c} lies outside the domain", self.name)));
        }
        for r in &self.references {
            r.check_consistent(sys)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Mismatch {
        cells: (usize, usize),
        segment: Segment,
        values: (BigRational, BigRational),
    },
    /// The trace of `cell` on the shared segment does not follow from the
    /// declared data.
    Undetermined {
        cells: (usize, usize),
        segment: Segment,
        cell: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Mismatch { cells: (i, j), segment, values: (u, v) } => {
                write!(f, "mismatch on F_{i}/F_{j} contact {segment}: {u} vs {v}")
            }
            Violation::Undetermined { cells: (i, j), segment, cell } => {
                write!(f, "undetermined trace of F_{cell} on F_{i}/F_{j} contact {segment}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuityReport {
    pub spec: String,
    pub contacts_checked: usize,
    /// Ordered by cell pair.
    pub violations: Vec<Violation>,
}

impl ContinuityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

enum Trace {
    Known(BigRational),
    Unknown,
}

/// Exact value of the glued function on `segment` from the side of `cell`.
fn trace(sys: &IFSystem, spec: &GluingSpec, cell: usize, a: &CellAssignment, segment: &Segment) -> Result<Trace> {
    match a {
        CellAssignment::Constant(c) => Ok(Trace::Known(c.clone())),
        CellAssignment::Copy { reference, pre, alpha, beta } => {
            let u = spec.reference(reference)?;
            let m = sys.map(cell)?;
            let pa = pre.apply(&m.apply_inverse(&segment.a));
            let pb = pre.apply(&m.apply_inverse(&segment.b));
            let pulled = Rect::of_points(&pa, &pb);
            for g in u.images() {
                let image = pulled.mapped(g);
                for (region, c) in &u.traces {
                    if image.inside(&region.rect(sys)?) {
                        return Ok(Trace::Known(alpha * c + beta));
                    }
                }
            }
            Ok(Trace::Unknown)
        }
    }
}

/// Two copies of one reference with equal `α, β` agree on the segment if
/// their pullbacks differ by a declared symmetry.
fn copies_agree(sys: &IFSystem, spec: &GluingSpec, (i, ai): (usize, &CellAssignment), (j, aj): (usize, &CellAssignment), segment: &Segment) -> Result<bool> {
    let (
        CellAssignment::Copy { reference: ri, pre: pi, alpha: alpha_i, beta: beta_i },
        CellAssignment::Copy { reference: rj, pre: pj, alpha: alpha_j, beta: beta_j },
    ) = (ai, aj)
    else {
        return Ok(false);
    };
    if ri != rj || alpha_i != alpha_j || beta_i != beta_j {
        return Ok(false);
    }
    let u = spec.reference(ri)?;
    let (mi, mj) = (sys.map(i)?, sys.map(j)?);
    let pull = |pre: &Isometry, m: &crate::geometry::Similarity, p: &Point| pre.apply(&m.apply_inverse(p));
    Ok(u.images().any(|g| {
        [&segment.a, &segment.b]
            .iter()
            .all(|p| pull(pi, mi, p) == g.apply(&pull(pj, mj, p)))
    }))
}

/// Checks that the glued function is continuous across every segment
/// contact between two cells of the domain.
pub fn verify_continuity(sys: &IFSystem, spec: &GluingSpec) -> Result<ContinuityReport> {
    spec.check_complete(sys)?;
    let mut domain = spec.domain.clone();
    domain.sort_unstable();
    let squares: Vec<Square> = sys.squares();
    let boxes: Vec<[f64; 4]> = squares.iter().map(Square::float_bbox).collect();
    let mut violations = Vec::new();
    let mut contacts_checked = 0;
    for (x, &i) in domain.iter().enumerate() {
        for &j in &domain[x + 1..] {
            let (p, q) = (&boxes[i - 1], &boxes[j - 1]);
            if p[0] > q[2] || q[0] > p[2] || p[1] > q[3] || q[1] > p[3] {
                continue;
            }
            let Contact::Segment(segment) = classify(&squares[i - 1], &squares[j - 1]) else {
                continue;
            };
            contacts_checked += 1;
            let ai = spec.assignment(i).expect("complete");
            let aj = spec.assignment(j).expect("complete");
            match (trace(sys, spec, i, ai, &segment)?, trace(sys, spec, j, aj, &segment)?) {
                (Trace::Known(u), Trace::Known(v)) => {
                    if u != v {
                        violations.push(Violation::Mismatch { cells: (i, j), segment, values: (u, v) });
                    }
                }
                (ti, tj) => {
                    if copies_agree(sys, spec, (i, ai), (j, aj), &segment)? {
                        continue;
                    }
                    let cell = if matches!(ti, Trace::Unknown) { i } else { j };
                    let _ = tj;
                    violations.push(Violation::Undetermined { cells: (i, j), segment, cell });
                }
            }
        }
    }
    Ok(ContinuityReport { spec: spec.name.clone(), contacts_checked, violations })
}

/// Named symbols used when printing exact numbers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Symbols {
    pub entries: Vec<(String, QuadNumber)>,
}

impl Symbols {
    pub fn carpet104() -> Self {
        Symbols { entries: vec![("a".into(), carpet104_a())] }
    }

    pub fn name_of(&self, x: &QuadNumber) -> Option<&str> {
        self.entries.iter().find(|(_, v)| v == x).map(|(n, _)| n.as_str())
    }

    /// `a`, `1/a`, or the exact literal.
    pub fn describe(&self, x: &QuadNumber) -> String {
        if let Some(n) = self.name_of(x) {
            return n.to_string();
        }
        if let Ok(r) = x.recip() {
            if let Some(n) = self.name_of(&r) {
                return format!("1/{n}");
            }
        }
        x.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnergyTerm {
    pub coefficient: BigRational,
    /// Contraction ratio `ρ`; the term is `coefficient·ρ^(-θ)·e_reference`.
    pub base: QuadNumber,
    pub reference: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnergyExpression {
    /// Sorted by reference then base; one term per pair.
    pub terms: Vec<EnergyTerm>,
}

impl EnergyExpression {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn render(&self, symbols: &Symbols) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                let scale = match t.base.recip().ok().and_then(|r| r.as_rational()) {
                    Some((n, d)) if d.is_one() => format!("{n}^θ"),
                    _ => format!("{}^(-θ)", symbols.describe(&t.base)),
                };
                format!("({})·{}·e_{}", t.coefficient, scale, t.reference)
            })
            .collect();
        parts.join(" + ")
    }

    /// Exact value at a rational `θ = p/q` when every `ρ^(-θ)` is rational.
    pub fn evaluate_rational(&self, theta: &BigRational) -> Option<Vec<(String, BigRational)>> {
        let mut out: Vec<(String, BigRational)> = Vec::new();
        for t in &self.terms {
            let (n, d) = t.base.as_rational()?;
            let scale = rational_power(&BigRational::new(d, n), theta)?;
            let v = &t.coefficient * scale;
            match out.iter_mut().find(|(r, _)| *r == t.reference) {
                Some((_, acc)) => *acc += v,
                None => out.push((t.reference.clone(), v)),
            }
        }
        Some(out)
    }

    /// Directed enclosure of the total coefficient of a single-term
    /// expression for `θ ∈ [lo, hi]`.
    pub fn enclose_single(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let [t] = self.terms.as_slice() else { return None };
        let mut hp = HiPrec::default();
        let c = quad_of(&t.coefficient);
        // c·ρ^(-θ) = c·exp(θ·ln(1/ρ)), increasing in θ for ρ < 1
        let inv = t.base.recip().ok()?;
        let ln_lo = {
            let x = hp.quad(&inv, Rounding::Down);
            hp.ln(&x, Rounding::Down)
        };
        let ln_hi = {
            let x = hp.quad(&inv, Rounding::Up);
            hp.ln(&x, Rounding::Up)
        };
        let t_lo = hp.from_f64(lo);
        let t_hi = hp.from_f64(hi);
        let e_lo = hp.mul(&t_lo, if lo >= 0.0 { &ln_lo } else { &ln_hi }, Rounding::Down);
        let e_hi = hp.mul(&t_hi, if hi >= 0.0 { &ln_hi } else { &ln_lo }, Rounding::Up);
        let x_lo = hp.exp(&e_lo, Rounding::Down);
        let x_hi = hp.exp(&e_hi, Rounding::Up);
        let c_lo = hp.quad(&c, Rounding::Down);
        let c_hi = hp.quad(&c, Rounding::Up);
        Some((
            hiprec::to_f64(&hp.mul(&c_lo, &x_lo, Rounding::Down), Rounding::Down),
            hiprec::to_f64(&hp.mul(&c_hi, &x_hi, Rounding::Up), Rounding::Up),
        ))
    }
}

/// `x^(p/q)` for positive rational `x` when the root is rational.
fn rational_power(x: &BigRational, e: &BigRational) -> Option<BigRational> {
    let q = e.denom().to_u32()?;
    let p = e.numer().to_i32()?;
    let root = |n: &BigInt| -> Option<BigInt> {
        let r = n.nth_root(q);
        (r.pow(q) == *n).then_some(r)
    };
    let base = BigRational::new(root(x.numer())?, root(x.denom())?);
    let pow = num_traits::pow::pow(base.clone(), p.unsigned_abs() as usize);
    Some(if p < 0 { pow.recip() } else { pow })
}

fn collect_terms(sys: &IFSystem, spec: &GluingSpec) -> Result<EnergyExpression> {
    let mut terms: Vec<EnergyTerm> = Vec::new();
    for (cell, a) in &spec.cells {
        if let CellAssignment::Copy { reference, alpha, .. } = a {
            if alpha.is_zero() {
                continue;
            }
            let base = sys.map(*cell)?.ratio.clone();
            let coef = alpha * alpha;
            match terms.iter_mut().find(|t| t.reference == *reference && t.base == base) {
                Some(t) => t.coefficient += coef,
                None => terms.push(EnergyTerm { coefficient: coef, base, reference: reference.clone() }),
            }
        }
    }
    terms.sort_by(|x, y| x.reference.cmp(&y.reference).then(x.base.cmp(&y.base)));
    Ok(EnergyExpression { terms })
}

/// Renormalized energy of a continuity-verified gluing. Constants contribute
/// nothing; isometric pre-composition leaves reference energies unchanged.
pub fn energy_expression(sys: &IFSystem, spec: &GluingSpec) -> Result<EnergyExpression> {
    if !verify_continuity(sys, spec)?.passed() {
        return Err(Error::UnverifiedGluing(spec.name.clone()));
    }
    collect_terms(sys, spec)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Upper,
    Lower,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Upper => "upper",
            Direction::Lower => "lower",
        }
    }
}

/// `θ` bound value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundValue {
    Rational(BigRational),
    /// `log(1/coefficient) / log(1/base)`.
    LogRatio { coefficient: BigRational, base: QuadNumber },
}

/// Analytic inputs taken as given rather than re-derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedAxiom {
    RestrictionMonotone,
    SymmetricGluingMinimal,
    NearMinimizers,
    ResistanceVariational,
}

impl NamedAxiom {
    pub fn statement(self) -> &'static str {
        match self {
            NamedAxiom::RestrictionMonotone => "restricting to a subsystem does not increase energy",
            NamedAxiom::SymmetricGluingMinimal => "the symmetric gluing attains the subsystem resistance minimum",
            NamedAxiom::NearMinimizers => "for every eps > 0 a continuous near-minimizer exists; bounds are taken as eps -> 0",
            NamedAxiom::ResistanceVariational => "every admissible function has energy at least the inverse resistance",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationStep {
    pub label: String,
    pub axiom: Option<NamedAxiom>,
    pub detail: String,
}

impl fmt::Display for DerivationStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.label, self.detail)?;
        if let Some(a) = self.axiom {
            write!(f, " (axiom: {})", a.statement())?;
        }
        Ok(())
    }
}

fn step(label: &str, axiom: Option<NamedAxiom>, detail: impl Into<String>) -> DerivationStep {
    DerivationStep { label: label.into(), axiom, detail: detail.into() }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaBound {
    pub direction: Direction,
    pub value: BoundValue,
    pub description: String,
    /// Directed enclosure of the exact value.
    pub enclosure: (f64, f64),
    pub derivation: Vec<DerivationStep>,
}

impl ThetaBound {
    /// Five-decimal outward rounding of the enclosure.
    pub fn decimal_enclosure(&self) -> (String, String) {
        (decimal_5(self.enclosure.0, false), decimal_5(self.enclosure.1, true))
    }

    pub fn line(&self) -> String {
        match &self.value {
            BoundValue::Rational(r) => format!("bound {} exact {r}", self.direction.name()),
            BoundValue::LogRatio { .. } => {
                let (lo, hi) = self.decimal_enclosure();
                format!("bound {} {} enclosure {lo} {hi}", self.direction.name(), self.description)
            }
        }
    }
}

fn decimal_5(x: f64, up: bool) -> String {
    let exact = BigRational::from_float(x).expect("finite enclosure") * BigInt::from(100_000);
    let k = if up { exact.ceil() } else { exact.floor() }.to_integer();
    let sign = if k.is_negative() { "-" } else { "" };
    let a = k.abs();
    let (int, frac) = (&a / 100_000, &a % 100_000);
    format!("{sign}{int}.{frac:0>5}")
}

/// `log x / log y` as an exact rational when it is one (`x >= 1`, `y > 1`).
/// Candidates are continued-fraction convergents of the float ratio with
/// small denominators; each is confirmed by `x^q == y^p`.
pub fn exact_log_ratio(x: &QuadNumber, y: &QuadNumber) -> Option<BigRational> {
    let one = QuadNumber::one();
    if *x < one || *y <= one {
        return None;
    }
    if *x == one {
        return Some(BigRational::zero());
    }
    let lx = x.to_f64(Rounding::Nearest).ln();
    let ly = y.to_f64(Rounding::Nearest).ln();
    let mut r = lx / ly;
    if !r.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (1u64, 0u64, r.floor() as u64, 1u64);
    for _ in 0..16 {
        if p1 > 0 && p1 <= 256 && q1 <= 256 && x.pow(q1 as u32) == y.pow(p1 as u32) {
            return Some(BigRational::new(BigInt::from(p1), BigInt::from(q1)));
        }
        let frac = r - r.floor();
        if frac < 1e-12 || q1 > 256 {
            return None;
        }
        r = 1.0 / frac;
        let a = r.floor() as u64;
        (p0, q0, p1, q1) = (p1, q1, a.checked_mul(p1)?.checked_add(p0)?, a.checked_mul(q1)?.checked_add(q0)?);
    }
    None
}

fn log_ratio_enclosure(num: &QuadNumber, den: &QuadNumber) -> (f64, f64) {
    let mut hp = HiPrec::default();
    let ln = |hp: &mut HiPrec, x: &QuadNumber, mode: Rounding| {
        let v = hp.quad(x, mode);
        hp.ln(&v, mode)
    };
    let n_lo = ln(&mut hp, num, Rounding::Down);
    let n_hi = ln(&mut hp, num, Rounding::Up);
    let d_lo = ln(&mut hp, den, Rounding::Down);
    let d_hi = ln(&mut hp, den, Rounding::Up);
    // den > 1, so the denominator enclosure is positive
    let (lo_n, hi_n) = (hiprec::to_f64(&n_lo, Rounding::Down), hiprec::to_f64(&n_hi, Rounding::Up));
    let lo = if lo_n >= 0.0 { hp.div(&n_lo, &d_hi, Rounding::Down) } else { hp.div(&n_lo, &d_lo, Rounding::Down) };
    let hi = if hi_n >= 0.0 { hp.div(&n_hi, &d_lo, Rounding::Up) } else { hp.div(&n_hi, &d_hi, Rounding::Up) };
    (hiprec::to_f64(&lo, Rounding::Down), hiprec::to_f64(&hi, Rounding::Up))
}

/// Bound on `θ` from `coefficient·base^(-θ) ≤ 1` (upper) or `≥ 1` (lower),
/// i.e. `θ` compared with `log(1/coefficient) / log(1/base)`.
pub fn theta_bound(direction: Direction, coefficient: &BigRational, base: &QuadNumber, symbols: &Symbols) -> Result<ThetaBound> {
    let bad = |reason: &str| Error::Derivation { step: "bound".into(), reason: reason.into() };
    if !coefficient.is_positive() {
        return Err(bad("coefficient must be positive"));
    }
    let one = QuadNumber::one();
    if base.sign() <= 0 || *base >= one {
        return Err(bad("base must lie in (0, 1)"));
    }
    let inv_c = quad_of(&coefficient.recip());
    let inv_b = base.recip()?;
    let relation = match direction {
        Direction::Upper => "<=",
        Direction::Lower => ">=",
    };
    let inequality = format!(
        "({coefficient})·{}^(-θ) {relation} 1  =>  θ {relation} log({})/log({})",
        parenthesized(symbols.describe(base)),
        symbols.describe(&inv_c),
        symbols.describe(&inv_b)
    );
    // log(1/c) may be negative when c > 1
    let exact = if inv_c >= one {
        exact_log_ratio(&inv_c, &inv_b)
    } else {
        exact_log_ratio(&quad_of(coefficient), &inv_b).map(|r| -r)
    };
    let (value, description, enclosure) = match exact {
        Some(r) => {
            let f = r.to_f64().unwrap_or(f64::NAN);
            let enc = (next_down(f), next_up(f));
            (BoundValue::Rational(r.clone()), r.to_string(), enc)
        }
        None => (
            BoundValue::LogRatio { coefficient: coefficient.clone(), base: base.clone() },
            format!("log({})/log({})", symbols.describe(&inv_c), symbols.describe(&inv_b)),
            log_ratio_enclosure(&inv_c, &inv_b),
        ),
    };
    Ok(ThetaBound {
        direction,
        value,
        description,
        enclosure,
        derivation: vec![step("bound", None, inequality)],
    })
}

fn parenthesized(s: String) -> String {
    if s.chars().all(|c| c.is_alphanumeric() || c == '_') {
        s
    } else {
        format!("({s})")
    }
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    f64::from_bits(if x > 0.0 { x.to_bits() + 1 } else { x.to_bits() - 1 })
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

/// Reference `h` with `h = 0` on the right edge, `h = 1` on the left edge and
/// invariant under the vertical flip.
pub fn strip_reference() -> ReferenceFunction {
    ReferenceFunction {
        name: "h".into(),
        traces: vec![
            (TraceRegion::Edge(Side::Right), BigRational::zero()),
            (TraceRegion::Edge(Side::Left), BigRational::one()),
        ],
        symmetries: vec![Isometry::V],
    }
}

/// Copies `h/4 + k/4` on the eight strip cells, `k = 3 - 4·x0`.
pub fn strip_spec(sys: &IFSystem) -> Result<GluingSpec> {
    let mut cells = Vec::new();
    for &i in &CARPET104_STRIP {
        let sq = sys.map(i)?.square();
        let (n, d) = sq.x0.as_rational().ok_or_else(|| Error::Gluing(format!("strip cell {i} has irrational corner")))?;
        let k = BigRational::from_integer(BigInt::from(3)) - BigRational::new(n, d) * BigInt::from(4);
        cells.push((i, CellAssignment::copy("h", Isometry::Id, rat(1, 4), k / BigInt::from(4))));
    }
    Ok(GluingSpec {
        name: "strip".into(),
        references: vec![strip_reference()],
        domain: CARPET104_STRIP.to_vec(),
        cells,
    })
}

/// Reference `f` with `f = 0` on cell 1 and `f = 1` on cell 26.
pub fn corner_reference() -> ReferenceFunction {
    ReferenceFunction {
        name: "f".into(),
        traces: vec![(TraceRegion::Cell(1), BigRational::zero()), (TraceRegion::Cell(26), BigRational::one())],
        symmetries: vec![],
    }
}

/// The four-step corner gluing `g`: a staircase of constants and copies
/// `f/10 + (j-1)/10` along the bottom-left, its diagonal mirror, the value
/// 1/2 on the rest of the left half, and `g∘Γ_h = 1 - g`.
pub fn corner_spec(sys: &IFSystem) -> Result<GluingSpec> {
    let report = validate_lsc(sys)?;
    if !report.all_passed() || sys.len() != 104 {
        return Err(Error::Gluing("the corner gluing needs the validated 104-cell system".into()));
    }
    let perm = |g: Isometry| -> Vec<usize> {
        report.permutation(g).expect("validated").iter().map(|i| i + 1).collect()
    };
    let (d1, h) = (perm(Isometry::D1), perm(Isometry::H));
    let tenth = |k: i64| rat(k, 10);
    let mut assign: Vec<Option<CellAssignment>> = vec![None; 105];

    // step 1
    assign[1] = Some(CellAssignment::Constant(BigRational::zero()));
    for j in 1..=6i64 {
        assign[2 * j as usize] = Some(CellAssignment::Constant(tenth(j - 1)));
    }
    for j in 1..=5i64 {
        assign[2 * j as usize + 1] = Some(CellAssignment::copy("f", Isometry::Id, tenth(1), tenth(j - 1)));
    }
    // step 2: g = g∘Γ_d1 on cells 90..100
    let (one, zero) = (BigRational::one(), BigRational::zero());
    for c in 90..=100 {
        let src = d1[c - 1];
        let a = assign[src]
            .as_ref()
            .filter(|_| (1..=12).contains(&src))
            .ok_or_else(|| Error::Gluing(format!("diagonal image of cell {c} is cell {src}, outside 1..12")))?;
        assign[c] = Some(a.transported(Isometry::D1, &one, &zero));
    }
    // steps 3 and 4
    let squares = sys.squares();
    let half = QuadNumber::rational(1, 2);
    for c in 1..=104 {
        let sq = &squares[c - 1];
        if sq.x1() <= half {
            if assign[c].is_none() {
                assign[c] = Some(CellAssignment::Constant(rat(1, 2)));
            }
        } else if sq.x0 < half {
            return Err(Error::Gluing(format!("cell {c} straddles the vertical midline")));
        }
    }
    for c in 1..=104 {
        if squares[c - 1].x0 >= half {
            let src = h[c - 1];
            let a = assign[src].clone().expect("left half assigned");
            assign[c] = Some(a.transported(Isometry::H, &-one.clone(), &one));
        }
    }
    Ok(GluingSpec {
        name: "corner".into(),
        references: vec![corner_reference()],
        domain: (1..=104).collect(),
        cells: (1..=104).map(|c| (c, assign[c].clone().expect("every cell assigned"))).collect(),
    })
}

/// Single-term expression `(coefficient, base, reference)`.
fn single_term<'e>(expr: &'e EnergyExpression, step_name: &str) -> Result<&'e EnergyTerm> {
    match expr.terms.as_slice() {
        [t] => Ok(t),
        _ => Err(Error::Derivation {
            step: step_name.into(),
            reason: format!("expected a single energy term, found {}", expr.terms.len()),
        }),
    }
}

fn require(cond: bool, label: &str, reason: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Derivation { step: label.into(), reason: reason.into() })
    }
}

/// `θ ≤ 1/2` from the horizontal strip.
pub fn claim1_upper_bound(sys: &IFSystem) -> Result<ThetaBound> {
    let symbols = Symbols::carpet104();
    let mut log = Vec::new();

    if sys.len() != 104 {
        return Err(Error::Gluing("the strip gluing needs the 104-cell system".into()));
    }
    let squares = sys.squares();
    let rect = Rect {
        x0: QuadNumber::zero(),
        y0: QuadNumber::rational(1, 4),
        x1: QuadNumber::one(),
        y1: QuadNumber::rational(3, 4),
    };
    let strip: Vec<&Square> = CARPET104_STRIP.iter().map(|&i| &squares[i - 1]).collect();
    let inside = strip.iter().all(|sq| Rect::of_square(sq).inside(&rect));
    let area = strip.iter().fold(QuadNumber::zero(), |acc, sq| &acc + &(&sq.side * &sq.side));
    require(inside && area == QuadNumber::rational(1, 2), "strip", "strip cells do not tile [0,1]x[1/4,3/4]")?;
    log.push(step("strip", None, "cells 38,39,88,89,101,102,103,104 tile [0,1]x[1/4,3/4] (exact area 1/2, non-overlapping)"));

    let spec = strip_spec(sys)?;
    let report = verify_continuity(sys, &spec)?;
    require(report.passed(), "continuity", report.first_violation().map(|v| v.to_string()).unwrap_or_default())?;
    log.push(step("continuity", None, format!("strip gluing h/4 + k/4 continuous across {} contacts", report.contacts_checked)));

    let expr = energy_expression(sys, &spec)?;
    let term = single_term(&expr, "energy")?.clone();
    log.push(step("energy", None, format!("E_S(glued) = {}", expr.render(&symbols))));
    log.push(step("restriction", Some(NamedAxiom::RestrictionMonotone), "e_h >= E_S(h restricted to the strip)"));
    log.push(step(
        "minimum",
        Some(NamedAxiom::SymmetricGluingMinimal),
        "E_S(h restricted to the strip) >= E_S(glued), and e_h > 0 divides out",
    ));
    let mut bound = theta_bound(Direction::Upper, &term.coefficient, &term.base, &symbols)?;
    log.append(&mut bound.derivation);
    bound.derivation = log;
    Ok(bound)
}

/// `θ ≥ log 5 / log(1/a)` from the corner gluing.
pub fn claim2_lower_bound(sys: &IFSystem) -> Result<ThetaBound> {
    let symbols = Symbols::carpet104();
    let mut log = Vec::new();
    let spec = corner_spec(sys)?;
    let report = verify_continuity(sys, &spec)?;
    require(report.passed(), "continuity", report.first_violation().map(|v| v.to_string()).unwrap_or_default())?;
    log.push(step("continuity", None, format!("corner gluing continuous across {} contacts", report.contacts_checked)));

    let g1 = spec.assignment(1);
    let g26 = spec.assignment(26);
    require(
        g1 == Some(&CellAssignment::Constant(BigRational::zero())) && g26 == Some(&CellAssignment::Constant(BigRational::one())),
        "boundary",
        "glued function is not 0 on cell 1 and 1 on cell 26",
    )?;
    log.push(step("boundary", None, "g = 0 on F_1 and g = 1 on F_26"));

    let expr = energy_expression(sys, &spec)?;
    let term = single_term(&expr, "energy")?.clone();
    require(
        term.coefficient == rat(1, 5) && term.base == carpet104_a(),
        "energy",
        format!("expected (1/5)·a^(-θ)·e_f, got {}", expr.render(&symbols)),
    )?;
    log.push(step("energy", None, format!("E(g) = {}", expr.render(&symbols))));
    log.push(step("resistance", Some(NamedAxiom::ResistanceVariational), "E(g) >= R(F_1 K, F_26 K)^-1"));
    log.push(step("limit", Some(NamedAxiom::NearMinimizers), "e_f <= R(F_1 K, F_26 K)^-1 + eps, eps -> 0"));
    let mut bound = theta_bound(Direction::Lower, &term.coefficient, &term.base, &symbols)?;
    log.append(&mut bound.derivation);
    bound.derivation = log;
    Ok(bound)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Contradiction,
    NoContradiction,
    Undecided,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Contradiction => "contradiction",
            Verdict::NoContradiction => "no contradiction",
            Verdict::Undecided => "undecided",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContradictionCertificate {
    pub upper: ThetaBound,
    pub lower: ThetaBound,
    pub verdict: Verdict,
    pub witness: Option<SignWitness>,
    /// Equivalences from `lower > upper` down to the witness.
    pub chain: Vec<String>,
    pub symbols: Symbols,
}

impl ContradictionCertificate {
    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self.symbols.entries.iter().map(|(n, v)| format!("symbol {n} {v}")).collect();
        out.push(self.upper.line());
        out.push(self.lower.line());
        if let Some(w) = &self.witness {
            out.push(format!("witness {w}"));
        }
        out.push(format!("verdict {}", self.verdict.name()));
        out
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        for l in self.lines() {
            writeln!(s, "{l}").unwrap();
        }
        s
    }
}

/// Decides `lower > upper` exactly whenever one side is rational.
pub fn contradiction_certificate(upper: ThetaBound, lower: ThetaBound, symbols: Symbols) -> Result<ContradictionCertificate> {
    let bad = |reason: &str| Error::Derivation { step: "certificate".into(), reason: reason.into() };
    if upper.direction != Direction::Upper || lower.direction != Direction::Lower {
        return Err(bad("bounds have the wrong directions"));
    }
    let mut chain = vec![format!("{} > {}", lower.description, upper.description)];
    let (verdict, witness) = match (&upper.value, &lower.value) {
        (BoundValue::Rational(u), BoundValue::Rational(l)) => {
            let diff = quad_of(&(l - u));
            let w = diff.sign_witness();
            chain.push(format!("<=> {} > 0", diff));
            (if w.sign > 0 { Verdict::Contradiction } else { Verdict::NoContradiction }, Some(w))
        }
        (BoundValue::Rational(r), BoundValue::LogRatio { coefficient, base }) => {
            // log(1/c)/log(1/b) > r/s  <=>  b^r > c^s
            let (diff, lhs, rhs) = power_difference(base, &quad_of(coefficient), r)?;
            chain.push(format!("<=> {} > {}", symbols.describe(&lhs), symbols.describe(&rhs)));
            chain.push(format!("<=> {diff} > 0"));
            let w = diff.sign_witness();
            (if w.sign > 0 { Verdict::Contradiction } else { Verdict::NoContradiction }, Some(w))
        }
        (BoundValue::LogRatio { coefficient, base }, BoundValue::Rational(r)) => {
            // r/s > log(1/c)/log(1/b)  <=>  c^s > b^r
            let (diff, lhs, rhs) = power_difference(base, &quad_of(coefficient), r)?;
            let diff = -diff;
            chain.push(format!("<=> {} > {}", symbols.describe(&rhs), symbols.describe(&lhs)));
            chain.push(format!("<=> {diff} > 0"));
            let w = diff.sign_witness();
            (if w.sign > 0 { Verdict::Contradiction } else { Verdict::NoContradiction }, Some(w))
        }
        (BoundValue::LogRatio { .. }, BoundValue::LogRatio { .. }) => {
            let verdict = if lower.enclosure.0 > upper.enclosure.1 {
                Verdict::Contradiction
            } else if lower.enclosure.1 <= upper.enclosure.0 {
                Verdict::NoContradiction
            } else {
                Verdict::Undecided
            };
            chain.push("decided by enclosures".into());
            (verdict, None)
        }
    };
    if let Some(w) = &witness {
        chain.push(format!("<=> {w}"));
    }
    Ok(ContradictionCertificate { upper, lower, verdict, witness, chain, symbols })
}

/// `(b^r - c^s, b^r, c^s)` for `r/s` in lowest terms, `s > 0`.
fn power_difference(b: &QuadNumber, c: &QuadNumber, r: &BigRational) -> Result<(QuadNumber, QuadNumber, QuadNumber)> {
    let too_big = || Error::Derivation { step: "certificate".into(), reason: "exponent too large".into() };
    let num = r.numer().to_i64().ok_or_else(too_big)?;
    let s = r.denom().to_u32().ok_or_else(too_big)?;
    let e = u32::try_from(num.unsigned_abs()).map_err(|_| too_big())?;
    let br = if num >= 0 { b.pow(e) } else { b.pow(e).recip()? };
    let cs = c.pow(s);
    Ok((&br - &cs, br, cs))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClaimsReport {
    pub certificate: ContradictionCertificate,
}

impl ClaimsReport {
    /// Human-readable derivation log.
    pub fn log(&self) -> String {
        let mut s = String::new();
        let c = &self.certificate;
        for (title, b) in [("upper bound", &c.upper), ("lower bound", &c.lower)] {
            writeln!(s, "{title}:").unwrap();
            for st in &b.derivation {
                writeln!(s, "  {st}").unwrap();
            }
            writeln!(s, "  => {}", b.line()).unwrap();
        }
        writeln!(s, "comparison:").unwrap();
        for l in &c.chain {
            writeln!(s, "  {l}").unwrap();
        }
        writeln!(s, "verdict: {}", c.verdict.name()).unwrap();
        s
    }
}

/// Both claims and the certificate for `carpet104`.
pub fn run_claims(sys: &IFSystem) -> Result<ClaimsReport> {
    let upper = claim1_upper_bound(sys)?;
    let lower = claim2_lower_bound(sys)?;
    let certificate = contradiction_certificate(upper, lower, Symbols::carpet104())?;
    Ok(ClaimsReport { certificate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn log_ratio_detection() {
        let q = QuadNumber::rational;
        assert_eq!(exact_log_ratio(&q(2, 1), &q(4, 1)), Some(rat(1, 2)));
        assert_eq!(exact_log_ratio(&q(8, 1), &q(4, 1)), Some(rat(3, 2)));
        assert_eq!(exact_log_ratio(&q(1, 1), &q(4, 1)), Some(rat(0, 1)));
        assert_eq!(exact_log_ratio(&q(27, 8), &q(9, 4)), Some(rat(3, 2)));
        assert_eq!(exact_log_ratio(&q(5, 1), &q(25, 1)), Some(rat(1, 2)));
        assert_eq!(exact_log_ratio(&q(2, 1), &q(3, 1)), None);
        let inv_a = carpet104_a().recip().unwrap();
        assert_eq!(exact_log_ratio(&q(5, 1), &inv_a), None);
    }

    #[test]
    fn decimals_round_outward() {
        assert_eq!(decimal_5(0.500239628, false), "0.50023");
        assert_eq!(decimal_5(0.500239629, true), "0.50024");
        assert_eq!(decimal_5(0.5, false), "0.50000");
        assert_eq!(decimal_5(-0.25, true), "-0.25000");
    }

    #[test]
    fn corner_spec_passes() {
        let sys = catalog::carpet104();
        let spec = corner_spec(&sys).unwrap();
        let report = verify_continuity(&sys, &spec).unwrap();
        assert!(report.passed(), "{:?}", report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>());
        let expr = energy_expression(&sys, &spec).unwrap();
        assert_eq!(expr.terms.len(), 1);
        assert_eq!(expr.terms[0].coefficient, rat(1, 5));
        assert_eq!(expr.terms[0].base, carpet104_a());
        assert_eq!(expr.render(&Symbols::carpet104()), "(1/5)·a^(-θ)·e_f");
        // twenty copies in total
        let copies = spec.cells.iter().filter(|(_, a)| matches!(a, CellAssignment::Copy { .. })).count();
        assert_eq!(copies, 20);
    }

    #[test]
    fn f2_f3_contact_uses_corner_trace() {
        let sys = catalog::carpet104();
        let spec = corner_spec(&sys).unwrap();
        let squares = sys.squares();
        let Contact::Segment(seg) = classify(&squares[1], &squares[2]) else { panic!() };
        match trace(&sys, &spec, 3, spec.assignment(3).unwrap(), &seg).unwrap() {
            Trace::Known(v) => assert!(v.is_zero()),
            Trace::Unknown => panic!("undetermined"),
        }
    }

    #[test]
    fn mutated_offset_is_a_mismatch() {
        let sys = catalog::carpet104();
        let mut spec = corner_spec(&sys).unwrap();
        *spec.assignment_mut(6).unwrap() = CellAssignment::Constant(rat(3, 10));
        let report = verify_continuity(&sys, &spec).unwrap();
        assert!(!report.passed());
        assert!(report.violations.iter().any(|v| matches!(v, Violation::Mismatch { cells: (6, 7), .. })));
        assert!(matches!(energy_expression(&sys, &spec), Err(Error::UnverifiedGluing(_))));
    }

    #[test]
    fn strip_spec_passes() {
        let sys = catalog::carpet104();
        let spec = strip_spec(&sys).unwrap();
        let report = verify_continuity(&sys, &spec).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
        let expr = energy_expression(&sys, &spec).unwrap();
        assert_eq!(expr.render(&Symbols::carpet104()), "(1/2)·4^θ·e_h");
        // at θ = 1/2 the coefficient is exactly 1
        assert_eq!(expr.evaluate_rational(&rat(1, 2)).unwrap(), vec![("h".to_string(), rat(1, 1))]);
    }

    #[test]
    fn strip_needs_the_flip_symmetry() {
        let sys = catalog::carpet104();
        let mut spec = strip_spec(&sys).unwrap();
        spec.references[0].symmetries.clear();
        let report = verify_continuity(&sys, &spec).unwrap();
        assert!(report.violations.iter().all(|v| matches!(v, Violation::Undetermined { .. })));
        assert_eq!(report.violations.len(), 4);
    }

    #[test]
    fn every_single_offset_mutation_fails() {
        let sys = catalog::carpet104();
        for base in [strip_spec(&sys).unwrap(), corner_spec(&sys).unwrap()] {
            for idx in 0..base.cells.len() {
                let mut spec = base.clone();
                match &mut spec.cells[idx].1 {
                    CellAssignment::Constant(c) => *c += rat(1, 7),
                    CellAssignment::Copy { beta, .. } => *beta += rat(1, 7),
                }
                assert!(!verify_continuity(&sys, &spec).unwrap().passed(), "{} cell {}", spec.name, spec.cells[idx].0);
            }
        }
    }

    #[test]
    fn incomplete_specs_are_errors() {
        let sys = catalog::carpet104();
        let mut spec = strip_spec(&sys).unwrap();
        spec.cells.pop();
        assert!(matches!(verify_continuity(&sys, &spec), Err(Error::Gluing(_))));
        let mut spec = strip_spec(&sys).unwrap();
        let dup = spec.cells[0].clone();
        spec.cells.push(dup);
        assert!(matches!(verify_continuity(&sys, &spec), Err(Error::Gluing(_))));
    }

    #[test]
    fn inconsistent_reference_is_rejected() {
        let sys = catalog::carpet104();
        let mut r = corner_reference();
        r.symmetries.push(Isometry::H);
        assert!(r.check_consistent(&sys).is_err());
        assert!(strip_reference().check_consistent(&sys).is_ok());
    }

    #[test]
    fn constant_to_copy_adds_one_term() {
        let sys = catalog::carpet104();
        let spec = corner_spec(&sys).unwrap();
        let before = collect_terms(&sys, &spec).unwrap();
        let mut changed = spec.clone();
        *changed.assignment_mut(13).unwrap() = CellAssignment::copy("f", Isometry::Id, rat(1, 3), rat(0, 1));
        let after = collect_terms(&sys, &changed).unwrap();
        assert_eq!(after.terms.len(), before.terms.len() + 1);
        assert!(after.terms.iter().any(|t| t.base == QuadNumber::rational(1, 4) && t.coefficient == rat(1, 9)));
        // swapping a pre-isometry leaves the expression alone
        let mut swapped = spec.clone();
        if let CellAssignment::Copy { pre, .. } = swapped.assignment_mut(3).unwrap() {
            *pre = Isometry::V;
        }
        assert_eq!(collect_terms(&sys, &swapped).unwrap(), before);
        let constants = GluingSpec {
            name: "flat".into(),
            references: vec![],
            domain: vec![1, 2],
            cells: vec![(1, CellAssignment::Constant(rat(0, 1))), (2, CellAssignment::Constant(rat(0, 1)))],
        };
        assert!(energy_expression(&sys, &constants).unwrap().is_zero());
    }

    #[test]
    fn hypothetical_bounds() {
        let s = Symbols::default();
        let quarter = QuadNumber::rational(1, 4);
        let b = theta_bound(Direction::Upper, &rat(1, 1), &quarter, &s).unwrap();
        assert_eq!(b.value, BoundValue::Rational(rat(0, 1)));
        let b = theta_bound(Direction::Upper, &rat(1, 4), &quarter, &s).unwrap();
        assert_eq!(b.value, BoundValue::Rational(rat(1, 1)));
        let b = theta_bound(Direction::Lower, &rat(1, 5), &QuadNumber::rational(1, 25), &s).unwrap();
        assert_eq!(b.value, BoundValue::Rational(rat(1, 2)));
        let b = theta_bound(Direction::Lower, &rat(1, 1), &carpet104_a(), &s).unwrap();
        assert_eq!(b.value, BoundValue::Rational(rat(0, 1)));
    }

    #[test]
    fn claims_for_carpet104() {
        let sys = catalog::carpet104();
        let report = run_claims(&sys).unwrap();
        let c = &report.certificate;
        assert_eq!(c.upper.value, BoundValue::Rational(rat(1, 2)));
        assert_eq!(c.lower.description, "log(5)/log(1/a)");
        assert!(c.lower.enclosure.0 <= 0.500_239_628_889_273_9 && c.lower.enclosure.1 >= 0.500_239_628_889_274);
        assert!(c.lower.enclosure.1 - c.lower.enclosure.0 < 1e-14);
        assert_eq!(c.verdict, Verdict::Contradiction);
        assert_eq!(
            c.lines(),
            vec![
                "symbol a (-6+1r)/12",
                "bound upper exact 1/2",
                "bound lower log(5)/log(1/a) enclosure 0.50023 0.50024",
                "witness 26250 > 26244",
                "verdict contradiction",
            ]
        );
        assert!(c.chain.iter().any(|l| l == "<=> a > 1/25"), "{:?}", c.chain);
        let log = report.log();
        assert!(log.contains("axiom: restricting to a subsystem"));
    }

    #[test]
    fn no_contradiction_cases() {
        let s = Symbols::default();
        let half = |d| theta_bound(d, &rat(1, 5), &QuadNumber::rational(1, 25), &s).unwrap();
        let c = contradiction_certificate(half(Direction::Upper), half(Direction::Lower), s.clone()).unwrap();
        assert_eq!(c.verdict, Verdict::NoContradiction);
        let upper = theta_bound(Direction::Upper, &rat(1, 2), &QuadNumber::rational(1, 4), &s).unwrap();
        let lower = theta_bound(Direction::Lower, &rat(1, 5), &QuadNumber::rational(39, 1000), &s).unwrap();
        assert!(lower.enclosure.1 < 0.5);
        let c = contradiction_certificate(upper, lower, s).unwrap();
        assert_eq!(c.verdict, Verdict::NoContradiction);
    }

    #[test]
    fn lower_bound_makes_the_coefficient_one() {
        let sys = catalog::carpet104();
        let spec = corner_spec(&sys).unwrap();
        let expr = energy_expression(&sys, &spec).unwrap();
        let lower = claim2_lower_bound(&sys).unwrap();
        let (lo, hi) = expr.enclose_single(lower.enclosure.0, lower.enclosure.1).unwrap();
        assert!(lo <= 1.0 && 1.0 <= hi && hi - lo < 1e-6, "[{lo}, {hi}]");
    }
}
