//! Planar homothety systems on the unit square: squares and contacts, the
//! dihedral symmetry group of the square, words and cells, axiom validation,
//! Hausdorff dimension and the self-similar measure.

use std::collections::HashMap;
use std::fmt;

use astro_float::BigFloat;

use crate::error::{Error, Result};
use crate::exactnum::{QuadNumber, Rounding};
use crate::hiprec::{self, HiPrec};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: QuadNumber,
    pub y: QuadNumber,
}

impl Point {
    pub fn new(x: QuadNumber, y: QuadNumber) -> Self {
        Point { x, y }
    }

    pub fn rational(x: (i64, i64), y: (i64, i64)) -> Self {
        Point::new(QuadNumber::rational(x.0, x.1), QuadNumber::rational(y.0, y.1))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Closed axis-aligned square `[x0, x0+side] × [y0, y0+side]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Square {
    pub x0: QuadNumber,
    pub y0: QuadNumber,
    pub side: QuadNumber,
}

/// The four sides of the unit square, named by position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    pub fn name(self) -> &'static str {
        match self {
            Side::Bottom => "bottom",
            Side::Right => "right",
            Side::Top => "top",
            Side::Left => "left",
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        Side::ALL.into_iter().find(|side| side.name() == s)
    }

    /// The side as a segment of the unit square: `L_1 .. L_4` in order.
    pub fn segment(self) -> Segment {
        let q = [
            Point::rational((0, 1), (0, 1)),
            Point::rational((1, 1), (0, 1)),
            Point::rational((1, 1), (1, 1)),
            Point::rational((0, 1), (1, 1)),
        ];
        let i = self as usize;
        Segment::new(q[i].clone(), q[(i + 1) % 4].clone())
    }
}

impl Square {
    pub fn unit() -> Self {
        Square {
            x0: QuadNumber::zero(),
            y0: QuadNumber::zero(),
            side: QuadNumber::one(),
        }
    }

    pub fn x1(&self) -> QuadNumber {
        &self.x0 + &self.side
    }

    pub fn y1(&self) -> QuadNumber {
        &self.y0 + &self.side
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        self.x0 <= p.x && p.x <= self.x1() && self.y0 <= p.y && p.y <= self.y1()
    }

    pub fn contains_square(&self, other: &Square) -> bool {
        self.x0 <= other.x0 && other.x1() <= self.x1() && self.y0 <= other.y0 && other.y1() <= self.y1()
    }

    /// Whether the closed square lies inside the closed rectangle.
    pub fn inside_rect(&self, x0: &QuadNumber, y0: &QuadNumber, x1: &QuadNumber, y1: &QuadNumber) -> bool {
        x0 <= &self.x0 && &self.x1() <= x1 && y0 <= &self.y0 && &self.y1() <= y1
    }

    /// Whether the square meets the given side of the unit square.
    pub fn meets_side(&self, side: Side) -> bool {
        match side {
            Side::Bottom => self.y0.is_zero(),
            Side::Left => self.x0.is_zero(),
            Side::Right => self.x1() == QuadNumber::one(),
            Side::Top => self.y1() == QuadNumber::one(),
        }
    }

    /// Directed-rounded float bounding box `(x0, y0, x1, y1)` that contains
    /// the exact square.
    pub fn float_bbox(&self) -> [f64; 4] {
        [
            self.x0.to_f64(Rounding::Down),
            self.y0.to_f64(Rounding::Down),
            self.x1().to_f64(Rounding::Up),
            self.y1().to_f64(Rounding::Up),
        ]
    }

    pub fn corners(&self) -> [Point; 4] {
        let (x1, y1) = (self.x1(), self.y1());
        [
            Point::new(self.x0.clone(), self.y0.clone()),
            Point::new(x1.clone(), self.y0.clone()),
            Point::new(x1, y1.clone()),
            Point::new(self.x0.clone(), y1),
        ]
    }
}

impl fmt::Display for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]x[{}, {}]", self.x0, self.x1(), self.y0, self.y1())
    }
}

/// Axis-aligned segment between two distinct points.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        debug_assert!(a != b && (a.x == b.x || a.y == b.y));
        Segment { a, b }
    }

    /// Whether the segment lies in the closed square.
    pub fn inside(&self, sq: &Square) -> bool {
        sq.contains_point(&self.a) && sq.contains_point(&self.b)
    }

    /// Whether `self` is contained in the (collinear) segment `other`.
    pub fn inside_segment(&self, other: &Segment) -> bool {
        let on = |p: &Point| {
            if other.a.x == other.b.x {
                p.x == other.a.x && between(&p.y, &other.a.y, &other.b.y)
            } else {
                p.y == other.a.y && between(&p.x, &other.a.x, &other.b.x)
            }
        };
        on(&self.a) && on(&self.b)
    }
}

fn between(v: &QuadNumber, a: &QuadNumber, b: &QuadNumber) -> bool {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    lo <= v && v <= hi
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}--{}", self.a, self.b)
    }
}

/// How two closed squares meet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Contact {
    Disjoint,
    Point(Point),
    Segment(Segment),
    /// Interiors intersect.
    Overlap,
}

impl Contact {
    pub fn touches(&self) -> bool {
        matches!(self, Contact::Point(_) | Contact::Segment(_))
    }
}

/// Exact classification of the intersection of two closed squares.
pub fn classify(a: &Square, b: &Square) -> Contact {
    let xlo = (&a.x0).max(&b.x0).clone();
    let xhi = a.x1().min(b.x1());
    let ylo = (&a.y0).max(&b.y0).clone();
    let yhi = a.y1().min(b.y1());
    let dx = (&xhi - &xlo).sign();
    let dy = (&yhi - &ylo).sign();
    match (dx, dy) {
        (-1, _) | (_, -1) => Contact::Disjoint,
        (1, 1) => Contact::Overlap,
        (0, 0) => Contact::Point(Point::new(xlo, ylo)),
        _ => Contact::Segment(Segment::new(Point::new(xlo, ylo), Point::new(xhi, yhi))),
    }
}

/// The eight isometries of the unit square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Isometry {
    Id,
    R1,
    R2,
    R3,
    V,
    H,
    D1,
    D2,
}

impl Isometry {
    /// Group elements in the order used for reporting.
    pub const ALL: [Isometry; 8] = [
        Isometry::Id,
        Isometry::R1,
        Isometry::R2,
        Isometry::R3,
        Isometry::V,
        Isometry::H,
        Isometry::D1,
        Isometry::D2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Isometry::Id => "id",
            Isometry::R1 => "r1",
            Isometry::R2 => "r2",
            Isometry::R3 => "r3",
            Isometry::V => "v",
            Isometry::H => "h",
            Isometry::D1 => "d1",
            Isometry::D2 => "d2",
        }
    }

    pub fn parse(s: &str) -> Option<Isometry> {
        Isometry::ALL.into_iter().find(|g| g.name() == s)
    }

    /// Linear part acting on `x - (1/2, 1/2)`.
    pub fn matrix(self) -> [[i8; 2]; 2] {
        match self {
            Isometry::Id => [[1, 0], [0, 1]],
            Isometry::R1 => [[0, -1], [1, 0]],
            Isometry::R2 => [[-1, 0], [0, -1]],
            Isometry::R3 => [[0, 1], [-1, 0]],
            Isometry::V => [[1, 0], [0, -1]],
            Isometry::H => [[-1, 0], [0, 1]],
            Isometry::D1 => [[0, 1], [1, 0]],
            Isometry::D2 => [[0, -1], [-1, 0]],
        }
    }

    fn from_matrix(m: [[i8; 2]; 2]) -> Isometry {
        *Isometry::ALL
            .iter()
            .find(|g| g.matrix() == m)
            .expect("dihedral group is closed")
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(self, other: Isometry) -> Isometry {
        let a = self.matrix();
        let b = other.matrix();
        let mut m = [[0i8; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Isometry::from_matrix(m)
    }

    pub fn inverse(self) -> Isometry {
        *Isometry::ALL
            .iter()
            .find(|g| self.compose(**g) == Isometry::Id)
            .unwrap()
    }

    pub fn apply(self, p: &Point) -> Point {
        let one = QuadNumber::one();
        let (x, y) = (&p.x, &p.y);
        let (nx, ny) = match self {
            Isometry::Id => (x.clone(), y.clone()),
            Isometry::V => (x.clone(), &one - y),
            Isometry::H => (&one - x, y.clone()),
            Isometry::D1 => (y.clone(), x.clone()),
            Isometry::D2 => (&one - y, &one - x),
            Isometry::R1 => (&one - y, x.clone()),
            Isometry::R2 => (&one - x, &one - y),
            Isometry::R3 => (y.clone(), &one - x),
        };
        Point::new(nx, ny)
    }

    pub fn apply_square(self, sq: &Square) -> Square {
        let a = self.apply(&Point::new(sq.x0.clone(), sq.y0.clone()));
        let b = self.apply(&Point::new(sq.x1(), sq.y1()));
        Square {
            x0: (&a.x).min(&b.x).clone(),
            y0: (&a.y).min(&b.y).clone(),
            side: sq.side.clone(),
        }
    }

    pub fn apply_segment(self, s: &Segment) -> Segment {
        Segment::new(self.apply(&s.a), self.apply(&s.b))
    }

    pub fn as_affine(self) -> AffineMap {
        let m = self.matrix();
        let half = QuadNumber::rational(1, 2);
        let lin = m.map(|row| row.map(|v| QuadNumber::from_int(v as i64)));
        // x ↦ M(x - c) + c, c = (1/2, 1/2)
        let t = [0, 1].map(|i| {
            &half - &(&(&lin[i][0] * &half) + &(&lin[i][1] * &half))
        });
        AffineMap { m: lin, t }
    }
}

impl fmt::Display for Isometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// General planar affine map `x ↦ M x + t` with exact entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    pub m: [[QuadNumber; 2]; 2],
    pub t: [QuadNumber; 2],
}

impl AffineMap {
    pub fn apply(&self, p: &Point) -> Point {
        let x = &(&(&self.m[0][0] * &p.x) + &(&self.m[0][1] * &p.y)) + &self.t[0];
        let y = &(&(&self.m[1][0] * &p.x) + &(&self.m[1][1] * &p.y)) + &self.t[1];
        Point::new(x, y)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        let a = &self.m;
        let b = &other.m;
        let m = [0, 1].map(|i| [0, 1].map(|j| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j])));
        let t = [0, 1].map(|i| {
            &(&(&a[i][0] * &other.t[0]) + &(&a[i][1] * &other.t[1])) + &self.t[i]
        });
        AffineMap { m, t }
    }

    /// Returns the homothety if the linear part is `ρ·I` with `ρ > 0`.
    pub fn to_similarity(&self) -> Option<Similarity> {
        let rho = &self.m[0][0];
        if rho.sign() <= 0 || &self.m[1][1] != rho || !self.m[0][1].is_zero() || !self.m[1][0].is_zero() {
            return None;
        }
        Some(Similarity {
            ratio: rho.clone(),
            tx: self.t[0].clone(),
            ty: self.t[1].clone(),
        })
    }
}

/// `x ↦ ratio·x + (tx, ty)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Similarity {
    pub ratio: QuadNumber,
    pub tx: QuadNumber,
    pub ty: QuadNumber,
}

impl Similarity {
    pub fn new(ratio: QuadNumber, tx: QuadNumber, ty: QuadNumber) -> Self {
        Similarity { ratio, tx, ty }
    }

    pub fn apply(&self, p: &Point) -> Point {
        Point::new(&(&self.ratio * &p.x) + &self.tx, &(&self.ratio * &p.y) + &self.ty)
    }

    pub fn apply_inverse(&self, p: &Point) -> Point {
        let inv = self.ratio.recip().expect("positive ratio");
        Point::new(&(&p.x - &self.tx) * &inv, &(&p.y - &self.ty) * &inv)
    }

    /// Image of the unit square.
    pub fn square(&self) -> Square {
        Square {
            x0: self.tx.clone(),
            y0: self.ty.clone(),
            side: self.ratio.clone(),
        }
    }

    pub fn as_affine(&self) -> AffineMap {
        let z = QuadNumber::zero();
        AffineMap {
            m: [[self.ratio.clone(), z.clone()], [z, self.ratio.clone()]],
            t: [self.tx.clone(), self.ty.clone()],
        }
    }

    /// `outer ∘ self ∘ inner` as an exact map, if it is again a homothety.
    pub fn conjugated(&self, outer: Isometry, inner: Isometry) -> Option<Similarity> {
        outer
            .as_affine()
            .compose(&self.as_affine())
            .compose(&inner.as_affine())
            .to_similarity()
    }
}

/// Finite word over `{1..N}`; the empty word addresses the unit square.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<u32>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn starts_with(&self, prefix: &Word) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// Parses `38.2` style words; `-` is the empty word.
    pub fn parse(s: &str) -> Result<Word> {
        let s = s.trim();
        if s == "-" || s.is_empty() {
            return Ok(Word::empty());
        }
        s.split('.')
            .map(|t| {
                t.parse::<u32>()
                    .ok()
                    .filter(|v| *v >= 1)
                    .ok_or_else(|| Error::Parse(format!("invalid word `{s}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

/// A candidate Sierpinski-carpet-like system of homotheties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IFSystem {
    pub name: String,
    pub radicand: u64,
    /// Grid parameter; informational only.
    pub k: u32,
    pub maps: Vec<Similarity>,
}

impl IFSystem {
    pub fn new(name: impl Into<String>, radicand: u64, k: u32, maps: Vec<Similarity>) -> Result<Self> {
        let sys = IFSystem {
            name: name.into(),
            radicand,
            k,
            maps,
        };
        sys.check_well_formed()?;
        Ok(sys)
    }

    /// Rejects systems that cannot be validated at all.
    pub fn check_well_formed(&self) -> Result<()> {
        if self.maps.len() < 2 {
            return Err(Error::MalformedSystem(format!(
                "need at least 2 maps, got {}",
                self.maps.len()
            )));
        }
        for (i, m) in self.maps.iter().enumerate() {
            if m.ratio.sign() <= 0 || m.ratio >= QuadNumber::one() {
                return Err(Error::MalformedSystem(format!(
                    "map {} has ratio {} outside (0, 1)",
                    i + 1,
                    m.ratio
                )));
            }
            for v in [&m.ratio, &m.tx, &m.ty] {
                if v.radicand() != 0 && v.radicand() != self.radicand {
                    return Err(Error::RadicandMismatch(v.radicand(), self.radicand));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// `F_i` with the 1-based index used throughout.
    pub fn map(&self, index: usize) -> Result<&Similarity> {
        if index == 0 || index > self.maps.len() {
            return Err(Error::IndexOutOfRange {
                index,
                count: self.maps.len(),
            });
        }
        Ok(&self.maps[index - 1])
    }

    pub fn squares(&self) -> Vec<Square> {
        self.maps.iter().map(Similarity::square).collect()
    }

    /// 1-based index of the map whose square equals `sq`.
    pub fn index_of_square(&self, sq: &Square) -> Option<usize> {
        self.maps.iter().position(|m| &m.square() == sq).map(|i| i + 1)
    }

    /// `Σ ρ_i²`, exact.
    pub fn ratio_square_sum(&self) -> QuadNumber {
        self.maps
            .iter()
            .fold(QuadNumber::zero(), |acc, m| &acc + &(&m.ratio * &m.ratio))
    }

    /// Distinct ratios with multiplicities, in first-appearance order.
    pub fn ratio_census(&self) -> Vec<(QuadNumber, usize)> {
        let mut out: Vec<(QuadNumber, usize)> = Vec::new();
        for m in &self.maps {
            match out.iter_mut().find(|(r, _)| *r == m.ratio) {
                Some((_, c)) => *c += 1,
                None => out.push((m.ratio.clone(), 1)),
            }
        }
        out
    }
}

/// Exact cell square `F_w(□)`, composing maps left to right.
pub fn cell_square(sys: &IFSystem, w: &Word) -> Result<Square> {
    let mut sq = Square::unit();
    for &i in &w.0 {
        let m = sys.map(i as usize)?;
        sq = child_square(&sq, m);
    }
    Ok(sq)
}

/// Square of `F_w ∘ F_i` given the square of `F_w`.
pub fn child_square(parent: &Square, m: &Similarity) -> Square {
    Square {
        x0: &parent.x0 + &(&parent.side * &m.tx),
        y0: &parent.y0 + &(&parent.side * &m.ty),
        side: &parent.side * &m.ratio,
    }
}

/// Self-similar measure of the cell `F_w K`: `∏ ρ_{w_i}^{d_H}`.
pub fn cell_measure(sys: &IFSystem, w: &Word, dimension: f64) -> Result<f64> {
    w.0.iter().try_fold(1.0, |acc, &i| {
        let r = sys.map(i as usize)?.ratio.to_f64(Rounding::Nearest);
        Ok(acc * r.powf(dimension))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    NonOverlapping,
    Connectivity,
    Symmetry,
    BoundaryIncluded,
}

impl Axiom {
    pub const ALL: [Axiom; 4] = [
        Axiom::NonOverlapping,
        Axiom::Connectivity,
        Axiom::Symmetry,
        Axiom::BoundaryIncluded,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::NonOverlapping => "non-overlapping",
            Axiom::Connectivity => "connectivity",
            Axiom::Symmetry => "symmetry",
            Axiom::BoundaryIncluded => "boundary-included",
        }
    }
}

/// Evidence for a failed axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Overlap { i: usize, j: usize },
    Disconnected { unreachable: usize },
    MissingImage { isometry: Isometry, cell: usize },
    BottomGap { at: QuadNumber },
    OutsideUnitSquare { cell: usize },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Overlap { i, j } => write!(f, "F_{i} and F_{j} overlap"),
            Witness::Disconnected { unreachable } => {
                write!(f, "F_{unreachable} is not connected to F_1")
            }
            Witness::MissingImage { isometry, cell } => {
                write!(f, "image of F_{cell} under {isometry} is not a cell")
            }
            Witness::BottomGap { at } => write!(f, "bottom edge not covered at x = {at}"),
            Witness::OutsideUnitSquare { cell } => write!(f, "F_{cell} leaves the unit square"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub passed: bool,
    /// Every failure found, in a deterministic order.
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub system: String,
    pub checks: Vec<AxiomCheck>,
    /// Cell permutation (0-based) induced by each isometry that maps the
    /// set of squares onto itself.
    pub permutations: Vec<(Isometry, Vec<usize>)>,
    pub ratio_square_sum: QuadNumber,
    pub ratio_square_sum_below_one: bool,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed) && self.ratio_square_sum_below_one
    }

    pub fn check(&self, axiom: Axiom) -> &AxiomCheck {
        self.checks.iter().find(|c| c.axiom == axiom).unwrap()
    }

    pub fn permutation(&self, g: Isometry) -> Option<&[usize]> {
        self.permutations
            .iter()
            .find(|(h, _)| *h == g)
            .map(|(_, p)| p.as_slice())
    }

    /// One line per axiom, `PASS <name>` or `FAIL <name>: <first witness>`.
    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                if c.passed {
                    format!("PASS {}", c.axiom.name())
                } else {
                    let w = c.witnesses.first().map(|w| w.to_string()).unwrap_or_default();
                    format!("FAIL {}: {}", c.axiom.name(), w)
                }
            })
            .collect();
        out.push(format!(
            "ratio-square-sum {} {}",
            self.ratio_square_sum,
            if self.ratio_square_sum_below_one { "< 1" } else { ">= 1" }
        ));
        out
    }
}

/// Checks the four structural axioms in exact arithmetic.
pub fn validate_lsc(sys: &IFSystem) -> Result<ValidationReport> {
    sys.check_well_formed()?;
    let squares = sys.squares();
    let n = squares.len();

    let mut overlaps = Vec::new();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in i + 1..n {
            match classify(&squares[i], &squares[j]) {
                Contact::Overlap => overlaps.push(Witness::Overlap { i: i + 1, j: j + 1 }),
                Contact::Point(_) | Contact::Segment(_) => uf.union(i, j),
                Contact::Disjoint => {}
            }
        }
    }
    // an overlap also joins the union
    for w in &overlaps {
        if let Witness::Overlap { i, j } = w {
            uf.union(i - 1, j - 1);
        }
    }
    let root = uf.find(0);
    let disconnected: Vec<Witness> = (0..n)
        .filter(|&i| uf.find(i) != root)
        .map(|i| Witness::Disconnected { unreachable: i + 1 })
        .collect();

    let (permutations, symmetry_failures) = symmetry_permutations(&squares);

    let mut boundary = Vec::new();
    let unit = Square::unit();
    for (i, sq) in squares.iter().enumerate() {
        if !unit.contains_square(sq) {
            boundary.push(Witness::OutsideUnitSquare { cell: i + 1 });
        }
    }
    let mut bottom: Vec<&Square> = squares.iter().filter(|s| s.y0.is_zero()).collect();
    bottom.sort_by(|a, b| a.x0.cmp(&b.x0));
    let mut reach = QuadNumber::zero();
    for sq in bottom {
        if sq.x0 > reach {
            break;
        }
        let end = sq.x1();
        if end > reach {
            reach = end;
        }
    }
    if reach < QuadNumber::one() {
        boundary.push(Witness::BottomGap { at: reach });
    }

    let sum = sys.ratio_square_sum();
    let below = sum < QuadNumber::one();
    let checks = vec![
        AxiomCheck {
            axiom: Axiom::NonOverlapping,
            passed: overlaps.is_empty(),
            witnesses: overlaps,
        },
        AxiomCheck {
            axiom: Axiom::Connectivity,
            passed: disconnected.is_empty(),
            witnesses: disconnected,
        },
        AxiomCheck {
            axiom: Axiom::Symmetry,
            passed: symmetry_failures.is_empty(),
            witnesses: symmetry_failures,
        },
        AxiomCheck {
            axiom: Axiom::BoundaryIncluded,
            passed: boundary.is_empty(),
            witnesses: boundary,
        },
    ];
    Ok(ValidationReport {
        system: sys.name.clone(),
        checks,
        permutations,
        ratio_square_sum: sum,
        ratio_square_sum_below_one: below,
    })
}

/// For every isometry, the permutation it induces on the squares, or the
/// squares whose image is missing.
pub fn symmetry_permutations(squares: &[Square]) -> (Vec<(Isometry, Vec<usize>)>, Vec<Witness>) {
    let index: HashMap<&Square, usize> = squares.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut perms = Vec::new();
    let mut failures = Vec::new();
    for g in Isometry::ALL {
        let mut perm = Vec::with_capacity(squares.len());
        let mut ok = true;
        for (i, sq) in squares.iter().enumerate() {
            match index.get(&g.apply_square(sq)) {
                Some(&j) => perm.push(j),
                None => {
                    ok = false;
                    failures.push(Witness::MissingImage {
                        isometry: g,
                        cell: i + 1,
                    });
                }
            }
        }
        if ok {
            perms.push((g, perm));
        }
    }
    (perms, failures)
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionResult {
    pub dimension: f64,
    /// `|Φ(d) - 1|` at the returned value.
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

const DIMENSION_MAX_ITERATIONS: usize = 400;

/// Solves `Σ ρ_i^α = 1` by bisection in 256-bit floating point.
pub fn hausdorff_dimension(sys: &IFSystem, tol: f64) -> Result<DimensionResult> {
    sys.check_well_formed()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidSet(format!("tolerance must be positive, got {tol}")));
    }
    let mut hp = HiPrec::default();
    let terms: Vec<(BigFloat, BigFloat)> = sys
        .ratio_census()
        .into_iter()
        .map(|(r, c)| {
            let lr = {
                let rf = hp.quad(&r, Rounding::Nearest);
                hp.ln(&rf, Rounding::Nearest)
            };
            (hp.from_f64(c as f64), lr)
        })
        .collect();
    let one = hp.from_f64(1.0);
    let phi = |alpha: &BigFloat, hp: &mut HiPrec| -> BigFloat {
        let mut acc = hp.from_f64(0.0);
        for (count, lr) in &terms {
            let e = hp.mul(lr, alpha, Rounding::Nearest);
            let t = hp.exp(&e, Rounding::Nearest);
            acc = hp.add(&acc, &hp.mul(count, &t, Rounding::Nearest), Rounding::Nearest);
        }
        hp.sub(&acc, &one, Rounding::Nearest)
    };

    // Φ(0) = N > 1; grow the upper end until Φ < 1
    let mut lo = hp.from_f64(0.0);
    let mut hi = hp.from_f64(2.0);
    let mut guard = 0;
    while phi(&hi, &mut hp).is_positive() {
        lo = hi.clone();
        hi = hp.mul(&hi, &hp.from_f64(2.0), Rounding::Nearest);
        guard += 1;
        if guard > 64 {
            return Err(Error::DimensionBracket {
                lo: hiprec::to_f64(&lo, Rounding::Down),
                hi: hiprec::to_f64(&hi, Rounding::Up),
            });
        }
    }
    let half = hp.from_f64(0.5);
    let width_stop = hp.from_f64(2f64.powi(-120));
    let mut iterations = 0;
    loop {
        let mid = hp.mul(&hp.add(&lo, &hi, Rounding::Nearest), &half, Rounding::Nearest);
        let v = phi(&mid, &mut hp);
        if v.is_zero() {
            lo = mid.clone();
            hi = mid;
            break;
        }
        if v.is_positive() {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
        let width = hp.sub(&hi, &lo, Rounding::Nearest);
        if width.cmp(&width_stop).unwrap_or(0) <= 0 || iterations >= DIMENSION_MAX_ITERATIONS {
            break;
        }
    }
    let mid = hp.mul(&hp.add(&lo, &hi, Rounding::Nearest), &half, Rounding::Nearest);
    let residual = hiprec::to_f64(&phi(&mid, &mut hp), Rounding::Nearest).abs();
    let bracket = (
        hiprec::to_f64(&lo, Rounding::Down),
        hiprec::to_f64(&hi, Rounding::Up),
    );
    if residual > tol {
        return Err(Error::DimensionBracket {
            lo: bracket.0,
            hi: bracket.1,
        });
    }
    Ok(DimensionResult {
        dimension: hiprec::to_f64(&mid, Rounding::Nearest),
        residual,
        bracket,
        iterations,
    })
}
