//! Level-n cell graphs: one vertex per word in `W_n`, one edge per pair of
//! cells whose closed squares touch.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactnum::{QuadNumber, Rounding};
use crate::geometry::{child_square, classify, validate_lsc, Contact, IFSystem, Isometry, Side, Square, Word};
use crate::quadtree::QuadTree;

/// Default cap on `|W_n|`.
pub const DEFAULT_MAX_VERTICES: usize = 1_200_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConductanceRule {
    Unit,
    /// Edge `{v, w}` gets `(ρ_v ρ_w)^(-θ/2)`. A heuristic weighting, not an
    /// exact discretization of the self-similar scaling.
    Theta(f64),
}

impl ConductanceRule {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "unit" {
            return Ok(ConductanceRule::Unit);
        }
        s.strip_prefix("theta:")
            .and_then(|t| t.parse::<f64>().ok())
            .filter(|t| t.is_finite())
            .map(ConductanceRule::Theta)
            .ok_or_else(|| Error::Parse(format!("invalid conductance rule `{s}`")))
    }

    fn conductance(&self, side_u: f64, side_v: f64) -> f64 {
        match *self {
            ConductanceRule::Unit => 1.0,
            ConductanceRule::Theta(t) => (side_u * side_v).powf(-t / 2.0),
        }
    }
}

impl fmt::Display for ConductanceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConductanceRule::Unit => f.write_str("unit"),
            ConductanceRule::Theta(t) => write!(f, "theta:{t}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Segment,
    Point,
}

impl EdgeKind {
    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::Segment => "segment",
            EdgeKind::Point => "point",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub kind: EdgeKind,
    pub conductance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphOptions {
    pub rule: ConductanceRule,
    /// Include point contacts as edges.
    pub corner_edges: bool,
    pub max_vertices: usize,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions {
            rule: ConductanceRule::Unit,
            corner_edges: false,
            max_vertices: DEFAULT_MAX_VERTICES,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CellGraph {
    pub system: String,
    pub radicand: u64,
    pub level: usize,
    pub options: GraphOptions,
    /// Sorted lexicographically.
    pub words: Vec<Word>,
    pub squares: Vec<Square>,
    /// Edges with `u < v`, sorted by `(u, v)`.
    pub edges: Vec<Edge>,
}

/// Exact squares of every word of length `level`, in lexicographic order.
pub fn level_squares(sys: &IFSystem, level: usize) -> Vec<Square> {
    let mut squares = vec![Square::unit()];
    for _ in 0..level {
        squares = squares
            .par_iter()
            .flat_map_iter(|parent| sys.maps.iter().map(move |m| child_square(parent, m)))
            .collect();
    }
    squares
}

/// The word with lexicographic rank `index` among words of length `level`.
pub fn word_at(index: usize, level: usize, n_maps: usize) -> Word {
    let mut digits = vec![0u32; level];
    let mut rest = index;
    for d in digits.iter_mut().rev() {
        *d = (rest % n_maps) as u32 + 1;
        rest /= n_maps;
    }
    Word(digits)
}

pub fn build_graph(sys: &IFSystem, level: usize, options: GraphOptions) -> Result<CellGraph> {
    if level == 0 {
        return Err(Error::InvalidSet("level must be at least 1".into()));
    }
    let n_maps = sys.len();
    let count = (n_maps as u128).checked_pow(level as u32).unwrap_or(u128::MAX);
    if count > options.max_vertices as u128 {
        return Err(Error::BudgetExceeded {
            system: sys.name.clone(),
            level: level as u32,
            budget: max_level_within(n_maps, options.max_vertices),
        });
    }
    if !validate_lsc(sys)?.all_passed() {
        return Err(Error::Unvalidated(sys.name.clone()));
    }
    let squares = level_squares(sys, level);
    let words: Vec<Word> = (0..squares.len()).map(|i| word_at(i, level, n_maps)).collect();
    let edges = build_edges(&squares, options)?;
    Ok(CellGraph {
        system: sys.name.clone(),
        radicand: sys.radicand,
        level,
        options,
        words,
        squares,
        edges,
    })
}

fn max_level_within(n_maps: usize, max_vertices: usize) -> u32 {
    let mut level = 0u32;
    let mut count = 1u128;
    while count * n_maps as u128 <= max_vertices as u128 {
        count *= n_maps as u128;
        level += 1;
    }
    level
}

fn build_edges(squares: &[Square], options: GraphOptions) -> Result<Vec<Edge>> {
    let boxes: Vec<[f64; 4]> = squares.par_iter().map(Square::float_bbox).collect();
    let sides: Vec<f64> = squares
        .par_iter()
        .map(|s| s.side.to_f64(Rounding::Nearest))
        .collect();
    let tree = QuadTree::build(boxes);
    let per_vertex: Vec<Result<Vec<Edge>>> = (0..squares.len())
        .into_par_iter()
        .map(|u| {
            let mut out = Vec::new();
            for v in tree.query(tree.bbox(u)) {
                if v <= u {
                    continue;
                }
                let kind = match classify(&squares[u], &squares[v]) {
                    Contact::Segment(_) => EdgeKind::Segment,
                    Contact::Point(_) if options.corner_edges => EdgeKind::Point,
                    Contact::Point(_) | Contact::Disjoint => continue,
                    Contact::Overlap => {
                        return Err(Error::MalformedSystem(format!(
                            "cells {u} and {v} overlap"
                        )))
                    }
                };
                out.push(Edge {
                    u,
                    v,
                    kind,
                    conductance: options.rule.conductance(sides[u], sides[v]),
                });
            }
            Ok(out)
        })
        .collect();
    let mut edges = Vec::new();
    for chunk in per_vertex {
        edges.extend(chunk?);
    }
    Ok(edges)
}

/// Brute-force O(n²) adjacency, for cross-checking the indexed build.
pub fn brute_force_edges(squares: &[Square], options: GraphOptions) -> Vec<Edge> {
    let sides: Vec<f64> = squares.iter().map(|s| s.side.to_f64(Rounding::Nearest)).collect();
    let mut edges = Vec::new();
    for u in 0..squares.len() {
        for v in u + 1..squares.len() {
            let kind = match classify(&squares[u], &squares[v]) {
                Contact::Segment(_) => EdgeKind::Segment,
                Contact::Point(_) if options.corner_edges => EdgeKind::Point,
                _ => continue,
            };
            edges.push(Edge {
                u,
                v,
                kind,
                conductance: options.rule.conductance(sides[u], sides[v]),
            });
        }
    }
    edges
}

/// Which cells of a graph to pick.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegionSelector {
    /// Cells whose square meets a side of the unit square.
    Edge(Side),
    /// Cells descending from a given cell.
    Prefix(Word),
    /// Cells contained in the closed rectangle `(x0, y0, x1, y1)`.
    Rect([QuadNumber; 4]),
    /// Cells whose first letter is in the set.
    IndexSet(BTreeSet<u32>),
}

impl RegionSelector {
    /// `edge:left`, `prefix:1.26`, `rect:(0,1/4,1,3/4)`, `indexset:{38,39,101}`.
    /// Brackets around the rect and indexset lists are optional.
    pub fn parse(s: &str, radicand: u64) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("invalid selector `{s}`")))?;
        let unwrapped = match kind {
            "rect" => arg.strip_prefix('(').and_then(|a| a.strip_suffix(')')),
            "indexset" => arg.strip_prefix('{').and_then(|a| a.strip_suffix('}')),
            _ => None,
        };
        match unwrapped {
            Some(inner) => Self::parse_parts(s, kind, inner, radicand).or_else(|_| Self::parse_parts(s, kind, arg, radicand)),
            None => Self::parse_parts(s, kind, arg, radicand),
        }
    }

    fn parse_parts(s: &str, kind: &str, arg: &str, radicand: u64) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid selector `{s}`"));
        match kind {
            "edge" => Side::parse(arg).map(RegionSelector::Edge).ok_or_else(bad),
            "prefix" => Ok(RegionSelector::Prefix(Word::parse(arg)?)),
            "rect" => {
                let parts: Vec<&str> = arg.split(',').collect();
                if parts.len() != 4 {
                    return Err(bad());
                }
                let v: Vec<QuadNumber> = parts
                    .iter()
                    .map(|p| QuadNumber::parse(p, radicand))
                    .collect::<Result<_>>()?;
                Ok(RegionSelector::Rect([v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()]))
            }
            "indexset" => arg
                .split(',')
                .map(|t| t.trim().parse::<u32>().ok().filter(|v| *v >= 1))
                .collect::<Option<BTreeSet<u32>>>()
                .filter(|set| !set.is_empty())
                .map(RegionSelector::IndexSet)
                .ok_or_else(bad),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for RegionSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionSelector::Edge(side) => write!(f, "edge:{}", side.name()),
            RegionSelector::Prefix(w) => write!(f, "prefix:{w}"),
            RegionSelector::Rect(r) => write!(f, "rect:({},{},{},{})", r[0], r[1], r[2], r[3]),
            RegionSelector::IndexSet(set) => {
                let items: Vec<String> = set.iter().map(|v| v.to_string()).collect();
                write!(f, "indexset:{{{}}}", items.join(","))
            }
        }
    }
}

impl CellGraph {
    pub fn vertex_count(&self) -> usize {
        self.words.len()
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.words.binary_search(w).ok()
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count()];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        adj
    }

    pub fn side_lengths(&self) -> Vec<f64> {
        self.squares.iter().map(|s| s.side.to_f64(Rounding::Nearest)).collect()
    }

    /// Exact selection, returned as sorted vertex ids.
    pub fn select(&self, sel: &RegionSelector) -> Vec<usize> {
        (0..self.vertex_count())
            .filter(|&v| match sel {
                RegionSelector::Edge(side) => self.squares[v].meets_side(*side),
                RegionSelector::Prefix(w) => self.words[v].starts_with(w),
                RegionSelector::Rect([x0, y0, x1, y1]) => self.squares[v].inside_rect(x0, y0, x1, y1),
                RegionSelector::IndexSet(set) => {
                    self.words[v].0.first().is_some_and(|first| set.contains(first))
                }
            })
            .collect()
    }

    /// Vertices whose squares neither equal nor touch the square of `w`.
    pub fn complement_nonneighbors(&self, w: &Word) -> Result<Vec<usize>> {
        let idx = self
            .index_of(w)
            .ok_or_else(|| Error::InvalidSet(format!("word {w} is not a vertex")))?;
        let target = &self.squares[idx];
        Ok((0..self.vertex_count())
            .into_par_iter()
            .filter(|&v| v != idx && classify(&self.squares[v], target) == Contact::Disjoint)
            .collect())
    }

    /// Vertex-induced subgraph with renumbered vertices; conductances kept.
    pub fn induced_subgraph(&self, verts: &[usize]) -> CellGraph {
        let mut keep: Vec<usize> = verts.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let mut map = vec![usize::MAX; self.vertex_count()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| map[e.u] != usize::MAX && map[e.v] != usize::MAX)
            .map(|e| Edge {
                u: map[e.u],
                v: map[e.v],
                ..e.clone()
            })
            .collect();
        CellGraph {
            system: self.system.clone(),
            radicand: self.radicand,
            level: self.level,
            options: self.options,
            words: keep.iter().map(|&v| self.words[v].clone()).collect(),
            squares: keep.iter().map(|&v| self.squares[v].clone()).collect(),
            edges,
        }
    }

    /// Vertex map induced by an isometry, given its permutation of the
    /// level-1 cells (0-based). Letters are permuted independently because
    /// every map commutes with the group: `Γ ∘ F_i = F_{π(i)} ∘ Γ`.
    pub fn isometry_vertex_map(&self, level1_perm: &[usize]) -> Option<Vec<usize>> {
        self.words
            .iter()
            .map(|w| {
                let image = Word(w.0.iter().map(|&l| level1_perm[l as usize - 1] as u32 + 1).collect());
                self.index_of(&image)
            })
            .collect()
    }

    /// Whether `vmap` maps edges onto edges with equal kind and conductance.
    pub fn is_automorphism(&self, vmap: &[usize]) -> bool {
        let key = |u: usize, v: usize| if u < v { (u, v) } else { (v, u) };
        let lookup: std::collections::HashMap<(usize, usize), (EdgeKind, u64)> = self
            .edges
            .iter()
            .map(|e| ((e.u, e.v), (e.kind, e.conductance.to_bits())))
            .collect();
        self.edges.iter().all(|e| {
            lookup.get(&key(vmap[e.u], vmap[e.v])) == Some(&(e.kind, e.conductance.to_bits()))
        })
    }

    /// Connected components as a label per vertex.
    pub fn component_labels(&self) -> Vec<usize> {
        component_labels(self.vertex_count(), self.edges.iter().map(|e| (e.u, e.v)))
    }

    /// Text export: vertex lines then edge lines.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for (i, (w, sq)) in self.words.iter().zip(&self.squares).enumerate() {
            writeln!(out, "vertex {i} {w} {} {} {}", sq.x0, sq.y0, sq.side).unwrap();
        }
        for e in &self.edges {
            writeln!(out, "edge {} {} {} {}", e.u, e.v, e.kind.name(), e.conductance).unwrap();
        }
        out
    }
}

pub fn component_labels(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut uf = crate::geometry::UnionFind::new(n);
    for (u, v) in edges {
        uf.union(u, v);
    }
    (0..n).map(|v| uf.find(v)).collect()
}

/// Permutation of level-1 cells for every group element, from validation.
pub fn level1_permutations(sys: &IFSystem) -> Result<Vec<(Isometry, Vec<usize>)>> {
    let report = validate_lsc(sys)?;
    if !report.all_passed() {
        return Err(Error::Unvalidated(sys.name.clone()));
    }
    Ok(report.permutations)
}
