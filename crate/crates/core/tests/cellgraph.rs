use lsc_core::catalog;
use lsc_core::cellgraph::{brute_force_edges, build_graph, level_squares, EdgeKind, GraphOptions, RegionSelector};
use lsc_core::geometry::{Side, Square};
use lsc_core::{QuadNumber, Word};
use proptest::prelude::*;

fn options(corner_edges: bool) -> GraphOptions {
    GraphOptions { corner_edges, ..GraphOptions::default() }
}

#[test]
fn indexed_edges_match_brute_force() {
    for (name, level) in [("sc8", 3), ("carpet104", 1)] {
        let sys = catalog::build(name).unwrap();
        for corners in [false, true] {
            let g = build_graph(&sys, level, options(corners)).unwrap();
            let brute = brute_force_edges(&level_squares(&sys, level), options(corners));
            assert_eq!(g.edges, brute, "{name} level {level} corners {corners}");
            if !corners {
                assert!(g.edges.iter().all(|e| e.kind == EdgeKind::Segment));
            }
        }
    }
}

#[test]
fn sc8_counts_and_connectivity() {
    let sys = catalog::sc8();
    for level in 1..=3 {
        let g = build_graph(&sys, level, GraphOptions::default()).unwrap();
        assert_eq!(g.vertex_count(), 8usize.pow(level as u32));
        let labels = g.component_labels();
        assert!(labels.iter().all(|&l| l == labels[0]));
    }
    assert_eq!(build_graph(&sys, 1, GraphOptions::default()).unwrap().edges.len(), 8);
}

#[test]
fn edge_selection_is_exact() {
    let sys = catalog::carpet104();
    let g = build_graph(&sys, 2, GraphOptions::default()).unwrap();
    for side in Side::ALL {
        let sel = g.select(&RegionSelector::Edge(side));
        let expected: Vec<usize> = (0..g.vertex_count()).filter(|&v| g.squares[v].meets_side(side)).collect();
        assert_eq!(sel, expected);
        assert!(!sel.is_empty());
    }
    let left = g.select(&RegionSelector::parse("edge:left", 42).unwrap());
    let prefixed = g.select(&RegionSelector::parse("prefix:1", 42).unwrap());
    assert_eq!(prefixed.len(), 104);
    assert!(prefixed.iter().all(|&v| g.words[v].starts_with(&Word(vec![1]))));
    assert!(left.iter().any(|v| prefixed.contains(v)));
}

fn unit_rect() -> impl Strategy<Value = (i64, i64, i64, i64)> {
    (0i64..9, 0i64..9, 1i64..10, 1i64..10).prop_map(|(x, y, w, h)| (x, y, (x + w).min(9), (y + h).min(9)))
}

fn inside(sq: &Square, r: (i64, i64, i64, i64)) -> bool {
    let q = |n| QuadNumber::rational(n, 9);
    sq.inside_rect(&q(r.0), &q(r.1), &q(r.2), &q(r.3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rect_selection_matches_containment(r in unit_rect(), s in unit_rect()) {
        let sys = catalog::sc8();
        let g = build_graph(&sys, 2, GraphOptions::default()).unwrap();
        let text = format!("rect:({}/9,{}/9,{}/9,{}/9)", r.0, r.1, r.2, r.3);
        let a = g.select(&RegionSelector::parse(&text, 0).unwrap());
        let expected: Vec<usize> = (0..g.vertex_count()).filter(|&v| inside(&g.squares[v], r)).collect();
        prop_assert_eq!(&a, &expected);
        // rectangles with disjoint interiors share no cells
        if r.2 <= s.0 || s.2 <= r.0 || r.3 <= s.1 || s.3 <= r.1 {
            let text = format!("rect:{}/9,{}/9,{}/9,{}/9", s.0, s.1, s.2, s.3);
            let b = g.select(&RegionSelector::parse(&text, 0).unwrap());
            prop_assert!(a.iter().all(|v| !b.contains(v)));
        }
    }
}

#[test]
fn export_lists_every_edge() {
    let sys = catalog::sc8();
    let g = build_graph(&sys, 2, GraphOptions::default()).unwrap();
    let text = g.export();
    let edge_lines = text.lines().filter(|l| l.starts_with("edge")).count();
    assert_eq!(edge_lines, g.edges.len());
}
