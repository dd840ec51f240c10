#![allow(dead_code)]

use lsc_core::potential::EnergyForm;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Connected graph on `n` vertices: a random spanning tree plus about `n/2`
/// extra edges, conductances in `[0.5, 2]`.
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v, rng.gen_range(0.5..2.0)));
    }
    for _ in 0..n / 2 {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.push((u.min(v), u.max(v), rng.gen_range(0.5..2.0)));
        }
    }
    edges
}

pub fn form(n: usize, edges: &[(usize, usize, f64)]) -> EnergyForm {
    EnergyForm::from_edges(n, edges).unwrap()
}

/// Two disjoint nonempty vertex sets of size at most 3.
pub fn disjoint_sets(rng: &mut ChaCha8Rng, n: usize) -> (Vec<usize>, Vec<usize>) {
    let mut vs: Vec<usize> = (0..n).collect();
    vs.shuffle(rng);
    let ka = rng.gen_range(1..=3.min(n - 1));
    let kb = rng.gen_range(1..=3.min(n - ka));
    let mut a = vs[..ka].to_vec();
    let mut b = vs[ka..ka + kb].to_vec();
    a.sort_unstable();
    b.sort_unstable();
    (a, b)
}

pub fn rel_err(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}
