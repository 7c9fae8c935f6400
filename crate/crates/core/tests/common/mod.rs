#![allow(dead_code)]

use avgtrack::graph::{build_graph, Graph};
use rand::seq::SliceRandom;
use rand::Rng;

/// A random connected graph on `n` nodes: a random spanning tree plus each
/// remaining pair with probability `extra`.
pub fn random_connected_graph(rng: &mut impl Rng, n: usize, extra: f64) -> Graph {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        edges.push((parent, order[k]));
    }
    for i in 1..=n {
        for j in (i + 1)..=n {
            if rng.gen_bool(extra) {
                edges.push((i, j));
            }
        }
    }
    build_graph(n, &edges).expect("valid edges")
}
