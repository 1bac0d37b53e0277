//! Splits a random k-regular bipartite multigraph into k perfect matchings,
//! then a graph of maximum degree k into k matchings.

use equisquare::bipartite::{decompose_max_degree, decompose_regular, BipartiteMultigraph};
use rand::seq::SliceRandom;
use rand::Rng;

fn main() {
    let mut rng = equisquare::rng::rng_from_seed(3);
    let (v, k) = (50, 6);
    let mut pairs = Vec::new();
    for _ in 0..k {
        let mut perm: Vec<usize> = (0..v).collect();
        perm.shuffle(&mut rng);
        pairs.extend(perm.into_iter().enumerate());
    }
    let g = BipartiteMultigraph::from_pairs(v, v, pairs).unwrap();
    let ms = decompose_regular(&g, k).unwrap();
    let sizes: Vec<usize> = ms.iter().map(|m| m.len()).collect();
    println!("{k}-regular on {v}+{v}: matchings of sizes {sizes:?}");

    let sparse: Vec<(usize, usize)> = (0..120)
        .map(|_| (rng.gen_range(0..v), rng.gen_range(0..v)))
        .collect();
    let h = BipartiteMultigraph::from_pairs(v, v, sparse).unwrap();
    let d = h.max_degree();
    let ms = decompose_max_degree(&h, d).unwrap();
    let sizes: Vec<usize> = ms.iter().map(|m| m.len()).collect();
    println!(
        "max degree {d}, {} edges: matchings of sizes {sizes:?}",
        h.edge_count()
    );
}
