//! Splits the pairs of high codegree in a small hypergraph and pulls an edge
//! colouring of the result back to the original.

use equisquare::hypergraph::{greedy_edge_colouring, split_high_codegree, TripartiteHypergraph};

fn main() {
    // (0,0) in classes A and B lies in three edges; everything else is linear.
    let edges = vec![
        [0, 0, 0],
        [0, 0, 1],
        [0, 0, 2],
        [1, 1, 0],
        [2, 2, 1],
        [1, 2, 3],
        [2, 1, 2],
    ];
    let h = TripartiteHypergraph::with_edges([3, 3, 4], edges).unwrap();
    println!("max codegree before: {}", h.max_codegree());

    let split = split_high_codegree(&h, 1).unwrap();
    println!("split pairs: {:?}", split.split_pairs);
    println!("max codegree after: {}", split.hypergraph.max_codegree());

    let colouring = greedy_edge_colouring(&split.hypergraph);
    let back = split.pull_back(&colouring);
    println!(
        "{} colours; proper on the split hypergraph: {}; proper on the original: {}",
        colouring.colour_count(),
        colouring.is_proper(&split.hypergraph),
        back.is_proper(&h)
    );
}
