//! The 2t-regular obstruction whose largest matching has only 2t of its 3t
//! possible edges, and its blow-up.

use equisquare::hypergraph::{alon_kim, blow_up, max_matching_exact};

fn main() {
    for t in 1..=3 {
        let h = alon_kim(t).unwrap();
        let m = max_matching_exact(&h, 50_000_000);
        println!(
            "t={t}: {} vertices per class, {}-regular, max codegree {}, max matching {} (optimal {}, {} nodes)",
            h.class_sizes()[0],
            h.regular_degree().unwrap(),
            h.max_codegree(),
            m.edges.len(),
            m.optimal,
            m.nodes
        );
    }
    let big = blow_up(&alon_kim(1).unwrap(), 3).unwrap();
    println!(
        "blow-up x3: {} edges, {}-regular, max codegree {}",
        big.edge_count(),
        big.regular_degree().unwrap(),
        big.max_codegree()
    );
}
