//! One halving step on the union of two matchings forming an 8-cycle, with
//! and without a cap, showing the pieces and the coin for each.

use equisquare::bipartite::{BipartiteMultigraph, Matching};
use equisquare::dependence::alternate_halve;
use equisquare::rng::rng_from_seed;

fn main() {
    // Left i is joined to right i (labels 0..4) and right i+1 (labels 4..8).
    let mut pairs: Vec<(usize, usize)> = (0..4).map(|i| (i, i)).collect();
    pairs.extend((0..4).map(|i| (i, (i + 1) % 4)));
    let g = BipartiteMultigraph::from_pairs(4, 4, pairs).unwrap();
    let a = Matching::new(&g, 0..4).unwrap();
    let b = Matching::new(&g, 4..8).unwrap();

    for cap in [8, 3] {
        println!("cap {cap}");
        for seed in 0..3 {
            let (m, step) = alternate_halve(&g, &a, &b, cap, &mut rng_from_seed(seed)).unwrap();
            let deleted: Vec<_> = step.cap.deleted.iter().collect();
            let pieces: Vec<_> = step
                .cap
                .components
                .components
                .iter()
                .map(|c| c.edges.clone())
                .collect();
            println!(
                "  seed {seed}: deleted {deleted:?} pieces {pieces:?} coins {:?} -> {:?}",
                step.flips,
                m.labels().collect::<Vec<_>>()
            );
        }
    }
}
