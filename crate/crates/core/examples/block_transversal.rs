//! Runs the bounded-dependence pipeline on a block-structured square and
//! reports the transversal size, deletions per level and row loads.
//!
//! cargo run --release --example block_transversal -- 1024 256

use equisquare::constructions::block_structured_square;
use equisquare::dependence::{block_transversal, default_cap, row_loads, LevelSelector};
use equisquare::rng::SeedSplitter;

fn main() {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer"));
    let n = args.next().unwrap_or(64);
    let m = args.next().unwrap_or(n / 4);
    let seeds = SeedSplitter::new(7);

    let (square, blocks) = block_structured_square(n, m, seeds.seed()).expect("m divides n");
    let cap = default_cap(n);
    let run = block_transversal(&square, &blocks, cap, &mut seeds.stream("halving"))
        .expect("n/m is a power of two");

    println!("n={n} m={m} k={} cap={cap}", blocks.k());
    println!("deleted per level: {:?}", run.trace.deleted_per_level());
    println!("selected blocks: {}", run.trace.result.len());
    println!(
        "transversal size: {} ({:.3} n)",
        run.transversal.len(),
        run.transversal.len() as f64 / n as f64
    );

    let before = row_loads(&run.trace, &blocks, LevelSelector::Input(0)).unwrap();
    let after = &run.loads;
    let spread = |l: &[usize]| {
        (
            l.iter().min().copied().unwrap_or(0),
            l.iter().max().copied().unwrap_or(0),
        )
    };
    println!(
        "row loads of first matching: min/max {:?}",
        spread(&before.loads)
    );
    println!(
        "row loads of final matching: min/max {:?} (n/k = {})",
        spread(&after.loads),
        n / blocks.k()
    );
}
