//! Builds the box-pairing square for a given order, finds transversals with
//! several solvers and audits each one with the missing-colour certificate.
//!
//! cargo run --example counterexample_certificate -- 18

use equisquare::constructions::{counterexample_square, missing_colour_certificate};
use equisquare::rng::SeedSplitter;
use equisquare::solvers::{exact_max, local_search, random_greedy};

fn main() {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(8);
    let (square, pairing) = counterexample_square(n).expect("n >= 8");
    println!(
        "n={n} m={} r={} a={} b={}  boxed side {}  implied bound {}",
        pairing.m,
        pairing.r,
        pairing.a,
        pairing.b,
        pairing.boxed_side(),
        pairing.implied_bound()
    );

    let seeds = SeedSplitter::new(1);
    let greedy = random_greedy(&square, &mut seeds.stream("greedy"));
    let local = local_search(&square, &greedy, &mut seeds.stream("local_search"), 50 * n);
    let mut found = vec![("greedy", greedy), ("local search", local)];
    if n <= 12 {
        let (t, optimal) = exact_max(&square, 10_000_000);
        println!("exact search finished: {optimal}");
        found.push(("exact", t));
    }

    for (name, t) in &found {
        let report = missing_colour_certificate(&square, &pairing, t).expect("certificate holds");
        println!(
            "{name:>12}: size {:>3}, {} boxed cells, {} distinct missing colours",
            t.len(),
            report.boxed_size,
            report.distinct_missing
        );
    }
}
