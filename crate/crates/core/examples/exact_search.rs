//! Exact maximum transversals: branch and bound against the brute-force
//! oracle, and the classical cyclic squares.

use equisquare::constructions::{cyclic_latin, random_equi_square};
use equisquare::solvers::{brute_force_max, exact_max};

fn main() {
    for seed in 0..5 {
        let sq = random_equi_square(6, seed).unwrap();
        let (t, optimal) = exact_max(&sq, u64::MAX);
        let (brute, _) = brute_force_max(&sq).unwrap();
        println!(
            "random n=6 seed {seed}: exact {} (optimal {optimal}), brute force {brute}",
            t.len()
        );
    }
    for n in 2..=9 {
        let (t, optimal) = exact_max(&cyclic_latin(n).unwrap(), 50_000_000);
        println!("cyclic n={n}: {} (optimal {optimal})", t.len());
    }
}
