//! Runs the survival and greedy-baseline experiments and prints their CSV.

use equisquare::experiments::{run_to_csv, Experiment, Params};

fn main() {
    let mut survival = Params::new(8, 2000, 0);
    survival.m = Some(2);
    survival.parallel = 4;
    let mut csv = Vec::new();
    let summary = run_to_csv(Experiment::Survival, &survival, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    println!("{}", text.lines().take(4).collect::<Vec<_>>().join("\n"));
    println!("...\n{summary}\n");

    let greedy = Params::new(100, 20, 1);
    let mut csv = Vec::new();
    let summary = run_to_csv(Experiment::GreedyBaseline, &greedy, &mut csv).unwrap();
    print!("{}", String::from_utf8(csv).unwrap());
    println!("{summary}");
}
