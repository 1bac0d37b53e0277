//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Criteria run on separate threads.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use equisquare::bipartite::{decompose_regular, BipartiteMultigraph};
use equisquare::constructions::{
    block_structured_square, counterexample_square, missing_colour_certificate, random_equi_square,
};
use equisquare::dependence::{
    block_transversal, default_cap, final_level_sensitivity, mcdiarmid_bound,
};
use equisquare::experiments::{self, Params};
use equisquare::hypergraph::{
    alon_kim, greedy_edge_colouring, max_matching_exact, split_high_codegree, TripartiteHypergraph,
};
use equisquare::rng::{rng_from_seed, SeedSplitter};
use equisquare::solvers::{brute_force_max, exact_max, local_search, random_greedy};
use equisquare::square::{validate_transversal, Cell, EquiNSquare};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Rows, columns and symbols pairwise distinct, checked from scratch.
fn is_partial_transversal(sq: &EquiNSquare, cells: &[Cell]) -> bool {
    let rows: BTreeSet<_> = cells.iter().map(|c| c.row).collect();
    let cols: BTreeSet<_> = cells.iter().map(|c| c.col).collect();
    let syms: BTreeSet<_> = cells.iter().map(|c| sq.get(c.row, c.col)).collect();
    rows.len() == cells.len() && cols.len() == cells.len() && syms.len() == cells.len()
}

fn c1_counterexample_exact() -> Outcome {
    let t0 = Instant::now();
    let (sq8, _) = counterexample_square(8).unwrap();
    let (t8, opt8) = exact_max(&sq8, u64::MAX);
    let ok8 = opt8 && t8.len() <= 7 && t0.elapsed().as_secs() < 60;
    let t8_time = t0.elapsed();

    let (sq18, pairing) = counterexample_square(18).unwrap();
    let (t18, opt18) = exact_max(&sq18, 100_000_000);
    let bound = 18 - 2;
    let ok18 = if opt18 {
        t18.len() <= bound
    } else {
        // Fall back to the certificate: the incumbent and any other solver
        // output must respect the implied bound.
        let mut ok = t18.len() <= bound
            && missing_colour_certificate(&sq18, &pairing, &t18).is_ok()
            && pairing.implied_bound() == bound;
        let mut rng = rng_from_seed(18);
        for _ in 0..20 {
            let g = random_greedy(&sq18, &mut rng);
            let l = local_search(&sq18, &g, &mut rng, 2000);
            ok &= l.len() <= bound && missing_colour_certificate(&sq18, &pairing, &l).is_ok();
        }
        ok
    };
    outcome(
        ok8 && ok18,
        format!(
            "n=8 size={} optimal={opt8} in {:.2?}; n=18 size={} optimal={opt18} (bound {bound}{})",
            t8.len(),
            t8_time,
            t18.len(),
            if opt18 {
                ""
            } else {
                ", confirmed via certificate"
            }
        ),
    )
}

fn c2_certificate() -> Outcome {
    let mut parts = Vec::new();
    let mut total = 0;
    let mut count = 0;
    for n in [8, 18, 50, 200] {
        let mut p = Params::new(n, 50, 2000 + n as u64);
        p.parallel = 2;
        let rows = experiments::missing_colour(&p).unwrap();
        let v: usize = rows.iter().map(|r| r.violations).sum();
        total += v;
        count += 2 * rows.len();
        parts.push(format!("n={n}:{v}"));
    }
    outcome(
        total == 0,
        format!("{count} transversals, violations {}", parts.join(" ")),
    )
}

fn c3_oracle_equivalence() -> Outcome {
    let mut mismatches = 0;
    let mut runs = 0;
    for n in 4..=6 {
        for seed in 0..200 {
            let sq = random_equi_square(n, 30_000 + seed).unwrap();
            let (t, opt) = exact_max(&sq, u64::MAX);
            let (brute, _) = brute_force_max(&sq).unwrap();
            runs += 1;
            if !opt || t.len() != brute {
                mismatches += 1;
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{runs} squares, {mismatches} mismatches"),
    )
}

/// Union of `k` uniformly random perfect matchings on `v + v` vertices.
fn random_regular(v: usize, k: usize, seed: u64) -> BipartiteMultigraph {
    let mut rng = rng_from_seed(seed);
    let mut pairs = Vec::with_capacity(v * k);
    for _ in 0..k {
        let mut perm: Vec<usize> = (0..v).collect();
        perm.shuffle(&mut rng);
        pairs.extend(perm.into_iter().enumerate());
    }
    BipartiteMultigraph::from_pairs(v, v, pairs).unwrap()
}

fn c4_regular_decomposition() -> Outcome {
    let mut failures = 0;
    let mut graphs = 0;
    for k in [2, 4, 8] {
        for seed in 0..50 {
            graphs += 1;
            let g = random_regular(200, k, 400 + 97 * k as u64 + seed);
            let ms = decompose_regular(&g, k).unwrap();
            let mut seen = BTreeSet::new();
            let mut ok = ms.len() == k;
            for m in &ms {
                let mut left = BTreeSet::new();
                let mut right = BTreeSet::new();
                for l in m.labels() {
                    let e = g.edge(l).unwrap();
                    ok &= left.insert(e.left) && right.insert(e.right) && seen.insert(l);
                }
                ok &= left.len() == 200 && right.len() == 200;
            }
            ok &= seen.len() == g.edge_count();
            failures += usize::from(!ok);
        }
    }
    outcome(
        failures == 0,
        format!("{graphs} graphs, {failures} failures"),
    )
}

fn c5_survival() -> Outcome {
    let mut p = Params::new(8, 10_000, 5);
    p.m = Some(2);
    p.parallel = 2;
    let rows = experiments::survival(&p).unwrap();
    let deleted = rows.iter().filter(|r| r.deleted == 1).count();
    let f = rows.last().unwrap().frequency;
    outcome(
        deleted == 0 && (f - 0.25).abs() <= 0.013,
        format!(
            "frequency {f:.4} over {} seeds, edge deleted in {deleted}; tolerance ±0.013",
            rows.len()
        ),
    )
}

fn c6_block_validity() -> Outcome {
    let ns = [8usize, 64, 1024];
    let mut invalid = 0;
    let mut runs = 0;
    for i in 0..1000u64 {
        let n = ns[(i % 3) as usize];
        let split = SeedSplitter::new(60_000).trial(i);
        let (sq, blocks) = block_structured_square(n, n / 4, split.seed()).unwrap();
        let run =
            block_transversal(&sq, &blocks, default_cap(n), &mut split.stream("halving")).unwrap();
        runs += 1;
        let cells = run.transversal.cells();
        if validate_transversal(&sq, cells).is_err() || !is_partial_transversal(&sq, cells) {
            invalid += 1;
        }
    }
    outcome(invalid == 0, format!("{runs} runs, {invalid} invalid"))
}

struct BigRuns {
    sizes: Vec<usize>,
    within: usize,
    rows: usize,
    p99: f64,
    bound: Option<f64>,
}

fn big_runs() -> BigRuns {
    let n = 1024;
    let cap = default_cap(n);
    let mut sizes = Vec::new();
    let mut devs = Vec::new();
    let mut worst: Vec<f64> = Vec::new();
    for seed in 0..20u64 {
        let split = SeedSplitter::new(1024).trial(seed);
        let (sq, blocks) = block_structured_square(n, 256, split.seed()).unwrap();
        let run = block_transversal(&sq, &blocks, cap, &mut split.stream("halving")).unwrap();
        sizes.push(run.transversal.len());
        devs.extend(
            run.loads
                .loads
                .iter()
                .map(|&l| (l as f64 - n as f64 / 4.0).abs()),
        );
        for c in final_level_sensitivity(&run.trace, &blocks) {
            let sq_sum = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
            if sq_sum(&c) > sq_sum(&worst) {
                worst = c;
            }
        }
    }
    devs.sort_by(|a, b| a.total_cmp(b));
    let within = devs.iter().filter(|&&d| d <= n as f64 / 8.0).count();
    let p99 = experiments::quantile(&devs, 0.99);
    let bound = if p99 > 0.0 {
        mcdiarmid_bound(&worst, p99).ok()
    } else {
        None
    };
    sizes.sort_unstable();
    BigRuns {
        sizes,
        within,
        rows: devs.len(),
        p99,
        bound,
    }
}

fn c7_concentration(b: &BigRuns) -> Outcome {
    let frac = b.within as f64 / b.rows as f64;
    outcome(
        frac >= 0.99,
        format!(
            "{:.4} of rows within n/8 (need 0.99); p99 |m(i)-n/4| = {:.1}, bounded-differences tail at that t = {}",
            frac,
            b.p99,
            b.bound.map_or("n/a".to_string(), |v| format!("{v:.3e}"))
        ),
    )
}

fn c8_size(b: &BigRuns) -> Outcome {
    let median =
        b.sizes[b.sizes.len() / 2 - 1] as f64 / 2.0 + b.sizes[b.sizes.len() / 2] as f64 / 2.0;
    outcome(
        median >= 0.90 * 1024.0,
        format!(
            "median size {median:.1} = {:.3}n (need 0.90n), range {}..{}, cap {}",
            median / 1024.0,
            b.sizes[0],
            b.sizes[b.sizes.len() - 1],
            default_cap(1024)
        ),
    )
}

fn c9_greedy() -> Outcome {
    let sq = random_equi_square(100, 9).unwrap();
    let mut total = 0;
    for seed in 0..50 {
        let t = random_greedy(&sq, &mut rng_from_seed(seed));
        assert!(is_partial_transversal(&sq, t.cells()));
        total += t.len();
    }
    let mean = total as f64 / 50.0;
    outcome(
        mean >= 60.0,
        format!("mean greedy size {mean:.2} (need 60)"),
    )
}

fn c10_alon_kim() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for t in [1, 2] {
        let h = alon_kim(t).unwrap();
        let m = max_matching_exact(&h, u64::MAX);
        ok &= m.optimal && m.edges.len() == 2 * t && h.is_matching(&m.edges);
        parts.push(format!("t={t}: {} (optimal={})", m.edges.len(), m.optimal));
    }
    outcome(ok, parts.join(", "))
}

/// Linear background plus planted pairs whose vertices occur only in the
/// planted edges, each with a distinct third vertex.
fn planted(seed: u64, threshold: usize) -> TripartiteHypergraph {
    let mut rng = rng_from_seed(seed);
    let size = 40;
    let mut h = TripartiteHypergraph::new([size, size, size]);
    let pairs = rng.gen_range(1..=4);
    let mut reserved = [BTreeSet::new(), BTreeSet::new(), BTreeSet::new()];
    let mut third = 0;
    for p in 0..pairs {
        // Alternate which two classes carry the pair.
        let (cx, cy, cz) = if p % 2 == 0 { (0, 1, 2) } else { (0, 2, 1) };
        let x = p;
        let y = p;
        reserved[cx].insert(x);
        reserved[cy].insert(y);
        for _ in 0..rng.gen_range(threshold + 1..=threshold + 4) {
            let z = size - 1 - third;
            third += 1;
            reserved[cz].insert(z);
            let mut e = [0; 3];
            e[cx] = x;
            e[cy] = y;
            e[cz] = z;
            h.add_edge(e).unwrap();
        }
    }
    let mut used_pairs = BTreeSet::new();
    for _ in 0..200 {
        let e = [
            rng.gen_range(0..size),
            rng.gen_range(0..size),
            rng.gen_range(0..size),
        ];
        if (0..3).any(|c| reserved[c].contains(&e[c])) {
            continue;
        }
        let keys = [(0, e[0], 1, e[1]), (0, e[0], 2, e[2]), (1, e[1], 2, e[2])];
        if keys.iter().any(|k| used_pairs.contains(k)) {
            continue;
        }
        used_pairs.extend(keys);
        h.add_edge(e).unwrap();
    }
    h
}

fn c11_splitting() -> Outcome {
    let threshold = 2;
    let mut failures = 0;
    for seed in 0..50 {
        let h = planted(11_000 + seed, threshold);
        let split = split_high_codegree(&h, threshold).unwrap();
        let h2 = &split.hypergraph;
        let colouring = greedy_edge_colouring(h2);
        let back = split.pull_back(&colouring);
        // Properness on H checked directly: no two edges sharing a vertex
        // share a colour.
        let mut proper = true;
        for e in 0..h.edge_count() {
            for f in e + 1..h.edge_count() {
                let shares = (0..3).any(|c| h.edges()[e][c] == h.edges()[f][c]);
                proper &= !(shares && back.colour(e) == back.colour(f));
            }
        }
        let ok = h2.max_codegree() <= threshold
            && !split.is_identity()
            && proper
            && back.colour_count() == colouring.colour_count();
        failures += usize::from(!ok);
    }
    outcome(
        failures == 0,
        format!("50 hypergraphs, {failures} failures"),
    )
}

fn main() {
    let start = Instant::now();
    let names = [
        "1 counterexample bound (exact)",
        "2 missing-colour certificate",
        "3 exact == brute force",
        "4 regular decomposition",
        "5 halving survival 1/4",
        "6 block transversal validity",
        "7 row-load concentration",
        "8 transversal size >= 0.90n",
        "9 greedy baseline",
        "10 Alon-Kim obstruction",
        "11 vertex splitting",
    ];
    let results: Vec<Outcome> = std::thread::scope(|s| {
        let c1 = s.spawn(c1_counterexample_exact);
        let c2 = s.spawn(c2_certificate);
        let c3 = s.spawn(c3_oracle_equivalence);
        let c4 = s.spawn(c4_regular_decomposition);
        let c5 = s.spawn(c5_survival);
        let c6 = s.spawn(c6_block_validity);
        let big = s.spawn(big_runs);
        let c9 = s.spawn(c9_greedy);
        let c10 = s.spawn(c10_alon_kim);
        let c11 = s.spawn(c11_splitting);
        let big = big.join().unwrap();
        vec![
            c1.join().unwrap(),
            c2.join().unwrap(),
            c3.join().unwrap(),
            c4.join().unwrap(),
            c5.join().unwrap(),
            c6.join().unwrap(),
            c7_concentration(&big),
            c8_size(&big),
            c9.join().unwrap(),
            c10.join().unwrap(),
            c11.join().unwrap(),
        ]
    });
    let mut failed = 0;
    for (name, r) in names.iter().zip(&results) {
        println!(
            "ACCEPTANCE {:<34} {}  {}",
            name,
            if r.pass { "PASS" } else { "FAIL" },
            r.detail
        );
        failed += usize::from(!r.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1?}",
        results.len() - failed,
        start.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
