//! Seeded experiment suites that write one CSV row per trial.
//!
//! Trial `i` of a run with seed `s` uses seed `s + i` for every instance it
//! generates and draws its randomness from named streams of that seed, so a
//! trial's row does not depend on how many workers ran or in which order.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bipartite::decompose_regular;
use crate::constructions::{
    block_structured_square, counterexample_square, random_equi_square, ConstructionError,
};
use crate::dependence::{
    block_multigraph, block_transversal, default_cap, final_level_sensitivity, iterated_halving,
    mcdiarmid_bound, DependenceError,
};
use crate::rng::SeedSplitter;
use crate::solvers::{local_search, peel_decomposition, random_greedy, SolverError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("InvalidParam: {0}")]
    InvalidParam(String),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Dependence(#[from] DependenceError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

type Result<T> = std::result::Result<T, ExperimentError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    MissingColour,
    Concentration,
    GreedyBaseline,
    Peel,
    Survival,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::MissingColour,
        Experiment::Concentration,
        Experiment::GreedyBaseline,
        Experiment::Peel,
        Experiment::Survival,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::MissingColour => "missing-colour",
            Experiment::Concentration => "concentration",
            Experiment::GreedyBaseline => "greedy-baseline",
            Experiment::Peel => "peel",
            Experiment::Survival => "survival",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub n: usize,
    pub m: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; 1 runs inline.
    pub parallel: usize,
    /// Component cap; each experiment has its own default.
    pub cap: Option<usize>,
    /// Local-search iterations per transversal.
    pub iterations: Option<usize>,
    /// Peel layers must reach `ceil(min_frac * n)` cells.
    pub min_frac: f64,
}

impl Params {
    pub fn new(n: usize, trials: usize, seed: u64) -> Self {
        Params {
            n,
            m: None,
            trials,
            seed,
            parallel: 1,
            cap: None,
            iterations: None,
            min_frac: 0.9,
        }
    }

    fn block_size(&self) -> Result<usize> {
        self.m
            .ok_or_else(|| ExperimentError::InvalidParam("this experiment needs --m".into()))
    }

    fn iterations(&self) -> usize {
        self.iterations.unwrap_or(20 * self.n)
    }
}

/// Runs `f` on trial indices `0..trials`, in parallel when asked, and
/// returns the rows in trial order.
pub fn run_trials<T, F>(trials: usize, parallel: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if parallel <= 1 {
        return (0..trials).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    // `collect` on an indexed parallel iterator keeps trial order.
    pool.install(|| (0..trials).into_par_iter().map(f).collect())
}

/// Columns: `trial, seed, n, greedy_size, local_size, implied_bound,
/// greedy_distinct_missing, local_distinct_missing, violations`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MissingColourRow {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub greedy_size: usize,
    pub local_size: usize,
    pub implied_bound: usize,
    pub greedy_distinct_missing: usize,
    pub local_distinct_missing: usize,
    /// Transversals that failed the certificate or exceeded the bound.
    pub violations: usize,
}

pub fn missing_colour(p: &Params) -> Result<Vec<MissingColourRow>> {
    let (square, pairing) = counterexample_square(p.n)?;
    run_trials(p.trials, p.parallel, |i| {
        let split = SeedSplitter::new(p.seed).trial(i as u64);
        let greedy = random_greedy(&square, &mut split.stream("greedy"));
        let local = local_search(
            &square,
            &greedy,
            &mut split.stream("local_search"),
            p.iterations(),
        );
        let mut violations = 0;
        let mut distinct = [0; 2];
        for (slot, t) in [&greedy, &local].into_iter().enumerate() {
            match crate::constructions::missing_colour_certificate(&square, &pairing, t) {
                Ok(report) => {
                    distinct[slot] = report.distinct_missing;
                    if report.transversal_size > report.implied_bound {
                        violations += 1;
                    }
                }
                Err(ConstructionError::CertificateViolation(_)) => violations += 1,
                Err(e) => return Err(e.into()),
            }
        }
        Ok(MissingColourRow {
            trial: i,
            seed: split.seed(),
            n: p.n,
            greedy_size: greedy.len(),
            local_size: local.len(),
            implied_bound: pairing.implied_bound(),
            greedy_distinct_missing: distinct[0],
            local_distinct_missing: distinct[1],
            violations,
        })
    })
}

/// Columns: `trial, seed, n, m, k, cap, transversal_size, deleted,
/// frac_within_n8, dev_p50, dev_p99, dev_max, mcdiarmid_final_level`.
///
/// `dev_*` are quantiles over rows of `|m(i) - n/k|` for the final
/// matching. `mcdiarmid_final_level` is the tail bound at `t = dev_p99` for
/// the row whose final-level coins have the largest total influence, and is
/// empty when `dev_p99` is zero.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ConcentrationRow {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub cap: usize,
    pub transversal_size: usize,
    /// Deleted edges per level, `;`-separated.
    pub deleted: String,
    pub frac_within_n8: f64,
    pub dev_p50: f64,
    pub dev_p99: f64,
    pub dev_max: f64,
    pub mcdiarmid_final_level: Option<f64>,
}

/// Nearest-rank quantile of an ascending slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

pub fn concentration(p: &Params) -> Result<Vec<ConcentrationRow>> {
    let m = p.block_size()?;
    let cap = p.cap.unwrap_or_else(|| default_cap(p.n));
    run_trials(p.trials, p.parallel, |i| {
        let split = SeedSplitter::new(p.seed).trial(i as u64);
        let (square, blocks) = block_structured_square(p.n, m, split.seed())?;
        let k = blocks.k();
        let run = block_transversal(&square, &blocks, cap, &mut split.stream("halving"))?;
        let target = p.n as f64 / k as f64;
        let mut devs: Vec<f64> = run
            .loads
            .loads
            .iter()
            .map(|&l| (l as f64 - target).abs())
            .collect();
        devs.sort_by(|a, b| a.total_cmp(b));
        let within = devs.iter().filter(|&&d| d <= p.n as f64 / 8.0).count();
        let p99 = quantile(&devs, 0.99);
        let worst = final_level_sensitivity(&run.trace, &blocks)
            .into_iter()
            .max_by(|a, b| {
                let sa: f64 = a.iter().map(|x| x * x).sum();
                let sb: f64 = b.iter().map(|x| x * x).sum();
                sa.total_cmp(&sb)
            })
            .unwrap_or_default();
        let bound = if p99 > 0.0 {
            mcdiarmid_bound(&worst, p99).ok()
        } else {
            None
        };
        Ok(ConcentrationRow {
            trial: i,
            seed: split.seed(),
            n: p.n,
            m,
            k,
            cap,
            transversal_size: run.transversal.len(),
            deleted: run
                .trace
                .deleted_per_level()
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(";"),
            frac_within_n8: within as f64 / p.n as f64,
            dev_p50: quantile(&devs, 0.5),
            dev_p99: p99,
            dev_max: *devs.last().unwrap_or(&0.0),
            mcdiarmid_final_level: bound,
        })
    })
}

/// Columns: `trial, seed, n, greedy_size, fraction`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GreedyRow {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub greedy_size: usize,
    pub fraction: f64,
}

pub fn greedy_baseline(p: &Params) -> Result<Vec<GreedyRow>> {
    let square = random_equi_square(p.n, p.seed)?;
    run_trials(p.trials, p.parallel, |i| {
        let split = SeedSplitter::new(p.seed).trial(i as u64);
        let t = random_greedy(&square, &mut split.stream("greedy"));
        Ok(GreedyRow {
            trial: i,
            seed: split.seed(),
            n: p.n,
            greedy_size: t.len(),
            fraction: t.len() as f64 / p.n as f64,
        })
    })
}

/// Columns: `trial, seed, n, min_size, layers, covered_cells, disjoint`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PeelRow {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub min_size: usize,
    pub layers: usize,
    pub covered_cells: usize,
    pub disjoint: bool,
}

pub fn peel(p: &Params) -> Result<Vec<PeelRow>> {
    let min_size = (p.min_frac * p.n as f64).ceil() as usize;
    run_trials(p.trials, p.parallel, |i| {
        let split = SeedSplitter::new(p.seed).trial(i as u64);
        let square = random_equi_square(p.n, split.seed())?;
        let layers = peel_decomposition(&square, &mut split.stream("peel"), min_size)?;
        let mut seen = std::collections::BTreeSet::new();
        let disjoint = layers
            .iter()
            .flat_map(|t| t.cells())
            .all(|c| seen.insert(*c));
        Ok(PeelRow {
            trial: i,
            seed: split.seed(),
            n: p.n,
            min_size,
            layers: layers.len(),
            covered_cells: seen.len(),
            disjoint,
        })
    })
}

/// Columns: `trial, seed, n, m, edge, survived, deleted, frequency`.
///
/// One block square (from the run seed) and its fixed initial matchings are
/// halved once per trial; `edge` is block 0 and `frequency` is the running
/// survival frequency up to and including this trial. The default cap is
/// `2n`, longer than any piece, so nothing is deleted.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SurvivalRow {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub edge: usize,
    pub survived: u8,
    pub deleted: u8,
    pub frequency: f64,
}

pub fn survival(p: &Params) -> Result<Vec<SurvivalRow>> {
    let m = p.block_size()?;
    let cap = p.cap.unwrap_or(2 * p.n);
    let (_, blocks) = block_structured_square(p.n, m, p.seed)?;
    let g = block_multigraph(&blocks);
    let initial = decompose_regular(&g, blocks.k()).map_err(DependenceError::from)?;
    let edge = 0;
    let mut rows = run_trials(p.trials, p.parallel, |i| {
        let split = SeedSplitter::new(p.seed).trial(i as u64);
        let (result, trace) = iterated_halving(&g, &initial, cap, &mut split.stream("halving"))?;
        Ok(SurvivalRow {
            trial: i,
            seed: split.seed(),
            n: p.n,
            m,
            edge,
            survived: u8::from(result.contains(edge)),
            deleted: u8::from(!trace.never_deleted(edge)),
            frequency: 0.0,
        })
    })?;
    let mut hits = 0usize;
    for (i, row) in rows.iter_mut().enumerate() {
        hits += usize::from(row.survived);
        row.frequency = hits as f64 / (i + 1) as f64;
    }
    Ok(rows)
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Runs `which` and writes its CSV; returns a one-line summary.
pub fn run_to_csv<W: Write>(which: Experiment, p: &Params, out: W) -> Result<String> {
    if p.trials == 0 {
        return Err(ExperimentError::InvalidParam(
            "trials must be positive".into(),
        ));
    }
    let mean = |xs: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = xs.collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    Ok(match which {
        Experiment::MissingColour => {
            let rows = missing_colour(p)?;
            write_csv(&rows, out)?;
            let v: usize = rows.iter().map(|r| r.violations).sum();
            format!(
                "missing-colour n={} trials={} violations={v}",
                p.n,
                rows.len()
            )
        }
        Experiment::Concentration => {
            let rows = concentration(p)?;
            write_csv(&rows, out)?;
            format!(
                "concentration n={} trials={} mean_size={:.1} mean_within_n8={:.4}",
                p.n,
                rows.len(),
                mean(&mut rows.iter().map(|r| r.transversal_size as f64)),
                mean(&mut rows.iter().map(|r| r.frac_within_n8))
            )
        }
        Experiment::GreedyBaseline => {
            let rows = greedy_baseline(p)?;
            write_csv(&rows, out)?;
            format!(
                "greedy-baseline n={} trials={} mean_size={:.2}",
                p.n,
                rows.len(),
                mean(&mut rows.iter().map(|r| r.greedy_size as f64))
            )
        }
        Experiment::Peel => {
            let rows = peel(p)?;
            write_csv(&rows, out)?;
            format!(
                "peel n={} trials={} mean_layers={:.2}",
                p.n,
                rows.len(),
                mean(&mut rows.iter().map(|r| r.layers as f64))
            )
        }
        Experiment::Survival => {
            let rows = survival(p)?;
            write_csv(&rows, out)?;
            let last = rows.last().map_or(0.0, |r| r.frequency);
            format!(
                "survival n={} trials={} frequency={last:.4}",
                p.n,
                rows.len()
            )
        }
    })
}
