//! Random matchings with bounded dependence.
//!
//! Given two disjoint matchings, their union splits into alternating paths
//! and even cycles. After deleting a few edges so that no piece is longer
//! than a cap `s`, one fair coin per piece decides which of the two
//! alternating classes of that piece is kept. The result is again a matching,
//! every undeleted edge survives with probability exactly 1/2, and a coin can
//! only influence the at most `s` edges of its own piece.
//!
//! [`iterated_halving`] repeats this over `2^l` matchings, pairing them off
//! level by level until one matching remains. [`block_transversal`] uses the
//! final matching to pick one block per column of a block-structured square
//! and reads a transversal off a maximum row-column matching.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bipartite::{
    cap_components, decompose_regular, hopcroft_karp, union_components, BipartiteError,
    BipartiteMultigraph, CapResult, Matching, Source,
};
use crate::constructions::{BlockStructure, ConstructionError};
use crate::square::{Cell, EquiNSquare, Transversal, TransversalError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DependenceError {
    #[error("NotPowerOfTwo({0})")]
    NotPowerOfTwo(usize),
    #[error(transparent)]
    Bipartite(#[from] BipartiteError),
    #[error(transparent)]
    Blocks(#[from] ConstructionError),
    #[error("transversal check failed: {0}")]
    Transversal(#[from] TransversalError),
    #[error("BadLevel({0})")]
    BadLevel(String),
    #[error("InvalidParam: {0}")]
    InvalidParam(String),
}

type Result<T> = std::result::Result<T, DependenceError>;

/// One application of the halving step to a pair of matchings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalvingStep {
    /// Edges deleted to cap the pieces, and the pieces themselves.
    pub cap: CapResult,
    /// One coin per piece of `cap.components`, same order. `1` keeps the
    /// second matching's edges of that piece, `0` the first's.
    pub flips: Vec<u8>,
    pub output: Matching,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalvingLevel {
    /// Matchings entering this level; pairs are `(2i, 2i+1)`.
    pub inputs: Vec<Matching>,
    pub steps: Vec<HalvingStep>,
}

impl HalvingLevel {
    pub fn outputs(&self) -> impl Iterator<Item = &Matching> {
        self.steps.iter().map(|s| &s.output)
    }
}

/// Full record of an iterated halving run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalvingTrace {
    pub format: u32,
    pub rng_seed: Option<u64>,
    pub cap: usize,
    pub inputs: Vec<Matching>,
    pub levels: Vec<HalvingLevel>,
    pub result: Matching,
}

impl HalvingTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }

    /// Number of edges deleted at each level.
    pub fn deleted_per_level(&self) -> Vec<usize> {
        self.levels
            .iter()
            .map(|l| l.steps.iter().map(|s| s.cap.deleted.len()).sum())
            .collect()
    }

    /// True when `label` was never deleted by a cap at any level.
    pub fn never_deleted(&self, label: usize) -> bool {
        self.levels
            .iter()
            .flat_map(|l| &l.steps)
            .all(|s| !s.cap.deleted.contains(&label))
    }
}

/// Halves `a ∪ b` with pieces of at most `cap` edges.
pub fn alternate_halve<R: Rng + ?Sized>(
    g: &BipartiteMultigraph,
    a: &Matching,
    b: &Matching,
    cap: usize,
    rng: &mut R,
) -> Result<(Matching, HalvingStep)> {
    let decomp = union_components(g, a, b)?;
    let capped = cap_components(&decomp, cap)?;
    let mut flips = Vec::with_capacity(capped.components.components.len());
    let mut kept = std::collections::BTreeSet::new();
    for piece in &capped.components.components {
        let flip: bool = rng.gen();
        flips.push(u8::from(flip));
        let side = if flip { Source::B } else { Source::A };
        kept.extend(piece.edges_from(side));
    }
    let output = Matching::from_set(kept);
    debug_assert!(Matching::new(g, output.labels()).is_ok());
    Ok((
        output.clone(),
        HalvingStep {
            cap: capped,
            flips,
            output,
        },
    ))
}

/// Reduces `2^l` disjoint matchings to one by `l` rounds of halving.
pub fn iterated_halving<R: Rng + ?Sized>(
    g: &BipartiteMultigraph,
    matchings: &[Matching],
    cap: usize,
    rng: &mut R,
) -> Result<(Matching, HalvingTrace)> {
    if matchings.is_empty() || !matchings.len().is_power_of_two() {
        return Err(DependenceError::NotPowerOfTwo(matchings.len()));
    }
    if cap == 0 {
        return Err(DependenceError::InvalidParam(
            "cap must be at least 1".into(),
        ));
    }
    for m in matchings {
        Matching::new(g, m.labels())?;
    }
    let mut current: Vec<Matching> = matchings.to_vec();
    let mut levels = Vec::new();
    while current.len() > 1 {
        let mut steps = Vec::with_capacity(current.len() / 2);
        for pair in current.chunks(2) {
            let (_, step) = alternate_halve(g, &pair[0], &pair[1], cap, rng)?;
            steps.push(step);
        }
        let next: Vec<Matching> = steps.iter().map(|s| s.output.clone()).collect();
        levels.push(HalvingLevel {
            inputs: std::mem::replace(&mut current, next),
            steps,
        });
    }
    let result = current.pop().expect("one matching remains");
    Ok((
        result.clone(),
        HalvingTrace {
            format: crate::constructions::SIDECAR_FORMAT,
            rng_seed: None,
            cap,
            inputs: matchings.to_vec(),
            levels,
            result,
        },
    ))
}

/// `max(4, floor(n^(1/3) / ln(n)^2))`.
pub fn default_cap(n: usize) -> usize {
    let n = n as f64;
    let raw = n.cbrt() / n.ln().powi(2);
    if raw.is_finite() {
        (raw.floor() as usize).max(4)
    } else {
        4
    }
}

/// Per-row count of blocks, among a chosen set, that contain a cell of the row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowLoads {
    pub loads: Vec<usize>,
}

impl RowLoads {
    pub fn total(&self) -> usize {
        self.loads.iter().sum()
    }

    /// `row_index,load` CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row_index,load\n");
        for (i, l) in self.loads.iter().enumerate() {
            out.push_str(&format!("{i},{l}\n"));
        }
        out
    }
}

/// Which matching of a trace to measure row loads on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSelector {
    /// Initial matching `i`.
    Input(usize),
    /// All initial matchings together.
    AllInputs,
    /// Output `i` of halving level `h` (1-based).
    Level {
        h: usize,
        i: usize,
    },
    Final,
}

pub fn row_loads(
    trace: &HalvingTrace,
    blocks: &BlockStructure,
    selector: LevelSelector,
) -> Result<RowLoads> {
    let chosen: Vec<&Matching> = match selector {
        LevelSelector::Input(i) => vec![trace
            .inputs
            .get(i)
            .ok_or_else(|| DependenceError::BadLevel(format!("no input matching {i}")))?],
        LevelSelector::AllInputs => trace.inputs.iter().collect(),
        LevelSelector::Level { h, i } => {
            let level = h
                .checked_sub(1)
                .and_then(|l| trace.levels.get(l))
                .ok_or_else(|| DependenceError::BadLevel(format!("no level {h}")))?;
            vec![
                &level
                    .steps
                    .get(i)
                    .ok_or_else(|| {
                        DependenceError::BadLevel(format!("level {h} has no output {i}"))
                    })?
                    .output,
            ]
        }
        LevelSelector::Final => vec![&trace.result],
    };
    let mut loads = vec![0; blocks.n];
    for m in chosen {
        for label in m.labels() {
            let block = blocks.blocks.get(label).ok_or_else(|| {
                DependenceError::BadLevel(format!("block {label} not in structure"))
            })?;
            for &row in &block.rows {
                loads[row] += 1;
            }
        }
    }
    Ok(RowLoads { loads })
}

/// Columns-by-symbols multigraph with one edge per block, labelled by block id.
pub fn block_multigraph(blocks: &BlockStructure) -> BipartiteMultigraph {
    let mut g = BipartiteMultigraph::new(blocks.n, blocks.n);
    for (id, b) in blocks.blocks.iter().enumerate() {
        g.add_edge(b.col, b.symbol, id).expect("block in range");
    }
    g
}

/// Everything produced by one [`block_transversal`] run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockRun {
    pub transversal: Transversal,
    pub trace: HalvingTrace,
    pub loads: RowLoads,
}

/// Finds a transversal of a block-structured square.
///
/// The `k`-regular column-symbol multigraph is split into `k` perfect
/// matchings, halved down to one matching `M`, and each column matched in `M`
/// contributes the `m` cells of its selected block to a row-column graph. A
/// maximum matching there is a transversal: distinct columns carry distinct
/// symbols because `M` is a matching.
pub fn block_transversal<R: Rng + ?Sized>(
    square: &EquiNSquare,
    blocks: &BlockStructure,
    cap: usize,
    rng: &mut R,
) -> Result<BlockRun> {
    blocks.validate(square)?;
    let k = blocks.k();
    if !k.is_power_of_two() {
        return Err(DependenceError::NotPowerOfTwo(k));
    }
    let g = block_multigraph(blocks);
    let initial = decompose_regular(&g, k)?;
    let (selected, trace) = iterated_halving(&g, &initial, cap, rng)?;

    let n = square.n();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for label in selected.labels() {
        let block = &blocks.blocks[label];
        for &row in &block.rows {
            adj[row].push(block.col);
        }
    }
    let mates = hopcroft_karp(n, &adj);
    let cells: Vec<Cell> = mates
        .iter()
        .enumerate()
        .filter_map(|(row, m)| m.map(|col| Cell::new(row, col)))
        .collect();
    let transversal = Transversal::new(square, &cells)?;
    let loads = row_loads(&trace, blocks, LevelSelector::Final)?;
    Ok(BlockRun {
        transversal,
        trace,
        loads,
    })
}

/// `min(1, 2 exp(-t^2 / sum c_i^2))`: the two-sided bounded-differences tail
/// bound for a function of independent inputs where input `i` moves the
/// value by at most `c_i`.
pub fn mcdiarmid_bound(c: &[f64], t: f64) -> Result<f64> {
    if c.iter().any(|&ci| ci.is_nan() || ci < 0.0) {
        return Err(DependenceError::InvalidParam(
            "c_i must be non-negative".into(),
        ));
    }
    if t.is_nan() || t <= 0.0 {
        return Err(DependenceError::InvalidParam("t must be positive".into()));
    }
    let sum_sq: f64 = c.iter().map(|ci| ci * ci).sum();
    if sum_sq <= 0.0 {
        return Err(DependenceError::InvalidParam(
            "sum of c_i^2 must be positive".into(),
        ));
    }
    Ok((2.0 * (-t * t / sum_sq).exp()).min(1.0))
}

/// For each row, how much each final-level coin can move that row's final
/// load: the number of edges in the coin's piece whose block meets the row.
pub fn final_level_sensitivity(trace: &HalvingTrace, blocks: &BlockStructure) -> Vec<Vec<f64>> {
    let mut per_row: Vec<Vec<f64>> = vec![Vec::new(); blocks.n];
    let Some(last) = trace.levels.last() else {
        return per_row;
    };
    for step in &last.steps {
        for piece in &step.cap.components.components {
            let mut touched = vec![0usize; blocks.n];
            for &label in &piece.edges {
                for &row in &blocks.blocks[label].rows {
                    touched[row] += 1;
                }
            }
            for (row, &count) in touched.iter().enumerate() {
                if count > 0 {
                    per_row[row].push(count as f64);
                }
            }
        }
    }
    per_row
}
