//! Square generators: the box-pairing construction whose transversals must
//! miss about `sqrt(n / 8)` symbols, uniformly random equi-n-squares,
//! block-structured squares, and cyclic Latin squares.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SeedSplitter;
use crate::square::{Cell, EquiNSquare, Transversal};

pub const SIDECAR_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("TooSmall({0}): the box construction needs n >= 8")]
    TooSmall(usize),
    #[error("NotDivisible({0}, {1})")]
    NotDivisible(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error(
        "CertificateViolation({0}): no colour of families {0} is missing from the transversal"
    )]
    CertificateViolation(usize),
    #[error("pairing does not describe this square: {0}")]
    PairingMismatch(String),
    #[error("block structure does not describe this square: {0}")]
    BlockMismatch(String),
}

type Result<T> = std::result::Result<T, ConstructionError>;

/// Box index `(i, j)`: box row `i < 2a`, box column `j < 2b`.
pub type BoxIndex = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxPair {
    pub first: BoxIndex,
    pub second: BoxIndex,
    pub colour: usize,
}

/// How the box construction coloured its square.
///
/// Boxes are `b` rows tall and `a` columns wide; box `(i, j)` covers rows
/// `i*b .. (i+1)*b` and columns `j*a .. (j+1)*a`. The `2a x 2b` boxes tile
/// the top-left `2ab x 2ab` subsquare; everything else is `leftover_fill`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxPairing {
    pub format: u32,
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub a: usize,
    pub b: usize,
    pub pairs: Vec<BoxPair>,
    pub leftover_fill: Vec<(Cell, usize)>,
}

impl BoxPairing {
    /// Side of the boxed subsquare, `2ab`.
    pub fn boxed_side(&self) -> usize {
        2 * self.a * self.b
    }

    pub fn box_of(&self, cell: Cell) -> Option<BoxIndex> {
        let side = self.boxed_side();
        (cell.row < side && cell.col < side).then(|| (cell.row / self.b, cell.col / self.a))
    }

    pub fn box_colour(&self, idx: BoxIndex) -> Option<usize> {
        self.pairs
            .iter()
            .find(|p| p.first == idx || p.second == idx)
            .map(|p| p.colour)
    }

    /// Colour of every box, indexed `i * 2b + j`.
    fn colour_table(&self) -> Vec<Option<usize>> {
        let width = 2 * self.b;
        let mut table = vec![None; 2 * self.a * width];
        for p in &self.pairs {
            for (i, j) in [p.first, p.second] {
                if i < 2 * self.a && j < width {
                    table[i * width + j] = Some(p.colour);
                }
            }
        }
        table
    }

    /// Boxes of family `k < 2b`: box column `k` together with box row `k`.
    pub fn family(&self, k: usize) -> Vec<BoxIndex> {
        let mut boxes: Vec<BoxIndex> = (0..2 * self.a).map(|i| (i, k)).collect();
        boxes.extend((0..2 * self.b).filter(|&j| j != k).map(|j| (k, j)));
        boxes
    }

    /// The upper bound on any transversal implied by the missing colours.
    pub fn implied_bound(&self) -> usize {
        self.n - self.b.div_ceil(2) + 2 * (self.n - self.boxed_side())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pairing serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// `m = ceil(sqrt(n/2))`, `r = ceil(sqrt(m^2 - n/2))`, in exact integers.
pub fn box_parameters(n: usize) -> (usize, usize) {
    let m = (0..).find(|&m: &usize| 2 * m * m >= n).expect("unbounded");
    let gap = 2 * m * m - n;
    let r = (0..)
        .find(|&r: &usize| 2 * r * r >= gap)
        .expect("unbounded");
    (m, r)
}

/// Builds the box-pairing equi-n-square.
///
/// Pairs, with colours assigned in this order: diagonal boxes `(2k, 2k)` and
/// `(2k+1, 2k+1)` for `k < b`; mirror boxes `(i, j)` and `(j, i)` for
/// `i < j < 2b`; stacked boxes `(2s, t)` and `(2s+1, t)` for `b <= s < a`,
/// `t < 2b`. That is `2ab` colours, each on `2ab` boxed cells. Cells outside
/// the boxed subsquare are filled row-major from a queue holding each colour
/// as many times as it is still short of `n`.
pub fn counterexample_square(n: usize) -> Result<(EquiNSquare, BoxPairing)> {
    if n < 8 {
        return Err(ConstructionError::TooSmall(n));
    }
    let (m, r) = box_parameters(n);
    let (a, b) = (m + r, m - r);
    let side = 2 * a * b;
    debug_assert!(side <= n);

    let mut pairs = Vec::with_capacity(side);
    for k in 0..b {
        pairs.push(((2 * k, 2 * k), (2 * k + 1, 2 * k + 1)));
    }
    for i in 0..2 * b {
        for j in i + 1..2 * b {
            pairs.push(((i, j), (j, i)));
        }
    }
    for s in b..a {
        for t in 0..2 * b {
            pairs.push(((2 * s, t), (2 * s + 1, t)));
        }
    }
    let pairs: Vec<BoxPair> = pairs
        .into_iter()
        .enumerate()
        .map(|(colour, (first, second))| BoxPair {
            first,
            second,
            colour,
        })
        .collect();
    debug_assert_eq!(pairs.len(), side);

    let mut grid = vec![usize::MAX; n * n];
    let mut box_colour = vec![usize::MAX; (2 * a) * (2 * b)];
    for p in &pairs {
        for (i, j) in [p.first, p.second] {
            box_colour[i * 2 * b + j] = p.colour;
        }
    }
    for row in 0..side {
        for col in 0..side {
            grid[row * n + col] = box_colour[(row / b) * 2 * b + col / a];
        }
    }

    let mut deficits = (0..n).flat_map(|colour| {
        let short = if colour < side { n - side } else { n };
        std::iter::repeat_n(colour, short)
    });
    let mut leftover_fill = Vec::with_capacity(n * n - side * side);
    for row in 0..n {
        for col in 0..n {
            if row < side && col < side {
                continue;
            }
            let colour = deficits.next().expect("deficits cover the leftover cells");
            grid[row * n + col] = colour;
            leftover_fill.push((Cell::new(row, col), colour));
        }
    }
    debug_assert!(deficits.next().is_none());

    let square = EquiNSquare::from_flat(n, grid).expect("construction has exact counts");
    let pairing = BoxPairing {
        format: SIDECAR_FORMAT,
        n,
        m,
        r,
        a,
        b,
        pairs,
        leftover_fill,
    };
    Ok((square, pairing))
}

/// Missing-colour audit of one transversal against a box pairing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub transversal_size: usize,
    /// Cells of the transversal inside the boxed subsquare.
    pub boxed_size: usize,
    /// For each `k < b`, the colours of families `2k` and `2k+1` that the
    /// boxed part of the transversal does not use.
    pub missing: Vec<Vec<usize>>,
    /// Distinct colours over all of `missing`.
    pub distinct_missing: usize,
    /// `n - ceil(b/2) + 2(n - 2ab)`.
    pub implied_bound: usize,
}

/// Checks that, for every `k < b`, some colour used on families `2k` and
/// `2k+1` is absent from the part of `t` inside the boxed subsquare. This is
/// a theorem about the construction, so a violation means a bug somewhere.
pub fn missing_colour_certificate(
    square: &EquiNSquare,
    pairing: &BoxPairing,
    t: &Transversal,
) -> Result<CertificateReport> {
    let table = check_pairing(square, pairing)?;
    let width = 2 * pairing.b;
    let used: BTreeSet<usize> = t
        .cells()
        .iter()
        .filter(|&&c| pairing.box_of(c).is_some())
        .map(|&c| square.symbol(c))
        .collect();
    let boxed_size = used.len();

    let mut missing = Vec::with_capacity(pairing.b);
    for k in 0..pairing.b {
        let colours: BTreeSet<usize> = pairing
            .family(2 * k)
            .into_iter()
            .chain(pairing.family(2 * k + 1))
            .filter_map(|(i, j)| table[i * width + j])
            .collect();
        let absent: Vec<usize> = colours.difference(&used).copied().collect();
        if absent.is_empty() {
            return Err(ConstructionError::CertificateViolation(k));
        }
        missing.push(absent);
    }
    let distinct_missing = missing.iter().flatten().collect::<BTreeSet<_>>().len();
    Ok(CertificateReport {
        transversal_size: t.len(),
        boxed_size,
        missing,
        distinct_missing,
        implied_bound: pairing.implied_bound(),
    })
}

fn check_pairing(square: &EquiNSquare, pairing: &BoxPairing) -> Result<Vec<Option<usize>>> {
    if pairing.n != square.n() {
        return Err(ConstructionError::PairingMismatch(format!(
            "pairing is for n = {}, square has n = {}",
            pairing.n,
            square.n()
        )));
    }
    let table = pairing.colour_table();
    if pairing.b == 0 {
        return Ok(table);
    }
    let side = pairing.boxed_side();
    if side > square.n() {
        return Err(ConstructionError::PairingMismatch(format!(
            "boxed side {side} exceeds n = {}",
            square.n()
        )));
    }
    for row in 0..side {
        for col in 0..side {
            let cell = Cell::new(row, col);
            let (i, j) = pairing.box_of(cell).expect("inside boxed subsquare");
            if table[i * 2 * pairing.b + j] != Some(square.symbol(cell)) {
                return Err(ConstructionError::PairingMismatch(format!(
                    "cell {cell} does not carry the colour of box {:?}",
                    (i, j)
                )));
            }
        }
    }
    Ok(table)
}

/// Uniformly shuffled multiset with each symbol `n` times, laid out row-major.
pub fn random_equi_square(n: usize, seed: u64) -> Result<EquiNSquare> {
    if n == 0 {
        return Err(ConstructionError::InvalidParam("n must be positive".into()));
    }
    let mut rng = SeedSplitter::new(seed).stream("random_equi_square");
    let mut grid: Vec<usize> = (0..n).flat_map(|s| std::iter::repeat_n(s, n)).collect();
    grid.shuffle(&mut rng);
    Ok(EquiNSquare::from_flat(n, grid).expect("multiset has exact counts"))
}

/// `m` cells of one column, all bearing one symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub col: usize,
    pub symbol: usize,
    pub rows: Vec<usize>,
}

/// A partition of all cells into single-column, single-symbol blocks of
/// size `m`. Block ids are positions in `blocks`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStructure {
    pub format: u32,
    pub n: usize,
    pub m: usize,
    pub blocks: Vec<Block>,
}

impl BlockStructure {
    /// Blocks per column (and per symbol), `n / m`.
    pub fn k(&self) -> usize {
        self.n / self.m
    }

    /// Checks the partition against `square`.
    pub fn validate(&self, square: &EquiNSquare) -> Result<()> {
        let n = square.n();
        let bad = |msg: String| Err(ConstructionError::BlockMismatch(msg));
        if self.n != n || self.m == 0 || !n.is_multiple_of(self.m) {
            return bad(format!(
                "n = {}, m = {} for a square of order {n}",
                self.n, self.m
            ));
        }
        let mut owner = vec![usize::MAX; n * n];
        for (id, block) in self.blocks.iter().enumerate() {
            if block.rows.len() != self.m {
                return bad(format!("block {id} has {} cells", block.rows.len()));
            }
            if block.col >= n {
                return bad(format!("block {id} column {} out of range", block.col));
            }
            for &row in &block.rows {
                if row >= n {
                    return bad(format!("block {id} row {row} out of range"));
                }
                let slot = &mut owner[row * n + block.col];
                if *slot != usize::MAX {
                    return bad(format!(
                        "cell ({row},{}) in blocks {} and {id}",
                        block.col, *slot
                    ));
                }
                *slot = id;
                if square.get(row, block.col) != block.symbol {
                    return bad(format!(
                        "cell ({row},{}) is not symbol {}",
                        block.col, block.symbol
                    ));
                }
            }
        }
        if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
            return bad(format!("cell ({},{}) is in no block", i / n, i % n));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("blocks serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// A square tiled by blocks of `m` cells sharing a column and a symbol.
///
/// Draws `k = n/m` uniform random permutations from columns to symbols; each
/// `(column, symbol)` pair they produce becomes one block, so the
/// column-symbol multigraph is `k`-regular. Each column's rows are then
/// shuffled and dealt to its `k` blocks, `m` rows apiece. Block
/// `t * n + col` comes from permutation `t`.
pub fn block_structured_square(
    n: usize,
    m: usize,
    seed: u64,
) -> Result<(EquiNSquare, BlockStructure)> {
    if n == 0 || m == 0 {
        return Err(ConstructionError::InvalidParam(
            "n and m must be positive".into(),
        ));
    }
    if !n.is_multiple_of(m) {
        return Err(ConstructionError::NotDivisible(n, m));
    }
    let k = n / m;
    let splitter = SeedSplitter::new(seed);
    let mut perm_rng = splitter.stream("block_permutations");
    let mut row_rng = splitter.stream("block_rows");

    let mut symbol_of = vec![vec![0usize; n]; k];
    for perm in symbol_of.iter_mut() {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut perm_rng);
        *perm = p;
    }
    let mut blocks: Vec<Block> = (0..k)
        .flat_map(|t| (0..n).map(move |col| (t, col)))
        .map(|(t, col)| Block {
            col,
            symbol: symbol_of[t][col],
            rows: Vec::with_capacity(m),
        })
        .collect();
    let mut grid = vec![0usize; n * n];
    for col in 0..n {
        let mut rows: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut row_rng);
        for (t, chunk) in rows.chunks(m).enumerate() {
            let block = &mut blocks[t * n + col];
            let mut chunk = chunk.to_vec();
            chunk.sort_unstable();
            for &row in &chunk {
                grid[row * n + col] = block.symbol;
            }
            block.rows = chunk;
        }
    }
    let square = EquiNSquare::from_flat(n, grid).expect("k perfect matchings give exact counts");
    let structure = BlockStructure {
        format: SIDECAR_FORMAT,
        n,
        m,
        blocks,
    };
    debug_assert!(structure.validate(&square).is_ok());
    Ok((square, structure))
}

/// `grid[i][j] = (i + j) mod n`.
pub fn cyclic_latin(n: usize) -> Result<EquiNSquare> {
    if n == 0 {
        return Err(ConstructionError::InvalidParam("n must be positive".into()));
    }
    let grid = (0..n * n).map(|idx| (idx / n + idx % n) % n).collect();
    Ok(EquiNSquare::from_flat(n, grid).expect("cyclic square is Latin"))
}
