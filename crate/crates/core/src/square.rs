//! Equi-n-squares, cells and transversals.
//!
//! An equi-n-square is an `n x n` grid over the symbols `0..n` in which every
//! symbol occurs exactly `n` times. A transversal is a set of cells with
//! pairwise distinct rows, columns and symbols.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A `(row, col)` position, 0-indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SquareError {
    #[error("square order must be positive")]
    ZeroOrder,
    #[error("DimensionMismatch: expected {expected}x{expected} grid, {detail}")]
    DimensionMismatch { expected: usize, detail: String },
    #[error("SymbolOutOfRange({value}, {cell})")]
    SymbolOutOfRange { value: usize, cell: Cell },
    #[error("CountViolation({symbol}, {count})")]
    CountViolation { symbol: usize, count: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransversalError {
    #[error("CellOutOfRange({0})")]
    CellOutOfRange(Cell),
    #[error("RowClash({0}, {1})")]
    RowClash(Cell, Cell),
    #[error("ColClash({0}, {1})")]
    ColClash(Cell, Cell),
    #[error("SymbolClash({0}, {1})")]
    SymbolClash(Cell, Cell),
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("ParseError(line {line}, \"{reason}\")")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Invalid(#[from] SquareError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl FormatError {
    fn parse(line: usize, reason: impl Into<String>) -> Self {
        FormatError::Parse {
            line,
            reason: reason.into(),
        }
    }
}

/// An `n x n` grid in which each of the `n` symbols appears exactly `n` times.
///
/// Only obtainable through [`EquiNSquare::new`] (or the generators built on
/// it), so every value of this type satisfies the count invariant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EquiNSquare {
    n: usize,
    grid: Vec<usize>,
}

impl EquiNSquare {
    /// Validates a grid given as rows.
    pub fn new(n: usize, rows: Vec<Vec<usize>>) -> Result<Self, SquareError> {
        if n == 0 {
            return Err(SquareError::ZeroOrder);
        }
        if rows.len() != n {
            return Err(SquareError::DimensionMismatch {
                expected: n,
                detail: format!("found {} rows", rows.len()),
            });
        }
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(SquareError::DimensionMismatch {
                expected: n,
                detail: format!("row {i} has {} entries", row.len()),
            });
        }
        Self::from_flat(n, rows.into_iter().flatten().collect())
    }

    /// Validates a row-major grid of length `n * n`.
    pub fn from_flat(n: usize, grid: Vec<usize>) -> Result<Self, SquareError> {
        if n == 0 {
            return Err(SquareError::ZeroOrder);
        }
        if grid.len() != n * n {
            return Err(SquareError::DimensionMismatch {
                expected: n,
                detail: format!("found {} entries", grid.len()),
            });
        }
        let mut counts = vec![0usize; n];
        for (idx, &value) in grid.iter().enumerate() {
            if value >= n {
                return Err(SquareError::SymbolOutOfRange {
                    value,
                    cell: Cell::new(idx / n, idx % n),
                });
            }
            counts[value] += 1;
        }
        if let Some((symbol, &count)) = counts.iter().enumerate().find(|(_, &c)| c != n) {
            return Err(SquareError::CountViolation { symbol, count });
        }
        Ok(EquiNSquare { n, grid })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Symbol at `(row, col)`. Panics when out of range.
    pub fn get(&self, row: usize, col: usize) -> usize {
        assert!(
            row < self.n && col < self.n,
            "cell ({row},{col}) out of range"
        );
        self.grid[row * self.n + col]
    }

    pub fn symbol(&self, cell: Cell) -> usize {
        self.get(cell.row, cell.col)
    }

    /// Row-major symbols.
    pub fn as_flat(&self) -> &[usize] {
        &self.grid
    }

    pub fn row(&self, row: usize) -> &[usize] {
        &self.grid[row * self.n..(row + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> {
        self.grid.chunks(self.n)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let n = self.n;
        (0..n * n).map(move |i| Cell::new(i / n, i % n))
    }

    /// Per-symbol occurrence counts; always `n` for each symbol.
    pub fn symbol_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n];
        for &s in &self.grid {
            counts[s] += 1;
        }
        counts
    }

    /// True when every row and column is a permutation of the symbols.
    pub fn is_latin(&self) -> bool {
        let n = self.n;
        let mut seen = vec![false; n];
        for r in 0..n {
            seen.iter_mut().for_each(|s| *s = false);
            for c in 0..n {
                let s = self.get(r, c);
                if std::mem::replace(&mut seen[s], true) {
                    return false;
                }
            }
        }
        for c in 0..n {
            seen.iter_mut().for_each(|s| *s = false);
            for r in 0..n {
                let s = self.get(r, c);
                if std::mem::replace(&mut seen[s], true) {
                    return false;
                }
            }
        }
        true
    }

    /// Applies row, column and symbol permutations: the entry at `(r, c)`
    /// moves to `(rows[r], cols[c])` and its symbol `s` becomes `symbols[s]`.
    pub fn permuted(&self, rows: &[usize], cols: &[usize], symbols: &[usize]) -> EquiNSquare {
        let n = self.n;
        assert!(rows.len() == n && cols.len() == n && symbols.len() == n);
        let mut grid = vec![0; n * n];
        for r in 0..n {
            for c in 0..n {
                grid[rows[r] * n + cols[c]] = symbols[self.get(r, c)];
            }
        }
        EquiNSquare::from_flat(n, grid).expect("permutations preserve symbol counts")
    }

    /// Serializes in the text format: `n`, then `n` lines of space-separated symbols.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|s| s.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, FormatError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines
            .next()
            .ok_or_else(|| FormatError::parse(1, "missing order line"))?;
        let n: usize = header
            .trim()
            .parse()
            .map_err(|_| FormatError::parse(1, format!("invalid order {:?}", header.trim())))?;
        if n == 0 {
            return Err(SquareError::ZeroOrder.into());
        }
        let mut grid = Vec::with_capacity(n * n);
        for expected_line in 2..n + 2 {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| FormatError::parse(expected_line, "unexpected end of file"))?;
            let entries: Vec<&str> = line.split_whitespace().collect();
            if entries.len() != n {
                return Err(FormatError::parse(line_no, format!("expected {n} entries")));
            }
            for entry in entries {
                let value: usize = entry.parse().map_err(|_| {
                    FormatError::parse(line_no, format!("invalid symbol {entry:?}"))
                })?;
                grid.push(value);
            }
        }
        if let Some((line_no, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(FormatError::parse(line_no, "trailing content"));
        }
        Ok(EquiNSquare::from_flat(n, grid)?)
    }
}

/// A validated transversal of some square. Cells are kept sorted by row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Transversal {
    cells: Vec<Cell>,
}

impl Transversal {
    pub fn empty() -> Self {
        Transversal { cells: Vec::new() }
    }

    /// Validates `cells` against `square`, reporting the first clashing pair.
    pub fn new(square: &EquiNSquare, cells: &[Cell]) -> Result<Self, TransversalError> {
        let n = square.n();
        let mut rows: HashMap<usize, Cell> = HashMap::new();
        let mut cols: HashMap<usize, Cell> = HashMap::new();
        let mut symbols: HashMap<usize, Cell> = HashMap::new();
        for &cell in cells {
            if cell.row >= n || cell.col >= n {
                return Err(TransversalError::CellOutOfRange(cell));
            }
            if let Some(&prev) = rows.get(&cell.row) {
                return Err(TransversalError::RowClash(prev, cell));
            }
            if let Some(&prev) = cols.get(&cell.col) {
                return Err(TransversalError::ColClash(prev, cell));
            }
            let s = square.symbol(cell);
            if let Some(&prev) = symbols.get(&s) {
                return Err(TransversalError::SymbolClash(prev, cell));
            }
            rows.insert(cell.row, cell);
            cols.insert(cell.col, cell);
            symbols.insert(s, cell);
        }
        let mut cells = cells.to_vec();
        cells.sort_unstable();
        Ok(Transversal { cells })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn symbols<'a>(&'a self, square: &'a EquiNSquare) -> impl Iterator<Item = usize> + 'a {
        self.cells.iter().map(move |&c| square.symbol(c))
    }

    /// One `row col` line per cell.
    pub fn to_text(&self) -> String {
        self.cells
            .iter()
            .map(|c| format!("{} {}\n", c.row, c.col))
            .collect()
    }
}

pub fn validate_square(n: usize, rows: Vec<Vec<usize>>) -> Result<EquiNSquare, SquareError> {
    EquiNSquare::new(n, rows)
}

pub fn validate_transversal(
    square: &EquiNSquare,
    cells: &[Cell],
) -> Result<Transversal, TransversalError> {
    Transversal::new(square, cells)
}

pub fn read_square(path: impl AsRef<Path>) -> Result<EquiNSquare, FormatError> {
    EquiNSquare::from_text(&fs::read_to_string(path)?)
}

pub fn write_square(square: &EquiNSquare, path: impl AsRef<Path>) -> Result<(), FormatError> {
    fs::write(path, square.to_text())?;
    Ok(())
}

/// Parses `row col` lines. Cells are not validated against any square.
pub fn parse_cells(text: &str) -> Result<Vec<Cell>, FormatError> {
    let mut cells = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(FormatError::parse(line_no, "expected 2 entries"));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| FormatError::parse(line_no, format!("invalid index {s:?}")))
        };
        cells.push(Cell::new(parse(parts[0])?, parse(parts[1])?));
    }
    Ok(cells)
}

pub fn read_cells(path: impl AsRef<Path>) -> Result<Vec<Cell>, FormatError> {
    parse_cells(&fs::read_to_string(path)?)
}

pub fn write_transversal(t: &Transversal, path: impl AsRef<Path>) -> Result<(), FormatError> {
    fs::write(path, t.to_text())?;
    Ok(())
}
