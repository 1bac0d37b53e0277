//! Structure-agnostic transversal solvers.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::bipartite::hopcroft_karp;
use crate::rng::rng_from_seed;
use crate::square::{Cell, EquiNSquare, Transversal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("TooLarge({0})")]
    TooLarge(usize),
    #[error("InvalidParam: {0}")]
    InvalidParam(String),
}

pub const BRUTE_FORCE_LIMIT: usize = 7;

fn build(square: &EquiNSquare, cells: Vec<Cell>) -> Transversal {
    Transversal::new(square, &cells).expect("solver produced a valid transversal")
}

/// Exhaustive search over every partial row-to-column injection.
pub fn brute_force_max(square: &EquiNSquare) -> Result<(usize, Transversal), SolverError> {
    let n = square.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(SolverError::TooLarge(n));
    }
    fn go(
        sq: &EquiNSquare,
        row: usize,
        cols: &mut [bool],
        syms: &mut [bool],
        cur: &mut Vec<Cell>,
        best: &mut Vec<Cell>,
    ) {
        let n = sq.n();
        if row == n {
            if cur.len() > best.len() {
                *best = cur.clone();
            }
            return;
        }
        go(sq, row + 1, cols, syms, cur, best);
        for col in 0..n {
            let s = sq.get(row, col);
            if cols[col] || syms[s] {
                continue;
            }
            cols[col] = true;
            syms[s] = true;
            cur.push(Cell::new(row, col));
            go(sq, row + 1, cols, syms, cur, best);
            cur.pop();
            cols[col] = false;
            syms[s] = false;
        }
    }
    let mut best = Vec::new();
    go(
        square,
        0,
        &mut vec![false; n],
        &mut vec![false; n],
        &mut Vec::new(),
        &mut best,
    );
    Ok((best.len(), build(square, best)))
}

struct Search<'a> {
    sq: &'a EquiNSquare,
    /// Rows, columns and symbols already used or given up.
    row_done: Vec<bool>,
    col_done: Vec<bool>,
    sym_done: Vec<bool>,
    cur: Vec<Cell>,
    best: Vec<Cell>,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

/// A row, column or symbol to branch on.
#[derive(Clone, Copy)]
enum Item {
    Row(usize),
    Col(usize),
    Sym(usize),
}

impl Search<'_> {
    fn live(&self, r: usize, c: usize) -> bool {
        !self.row_done[r] && !self.col_done[c] && !self.sym_done[self.sq.get(r, c)]
    }

    /// Minimum of the open counts and three bipartite relaxations over the
    /// live cells: rows to columns, rows to symbols, columns to symbols.
    /// Stops early once the bound falls below `need`.
    fn upper_bound(&self, live: &[Cell], need: usize) -> usize {
        let n = self.sq.n();
        let open = |v: &[bool]| v.iter().filter(|d| !**d).count();
        let trivial = open(&self.row_done)
            .min(open(&self.col_done))
            .min(open(&self.sym_done));
        let mut rc: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut rs: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut cs: Vec<Vec<usize>> = vec![Vec::new(); n];
        for c in live {
            let s = self.sq.symbol(*c);
            rc[c.row].push(c.col);
            rs[c.row].push(s);
            cs[c.col].push(s);
        }
        let size = |mates: Vec<Option<usize>>| mates.iter().filter(|m| m.is_some()).count();
        if trivial < need {
            return trivial;
        }
        let mut bound = trivial.min(size(hopcroft_karp(n, &rc)));
        for adj in [&mut rs, &mut cs] {
            if bound < need {
                break;
            }
            for list in adj.iter_mut() {
                list.sort_unstable();
                list.dedup();
            }
            bound = bound.min(size(hopcroft_karp(n, adj)));
        }
        bound
    }

    fn take(&mut self, c: Cell, on: bool) {
        self.row_done[c.row] = on;
        self.col_done[c.col] = on;
        self.sym_done[self.sq.symbol(c)] = on;
    }

    fn set(&mut self, item: Item, on: bool) {
        match item {
            Item::Row(i) => self.row_done[i] = on,
            Item::Col(i) => self.col_done[i] = on,
            Item::Sym(i) => self.sym_done[i] = on,
        }
    }

    fn run(&mut self) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        if self.cur.len() > self.best.len() {
            self.best = self.cur.clone();
        }
        let n = self.sq.n();
        let live: Vec<Cell> = (0..n)
            .flat_map(|r| (0..n).map(move |c| Cell::new(r, c)))
            .filter(|c| self.live(c.row, c.col))
            .collect();
        if live.is_empty()
            || self.cur.len() + self.upper_bound(&live, self.best.len() + 1 - self.cur.len())
                <= self.best.len()
        {
            return;
        }
        // Branch on the open item with the fewest live cells.
        let mut counts = [vec![0usize; n], vec![0usize; n], vec![0usize; n]];
        for c in &live {
            counts[0][c.row] += 1;
            counts[1][c.col] += 1;
            counts[2][self.sq.symbol(*c)] += 1;
        }
        let done = [&self.row_done, &self.col_done, &self.sym_done];
        let (kind, index) = (0..3)
            .flat_map(|k| (0..n).map(move |i| (k, i)))
            .filter(|&(k, i)| !done[k][i])
            .min_by_key(|&(k, i)| counts[k][i])
            .expect("an open item exists while cells are live");
        let item = match kind {
            0 => Item::Row(index),
            1 => Item::Col(index),
            _ => Item::Sym(index),
        };
        let options: Vec<Cell> = live
            .into_iter()
            .filter(|c| match item {
                Item::Row(i) => c.row == i,
                Item::Col(i) => c.col == i,
                Item::Sym(i) => self.sq.symbol(*c) == i,
            })
            .collect();
        for c in options {
            self.take(c, true);
            self.cur.push(c);
            self.run();
            self.cur.pop();
            self.take(c, false);
            if self.aborted || self.best.len() == n {
                return;
            }
        }
        self.set(item, true);
        self.run();
        self.set(item, false);
    }
}

/// Branch and bound. The flag is true when the search finished within
/// `node_budget` nodes, in which case the result is a maximum transversal.
pub fn exact_max(square: &EquiNSquare, node_budget: u64) -> (Transversal, bool) {
    let n = square.n();
    let mut rng = rng_from_seed(0);
    let start = random_greedy(square, &mut rng);
    let start = local_search(square, &start, &mut rng, 20 * n * n);
    let mut search = Search {
        sq: square,
        row_done: vec![false; n],
        col_done: vec![false; n],
        sym_done: vec![false; n],
        cur: Vec::new(),
        best: start.cells().to_vec(),
        nodes: 0,
        budget: node_budget,
        aborted: false,
    };
    search.run();
    let optimal = !search.aborted;
    let best = std::mem::take(&mut search.best);
    (build(square, best), optimal)
}

/// Greedy pass over cells in a uniformly random order.
pub fn random_greedy<R: Rng + ?Sized>(square: &EquiNSquare, rng: &mut R) -> Transversal {
    let allowed = vec![true; square.n() * square.n()];
    build(square, greedy_within(square, &allowed, rng))
}

fn greedy_within<R: Rng + ?Sized>(sq: &EquiNSquare, allowed: &[bool], rng: &mut R) -> Vec<Cell> {
    let n = sq.n();
    let mut order: Vec<usize> = (0..n * n).filter(|&i| allowed[i]).collect();
    order.shuffle(rng);
    let mut state = State::new(n);
    for idx in order {
        let cell = Cell::new(idx / n, idx % n);
        if state.free(sq, cell) {
            state.insert(sq, cell);
        }
    }
    state.cells()
}

/// Occupancy of rows, columns and symbols, each mapped to the owning row.
struct State {
    row_col: Vec<Option<usize>>,
    col_row: Vec<Option<usize>>,
    sym_row: Vec<Option<usize>>,
    size: usize,
}

impl State {
    fn new(n: usize) -> Self {
        State {
            row_col: vec![None; n],
            col_row: vec![None; n],
            sym_row: vec![None; n],
            size: 0,
        }
    }

    fn free(&self, sq: &EquiNSquare, c: Cell) -> bool {
        self.row_col[c.row].is_none()
            && self.col_row[c.col].is_none()
            && self.sym_row[sq.get(c.row, c.col)].is_none()
    }

    fn insert(&mut self, sq: &EquiNSquare, c: Cell) {
        self.row_col[c.row] = Some(c.col);
        self.col_row[c.col] = Some(c.row);
        self.sym_row[sq.get(c.row, c.col)] = Some(c.row);
        self.size += 1;
    }

    fn remove(&mut self, sq: &EquiNSquare, c: Cell) {
        self.row_col[c.row] = None;
        self.col_row[c.col] = None;
        self.sym_row[sq.get(c.row, c.col)] = None;
        self.size -= 1;
    }

    fn cells(&self) -> Vec<Cell> {
        self.row_col
            .iter()
            .enumerate()
            .filter_map(|(r, c)| c.map(|c| Cell::new(r, c)))
            .collect()
    }
}

/// Improves `start` by 1-out-2-in swaps, accepting size-neutral swaps to
/// move along plateaus. Returns the largest transversal seen.
pub fn local_search<R: Rng + ?Sized>(
    square: &EquiNSquare,
    start: &Transversal,
    rng: &mut R,
    iterations: usize,
) -> Transversal {
    let allowed = vec![true; square.n() * square.n()];
    build(
        square,
        local_search_within(square, &allowed, start.cells(), rng, iterations),
    )
}

fn local_search_within<R: Rng + ?Sized>(
    sq: &EquiNSquare,
    allowed: &[bool],
    start: &[Cell],
    rng: &mut R,
    iterations: usize,
) -> Vec<Cell> {
    let n = sq.n();
    let mut state = State::new(n);
    for &c in start {
        state.insert(sq, c);
    }
    let ok = |c: Cell| allowed[c.row * n + c.col];

    // Admissible cells within the free rows and columns.
    let admissible = |state: &State| -> Vec<Cell> {
        let rows: Vec<usize> = (0..n).filter(|&r| state.row_col[r].is_none()).collect();
        let cols: Vec<usize> = (0..n).filter(|&c| state.col_row[c].is_none()).collect();
        let mut out = Vec::new();
        for &r in &rows {
            for &c in &cols {
                let cell = Cell::new(r, c);
                if ok(cell) && state.sym_row[sq.get(r, c)].is_none() {
                    out.push(cell);
                }
            }
        }
        out
    };

    // Fill anything directly insertable first.
    let mut free = admissible(&state);
    free.shuffle(rng);
    for c in free {
        if state.free(sq, c) {
            state.insert(sq, c);
        }
    }
    let mut best = state.cells();
    if best.len() == n {
        return best;
    }

    for _ in 0..iterations {
        let current = state.cells();
        if current.is_empty() {
            break;
        }
        let out = current[rng.gen_range(0..current.len())];
        state.remove(sq, out);
        let mut cand = admissible(&state);
        cand.retain(|&c| c != out);
        cand.shuffle(rng);
        let mut added = 0;
        for c in cand {
            if state.free(sq, c) {
                state.insert(sq, c);
                added += 1;
            }
        }
        if added == 0 {
            state.insert(sq, out);
            continue;
        }
        if state.size > best.len() {
            best = state.cells();
            if best.len() == n {
                break;
            }
        }
    }
    best
}

/// Repeatedly extracts cell-disjoint transversals of at least `min_size`
/// cells, using greedy plus local search on the cells not yet taken.
pub fn peel_decomposition<R: Rng + ?Sized>(
    square: &EquiNSquare,
    rng: &mut R,
    min_size: usize,
) -> Result<Vec<Transversal>, SolverError> {
    let n = square.n();
    if min_size > n {
        return Err(SolverError::InvalidParam(format!(
            "min_size {min_size} exceeds n = {n}"
        )));
    }
    const ATTEMPTS: usize = 3;
    let iterations = 50 * n * n;
    let mut allowed = vec![true; n * n];
    let mut layers = Vec::new();
    'layers: loop {
        for _ in 0..ATTEMPTS {
            let start = greedy_within(square, &allowed, rng);
            let cells = local_search_within(square, &allowed, &start, rng, iterations);
            if cells.len() >= min_size.max(1) {
                for c in &cells {
                    allowed[c.row * n + c.col] = false;
                }
                layers.push(build(square, cells));
                continue 'layers;
            }
        }
        break;
    }
    Ok(layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{counterexample_square, cyclic_latin, random_equi_square};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn brute_force_examples() {
        let one = EquiNSquare::new(1, vec![vec![0]]).unwrap();
        assert_eq!(brute_force_max(&one).unwrap().0, 1);
        assert_eq!(brute_force_max(&cyclic_latin(2).unwrap()).unwrap().0, 1);
        assert_eq!(brute_force_max(&cyclic_latin(3).unwrap()).unwrap().0, 3);
        assert_eq!(
            brute_force_max(&cyclic_latin(8).unwrap()).unwrap_err(),
            SolverError::TooLarge(8)
        );
    }

    #[test]
    fn exact_matches_known_values() {
        let (t, opt) = exact_max(&cyclic_latin(7).unwrap(), 1_000_000);
        assert!(opt);
        assert_eq!(t.len(), 7);
        // Even-order cyclic squares have no full transversal.
        let (t, opt) = exact_max(&cyclic_latin(6).unwrap(), 10_000_000);
        assert!(opt);
        assert_eq!(t.len(), 5);
        let (t, opt) = exact_max(&counterexample_square(8).unwrap().0, 10_000_000);
        assert!(opt);
        assert!(t.len() <= 7);
    }

    #[test]
    fn exact_agrees_with_brute_force() {
        for n in 4..=6 {
            for seed in 0..40 {
                let sq = random_equi_square(n, seed).unwrap();
                let (t, opt) = exact_max(&sq, u64::MAX);
                assert!(opt);
                assert_eq!(
                    t.len(),
                    brute_force_max(&sq).unwrap().0,
                    "n={n} seed={seed}"
                );
            }
        }
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        // Optimum is below n, so the root bound cannot close the search.
        let sq = counterexample_square(18).unwrap().0;
        let (t, opt) = exact_max(&sq, 1);
        assert!(!opt);
        assert!(!t.is_empty());
    }

    #[test]
    fn greedy_is_maximal() {
        let sq = random_equi_square(30, 1).unwrap();
        let mut rng = rng_from_seed(4);
        for _ in 0..20 {
            let t = random_greedy(&sq, &mut rng);
            let rows: BTreeSet<usize> = t.cells().iter().map(|c| c.row).collect();
            let cols: BTreeSet<usize> = t.cells().iter().map(|c| c.col).collect();
            let syms: BTreeSet<usize> = t.symbols(&sq).collect();
            for cell in sq.cells() {
                let s = sq.symbol(cell);
                assert!(rows.contains(&cell.row) || cols.contains(&cell.col) || syms.contains(&s));
            }
        }
        let one = EquiNSquare::new(1, vec![vec![0]]).unwrap();
        assert_eq!(random_greedy(&one, &mut rng).len(), 1);
    }

    #[test]
    fn local_search_never_shrinks() {
        let sq = random_equi_square(40, 2).unwrap();
        let mut rng = rng_from_seed(1);
        let g = random_greedy(&sq, &mut rng);
        let l = local_search(&sq, &g, &mut rng, 2000);
        assert!(l.len() >= g.len());
        let empty = local_search(&sq, &Transversal::empty(), &mut rng, 2000);
        assert!(empty.len() >= g.len().saturating_sub(2));
        let c3 = cyclic_latin(3).unwrap();
        let full = brute_force_max(&c3).unwrap().1;
        assert_eq!(local_search(&c3, &full, &mut rng, 100).len(), 3);
    }

    #[test]
    fn peel_layers_are_disjoint() {
        let mut rng = rng_from_seed(6);
        let one = EquiNSquare::new(1, vec![vec![0]]).unwrap();
        assert_eq!(peel_decomposition(&one, &mut rng, 1).unwrap().len(), 1);
        let sq = cyclic_latin(7).unwrap();
        let layers = peel_decomposition(&sq, &mut rng, 7).unwrap();
        assert!(!layers.is_empty() && layers.len() <= 7);
        let mut seen = BTreeSet::new();
        for t in &layers {
            assert_eq!(t.len(), 7);
            for c in t.cells() {
                assert!(seen.insert(*c));
            }
        }
        assert!(peel_decomposition(&sq, &mut rng, 8).is_err());
    }

    fn permutation(n: usize, seed: u64) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut rng_from_seed(seed));
        p
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn exact_invariant_under_isotopy(n in 4usize..=7, seed in 0u64..1000) {
            let sq = random_equi_square(n, seed).unwrap();
            let p = sq.permuted(&permutation(n, seed + 1), &permutation(n, seed + 2), &permutation(n, seed + 3));
            let (a, oa) = exact_max(&sq, u64::MAX);
            let (b, ob) = exact_max(&p, u64::MAX);
            prop_assert!(oa && ob);
            prop_assert_eq!(a.len(), b.len());
        }

        #[test]
        fn heuristics_always_valid(n in 1usize..=25, seed in 0u64..1000) {
            let sq = random_equi_square(n, seed).unwrap();
            let mut rng = rng_from_seed(seed);
            let g = random_greedy(&sq, &mut rng);
            prop_assert!(Transversal::new(&sq, g.cells()).is_ok());
            let l = local_search(&sq, &g, &mut rng, 200);
            prop_assert!(Transversal::new(&sq, l.cells()).is_ok());
            prop_assert!(l.len() >= g.len());
        }
    }
}
