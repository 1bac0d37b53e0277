//! Tripartite 3-uniform hypergraphs.
//!
//! A square's cells become edges `(row, col, symbol)`. Multi-edges are kept
//! as repeated entries with stable indices, so matchings and colourings refer
//! to edge indices rather than triples.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::square::EquiNSquare;

/// Vertex class: rows, columns and symbols for a square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Class {
    A,
    B,
    C,
}

impl Class {
    pub const ALL: [Class; 3] = [Class::A, Class::B, Class::C];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub class: Class,
    pub index: usize,
}

impl Vertex {
    pub fn new(class: Class, index: usize) -> Self {
        Vertex { class, index }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.class, self.index)
    }
}

pub type Triple = [usize; 3];

#[derive(Debug, Error)]
pub enum HypergraphError {
    #[error("SameVertex({0})")]
    SameVertex(Vertex),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(Vertex),
    #[error("InvalidParam: {0}")]
    InvalidParam(String),
    #[error("NotAMatching: high-codegree pairs overlap at {0}")]
    NotAMatching(Vertex),
    #[error("pair ({0}, {1}) has high codegree but edge {2} contains only one of them")]
    NotAllOrNothing(Vertex, Vertex, usize),
    #[error("ParseError(line {line}, \"{reason}\")")]
    Parse { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, HypergraphError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripartiteHypergraph {
    class_sizes: [usize; 3],
    edges: Vec<Triple>,
}

impl TripartiteHypergraph {
    pub fn new(class_sizes: [usize; 3]) -> Self {
        TripartiteHypergraph {
            class_sizes,
            edges: Vec::new(),
        }
    }

    pub fn with_edges(class_sizes: [usize; 3], edges: Vec<Triple>) -> Result<Self> {
        let mut h = TripartiteHypergraph::new(class_sizes);
        for e in edges {
            h.add_edge(e)?;
        }
        Ok(h)
    }

    /// Appends an edge and returns its index.
    pub fn add_edge(&mut self, edge: Triple) -> Result<usize> {
        for (class, &v) in Class::ALL.iter().zip(&edge) {
            if v >= self.class_sizes[class.index()] {
                return Err(HypergraphError::VertexOutOfRange(Vertex::new(*class, v)));
            }
        }
        self.edges.push(edge);
        Ok(self.edges.len() - 1)
    }

    /// Hypergraph of a square: rows in `A`, columns in `B`, symbols in `C`,
    /// one edge per cell in row-major order.
    pub fn from_square(square: &EquiNSquare) -> Self {
        let n = square.n();
        TripartiteHypergraph {
            class_sizes: [n, n, n],
            edges: square
                .cells()
                .map(|c| [c.row, c.col, square.symbol(c)])
                .collect(),
        }
    }

    pub fn class_sizes(&self) -> [usize; 3] {
        self.class_sizes
    }

    pub fn vertex_count(&self) -> usize {
        self.class_sizes.iter().sum()
    }

    pub fn edges(&self) -> &[Triple] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_vertices(&self, edge: usize) -> [Vertex; 3] {
        let e = self.edges[edge];
        [
            Vertex::new(Class::A, e[0]),
            Vertex::new(Class::B, e[1]),
            Vertex::new(Class::C, e[2]),
        ]
    }

    pub fn contains_vertex(&self, v: Vertex) -> bool {
        v.index < self.class_sizes[v.class.index()]
    }

    fn check_vertex(&self, v: Vertex) -> Result<()> {
        if self.contains_vertex(v) {
            Ok(())
        } else {
            Err(HypergraphError::VertexOutOfRange(v))
        }
    }

    /// Dense vertex ids of an edge: classes laid out `A`, then `B`, then `C`.
    pub(crate) fn flat_edge(&self, edge: usize) -> [usize; 3] {
        let e = self.edges[edge];
        [
            e[0],
            self.class_sizes[0] + e[1],
            self.class_sizes[0] + self.class_sizes[1] + e[2],
        ]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        let slot = v.class.index();
        self.edges.iter().filter(|e| e[slot] == v.index).count()
    }

    /// Degrees of every vertex, per class.
    pub fn degrees(&self) -> [Vec<usize>; 3] {
        let mut d = [
            vec![0; self.class_sizes[0]],
            vec![0; self.class_sizes[1]],
            vec![0; self.class_sizes[2]],
        ];
        for e in &self.edges {
            for slot in 0..3 {
                d[slot][e[slot]] += 1;
            }
        }
        d
    }

    pub fn max_degree(&self) -> usize {
        self.degrees()
            .iter()
            .flat_map(|d| d.iter().copied())
            .max()
            .unwrap_or(0)
    }

    /// `Some(d)` when every vertex has degree `d`.
    pub fn regular_degree(&self) -> Option<usize> {
        let degrees = self.degrees();
        let mut all = degrees.iter().flat_map(|d| d.iter().copied());
        let first = all.next()?;
        all.all(|d| d == first).then_some(first)
    }

    /// Number of edges containing both `x` and `y`.
    pub fn codegree(&self, x: Vertex, y: Vertex) -> Result<usize> {
        if x == y {
            return Err(HypergraphError::SameVertex(x));
        }
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        if x.class == y.class {
            return Ok(0);
        }
        let (sx, sy) = (x.class.index(), y.class.index());
        Ok(self
            .edges
            .iter()
            .filter(|e| e[sx] == x.index && e[sy] == y.index)
            .count())
    }

    /// Codegree of every pair that lies in at least one edge.
    pub fn pair_codegrees(&self) -> BTreeMap<(Vertex, Vertex), usize> {
        let mut map = BTreeMap::new();
        for i in 0..self.edges.len() {
            let vs = self.edge_vertices(i);
            for (p, q) in [(0, 1), (0, 2), (1, 2)] {
                *map.entry((vs[p], vs[q])).or_insert(0) += 1;
            }
        }
        map
    }

    pub fn max_codegree(&self) -> usize {
        self.pair_codegrees().values().copied().max().unwrap_or(0)
    }

    /// True when the given edge indices are pairwise vertex-disjoint.
    pub fn is_matching(&self, edges: &[usize]) -> bool {
        let mut seen = HashSet::new();
        edges
            .iter()
            .all(|&e| self.flat_edge(e).iter().all(|&v| seen.insert(v)))
    }

    /// Text format: `|A| |B| |C|`, then one `a b c` line per edge.
    pub fn to_text(&self) -> String {
        let [a, b, c] = self.class_sizes;
        let mut out = format!("{a} {b} {c}\n");
        for e in &self.edges {
            out.push_str(&format!("{} {} {}\n", e[0], e[1], e[2]));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let parse_line = |line_no: usize, line: &str| -> Result<Triple> {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(HypergraphError::Parse {
                    line: line_no,
                    reason: "expected 3 entries".into(),
                });
            }
            let mut out = [0; 3];
            for (slot, p) in out.iter_mut().zip(parts) {
                *slot = p.parse().map_err(|_| HypergraphError::Parse {
                    line: line_no,
                    reason: format!("invalid integer {p:?}"),
                })?;
            }
            Ok(out)
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines.next().ok_or(HypergraphError::Parse {
            line: 1,
            reason: "missing class sizes".into(),
        })?;
        let mut h = TripartiteHypergraph::new(parse_line(1, header)?);
        for (line_no, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            h.add_edge(parse_line(line_no, line)?)?;
        }
        Ok(h)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// The Alon-Kim style obstruction: classes of size `3t`, `2t`-regular, and no
/// matching with more than `2t` edges.
///
/// Indices `0..2t` are the unprimed vertices `x_i, y_i, z_i`; `2t + j` is the
/// primed vertex of index `j`.
pub fn alon_kim(t: usize) -> Result<TripartiteHypergraph> {
    if t < 1 {
        return Err(HypergraphError::InvalidParam(
            "alon_kim needs t >= 1".into(),
        ));
    }
    let size = 3 * t;
    let primed = |j: usize| 2 * t + j;
    let mut edges = Vec::with_capacity(6 * t * t);
    for i in 0..2 * t {
        for j in 0..t {
            edges.push([i, i, primed(j)]);
            edges.push([i, primed(j), i]);
            edges.push([primed(j), i, i]);
        }
    }
    Ok(TripartiteHypergraph {
        class_sizes: [size; 3],
        edges,
    })
}

/// Replaces every vertex by `factor` copies and every edge by all
/// `factor^3` edges over the copies. Copy `k` of vertex `v` has index
/// `v * factor + k`.
pub fn blow_up(h: &TripartiteHypergraph, factor: usize) -> Result<TripartiteHypergraph> {
    if factor < 1 {
        return Err(HypergraphError::InvalidParam(
            "blow-up factor must be >= 1".into(),
        ));
    }
    let f = factor;
    let mut edges = Vec::with_capacity(h.edges.len() * f * f * f);
    for e in &h.edges {
        for i in 0..f {
            for j in 0..f {
                for k in 0..f {
                    edges.push([e[0] * f + i, e[1] * f + j, e[2] * f + k]);
                }
            }
        }
    }
    Ok(TripartiteHypergraph {
        class_sizes: h.class_sizes.map(|s| s * f),
        edges,
    })
}

/// A proper edge colouring: each colour class is a matching.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeColouring {
    colours: Vec<usize>,
}

impl EdgeColouring {
    pub fn new(colours: Vec<usize>) -> Self {
        EdgeColouring { colours }
    }

    pub fn colour(&self, edge: usize) -> usize {
        self.colours[edge]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.colours
    }

    /// Number of distinct colours used.
    pub fn colour_count(&self) -> usize {
        self.colours.iter().collect::<HashSet<_>>().len()
    }

    pub fn classes(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (e, &c) in self.colours.iter().enumerate() {
            map.entry(c).or_default().push(e);
        }
        map
    }

    pub fn is_proper(&self, h: &TripartiteHypergraph) -> bool {
        self.colours.len() == h.edge_count()
            && self.classes().values().all(|class| h.is_matching(class))
    }
}

/// First-fit colouring in edge-index order. Each edge meets at most
/// `3 * (maxdeg - 1)` others, which bounds the colour count.
pub fn greedy_edge_colouring(h: &TripartiteHypergraph) -> EdgeColouring {
    let mut used: Vec<HashSet<usize>> = vec![HashSet::new(); h.vertex_count()];
    let mut colours = Vec::with_capacity(h.edge_count());
    for e in 0..h.edge_count() {
        let vs = h.flat_edge(e);
        let colour = (0..)
            .find(|c| vs.iter().all(|&v| !used[v].contains(c)))
            .expect("some colour is free");
        for &v in &vs {
            used[v].insert(colour);
        }
        colours.push(colour);
    }
    EdgeColouring { colours }
}

/// Output of [`split_high_codegree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitResult {
    /// The transformed hypergraph; edge `i` here corresponds to edge `i` of
    /// the input.
    pub hypergraph: TripartiteHypergraph,
    /// The high-codegree pairs, each as `(split vertex, kept vertex)`.
    pub split_pairs: Vec<(Vertex, Vertex)>,
    /// For every rewritten input edge, the fresh vertex that replaced the
    /// split vertex.
    pub new_vertices: BTreeMap<usize, Vertex>,
}

impl SplitResult {
    /// Pulls a colouring of the transformed hypergraph back to the input.
    pub fn pull_back(&self, colouring: &EdgeColouring) -> EdgeColouring {
        // Edge indices are preserved, so each input edge takes the colour of
        // its rewritten copy.
        EdgeColouring::new(colouring.as_slice().to_vec())
    }

    pub fn is_identity(&self) -> bool {
        self.split_pairs.is_empty()
    }
}

/// Breaks up every pair of codegree above `threshold`.
///
/// The high-codegree pairs must be vertex-disjoint, and every edge meeting
/// such a pair must contain both of its vertices. For each pair the smaller
/// vertex is replaced, inside each edge containing the pair, by a fresh
/// vertex of the same class.
pub fn split_high_codegree(h: &TripartiteHypergraph, threshold: usize) -> Result<SplitResult> {
    let high: Vec<(Vertex, Vertex)> = h
        .pair_codegrees()
        .into_iter()
        .filter(|&(_, c)| c > threshold)
        .map(|(p, _)| p)
        .collect();

    let mut partner: BTreeMap<Vertex, Vertex> = BTreeMap::new();
    for &(x, y) in &high {
        for (u, w) in [(x, y), (y, x)] {
            if partner.insert(u, w).is_some() {
                return Err(HypergraphError::NotAMatching(u));
            }
        }
    }
    for e in 0..h.edge_count() {
        let vs = h.edge_vertices(e);
        for v in vs {
            if let Some(&w) = partner.get(&v) {
                if !vs.contains(&w) {
                    let (x, y) = if v < w { (v, w) } else { (w, v) };
                    return Err(HypergraphError::NotAllOrNothing(x, y, e));
                }
            }
        }
    }

    let mut out = h.clone();
    let mut new_vertices = BTreeMap::new();
    for &(x, _) in &high {
        let slot = x.class.index();
        for e in 0..h.edge_count() {
            if h.edges[e][slot] == x.index {
                let fresh = Vertex::new(x.class, out.class_sizes[slot]);
                out.class_sizes[slot] += 1;
                out.edges[e][slot] = fresh.index;
                new_vertices.insert(e, fresh);
            }
        }
    }
    Ok(SplitResult {
        hypergraph: out,
        split_pairs: high,
        new_vertices,
    })
}

/// A matching found by exhaustive search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatching {
    pub edges: Vec<usize>,
    /// True iff the search finished within its node budget.
    pub optimal: bool,
    pub nodes: u64,
}

/// Maximum matching by branch and bound, for small instances.
///
/// Branches on the uncovered vertex with the fewest live edges (use one of
/// them, or leave the vertex uncovered) and prunes when the current size plus
/// the smallest count of live vertices in any class cannot beat the incumbent.
/// `budget` limits the number of search nodes expanded.
pub fn max_matching_exact(h: &TripartiteHypergraph, budget: u64) -> ExactMatching {
    let mut seen = HashSet::new();
    // Parallel copies are interchangeable; keep the first.
    let live: Vec<usize> = (0..h.edge_count())
        .filter(|&e| seen.insert(h.edges[e]))
        .collect();
    let mut search = MatchingSearch {
        h,
        flat: (0..h.edge_count()).map(|e| h.flat_edge(e)).collect(),
        budget,
        nodes: 0,
        aborted: false,
        current: Vec::new(),
        best: Vec::new(),
    };
    search.run(&live);
    let mut edges = search.best;
    edges.sort_unstable();
    ExactMatching {
        edges,
        optimal: !search.aborted,
        nodes: search.nodes,
    }
}

struct MatchingSearch<'a> {
    h: &'a TripartiteHypergraph,
    flat: Vec<[usize; 3]>,
    budget: u64,
    nodes: u64,
    aborted: bool,
    current: Vec<usize>,
    best: Vec<usize>,
}

impl MatchingSearch<'_> {
    fn run(&mut self, live: &[usize]) {
        if self.aborted {
            return;
        }
        if self.nodes >= self.budget {
            self.aborted = true;
            return;
        }
        self.nodes += 1;
        if self.current.len() > self.best.len() {
            self.best = self.current.clone();
        }
        if live.is_empty() {
            return;
        }

        let mut degree = vec![0usize; self.h.vertex_count()];
        for &e in live {
            for &v in &self.flat[e] {
                degree[v] += 1;
            }
        }
        let [a, b, _] = self.h.class_sizes;
        let mut live_per_class = [0usize; 3];
        for (v, &d) in degree.iter().enumerate() {
            if d > 0 {
                let class = if v < a {
                    0
                } else if v < a + b {
                    1
                } else {
                    2
                };
                live_per_class[class] += 1;
            }
        }
        let bound = live_per_class
            .iter()
            .copied()
            .min()
            .unwrap_or(0)
            .min(live.len());
        if self.current.len() + bound <= self.best.len() {
            return;
        }

        let pivot = (0..degree.len())
            .filter(|&v| degree[v] > 0)
            .min_by_key(|&v| (degree[v], v))
            .expect("live edges have vertices");
        let through: Vec<usize> = live
            .iter()
            .copied()
            .filter(|&e| self.flat[e].contains(&pivot))
            .collect();
        for e in through {
            let rest: Vec<usize> = live
                .iter()
                .copied()
                .filter(|&f| self.flat[f].iter().all(|v| !self.flat[e].contains(v)))
                .collect();
            self.current.push(e);
            self.run(&rest);
            self.current.pop();
        }
        let without: Vec<usize> = live
            .iter()
            .copied()
            .filter(|&f| !self.flat[f].contains(&pivot))
            .collect();
        self.run(&without);
    }
}
