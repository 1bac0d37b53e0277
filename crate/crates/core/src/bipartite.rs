//! Bipartite multigraphs with labelled edges, matchings, and the path/cycle
//! structure of a union of two matchings.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type EdgeLabel = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BipartiteError {
    #[error("{side:?} vertex {vertex} out of range")]
    VertexOutOfRange { side: Side, vertex: usize },
    #[error("duplicate edge label {0}")]
    DuplicateLabel(EdgeLabel),
    #[error("unknown edge label {0}")]
    UnknownLabel(EdgeLabel),
    #[error("NotRegular({side:?} vertex {vertex} has degree {degree}, expected {expected})")]
    NotRegular {
        side: Side,
        vertex: usize,
        degree: usize,
        expected: usize,
    },
    #[error("NotAMatching(edges {0} and {1} share an endpoint)")]
    NotAMatching(EdgeLabel, EdgeLabel),
    #[error("edge {0} appears in both matchings")]
    OverlappingMatchings(EdgeLabel),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

type Result<T> = std::result::Result<T, BipartiteError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BiEdge {
    pub left: usize,
    pub right: usize,
    pub label: EdgeLabel,
}

/// A bipartite multigraph whose edges carry distinct labels.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BipartiteMultigraph {
    left_size: usize,
    right_size: usize,
    edges: Vec<BiEdge>,
    #[serde(skip)]
    index: HashMap<EdgeLabel, usize>,
}

impl PartialEq for BipartiteMultigraph {
    fn eq(&self, other: &Self) -> bool {
        self.left_size == other.left_size
            && self.right_size == other.right_size
            && self.edges == other.edges
    }
}

impl BipartiteMultigraph {
    pub fn new(left_size: usize, right_size: usize) -> Self {
        BipartiteMultigraph {
            left_size,
            right_size,
            edges: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Builds a graph from endpoint pairs, labelling edges `0, 1, 2, ...`.
    pub fn from_pairs(
        left_size: usize,
        right_size: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut g = BipartiteMultigraph::new(left_size, right_size);
        for (label, (l, r)) in pairs.into_iter().enumerate() {
            g.add_edge(l, r, label)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, left: usize, right: usize, label: EdgeLabel) -> Result<()> {
        if left >= self.left_size {
            return Err(BipartiteError::VertexOutOfRange {
                side: Side::Left,
                vertex: left,
            });
        }
        if right >= self.right_size {
            return Err(BipartiteError::VertexOutOfRange {
                side: Side::Right,
                vertex: right,
            });
        }
        if self.index.contains_key(&label) {
            return Err(BipartiteError::DuplicateLabel(label));
        }
        self.index.insert(label, self.edges.len());
        self.edges.push(BiEdge { left, right, label });
        Ok(())
    }

    pub fn left_size(&self) -> usize {
        self.left_size
    }

    pub fn right_size(&self) -> usize {
        self.right_size
    }

    pub fn edges(&self) -> &[BiEdge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, label: EdgeLabel) -> Option<&BiEdge> {
        self.index.get(&label).map(|&i| &self.edges[i])
    }

    fn require(&self, label: EdgeLabel) -> Result<&BiEdge> {
        self.edge(label).ok_or(BipartiteError::UnknownLabel(label))
    }

    pub fn labels(&self) -> impl Iterator<Item = EdgeLabel> + '_ {
        self.edges.iter().map(|e| e.label)
    }

    pub fn left_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.left_size];
        for e in &self.edges {
            d[e.left] += 1;
        }
        d
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.right_size];
        for e in &self.edges {
            d[e.right] += 1;
        }
        d
    }

    pub fn max_degree(&self) -> usize {
        let l = self.left_degrees().into_iter().max().unwrap_or(0);
        let r = self.right_degrees().into_iter().max().unwrap_or(0);
        l.max(r)
    }

    /// Checks that every vertex on both sides has degree exactly `k`.
    pub fn check_regular(&self, k: usize) -> Result<()> {
        for (side, degrees) in [
            (Side::Left, self.left_degrees()),
            (Side::Right, self.right_degrees()),
        ] {
            if let Some((vertex, &degree)) = degrees.iter().enumerate().find(|(_, &d)| d != k) {
                return Err(BipartiteError::NotRegular {
                    side,
                    vertex,
                    degree,
                    expected: k,
                });
            }
        }
        Ok(())
    }

    /// The subgraph on the given labels (unknown labels are an error).
    pub fn restrict(&self, labels: impl IntoIterator<Item = EdgeLabel>) -> Result<Self> {
        let mut g = BipartiteMultigraph::new(self.left_size, self.right_size);
        for label in labels {
            let e = *self.require(label)?;
            g.add_edge(e.left, e.right, e.label)?;
        }
        Ok(g)
    }

    fn rebuild_index(&mut self) {
        self.index = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.label, i))
            .collect();
    }

    /// Restores the label index after deserialization.
    pub fn reindexed(mut self) -> Self {
        self.rebuild_index();
        self
    }
}

/// A set of edge labels no two of which share an endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Matching {
    labels: BTreeSet<EdgeLabel>,
}

impl Matching {
    pub fn empty() -> Self {
        Matching::default()
    }

    /// Validates that `labels` form a matching in `g`.
    pub fn new(
        g: &BipartiteMultigraph,
        labels: impl IntoIterator<Item = EdgeLabel>,
    ) -> Result<Self> {
        let labels: BTreeSet<EdgeLabel> = labels.into_iter().collect();
        let mut left: HashMap<usize, EdgeLabel> = HashMap::new();
        let mut right: HashMap<usize, EdgeLabel> = HashMap::new();
        for &label in &labels {
            let e = g.require(label)?;
            if let Some(&other) = left.get(&e.left) {
                return Err(BipartiteError::NotAMatching(other, label));
            }
            if let Some(&other) = right.get(&e.right) {
                return Err(BipartiteError::NotAMatching(other, label));
            }
            left.insert(e.left, label);
            right.insert(e.right, label);
        }
        Ok(Matching { labels })
    }

    pub(crate) fn from_set(labels: BTreeSet<EdgeLabel>) -> Self {
        Matching { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn contains(&self, label: EdgeLabel) -> bool {
        self.labels.contains(&label)
    }

    pub fn labels(&self) -> impl Iterator<Item = EdgeLabel> + '_ {
        self.labels.iter().copied()
    }

    pub fn label_set(&self) -> &BTreeSet<EdgeLabel> {
        &self.labels
    }

    /// True when every vertex of `g` is covered.
    pub fn is_perfect(&self, g: &BipartiteMultigraph) -> bool {
        g.left_size() == g.right_size() && self.labels.len() == g.left_size()
    }
}

/// Hopcroft-Karp on a simple adjacency list. Returns the mate of every left
/// vertex.
pub(crate) fn hopcroft_karp(right_size: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    const INF: usize = usize::MAX;
    let left_size = adj.len();
    let mut mate_left: Vec<Option<usize>> = vec![None; left_size];
    let mut mate_right: Vec<Option<usize>> = vec![None; right_size];
    let mut dist = vec![INF; left_size];

    fn bfs(
        adj: &[Vec<usize>],
        mate_left: &[Option<usize>],
        mate_right: &[Option<usize>],
        dist: &mut [usize],
    ) -> bool {
        let mut queue = VecDeque::new();
        for (u, m) in mate_left.iter().enumerate() {
            if m.is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = INF;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match mate_right[v] {
                    None => found = true,
                    Some(w) if dist[w] == INF => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        found
    }

    fn dfs(
        u: usize,
        adj: &[Vec<usize>],
        mate_left: &mut [Option<usize>],
        mate_right: &mut [Option<usize>],
        dist: &mut [usize],
        next: &mut [usize],
    ) -> bool {
        while next[u] < adj[u].len() {
            let v = adj[u][next[u]];
            next[u] += 1;
            let ok = match mate_right[v] {
                None => true,
                Some(w) => dist[w] == dist[u] + 1 && dfs(w, adj, mate_left, mate_right, dist, next),
            };
            if ok {
                mate_left[u] = Some(v);
                mate_right[v] = Some(u);
                return true;
            }
        }
        dist[u] = INF;
        false
    }

    while bfs(adj, &mate_left, &mate_right, &mut dist) {
        let mut next = vec![0usize; left_size];
        for u in 0..left_size {
            if mate_left[u].is_none() {
                dfs(
                    u,
                    adj,
                    &mut mate_left,
                    &mut mate_right,
                    &mut dist,
                    &mut next,
                );
            }
        }
    }
    mate_left
}

/// Maximum-cardinality matching (Hopcroft-Karp). Among parallel edges the
/// one listed first is used.
pub fn max_matching(g: &BipartiteMultigraph) -> Matching {
    max_matching_on(g, g.edges.iter())
}

fn max_matching_on<'a>(
    g: &BipartiteMultigraph,
    edges: impl Iterator<Item = &'a BiEdge>,
) -> Matching {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); g.left_size];
    let mut first_label: HashMap<(usize, usize), EdgeLabel> = HashMap::new();
    for e in edges {
        if let std::collections::hash_map::Entry::Vacant(slot) =
            first_label.entry((e.left, e.right))
        {
            slot.insert(e.label);
            adj[e.left].push(e.right);
        }
    }
    let mates = hopcroft_karp(g.right_size, &adj);
    Matching::from_set(
        mates
            .iter()
            .enumerate()
            .filter_map(|(u, m)| m.map(|v| first_label[&(u, v)]))
            .collect(),
    )
}

/// A perfect matching of a `k`-regular bipartite multigraph.
pub fn regular_perfect_matching(g: &BipartiteMultigraph, k: usize) -> Result<Matching> {
    if k == 0 {
        return Err(BipartiteError::InvalidParam("k must be at least 1".into()));
    }
    g.check_regular(k)?;
    let m = max_matching(g);
    debug_assert!(
        m.is_perfect(g),
        "regular bipartite graphs have perfect matchings"
    );
    Ok(m)
}

/// Splits a `k`-regular multigraph into `k` disjoint perfect matchings.
pub fn decompose_regular(g: &BipartiteMultigraph, k: usize) -> Result<Vec<Matching>> {
    if k == 0 {
        return Err(BipartiteError::InvalidParam("k must be at least 1".into()));
    }
    g.check_regular(k)?;
    Ok(peel_perfect_matchings(g, k))
}

/// Splits a multigraph of maximum degree at most `k` into `k` disjoint
/// matchings covering every edge, by embedding it into a `k`-regular
/// multigraph first and discarding the padding afterwards.
pub fn decompose_max_degree(g: &BipartiteMultigraph, k: usize) -> Result<Vec<Matching>> {
    if k == 0 {
        return Err(BipartiteError::InvalidParam("k must be at least 1".into()));
    }
    for (side, degrees) in [
        (Side::Left, g.left_degrees()),
        (Side::Right, g.right_degrees()),
    ] {
        if let Some((vertex, &degree)) = degrees.iter().enumerate().find(|(_, &d)| d > k) {
            return Err(BipartiteError::NotRegular {
                side,
                vertex,
                degree,
                expected: k,
            });
        }
    }
    let (padded, dummy_from) = embed_regular(g, k);
    Ok(peel_perfect_matchings(&padded, k)
        .into_iter()
        .map(|m| Matching::from_set(m.labels.into_iter().filter(|&l| l < dummy_from).collect()))
        .collect())
}

/// Pads `g` to a `k`-regular multigraph on `max(|L|, |R|)` vertices per side.
/// Padding edges get labels `>= dummy_from`.
fn embed_regular(g: &BipartiteMultigraph, k: usize) -> (BipartiteMultigraph, EdgeLabel) {
    let size = g.left_size.max(g.right_size);
    let dummy_from = g.labels().max().map_or(0, |l| l + 1);
    let mut padded = BipartiteMultigraph::new(size, size);
    for e in &g.edges {
        padded
            .add_edge(e.left, e.right, e.label)
            .expect("copy of valid graph");
    }
    let mut left_def: Vec<usize> = padded.left_degrees().iter().map(|d| k - d).collect();
    let mut right_def: Vec<usize> = padded.right_degrees().iter().map(|d| k - d).collect();
    let mut label = dummy_from;
    let (mut u, mut v) = (0, 0);
    loop {
        while u < size && left_def[u] == 0 {
            u += 1;
        }
        while v < size && right_def[v] == 0 {
            v += 1;
        }
        if u == size || v == size {
            break;
        }
        let take = left_def[u].min(right_def[v]);
        for _ in 0..take {
            padded.add_edge(u, v, label).expect("padding edge in range");
            label += 1;
        }
        left_def[u] -= take;
        right_def[v] -= take;
    }
    debug_assert!(padded.check_regular(k).is_ok());
    (padded, dummy_from)
}

fn peel_perfect_matchings(g: &BipartiteMultigraph, k: usize) -> Vec<Matching> {
    let mut remaining: Vec<BiEdge> = g.edges.clone();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let m = max_matching_on(g, remaining.iter());
        debug_assert_eq!(
            m.len(),
            g.left_size,
            "Hall: regular remainder has a perfect matching"
        );
        remaining.retain(|e| !m.contains(e.label));
        out.push(m);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentKind {
    Path,
    Cycle,
}

/// Which of the two source matchings an edge came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    A,
    B,
}

/// A path or cycle of the union of two matchings, listed in traversal order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub kind: ComponentKind,
    pub edges: Vec<EdgeLabel>,
    pub sources: Vec<Source>,
}

impl Component {
    /// Edge count.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn min_label(&self) -> EdgeLabel {
        self.edges.iter().copied().min().unwrap_or(EdgeLabel::MAX)
    }

    pub fn edges_from(&self, source: Source) -> impl Iterator<Item = EdgeLabel> + '_ {
        self.edges
            .iter()
            .zip(&self.sources)
            .filter(move |(_, &s)| s == source)
            .map(|(&e, _)| e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PathCycleDecomposition {
    pub components: Vec<Component>,
}

impl PathCycleDecomposition {
    pub fn edge_count(&self) -> usize {
        self.components.iter().map(Component::len).sum()
    }

    pub fn labels(&self) -> impl Iterator<Item = EdgeLabel> + '_ {
        self.components.iter().flat_map(|c| c.edges.iter().copied())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("decomposition serializes")
    }
}

/// Components of `a ∪ b`. Each is a path or an even cycle whose edges
/// alternate between the two matchings. Components are ordered by their
/// minimum label; cycles start at their minimum-label edge.
pub fn union_components(
    g: &BipartiteMultigraph,
    a: &Matching,
    b: &Matching,
) -> Result<PathCycleDecomposition> {
    Matching::new(g, a.labels())?;
    Matching::new(g, b.labels())?;
    if let Some(shared) = a.labels.intersection(&b.labels).next() {
        return Err(BipartiteError::OverlappingMatchings(*shared));
    }

    let ls = g.left_size;
    let vertex_count = ls + g.right_size;
    // incidence[v] = (edge via A, edge via B)
    let mut incidence: Vec<[Option<EdgeLabel>; 2]> = vec![[None, None]; vertex_count];
    let mut source_of: HashMap<EdgeLabel, Source> = HashMap::new();
    for (slot, m, src) in [(0, a, Source::A), (1, b, Source::B)] {
        for label in m.labels() {
            let e = g.edge(label).expect("validated above");
            incidence[e.left][slot] = Some(label);
            incidence[ls + e.right][slot] = Some(label);
            source_of.insert(label, src);
        }
    }
    let ends = |label: EdgeLabel| {
        let e = g.edge(label).expect("validated above");
        (e.left, ls + e.right)
    };
    // The other edge at vertex `v`, if any.
    let other_at = |v: usize, label: EdgeLabel| -> Option<EdgeLabel> {
        let [x, y] = incidence[v];
        if x == Some(label) {
            y
        } else {
            x
        }
    };
    // Walk from `start` leaving through vertex `v`, until the walk closes or ends.
    let walk = |start: EdgeLabel, mut v: usize| -> (Vec<EdgeLabel>, bool) {
        let mut seq = vec![start];
        let mut cur = start;
        loop {
            match other_at(v, cur) {
                None => return (seq, false),
                Some(next) if next == start => return (seq, true),
                Some(next) => {
                    seq.push(next);
                    let (x, y) = ends(next);
                    v = if x == v { y } else { x };
                    cur = next;
                }
            }
        }
    };

    let mut all: Vec<EdgeLabel> = a.labels().chain(b.labels()).collect();
    all.sort_unstable();
    let mut visited: BTreeSet<EdgeLabel> = BTreeSet::new();
    let mut components = Vec::new();
    for &start in &all {
        if visited.contains(&start) {
            continue;
        }
        let (x, y) = ends(start);
        let (forward, closed) = walk(start, y);
        let edges = if closed {
            // Direction: towards the smaller-labelled neighbour of `start`.
            let back = other_at(x, start).expect("cycle edge has two neighbours");
            if forward.len() > 2 && back < forward[1] {
                let mut rev = vec![start];
                rev.extend(forward[1..].iter().rev());
                rev
            } else {
                forward
            }
        } else {
            let (backward, _) = walk(start, x);
            let mut seq: Vec<EdgeLabel> = backward[1..].iter().rev().copied().collect();
            seq.extend(forward);
            if seq.last() < seq.first() {
                seq.reverse();
            }
            seq
        };
        visited.extend(edges.iter().copied());
        let sources = edges.iter().map(|l| source_of[l]).collect();
        components.push(Component {
            kind: if closed {
                ComponentKind::Cycle
            } else {
                ComponentKind::Path
            },
            edges,
            sources,
        });
    }
    components.sort_by_key(Component::min_label);
    Ok(PathCycleDecomposition { components })
}

/// Result of breaking long components: the deleted edges and what is left.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CapResult {
    pub deleted: BTreeSet<EdgeLabel>,
    pub components: PathCycleDecomposition,
}

/// Deletes the fewest edges so that every component has at most `cap`
/// edges: every `(cap + 1)`-th edge along each path, and for a long cycle its
/// first edge and then every `(cap + 1)`-th edge of the remaining path.
pub fn cap_components(decomp: &PathCycleDecomposition, cap: usize) -> Result<CapResult> {
    if cap == 0 {
        return Err(BipartiteError::InvalidParam(
            "component cap must be at least 1".into(),
        ));
    }
    let mut deleted = BTreeSet::new();
    let mut pieces = Vec::new();
    for comp in &decomp.components {
        if comp.len() <= cap {
            pieces.push(comp.clone());
            continue;
        }
        let offset = match comp.kind {
            ComponentKind::Cycle => {
                deleted.insert(comp.edges[0]);
                1
            }
            ComponentKind::Path => 0,
        };
        let path_edges = &comp.edges[offset..];
        let path_sources = &comp.sources[offset..];
        let mut piece = Component {
            kind: ComponentKind::Path,
            edges: Vec::new(),
            sources: Vec::new(),
        };
        for (i, (&e, &s)) in path_edges.iter().zip(path_sources).enumerate() {
            if (i + 1) % (cap + 1) == 0 {
                deleted.insert(e);
                if !piece.is_empty() {
                    pieces.push(std::mem::replace(
                        &mut piece,
                        Component {
                            kind: ComponentKind::Path,
                            edges: Vec::new(),
                            sources: Vec::new(),
                        },
                    ));
                }
            } else {
                piece.edges.push(e);
                piece.sources.push(s);
            }
        }
        if !piece.is_empty() {
            pieces.push(piece);
        }
    }
    pieces.sort_by_key(Component::min_label);
    Ok(CapResult {
        deleted,
        components: PathCycleDecomposition { components: pieces },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    /// Two perfect matchings on 4+4 forming one 8-cycle:
    /// A = {i -- i}, B = {i -- i+1 mod 4}.
    fn eight_cycle() -> (BipartiteMultigraph, Matching, Matching) {
        let mut pairs: Vec<(usize, usize)> = (0..4).map(|i| (i, i)).collect();
        pairs.extend((0..4).map(|i| (i, (i + 1) % 4)));
        let g = BipartiteMultigraph::from_pairs(4, 4, pairs).unwrap();
        let a = Matching::new(&g, 0..4).unwrap();
        let b = Matching::new(&g, 4..8).unwrap();
        (g, a, b)
    }

    pub(crate) fn random_regular(n: usize, k: usize, seed: u64) -> BipartiteMultigraph {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut pairs = Vec::new();
        for _ in 0..k {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            pairs.extend(perm.into_iter().enumerate());
        }
        BipartiteMultigraph::from_pairs(n, n, pairs).unwrap()
    }

    fn assert_partition(g: &BipartiteMultigraph, ms: &[Matching]) {
        let mut seen = BTreeSet::new();
        for m in ms {
            Matching::new(g, m.labels()).unwrap();
            for l in m.labels() {
                assert!(seen.insert(l), "label {l} in two matchings");
            }
        }
        assert_eq!(seen, g.labels().collect::<BTreeSet<_>>());
    }

    #[test]
    fn matching_validation() {
        let (g, _, _) = eight_cycle();
        assert_eq!(
            Matching::new(&g, [0, 4]),
            Err(BipartiteError::NotAMatching(0, 4))
        );
        assert_eq!(
            Matching::new(&g, [99]),
            Err(BipartiteError::UnknownLabel(99))
        );
    }

    #[test]
    fn graph_construction_errors() {
        let mut g = BipartiteMultigraph::new(2, 2);
        g.add_edge(0, 0, 5).unwrap();
        assert_eq!(g.add_edge(1, 1, 5), Err(BipartiteError::DuplicateLabel(5)));
        assert!(matches!(
            g.add_edge(2, 0, 6),
            Err(BipartiteError::VertexOutOfRange {
                side: Side::Left,
                ..
            })
        ));
    }

    #[test]
    fn perfect_matching_one_and_two_regular() {
        let g = BipartiteMultigraph::from_pairs(3, 3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let m = regular_perfect_matching(&g, 1).unwrap();
        assert_eq!(m.labels().collect::<Vec<_>>(), vec![0, 1, 2]);

        let (g, _, _) = eight_cycle();
        let m = regular_perfect_matching(&g, 2).unwrap();
        assert!(m.is_perfect(&g));
        // An 8-cycle has exactly two perfect matchings: its alternate edge sets.
        let labels: BTreeSet<_> = m.labels().collect();
        assert!(labels == (0..4).collect() || labels == (4..8).collect());
    }

    #[test]
    fn perfect_matching_rejects_irregular() {
        let g = BipartiteMultigraph::from_pairs(2, 2, [(0, 0), (0, 1), (1, 1)]).unwrap();
        assert!(matches!(
            regular_perfect_matching(&g, 1),
            Err(BipartiteError::NotRegular {
                side: Side::Left,
                vertex: 0,
                degree: 2,
                ..
            })
        ));
    }

    #[test]
    fn perfect_matching_eight_regular() {
        let g = random_regular(50, 8, 11);
        let m = regular_perfect_matching(&g, 8).unwrap();
        assert!(m.is_perfect(&g));
        Matching::new(&g, m.labels()).unwrap();
    }

    #[test]
    fn decompose_k_one_and_regular() {
        let g = BipartiteMultigraph::from_pairs(3, 3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let ms = decompose_regular(&g, 1).unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].len(), 3);

        let g = random_regular(30, 4, 5);
        let ms = decompose_regular(&g, 4).unwrap();
        assert_eq!(ms.len(), 4);
        assert!(ms.iter().all(|m| m.is_perfect(&g)));
        assert_partition(&g, &ms);
    }

    #[test]
    fn decompose_with_embedding() {
        // Max degree 3, not regular, unequal sides.
        let g = BipartiteMultigraph::from_pairs(
            4,
            3,
            [(0, 0), (0, 1), (0, 1), (1, 2), (2, 0), (3, 2), (3, 0)],
        )
        .unwrap();
        assert!(decompose_regular(&g, 3).is_err());
        let ms = decompose_max_degree(&g, 3).unwrap();
        assert_eq!(ms.len(), 3);
        assert_partition(&g, &ms);
        assert!(decompose_max_degree(&g, 2).is_err());
    }

    #[test]
    fn max_matching_small() {
        let g = BipartiteMultigraph::new(0, 0);
        assert!(max_matching(&g).is_empty());
        let pairs = (0..3).flat_map(|i| (0..3).map(move |j| (i, j)));
        let g = BipartiteMultigraph::from_pairs(3, 3, pairs).unwrap();
        assert_eq!(max_matching(&g).len(), 3);
    }

    /// Minimum vertex cover by brute force over all subsets of the left side:
    /// a cover choosing left set X must also take every right neighbour of
    /// the left vertices outside X.
    fn brute_min_vertex_cover(g: &BipartiteMultigraph) -> usize {
        let l = g.left_size();
        (0u32..1 << l)
            .map(|mask| {
                let right: BTreeSet<usize> = g
                    .edges()
                    .iter()
                    .filter(|e| mask & (1 << e.left) == 0)
                    .map(|e| e.right)
                    .collect();
                mask.count_ones() as usize + right.len()
            })
            .min()
            .unwrap()
    }

    #[test]
    fn max_matching_equals_konig_bound() {
        use rand::Rng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let pairs: Vec<(usize, usize)> = (0..20)
                .flat_map(|i| (0..20).map(move |j| (i, j)))
                .filter(|_| rng.gen_bool(0.3))
                .collect();
            // Left side kept at 14 vertices so the cover enumeration stays cheap.
            let pairs: Vec<_> = pairs.into_iter().filter(|&(i, _)| i < 14).collect();
            let g = BipartiteMultigraph::from_pairs(14, 20, pairs).unwrap();
            assert_eq!(max_matching(&g).len(), brute_min_vertex_cover(&g));
        }
    }

    #[test]
    fn union_components_basic() {
        let (g, a, b) = eight_cycle();
        let d = union_components(&g, &Matching::empty(), &Matching::empty()).unwrap();
        assert!(d.components.is_empty());

        let d = union_components(&g, &a, &b).unwrap();
        assert_eq!(d.components.len(), 1);
        let c = &d.components[0];
        assert_eq!(c.kind, ComponentKind::Cycle);
        assert_eq!(c.len(), 8);
        assert_eq!(c.edges[0], 0);
        for w in c.sources.windows(2) {
            assert_ne!(w[0], w[1]);
        }

        let d = union_components(&g, &a, &Matching::empty()).unwrap();
        assert_eq!(d.components.len(), 4);
        assert!(d
            .components
            .iter()
            .all(|c| c.kind == ComponentKind::Path && c.len() == 1));
    }

    #[test]
    fn union_components_rejects_bad_input() {
        let (g, a, _) = eight_cycle();
        assert_eq!(
            union_components(&g, &a, &a),
            Err(BipartiteError::OverlappingMatchings(0))
        );
        let bad = Matching::from_set([0, 4].into_iter().collect());
        assert!(matches!(
            union_components(&g, &bad, &Matching::empty()),
            Err(BipartiteError::NotAMatching(..))
        ));
    }

    #[test]
    fn union_components_parallel_edges_form_two_cycle() {
        let g = BipartiteMultigraph::from_pairs(1, 1, [(0, 0), (0, 0)]).unwrap();
        let d = union_components(
            &g,
            &Matching::new(&g, [0]).unwrap(),
            &Matching::new(&g, [1]).unwrap(),
        )
        .unwrap();
        assert_eq!(d.components.len(), 1);
        assert_eq!(d.components[0].kind, ComponentKind::Cycle);
        assert_eq!(d.components[0].len(), 2);
    }

    fn cycle_decomp(len: usize) -> PathCycleDecomposition {
        PathCycleDecomposition {
            components: vec![Component {
                kind: ComponentKind::Cycle,
                edges: (0..len).collect(),
                sources: (0..len)
                    .map(|i| if i % 2 == 0 { Source::A } else { Source::B })
                    .collect(),
            }],
        }
    }

    fn path_decomp(len: usize) -> PathCycleDecomposition {
        PathCycleDecomposition {
            components: vec![Component {
                kind: ComponentKind::Path,
                ..cycle_decomp(len).components[0].clone()
            }],
        }
    }

    #[test]
    fn cap_short_components_untouched() {
        let d = cycle_decomp(4);
        let r = cap_components(&d, 4).unwrap();
        assert!(r.deleted.is_empty());
        assert_eq!(r.components, d);
        assert!(cap_components(&d, 0).is_err());
    }

    #[test]
    fn cap_ten_cycle_at_four() {
        let r = cap_components(&cycle_decomp(10), 4).unwrap();
        assert_eq!(r.deleted.len(), 2);
        assert_eq!(r.deleted, [0, 5].into_iter().collect());
        assert!(r.components.components.iter().all(|c| c.len() <= 4));
        assert_eq!(r.components.edge_count() + r.deleted.len(), 10);
    }

    #[test]
    fn cap_path_one_over() {
        let r = cap_components(&path_decomp(5), 4).unwrap();
        assert_eq!(r.deleted.len(), 1);
        assert_eq!(r.components.components.len(), 1);
    }

    proptest! {
        #[test]
        fn cap_is_minimal_and_bounded(len in 1usize..60, cap in 1usize..10, cycle in any::<bool>()) {
            let d = if cycle && len >= 2 { cycle_decomp(len) } else { path_decomp(len) };
            let r = cap_components(&d, cap).unwrap();
            prop_assert!(r.components.components.iter().all(|c| c.len() <= cap));
            let covered: BTreeSet<_> = r.components.labels().chain(r.deleted.iter().copied()).collect();
            prop_assert_eq!(covered.len(), len);
            prop_assert_eq!(r.components.edge_count() + r.deleted.len(), len);
            let minimal = match d.components[0].kind {
                ComponentKind::Cycle if len > cap => len.div_ceil(cap + 1),
                ComponentKind::Cycle => 0,
                ComponentKind::Path => len / (cap + 1),
            };
            prop_assert_eq!(r.deleted.len(), minimal);
        }

        #[test]
        fn max_matching_relabel_invariant(seed in 0u64..500) {
            use rand::Rng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (l, r) = (rng.gen_range(1..12), rng.gen_range(1..12));
            let pairs: Vec<(usize, usize)> = (0..l)
                .flat_map(|i| (0..r).map(move |j| (i, j)))
                .filter(|_| rng.gen_bool(0.25))
                .collect();
            let g = BipartiteMultigraph::from_pairs(l, r, pairs.clone()).unwrap();
            let mut pl: Vec<usize> = (0..l).collect();
            let mut pr: Vec<usize> = (0..r).collect();
            pl.shuffle(&mut rng);
            pr.shuffle(&mut rng);
            let h = BipartiteMultigraph::from_pairs(l, r, pairs.iter().map(|&(i, j)| (pl[i], pr[j]))).unwrap();
            prop_assert_eq!(max_matching(&g).len(), max_matching(&h).len());
        }

        #[test]
        fn union_of_two_matchings_is_paths_and_cycles(seed in 0u64..300, cap in 1usize..8) {
            let n = 40;
            let g = random_regular(n, 2, seed);
            let ms = decompose_regular(&g, 2).unwrap();
            let d = union_components(&g, &ms[0], &ms[1]).unwrap();
            prop_assert_eq!(d.edge_count(), 2 * n);
            for c in &d.components {
                prop_assert_eq!(c.kind, ComponentKind::Cycle);
                prop_assert!(c.len() % 2 == 0);
                for w in c.edges.windows(2) {
                    let (x, y) = (g.edge(w[0]).unwrap(), g.edge(w[1]).unwrap());
                    prop_assert!(x.left == y.left || x.right == y.right);
                }
            }
            let r = cap_components(&d, cap).unwrap();
            prop_assert!(r.deleted.len() <= 2 * (2 * n) / cap);
        }
    }
}
