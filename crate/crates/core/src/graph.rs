//! Finite weighted simple graphs, cuts and their coboundaries.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, VecDeque};
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::bitset::VertexSet;
use crate::error::{Error, Result};

/// An undirected edge between dense vertex indices, `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub capacity: u32,
}

/// A connected simple graph with positive integer capacities.
#[derive(Debug, Clone)]
pub struct Graph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    base: Option<usize>,
    fingerprint: u64,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids && self.edges == other.edges && self.base == other.base
    }
}

impl Eq for Graph {}

impl Graph {
    /// Builds a graph, rejecting loops, parallel edges, zero capacities,
    /// unknown endpoints and disconnected input.
    pub fn new<S: AsRef<str>>(
        vertices: &[S],
        edges: &[(S, S, u32)],
        base: Option<&str>,
    ) -> Result<Self> {
        let ids: Vec<String> = vertices.iter().map(|v| v.as_ref().to_string()).collect();
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::structural(format!("duplicate vertex id {id:?}")));
            }
        }
        let mut indexed = Vec::with_capacity(edges.len());
        for (a, b, cap) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let u = *index
                .get(a)
                .ok_or_else(|| Error::structural(format!("edge endpoint {a:?} is not a vertex")))?;
            let v = *index
                .get(b)
                .ok_or_else(|| Error::structural(format!("edge endpoint {b:?} is not a vertex")))?;
            indexed.push((u, v, *cap));
        }
        let base = match base {
            Some(b) => Some(
                *index
                    .get(b)
                    .ok_or_else(|| Error::structural(format!("base {b:?} is not a vertex")))?,
            ),
            None => None,
        };
        Self::from_indexed(ids, &indexed, base)
    }

    pub(crate) fn from_indexed(
        ids: Vec<String>,
        edges: &[(usize, usize, u32)],
        base: Option<usize>,
    ) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(Error::structural("graph has no vertices"));
        }
        let index: HashMap<String, usize> =
            ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        if index.len() != n {
            return Err(Error::structural("duplicate vertex id"));
        }
        let mut list: Vec<Edge> = Vec::with_capacity(edges.len());
        for &(a, b, capacity) in edges {
            if a >= n || b >= n {
                return Err(Error::structural(format!("edge ({a},{b}) outside vertex range")));
            }
            if a == b {
                return Err(Error::structural(format!("loop at {:?}", ids[a])));
            }
            if capacity == 0 {
                return Err(Error::structural(format!(
                    "edge {:?}-{:?} has zero capacity",
                    ids[a], ids[b]
                )));
            }
            list.push(Edge { u: a.min(b), v: a.max(b), capacity });
        }
        list.sort();
        for w in list.windows(2) {
            if (w[0].u, w[0].v) == (w[1].u, w[1].v) {
                return Err(Error::structural(format!(
                    "parallel edge {:?}-{:?}",
                    ids[w[0].u], ids[w[0].v]
                )));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for (k, e) in list.iter().enumerate() {
            adjacency[e.u].push((e.v, k));
            adjacency[e.v].push((e.u, k));
        }
        let mut hasher = DefaultHasher::new();
        ids.hash(&mut hasher);
        list.hash(&mut hasher);
        let graph = Graph { ids, index, edges: list, adjacency, base, fingerprint: hasher.finish() };
        if graph.components(&VertexSet::full(n)).len() != 1 {
            return Err(Error::structural("graph is not connected"));
        }
        Ok(graph)
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::structural(format!("unknown vertex {id:?}")))
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().map(|&(w, _)| w)
    }

    /// Neighbours of `v` paired with the connecting edge's index.
    pub(crate) fn adjacency(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edge_between(a, b).is_some()
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<&Edge> {
        self.adjacency[a].iter().find(|&&(w, _)| w == b).map(|&(_, k)| &self.edges[k])
    }

    /// The designated base vertex, or the last vertex when none was given.
    pub fn base(&self) -> usize {
        self.base.unwrap_or(self.ids.len() - 1)
    }

    pub fn designated_base(&self) -> Option<usize> {
        self.base
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn empty_set(&self) -> VertexSet {
        VertexSet::empty(self.vertex_count())
    }

    pub fn full_set(&self) -> VertexSet {
        VertexSet::full(self.vertex_count())
    }

    /// A cut from vertex ids.
    pub fn cut<S: AsRef<str>>(&self, ids: &[S]) -> Result<Cut> {
        let mut set = self.empty_set();
        for id in ids {
            set.insert(self.index_of(id.as_ref())?);
        }
        Ok(Cut { set, graph: self.fingerprint })
    }

    pub fn cut_from_set(&self, set: VertexSet) -> Result<Cut> {
        if set.universe() != self.vertex_count() {
            return Err(Error::structural("vertex set universe does not match the graph"));
        }
        Ok(Cut { set, graph: self.fingerprint })
    }

    pub(crate) fn cut_unchecked(&self, set: VertexSet) -> Cut {
        Cut { set, graph: self.fingerprint }
    }

    fn check(&self, a: &Cut) -> Result<()> {
        if a.graph != self.fingerprint || a.set.universe() != self.vertex_count() {
            Err(Error::structural("cut does not belong to this graph"))
        } else {
            Ok(())
        }
    }

    /// Edges with exactly one endpoint in `a`.
    pub fn coboundary(&self, a: &Cut) -> Result<Vec<Edge>> {
        self.check(a)?;
        Ok(self.coboundary_of(&a.set).collect())
    }

    pub(crate) fn coboundary_of<'a>(&'a self, set: &'a VertexSet) -> impl Iterator<Item = Edge> + 'a {
        self.edges.iter().copied().filter(move |e| set.contains(e.u) != set.contains(e.v))
    }

    /// Capacity-weighted size of the coboundary.
    pub fn cut_weight(&self, a: &Cut) -> Result<u64> {
        self.check(a)?;
        Ok(self.weight_of(&a.set))
    }

    pub(crate) fn weight_of(&self, set: &VertexSet) -> u64 {
        self.coboundary_of(set).map(|e| e.capacity as u64).sum()
    }

    /// True iff exactly one of `u`, `v` lies in `a`.
    pub fn separates(&self, a: &Cut, u: &str, v: &str) -> Result<bool> {
        self.check(a)?;
        let (u, v) = (self.index_of(u)?, self.index_of(v)?);
        Ok(a.set.contains(u) != a.set.contains(v))
    }

    /// Connected components of the subgraph induced on `region`, ordered by
    /// least vertex index.
    pub fn components(&self, region: &VertexSet) -> Vec<VertexSet> {
        let mut seen = self.empty_set();
        let mut out = Vec::new();
        for start in region.iter() {
            if seen.contains(start) {
                continue;
            }
            let mut comp = self.empty_set();
            let mut queue = VecDeque::from([start]);
            seen.insert(start);
            while let Some(x) = queue.pop_front() {
                comp.insert(x);
                for y in self.neighbors(x) {
                    if region.contains(y) && !seen.contains(y) {
                        seen.insert(y);
                        queue.push_back(y);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    pub fn is_connected_set(&self, region: &VertexSet) -> bool {
        !region.is_empty() && self.components(region).len() == 1
    }

    /// Vertex ids of a set, in graph order.
    pub fn names(&self, set: &VertexSet) -> Vec<String> {
        set.iter().map(|i| self.ids[i].clone()).collect()
    }

    /// Induced subgraph on a connected region; returns the subgraph and the
    /// map from new indices to old.
    pub fn induced(&self, region: &VertexSet, base: Option<usize>) -> Result<(Graph, Vec<usize>)> {
        let old: Vec<usize> = region.iter().collect();
        let mut new_of = vec![usize::MAX; self.vertex_count()];
        for (i, &o) in old.iter().enumerate() {
            new_of[o] = i;
        }
        let edges: Vec<(usize, usize, u32)> = self
            .edges
            .iter()
            .filter(|e| region.contains(e.u) && region.contains(e.v))
            .map(|e| (new_of[e.u], new_of[e.v], e.capacity))
            .collect();
        let ids = old.iter().map(|&o| self.ids[o].clone()).collect();
        let base = base.filter(|&b| region.contains(b)).map(|b| new_of[b]);
        Ok((Graph::from_indexed(ids, &edges, base)?, old))
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            vertices: self.ids.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| {
                    let (a, b) = (self.ids[e.u].clone(), self.ids[e.v].clone());
                    if e.capacity == 1 {
                        EdgeSpec::Plain(a, b)
                    } else {
                        EdgeSpec::Weighted(a, b, e.capacity)
                    }
                })
                .collect(),
            base: self.base.map(|b| self.ids[b].clone()),
        }
    }

    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        let edges: Vec<(String, String, u32)> = spec
            .edges
            .iter()
            .map(|e| match e {
                EdgeSpec::Plain(a, b) => (a.clone(), b.clone(), 1),
                EdgeSpec::Weighted(a, b, c) => (a.clone(), b.clone(), *c),
            })
            .collect();
        Graph::new(&spec.vertices, &edges, spec.base.as_deref())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: GraphSpec = serde_json::from_str(text)
            .map_err(|e| Error::structural(format!("invalid graph JSON: {e}")))?;
        Self::from_spec(&spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("graph spec serializes")
    }
}

/// JSON form: `{"vertices": [...], "edges": [["u","v",cap?],...], "base": "o"?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeSpec {
    Plain(String, String),
    Weighted(String, String, u32),
}

/// A set of vertices of a particular graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cut {
    set: VertexSet,
    graph: u64,
}

impl Cut {
    pub fn set(&self) -> &VertexSet {
        &self.set
    }

    pub fn into_set(self) -> VertexSet {
        self.set
    }

    pub fn complement(&self) -> Cut {
        Cut { set: self.set.complement(), graph: self.graph }
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.set.is_full()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.set.contains(v)
    }

    pub fn same_graph(&self, other: &Cut) -> bool {
        self.graph == other.graph && self.set.universe() == other.set.universe()
    }

    pub(crate) fn with_set(&self, set: VertexSet) -> Cut {
        Cut { set, graph: self.graph }
    }

    pub(crate) fn from_parts(set: VertexSet, graph: u64) -> Cut {
        Cut { set, graph }
    }

    pub fn graph_fingerprint(&self) -> u64 {
        self.graph
    }
}

/// Small named graphs used throughout the tests and the CLI.
pub mod fixtures {
    use super::*;

    fn numbered(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    fn build(n: usize, edges: &[(usize, usize)]) -> Graph {
        let edges: Vec<(usize, usize, u32)> = edges.iter().map(|&(a, b)| (a, b, 1)).collect();
        Graph::from_indexed(numbered(n), &edges, None).expect("fixture graph is valid")
    }

    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        build(n, &edges)
    }

    pub fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        build(n, &edges)
    }

    /// Triangles {1,2,3} and {4,5,6} joined by the bridge 3-4.
    pub fn barbell() -> Graph {
        build(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
    }

    /// `rows x cols` grid, vertices numbered row-major from 1.
    pub fn grid(rows: usize, cols: usize) -> Graph {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let i = r * cols + c;
                if c + 1 < cols {
                    edges.push((i, i + 1));
                }
                if r + 1 < rows {
                    edges.push((i, i + cols));
                }
            }
        }
        build(rows * cols, &edges)
    }

    pub fn by_name(name: &str) -> Option<Graph> {
        Some(match name {
            "path4" => path(4),
            "barbell" => barbell(),
            "c4" | "cycle4" => cycle(4),
            "c6" | "cycle6" => cycle(6),
            "grid2x3" | "grid-2x3" => grid(2, 3),
            _ => return None,
        })
    }

    pub const NAMES: &[&str] = &["path4", "barbell", "c4", "c6", "grid2x3"];

    /// Connected graphs with `min_n..=max_n` vertices for exhaustive checks:
    /// every labelled connected graph on up to 4 vertices plus `random_count`
    /// seeded random connected graphs on 5 to `max_n` vertices.
    pub fn corpus(max_n: usize, random_count: usize, seed: u64) -> Vec<Graph> {
        use rand::{Rng, SeedableRng};
        let mut out = Vec::new();
        for n in 2..=max_n.min(4) {
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            for mask in 0u32..(1 << pairs.len()) {
                let edges: Vec<(usize, usize, u32)> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &(a, b))| (a, b, 1))
                    .collect();
                if let Ok(g) = Graph::from_indexed(numbered(n), &edges, None) {
                    out.push(g);
                }
            }
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut made = 0;
        while made < random_count && max_n >= 5 {
            let n = rng.gen_range(5..=max_n);
            // spanning tree first, then sprinkle extra edges
            let mut edges: Vec<(usize, usize, u32)> = (1..n).map(|v| (rng.gen_range(0..v), v, 1)).collect();
            let extra = rng.gen_range(0..=n);
            for _ in 0..extra {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                if a != b && !edges.iter().any(|&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a)) {
                    edges.push((a, b, 1));
                }
            }
            if let Ok(g) = Graph::from_indexed(numbered(n), &edges, None) {
                out.push(g);
                made += 1;
            }
        }
        out
    }
}
