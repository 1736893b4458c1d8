//! Almost-equal sets as a metric space, the cube graph Γ, half-space systems
//! and their orientation graph, Gromov products, ℤ-trees, and the passage
//! from a tree edge back to an almost invariant set.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arena::{Arena, Finiteness};
use crate::bitset::VertexSet;
use crate::error::{check_guard, Error, Result};
use crate::graph::Graph;
use crate::group::GroupOracle;
use crate::pocset::{half, Orientation, Pocset};
use crate::relative::Window;
use crate::tree::StructureTree;

pub const GAMMA_RADIUS_GUARD: usize = 4;
pub const GAMMA_UNIVERSE_GUARD: usize = 12;

/// A set `B` with `B =_a A`, stored as the finite set of coset labels where
/// it differs from the reference set `A`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MetricPoint {
    pub base: String,
    pub delta: BTreeSet<String>,
}

impl MetricPoint {
    pub fn base(name: &str) -> Self {
        MetricPoint { base: name.to_string(), delta: BTreeSet::new() }
    }

    pub fn with_delta<I, S>(name: &str, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut p = Self::base(name);
        for l in labels {
            p = p.toggle(&l.into());
        }
        p
    }

    /// `B + Hx`.
    pub fn toggle(&self, label: &str) -> Self {
        let mut delta = self.delta.clone();
        if !delta.remove(label) {
            delta.insert(label.to_string());
        }
        MetricPoint { base: self.base.clone(), delta }
    }

    /// Relabel every coset, as right multiplication does.
    pub fn relabel(&self, f: impl Fn(&str) -> String) -> Self {
        MetricPoint { base: self.base.clone(), delta: self.delta.iter().map(|l| f(l)).collect() }
    }
}

impl fmt::Display for MetricPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.delta.is_empty() {
            return write!(f, "{}", self.base);
        }
        let labels: Vec<&str> = self.delta.iter().map(|s| s.as_str()).collect();
        write!(f, "{}+{{{}}}", self.base, labels.join(","))
    }
}

pub fn metric_d(p: &MetricPoint, q: &MetricPoint) -> Result<usize> {
    if p.base != q.base {
        return Err(Error::precondition(format!("points over different bases {} and {}", p.base, q.base)));
    }
    Ok(p.delta.symmetric_difference(&q.delta).count())
}

/// The points within `radius` of `center` that differ from it only inside
/// `universe`, joined when at distance one.
#[derive(Debug, Clone)]
pub struct GammaBall {
    pub center: MetricPoint,
    pub points: Vec<MetricPoint>,
    pub graph: Graph,
    /// Coset label carried by each edge.
    pub edge_labels: Vec<String>,
}

pub fn gamma_ball(center: &MetricPoint, radius: usize, universe: &[String]) -> Result<GammaBall> {
    check_guard("gamma ball radius", radius, GAMMA_RADIUS_GUARD)?;
    let labels: BTreeSet<&String> = universe.iter().collect();
    check_guard("gamma ball universe", labels.len(), GAMMA_UNIVERSE_GUARD)?;
    let labels: Vec<&String> = labels.into_iter().collect();
    let k = labels.len();
    let mut masks: Vec<u32> = (0..1u32 << k).filter(|m| m.count_ones() as usize <= radius).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let points: Vec<MetricPoint> = masks
        .iter()
        .map(|m| {
            (0..k).filter(|i| m >> i & 1 == 1).fold(center.clone(), |p, i| p.toggle(labels[i]))
        })
        .collect();
    let index: HashMap<u32, usize> = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let mut edges = Vec::new();
    let mut edge_labels = Vec::new();
    for (i, &m) in masks.iter().enumerate() {
        for (b, label) in labels.iter().enumerate() {
            if m >> b & 1 == 0 {
                if let Some(&j) = index.get(&(m | 1 << b)) {
                    edges.push((i, j, 1));
                    edge_labels.push((*label).clone());
                }
            }
        }
    }
    let ids: Vec<String> = points.iter().map(|p| p.to_string()).collect();
    let graph = Graph::from_indexed(ids, &edges, Some(0))?;
    Ok(GammaBall { center: center.clone(), points, graph, edge_labels })
}

impl GammaBall {
    pub fn index_of(&self, p: &MetricPoint) -> Option<usize> {
        self.points.iter().position(|q| q == p)
    }

    fn distances_from(&self, s: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.points.len()];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for w in self.graph.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Number of shortest paths from `p` to `q`, by exhaustive enumeration.
    pub fn geodesic_count(&self, p: usize, q: usize) -> usize {
        let to_q = self.distances_from(q);
        fn walk(ball: &GammaBall, v: usize, q: usize, to_q: &[usize]) -> usize {
            if v == q {
                return 1;
            }
            ball.graph.neighbors(v).filter(|&w| to_q[w] + 1 == to_q[v]).map(|w| walk(ball, w, q, to_q)).sum()
        }
        if to_q[p] == usize::MAX {
            return 0;
        }
        walk(self, p, q, &to_q)
    }

    /// Vertices on some geodesic from `p` to `q`.
    pub fn interval(&self, p: usize, q: usize) -> VertexSet {
        let (dp, dq) = (self.distances_from(p), self.distances_from(q));
        let n = dp[q];
        VertexSet::from_indices(self.points.len(), (0..self.points.len()).filter(|&v| dp[v].saturating_add(dq[v]) == n))
    }

    pub fn to_dot(&self, highlight: Option<&str>) -> String {
        let mut out = String::from("graph gamma {\n");
        for (i, p) in self.points.iter().enumerate() {
            out.push_str(&format!("  v{i} [label=\"{p}\"];\n"));
        }
        for (e, label) in self.graph.edges().iter().zip(&self.edge_labels) {
            let color = if highlight == Some(label.as_str()) { " color=red penwidth=2" } else { "" };
            out.push_str(&format!("  v{} -- v{} [label=\"{label}\"{color}];\n", e.u, e.v));
        }
        out.push_str("}\n");
        out
    }
}

/// The edges of one coset label and the two sides left after removing them.
#[derive(Debug, Clone)]
pub struct Hyperplane {
    pub label: String,
    pub edges: Vec<usize>,
    /// Points whose difference from the center contains the label.
    pub inside: VertexSet,
    pub outside: VertexSet,
}

pub fn hyperplane(ball: &GammaBall, label: &str) -> Result<Hyperplane> {
    let edges: Vec<usize> = (0..ball.edge_labels.len()).filter(|&i| ball.edge_labels[i] == label).collect();
    if edges.is_empty() {
        return Err(Error::precondition(format!("label {label:?} carries no edge of the ball")));
    }
    let n = ball.points.len();
    let flipped = |p: &MetricPoint| p.delta.contains(label) != ball.center.delta.contains(label);
    let inside = VertexSet::from_indices(n, (0..n).filter(|&i| flipped(&ball.points[i])));
    let outside = inside.complement();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (e, l) in ball.graph.edges().iter().zip(&ball.edge_labels) {
        if l != label {
            let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut pieces: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        pieces.entry(find(&mut parent, v)).or_default().push(v);
    }
    let mut parts: Vec<VertexSet> = pieces.into_values().map(|vs| VertexSet::from_indices(n, vs)).collect();
    parts.sort();
    let mut expected = vec![inside.clone(), outside.clone()];
    expected.sort();
    if parts != expected {
        return Err(Error::invariant(format!("removing {label:?} leaves {} pieces, not the two sides", parts.len())));
    }
    Ok(Hyperplane { label: label.to_string(), edges, inside, outside })
}

/// Complement-closed family of half-spaces on a finite region, indexed by
/// labels, with inclusion decided on the region.
#[derive(Debug, Clone)]
pub struct HalfSpaceSystem {
    labels: Vec<String>,
    sets: Vec<VertexSet>,
    pocset: Pocset,
    base_point: usize,
}

impl HalfSpaceSystem {
    /// `sets[i]` is the half-space labelled `labels[i]`; `base_point` is the
    /// point whose half-spaces form the reference orientation.
    pub fn from_sets(labels: Vec<String>, sets: Vec<VertexSet>, base_point: usize) -> Result<Self> {
        if labels.len() != sets.len() {
            return Err(Error::structural("one label per half-space required"));
        }
        for (i, s) in sets.iter().enumerate() {
            if s.is_empty() || s.is_full() {
                return Err(Error::precondition(format!("half-space {} is trivial on the region", labels[i])));
            }
            for j in 0..i {
                if sets[j] == *s || sets[j] == s.complement() {
                    return Err(Error::precondition(format!(
                        "half-spaces {} and {} coincide as walls on the region",
                        labels[j], labels[i]
                    )));
                }
            }
        }
        let pairs: Vec<(VertexSet, VertexSet)> = sets.iter().map(|s| (s.clone(), s.complement())).collect();
        let pocset = Pocset::from_pairs(&pairs);
        Ok(HalfSpaceSystem { labels, sets, pocset, base_point })
    }

    /// Translates `g·A` of a window over the words, restricted to the region
    /// where all of them are known. Words giving the same wall keep the first
    /// label.
    pub fn from_translates(arena: &Arena, a: &Window, words: &[String]) -> Result<Self> {
        let mut moved = Vec::new();
        let mut region = VertexSet::full(arena.vertex_count());
        for w in words {
            let t = a.translate(arena, w)?;
            region = region.intersection(t.exact());
            moved.push((w.clone(), t));
        }
        if !region.contains(arena.base()) {
            return Err(Error::truncation("translates share no window around the base"));
        }
        let local: Vec<usize> = region.iter().collect();
        let pos: HashMap<usize, usize> = local.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut labels = Vec::new();
        let mut sets: Vec<VertexSet> = Vec::new();
        for (w, t) in moved {
            let s = VertexSet::from_indices(local.len(), t.set().iter().filter_map(|v| pos.get(&v).copied()));
            if s.is_empty() || s.is_full() || sets.iter().any(|x| *x == s || *x == s.complement()) {
                continue;
            }
            labels.push(if w.is_empty() { "1".to_string() } else { w });
            sets.push(s);
        }
        Self::from_sets(labels, sets, pos[&arena.base()])
    }

    pub fn pairs(&self) -> usize {
        self.sets.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn sets(&self) -> &[VertexSet] {
        &self.sets
    }

    pub fn pocset(&self) -> &Pocset {
        &self.pocset
    }

    pub fn all_nested(&self) -> bool {
        self.pocset.crossing_pair().is_none()
    }

    /// The half-spaces containing a point.
    pub fn principal(&self, point: usize) -> Orientation {
        Orientation::new(self.sets.iter().map(|s| !s.contains(point)).collect())
    }

    pub fn base_orientation(&self) -> Orientation {
        self.principal(self.base_point)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SageevVertex {
    pub orientation: Orientation,
    /// Region points whose half-spaces are exactly this orientation.
    pub principal_at: Vec<usize>,
}

/// All orientations satisfying the choice and upward-closure conditions.
pub fn sageev_vertices(sys: &HalfSpaceSystem) -> Result<Vec<SageevVertex>> {
    let all = sys.pocset.orientations()?;
    let universe = sys.sets.first().map(|s| s.universe()).unwrap_or(0);
    let mut by_orientation: BTreeMap<Orientation, Vec<usize>> = BTreeMap::new();
    for x in 0..universe {
        by_orientation.entry(sys.principal(x)).or_default().push(x);
    }
    Ok(all
        .into_iter()
        .map(|o| SageevVertex { principal_at: by_orientation.get(&o).cloned().unwrap_or_default(), orientation: o })
        .collect())
}

/// Orientations joined when they differ on exactly one wall.
pub fn sageev_graph(vertices: &[SageevVertex]) -> Result<Graph> {
    let mut edges = Vec::new();
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            if vertices[i].orientation.difference(&vertices[j].orientation).len() == 1 {
                edges.push((i, j, 1));
            }
        }
    }
    let ids: Vec<String> = (0..vertices.len()).map(|i| format!("V{i}")).collect();
    Graph::from_indexed(ids, &edges, None)
}

/// Component of the orientation graph containing the base orientation.
pub fn principal_component(sys: &HalfSpaceSystem, vertices: &[SageevVertex], graph: &Graph) -> VertexSet {
    let base = sys.base_orientation();
    let start = vertices.iter().position(|v| v.orientation == base);
    let all = VertexSet::full(graph.vertex_count());
    match start {
        Some(s) => graph.components(&all).into_iter().find(|c| c.contains(s)).unwrap_or(all),
        None => VertexSet::empty(graph.vertex_count()),
    }
}

/// `A_V`: the base point's set changed on every wall where `V` disagrees
/// with the base orientation.
pub fn vertex_to_set(v: &SageevVertex, sys: &HalfSpaceSystem, base_name: &str) -> MetricPoint {
    let base = sys.base_orientation();
    MetricPoint::with_delta(base_name, v.orientation.difference(&base).into_iter().map(|p| sys.labels[p].clone()))
}

/// An exact half-integer, stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInteger(pub i64);

impl HalfInteger {
    pub fn from_int(n: i64) -> Self {
        HalfInteger(2 * n)
    }

    pub fn is_integer(&self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_integer(&self) -> Option<i64> {
        self.is_integer().then_some(self.0 / 2)
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

fn product_from(dab: usize, dac: usize, dbc: usize) -> HalfInteger {
    HalfInteger(dab as i64 + dac as i64 - dbc as i64)
}

/// `(B.C)_A`.
pub fn gromov_product(a: &MetricPoint, b: &MetricPoint, c: &MetricPoint) -> Result<HalfInteger> {
    Ok(product_from(metric_d(a, b)?, metric_d(a, c)?, metric_d(b, c)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperbolicityVerdict {
    pub pass: bool,
    /// Indices `(a, b, c, d)` with `(b.c)_a < min((b.d)_a, (c.d)_a)`.
    pub witness: Option<[usize; 4]>,
    pub quadruples: usize,
}

pub fn zero_hyperbolicity_check(points: &[MetricPoint]) -> Result<HyperbolicityVerdict> {
    let n = points.len();
    if n < 4 {
        return Err(Error::precondition("at least four points are needed"));
    }
    let mut d = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = metric_d(&points[i], &points[j])?;
        }
    }
    Ok(check_matrix(&d))
}

fn check_matrix(d: &[Vec<usize>]) -> HyperbolicityVerdict {
    let n = d.len();
    let mut quadruples = 0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for e in 0..n {
                    if a == b || a == c || a == e || b == c || b == e || c == e {
                        continue;
                    }
                    quadruples += 1;
                    let bc = product_from(d[a][b], d[a][c], d[b][c]);
                    let bd = product_from(d[a][b], d[a][e], d[b][e]);
                    let cd = product_from(d[a][c], d[a][e], d[c][e]);
                    if bc < bd.min(cd) {
                        return HyperbolicityVerdict { pass: false, witness: Some([a, b, c, e]), quadruples };
                    }
                }
            }
        }
    }
    HyperbolicityVerdict { pass: true, witness: None, quadruples }
}

/// A tree with unit edges in which the input points sit isometrically.
#[derive(Debug, Clone)]
pub struct ZTree {
    pub graph: Graph,
    /// Tree vertex of each input point.
    pub embedding: Vec<usize>,
}

/// Insert points one at a time; each new point hangs off the closest point
/// of the current spanning tree at the distance its Gromov products give.
pub fn build_z_tree(distances: &[Vec<usize>]) -> Result<ZTree> {
    let n = distances.len();
    if n == 0 {
        return Err(Error::precondition("no points"));
    }
    if distances.iter().any(|r| r.len() != n) || (0..n).any(|i| distances[i][i] != 0) {
        return Err(Error::structural("distance matrix must be square with zero diagonal"));
    }
    for i in 0..n {
        for j in 0..n {
            if distances[i][j] != distances[j][i] {
                return Err(Error::structural("distance matrix must be symmetric"));
            }
        }
    }
    if n >= 4 {
        let v = check_matrix(distances);
        if let Some(w) = v.witness {
            return Err(Error::precondition(format!("metric is not 0-hyperbolic; witness quadruple {w:?}")));
        }
    }
    let mut adj: Vec<Vec<usize>> = vec![vec![]];
    let mut embedding = vec![0usize];
    for x in 1..n {
        let d = &distances[x];
        // closest approach to the subtree spanned by the earlier points
        let mut best: Option<(i64, usize, usize)> = None;
        for i in 0..x {
            for j in i..x {
                let doubled = d[i] as i64 + d[j] as i64 - distances[i][j] as i64;
                if doubled < 0 {
                    return Err(Error::precondition("triangle inequality fails"));
                }
                if best.is_none_or(|(b, _, _)| doubled < b) {
                    best = Some((doubled, i, j));
                }
            }
        }
        let (doubled, i, j) = best.expect("at least one earlier point");
        if doubled % 2 != 0 {
            return Err(Error::precondition("Gromov products are not integers; no ℤ-tree exists"));
        }
        let hang = (doubled / 2) as usize;
        let along = d[i] - hang;
        let path = tree_path(&adj, embedding[i], embedding[j]);
        if along >= path.len() {
            return Err(Error::invariant("attachment point beyond the spanning path"));
        }
        let mut at = path[along];
        for _ in 0..hang {
            adj.push(vec![at]);
            let v = adj.len() - 1;
            adj[at].push(v);
            at = v;
        }
        embedding.push(at);
    }
    let mut edges = Vec::new();
    for (u, ns) in adj.iter().enumerate() {
        for &v in ns {
            if u < v {
                edges.push((u, v, 1));
            }
        }
    }
    let ids: Vec<String> = (0..adj.len())
        .map(|v| match embedding.iter().position(|&e| e == v) {
            Some(p) => format!("p{p}"),
            None => format!("s{v}"),
        })
        .collect();
    let tree = ZTree { graph: Graph::from_indexed(ids, &edges, None)?, embedding };
    if tree.distance_matrix() != distances {
        return Err(Error::invariant("ℤ-tree does not re-measure the input distances"));
    }
    Ok(tree)
}

fn tree_path(adj: &[Vec<usize>], from: usize, to: usize) -> Vec<usize> {
    let mut prev = vec![usize::MAX; adj.len()];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if prev[w] == usize::MAX {
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![to];
    while *path.last().unwrap() != from {
        path.push(prev[*path.last().unwrap()]);
    }
    path.reverse();
    path
}

impl ZTree {
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![vec![]; self.graph.vertex_count()];
        for e in self.graph.edges() {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        adj
    }

    pub fn distance_matrix(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        self.embedding
            .iter()
            .map(|&s| {
                let mut dist = vec![usize::MAX; adj.len()];
                dist[s] = 0;
                let mut queue = VecDeque::from([s]);
                while let Some(v) = queue.pop_front() {
                    for &w in &adj[v] {
                        if dist[w] == usize::MAX {
                            dist[w] = dist[v] + 1;
                            queue.push_back(w);
                        }
                    }
                }
                self.embedding.iter().map(|&t| dist[t]).collect()
            })
            .collect()
    }

    /// Vertices of degree greater than two.
    pub fn branch_vertices(&self) -> Vec<usize> {
        (0..self.graph.vertex_count()).filter(|&v| self.graph.degree(v) > 2).collect()
    }

    /// Isomorphism invariant of the tree with point labels, by rooting at
    /// the center and encoding subtrees bottom-up.
    pub fn canonical_form(&self) -> String {
        let adj = self.adjacency();
        let mut labels: Vec<Vec<usize>> = vec![vec![]; adj.len()];
        for (p, &v) in self.embedding.iter().enumerate() {
            labels[v].push(p);
        }
        let centers = tree_centers(&adj);
        let encode = |root: usize| {
            fn enc(adj: &[Vec<usize>], labels: &[Vec<usize>], v: usize, parent: usize) -> String {
                let mut kids: Vec<String> =
                    adj[v].iter().filter(|&&w| w != parent).map(|&w| enc(adj, labels, w, v)).collect();
                kids.sort();
                format!("({:?}{})", labels[v], kids.concat())
            }
            enc(&adj, &labels, root, usize::MAX)
        };
        centers.into_iter().map(encode).min().unwrap_or_default()
    }
}

fn tree_centers(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut leaves: Vec<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
    let mut remaining = n;
    while remaining > 2 {
        remaining -= leaves.len();
        let mut next = Vec::new();
        for &l in &leaves {
            for &w in &adj[l] {
                degree[w] -= 1;
                if degree[w] == 1 {
                    next.push(w);
                }
            }
        }
        leaves = next;
    }
    leaves.sort();
    leaves
}

/// The set `G[e, v]` of group elements `g` with `g·v` on the side `e` points
/// to, read off a tree on the arena.
#[derive(Debug, Clone)]
pub struct AlmostInvariant<'a> {
    arena: &'a Arena,
    tree: &'a StructureTree,
    /// Tree vertices `e` points to.
    target: VertexSet,
    /// An arena vertex over `v`.
    anchor: usize,
    pub pair: usize,
    pub toward_inside: bool,
    pub vertex: usize,
}

impl<'a> AlmostInvariant<'a> {
    /// `tree` must live on the arena graph. The edge of `pair` is directed
    /// toward its inside endpoint when `toward_inside`.
    pub fn new(arena: &'a Arena, tree: &'a StructureTree, pair: usize, toward_inside: bool, vertex: usize) -> Result<Self> {
        if tree.graph().vertex_count() != arena.vertex_count() {
            return Err(Error::precondition("the tree must be built on the arena graph"));
        }
        let edge = tree.edges().get(pair).ok_or_else(|| Error::precondition(format!("no tree edge {pair}")))?;
        let anchor = tree
            .preimage(vertex)
            .first()
            .ok_or_else(|| Error::Domain(format!("tree vertex {vertex} has no arena vertex over it")))?;
        let side = tree.vertices()[edge.inside].chosen(pair);
        let side = if toward_inside { side } else { side ^ 1 };
        let target = VertexSet::from_indices(
            tree.vertex_count(),
            (0..tree.vertex_count()).filter(|&t| tree.vertices()[t].chooses(side)),
        );
        Ok(AlmostInvariant { arena, tree, target, anchor, pair, toward_inside, vertex })
    }

    /// Whether `g` lies in the set; `None` when `g·v` leaves the arena.
    pub fn contains(&self, g: &str) -> Result<Option<bool>> {
        Ok(self.arena.translate(g, self.anchor)?.map(|x| self.target.contains(self.tree.nu(x))))
    }

    /// The arena vertices over the target side.
    pub fn wall(&self) -> VertexSet {
        VertexSet::from_indices(self.arena.vertex_count(), (0..self.arena.vertex_count()).filter(|&x| self.target.contains(self.tree.nu(x))))
    }

    /// Right cosets `Hy` of the counting oracle's subgroup on which `A` and
    /// `Ax` disagree, over sampled `y` of length at most `radius`.
    pub fn difference_cosets(&self, counting: &GroupOracle, x: &str, radius: usize) -> Result<(BTreeSet<String>, usize)> {
        let oracle = self.arena.oracle();
        let x_inv = oracle.inverse(x)?;
        let mut cosets = BTreeSet::new();
        let mut unknown = 0;
        for y in crate::relative::word_ball(self.arena, radius)? {
            // y ∈ Ax iff y x^-1 ∈ A
            match (self.contains(&y)?, self.contains(&oracle.multiply(&y, &x_inv)?)?) {
                (Some(a), Some(b)) if a != b => {
                    cosets.insert(right_coset_label(counting, &y)?);
                }
                (Some(_), Some(_)) => {}
                _ => unknown += 1,
            }
        }
        Ok((cosets, unknown))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlmostInvariantReport {
    /// Sampled elements of the set.
    pub members: Vec<String>,
    /// Per generator, the `H`-cosets in `A + Ax`.
    pub differences: Vec<(String, Finiteness)>,
    /// `hA = A` for the counting subgroup's generators.
    pub left_h_invariant: bool,
    /// `Ak = A` for sampled `k` fixing the vertex.
    pub right_stabilizer_invariant: bool,
    pub boundary_samples: usize,
}

/// Label of the right coset `Hy`, via the left coset `y^-1 H`.
pub fn right_coset_label(oracle: &GroupOracle, y: &str) -> Result<String> {
    let key = oracle.coset_key(&oracle.inverse(y)?)?;
    Ok(if key.is_empty() { "1".to_string() } else { key })
}

/// Builds `A = G[e, v]` from a tree on the arena and checks almost
/// invariance on samples, counting right cosets of the subgroup of
/// `counting` (which may differ from the arena's). A generator's count is
/// confirmed when it is the same at sample radii `radius - 1` and `radius`.
pub fn tree_to_almost_invariant(
    arena: &Arena,
    tree: &StructureTree,
    pair: usize,
    toward_inside: bool,
    vertex: usize,
    radius: usize,
    counting: &GroupOracle,
) -> Result<AlmostInvariantReport> {
    let a = AlmostInvariant::new(arena, tree, pair, toward_inside, vertex)?;
    let oracle = arena.oracle();
    let sample = crate::relative::word_ball(arena, radius)?;
    let mut members = Vec::new();
    let mut boundary_samples = 0;
    for g in &sample {
        match a.contains(g)? {
            Some(true) => members.push(g.clone()),
            Some(false) => {}
            None => boundary_samples += 1,
        }
    }
    let mut differences = Vec::new();
    for (_, x) in oracle.s_words() {
        let (wide, _) = a.difference_cosets(counting, x, radius)?;
        let (narrow, _) = a.difference_cosets(counting, x, radius.saturating_sub(1))?;
        let verdict = if wide.len() == narrow.len() {
            Finiteness::Confirmed { orbits: wide.len() }
        } else {
            Finiteness::Inconclusive { orbits_seen: wide.len(), beyond_interior: wide.len() - narrow.len() }
        };
        differences.push((x.clone(), verdict));
    }
    let mut left_h_invariant = true;
    for g in &sample {
        let Some(inside) = a.contains(g)? else { continue };
        for &h in counting.h_letters() {
            if let Some(other) = a.contains(&oracle.multiply(&h.to_string(), g)?)? {
                left_h_invariant &= other == inside;
            }
        }
    }
    let stabilizer: Vec<&String> = sample
        .iter()
        .filter(|k| arena.translate(k, a.anchor).ok().flatten().map(|y| tree.nu(y)) == Some(vertex))
        .collect();
    let mut right_stabilizer_invariant = true;
    for g in &sample {
        let Some(inside) = a.contains(g)? else { continue };
        for k in &stabilizer {
            if let Some(other) = a.contains(&oracle.multiply(g, k)?)? {
                right_stabilizer_invariant &= other == inside;
            }
        }
    }
    Ok(AlmostInvariantReport { members, differences, left_h_invariant, right_stabilizer_invariant, boundary_samples })
}

/// Right translates `Ag` as points relative to `A`, over sampled `y` of
/// length at most `radius`, labelled by right cosets of the arena's subgroup.
pub fn orbit_points(a: &AlmostInvariant<'_>, words: &[String], radius: usize) -> Result<Vec<MetricPoint>> {
    let oracle = a.arena.oracle();
    let sample = crate::relative::word_ball(a.arena, radius)?;
    words
        .iter()
        .map(|g| {
            let g_inv = oracle.inverse(g)?;
            let mut delta = BTreeSet::new();
            for y in &sample {
                // y ∈ Ag iff y g^-1 ∈ A
                match (a.contains(y)?, a.contains(&oracle.multiply(y, &g_inv)?)?) {
                    (Some(p), Some(q)) if p != q => {
                        delta.insert(right_coset_label(oracle, y)?);
                    }
                    (Some(_), Some(_)) => {}
                    _ => return Err(Error::truncation(format!("membership of {y:?} in A{g:?} leaves the arena"))),
                }
            }
            Ok(MetricPoint { base: "A".into(), delta })
        })
        .collect()
}

/// The labels used by a set of pairs, for diagnostics.
pub fn wall_labels(sys: &HalfSpaceSystem, pairs: &[usize]) -> Vec<String> {
    pairs.iter().map(|&p| sys.labels[p].clone()).collect()
}

/// Half-space index of a labelled side.
pub fn side_of(sys: &HalfSpaceSystem, label: &str, complement: bool) -> Option<usize> {
    sys.labels.iter().position(|l| l == label).map(|p| half(p, complement))
}
