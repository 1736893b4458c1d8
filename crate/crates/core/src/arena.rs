//! Truncated coset graphs `X` with vertex set `{gH}`.
//!
//! The arena holds the cosets of group elements of word length at most
//! `radius` in the generating set `S`, and the edges `{gH, gsH}` realized
//! inside that ball. Statements about vertices of depth at most the interior
//! radius are treated as exact; anything else is reported as inconclusive.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::bitset::VertexSet;
use crate::error::{check_guard, Error, Result};
use crate::graph::Graph;
use crate::group::GroupOracle;

pub const ARENA_ELEMENT_GUARD: usize = 20_000;

#[derive(Debug, Clone)]
pub struct Arena {
    oracle: GroupOracle,
    radius: usize,
    interior: usize,
    graph: Graph,
    keys: Vec<String>,
    reps: Vec<String>,
    depth: Vec<usize>,
    index: HashMap<String, usize>,
    actions: BTreeMap<char, Vec<Option<usize>>>,
    vertex_orbit: Vec<usize>,
    edge_orbit: Vec<usize>,
    cache: TranslationCache,
}

/// Translation maps already computed, keyed by normal form.
#[derive(Debug, Default)]
struct TranslationCache(Mutex<HashMap<String, Arc<Vec<Option<usize>>>>>);

impl Clone for TranslationCache {
    fn clone(&self) -> Self {
        TranslationCache(Mutex::new(self.0.lock().map(|m| m.clone()).unwrap_or_default()))
    }
}

/// Outcome of an `H`-finiteness query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Finiteness {
    Confirmed { orbits: usize },
    Inconclusive { orbits_seen: usize, beyond_interior: usize },
}

impl Finiteness {
    pub fn is_confirmed(&self) -> bool {
        matches!(self, Finiteness::Confirmed { .. })
    }

    pub fn orbits(&self) -> usize {
        match *self {
            Finiteness::Confirmed { orbits } => orbits,
            Finiteness::Inconclusive { orbits_seen, .. } => orbits_seen,
        }
    }
}

pub fn build_coset_graph(oracle: &GroupOracle, radius: usize) -> Result<Arena> {
    if radius < 2 {
        return Err(Error::precondition(format!("arena radius {radius} is below 2")));
    }
    let mut steps: Vec<String> = Vec::new();
    for (_, w) in oracle.s_words() {
        for s in [oracle.normal_form(w)?, oracle.inverse(w)?] {
            if !s.is_empty() && !steps.contains(&s) {
                steps.push(s);
            }
        }
    }

    let mut length: HashMap<String, usize> = HashMap::from([(String::new(), 0)]);
    let mut order = vec![String::new()];
    let mut edge_pairs: Vec<(String, String)> = Vec::new();
    let mut head = 0;
    while head < order.len() {
        let g = order[head].clone();
        head += 1;
        let d = length[&g];
        if d == radius {
            continue;
        }
        for s in &steps {
            let gs = oracle.multiply(&g, s)?;
            if !length.contains_key(&gs) {
                length.insert(gs.clone(), d + 1);
                order.push(gs.clone());
                check_guard("arena group elements", order.len(), ARENA_ELEMENT_GUARD)?;
            }
            edge_pairs.push((g.clone(), gs));
        }
    }

    // cosets, keyed by normal form with trailing subgroup letters removed
    let mut best: HashMap<String, (usize, String)> = HashMap::new();
    for g in &order {
        let key = oracle.coset_key(g)?;
        let cand = (length[g], g.clone());
        let entry = best.entry(key).or_insert_with(|| cand.clone());
        if cand < *entry {
            *entry = cand;
        }
    }
    let mut cosets: Vec<(usize, String, String)> = best.into_iter().map(|(k, (d, r))| (d, k, r)).collect();
    cosets.sort();
    let keys: Vec<String> = cosets.iter().map(|c| c.1.clone()).collect();
    let reps: Vec<String> = cosets.iter().map(|c| c.2.clone()).collect();
    let depth: Vec<usize> = cosets.iter().map(|c| c.0).collect();
    let index: HashMap<String, usize> = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();

    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (g, gs) in &edge_pairs {
        let (a, b) = (index[&oracle.coset_key(g)?], index[&oracle.coset_key(gs)?]);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let ids: Vec<String> = keys.iter().map(|k| vertex_id(k)).collect();
    let edge_list: Vec<(usize, usize, u32)> = edges.iter().map(|&(a, b)| (a, b, 1)).collect();
    let graph = Graph::from_indexed(ids, &edge_list, Some(0))?;

    let mut arena = Arena {
        oracle: oracle.clone(),
        radius,
        interior: radius - 1,
        graph,
        keys,
        reps,
        depth,
        index,
        actions: BTreeMap::new(),
        vertex_orbit: vec![],
        edge_orbit: vec![],
        cache: TranslationCache::default(),
    };
    for &c in oracle.letters() {
        let act = (0..arena.keys.len())
            .map(|v| arena.translate(&c.to_string(), v))
            .collect::<Result<Vec<_>>>()?;
        arena.actions.insert(c, act);
    }
    for &h in oracle.h_letters() {
        if arena.actions[&h][0] != Some(0) {
            return Err(Error::invariant(format!("subgroup letter {h} moves the base coset")));
        }
    }
    arena.compute_orbits();
    Ok(arena)
}

fn vertex_id(key: &str) -> String {
    if key.is_empty() {
        "o".to_string()
    } else {
        key.to_string()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

/// Dense labels `0..k` in order of first appearance.
fn relabel(parent: &mut [usize]) -> Vec<usize> {
    let mut names = HashMap::new();
    (0..parent.len())
        .map(|i| {
            let r = find(parent, i);
            let next = names.len();
            *names.entry(r).or_insert(next)
        })
        .collect()
}

impl Arena {
    fn compute_orbits(&mut self) {
        let n = self.keys.len();
        let mut parent: Vec<usize> = (0..n).collect();
        for &h in self.oracle.h_letters() {
            for v in 0..n {
                if let Some(w) = self.actions[&h][v] {
                    union(&mut parent, v, w);
                }
            }
        }
        self.vertex_orbit = relabel(&mut parent);

        let edges = self.graph.edges();
        let edge_index: HashMap<(usize, usize), usize> =
            edges.iter().enumerate().map(|(i, e)| ((e.u, e.v), i)).collect();
        let mut parent: Vec<usize> = (0..edges.len()).collect();
        for &h in self.oracle.h_letters() {
            for (i, e) in edges.iter().enumerate() {
                if let (Some(a), Some(b)) = (self.actions[&h][e.u], self.actions[&h][e.v]) {
                    if let Some(&j) = edge_index.get(&(a.min(b), a.max(b))) {
                        union(&mut parent, i, j);
                    }
                }
            }
        }
        self.edge_orbit = relabel(&mut parent);
    }

    /// Same arena with a smaller exact region.
    pub fn with_interior(mut self, interior: usize) -> Result<Self> {
        if interior >= self.radius {
            return Err(Error::precondition(format!(
                "interior radius {interior} must be below the arena radius {}",
                self.radius
            )));
        }
        self.interior = interior;
        Ok(self)
    }

    pub fn oracle(&self) -> &GroupOracle {
        &self.oracle
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn interior_radius(&self) -> usize {
        self.interior
    }

    pub fn vertex_count(&self) -> usize {
        self.keys.len()
    }

    pub fn base(&self) -> usize {
        0
    }

    pub fn key(&self, v: usize) -> &str {
        &self.keys[v]
    }

    pub fn representative(&self, v: usize) -> &str {
        &self.reps[v]
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn vertex_of(&self, word: &str) -> Result<Option<usize>> {
        Ok(self.index.get(&self.oracle.coset_key(word)?).copied())
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.depth[v] == self.radius
    }

    pub fn is_interior(&self, v: usize) -> bool {
        self.depth[v] <= self.interior
    }

    pub fn interior_set(&self) -> VertexSet {
        VertexSet::from_indices(self.vertex_count(), (0..self.vertex_count()).filter(|&v| self.is_interior(v)))
    }

    pub fn vertex_orbit(&self, v: usize) -> usize {
        self.vertex_orbit[v]
    }

    pub fn edge_orbit(&self, e: usize) -> usize {
        self.edge_orbit[e]
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let (u, v) = (a.min(b), a.max(b));
        self.graph.edges().iter().position(|e| e.u == u && e.v == v)
    }

    /// `word * v`, or `None` when the image lies outside the arena.
    pub fn translate(&self, word: &str, v: usize) -> Result<Option<usize>> {
        self.vertex_of(&format!("{word}{}", self.reps[v]))
    }

    /// Left translation of a vertex set; fails naming the vertices that leave
    /// the arena.
    pub fn act(&self, word: &str, set: &VertexSet) -> Result<VertexSet> {
        let mut image = VertexSet::empty(self.vertex_count());
        let mut lost = Vec::new();
        for v in set.iter() {
            match self.translate(word, v)? {
                Some(w) => image.insert(w),
                None => lost.push(self.graph.id(v).to_string()),
            }
        }
        if lost.is_empty() {
            Ok(image)
        } else {
            Err(Error::truncation(format!("translating by {word:?} leaves the arena at {}", lost.join(","))))
        }
    }

    /// Left translation of the whole arena, as a partial vertex map.
    pub fn translation(&self, word: &str) -> Result<Vec<Option<usize>>> {
        let nf = self.oracle.normal_form(word)?;
        if let Some(map) = self.cache.0.lock().ok().and_then(|m| m.get(&nf).cloned()) {
            return Ok(map.to_vec());
        }
        let map: Vec<Option<usize>> = (0..self.vertex_count()).map(|v| self.translate(&nf, v)).collect::<Result<_>>()?;
        if let Ok(mut m) = self.cache.0.lock() {
            m.insert(nf, Arc::new(map.clone()));
        }
        Ok(map)
    }

    /// Orbit count for a set of vertices.
    pub fn vertex_finiteness(&self, set: &VertexSet) -> Finiteness {
        let orbits: BTreeSet<usize> = set.iter().map(|v| self.vertex_orbit[v]).collect();
        let beyond = set.iter().filter(|&v| !self.is_interior(v)).count();
        self.verdict(orbits.len(), beyond)
    }

    /// Orbit count for a set of edges, given by index.
    pub fn edge_finiteness(&self, edges: &[usize]) -> Finiteness {
        let orbits: BTreeSet<usize> = edges.iter().map(|&e| self.edge_orbit[e]).collect();
        let es = self.graph.edges();
        let beyond = edges.iter().filter(|&&e| !self.is_interior(es[e].u) || !self.is_interior(es[e].v)).count();
        self.verdict(orbits.len(), beyond)
    }

    fn verdict(&self, orbits: usize, beyond: usize) -> Finiteness {
        if beyond == 0 {
            Finiteness::Confirmed { orbits }
        } else {
            Finiteness::Inconclusive { orbits_seen: orbits, beyond_interior: beyond }
        }
    }

    /// Indices of the arena edges with exactly one endpoint in `set`.
    pub fn coboundary(&self, set: &VertexSet) -> Vec<usize> {
        self.graph
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| set.contains(e.u) != set.contains(e.v))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn quotient_graph(&self) -> Result<Quotient> {
        let k = self.vertex_orbit.iter().max().map_or(0, |m| m + 1);
        let mut rep = vec![usize::MAX; k];
        for v in 0..self.vertex_count() {
            let o = self.vertex_orbit[v];
            if rep[o] == usize::MAX {
                rep[o] = v;
            }
        }
        if !(0..k).any(|o| self.is_interior(rep[o])) {
            return Err(Error::truncation("no subgroup orbit meets the interior"));
        }
        let mut between: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
        for (i, e) in self.graph.edges().iter().enumerate() {
            let (a, b) = (self.vertex_orbit[e.u], self.vertex_orbit[e.v]);
            if a != b {
                between.entry((a.min(b), a.max(b))).or_default().insert(self.edge_orbit[i]);
            }
        }
        let ids: Vec<String> = rep.iter().map(|&v| self.graph.id(v).to_string()).collect();
        let edges: Vec<(usize, usize, u32)> =
            between.iter().map(|(&(a, b), orbits)| (a, b, orbits.len() as u32)).collect();
        let graph = Graph::from_indexed(ids, &edges, Some(self.vertex_orbit[0]))?;
        let exact = (0..k).map(|o| self.is_interior(rep[o])).collect();
        Ok(Quotient { graph, projection: self.vertex_orbit.clone(), min_depth: rep.iter().map(|&v| self.depth[v]).collect(), exact })
    }

    pub fn to_spec(&self) -> ArenaSpec {
        let es = self.graph.edges();
        ArenaSpec {
            group: self.oracle.name().to_string(),
            subgroup: self.oracle.h_generators().iter().map(|c| c.to_string()).collect(),
            radius: self.radius,
            interior_radius: self.interior,
            vertices: (0..self.vertex_count())
                .map(|v| ArenaVertexSpec {
                    id: self.graph.id(v).to_string(),
                    representative: self.reps[v].clone(),
                    depth: self.depth[v],
                    boundary: self.is_boundary(v),
                    orbit: self.vertex_orbit[v],
                })
                .collect(),
            edges: es
                .iter()
                .enumerate()
                .map(|(i, e)| ArenaEdgeSpec {
                    ends: [self.graph.id(e.u).to_string(), self.graph.id(e.v).to_string()],
                    orbit: self.edge_orbit[i],
                })
                .collect(),
        }
    }

    /// Vertices whose depth is at most `r`, as a set.
    pub fn ball_set(&self, r: usize) -> VertexSet {
        VertexSet::from_indices(self.vertex_count(), (0..self.vertex_count()).filter(|&v| self.depth[v] <= r))
    }

    /// Breadth-first graph distance from the base, for cross-checking depths.
    pub fn graph_distances(&self) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        dist[0] = 0;
        let mut queue = VecDeque::from([0]);
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
}

/// `H\X` with capacities counting edge orbits.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub graph: Graph,
    /// Arena vertex to quotient vertex.
    pub projection: Vec<usize>,
    pub min_depth: Vec<usize>,
    /// Quotient vertices whose orbit meets the interior.
    pub exact: Vec<bool>,
}

impl Quotient {
    /// The arena vertices lying over a set of quotient vertices.
    pub fn pullback(&self, set: &VertexSet) -> VertexSet {
        VertexSet::from_indices(self.projection.len(), (0..self.projection.len()).filter(|&v| set.contains(self.projection[v])))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArenaSpec {
    pub group: String,
    pub subgroup: Vec<String>,
    pub radius: usize,
    pub interior_radius: usize,
    pub vertices: Vec<ArenaVertexSpec>,
    pub edges: Vec<ArenaEdgeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArenaVertexSpec {
    pub id: String,
    pub representative: String,
    pub depth: usize,
    pub boundary: bool,
    pub orbit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArenaEdgeSpec {
    pub ends: [String; 2],
    pub orbit: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::fixture;

    #[test]
    fn integer_line() {
        let a = build_coset_graph(&fixture("z").unwrap(), 4).unwrap();
        assert_eq!(a.vertex_count(), 9);
        assert_eq!(a.graph().edges().len(), 8);
        assert!((0..9).all(|v| a.graph().degree(v) <= 2));
        let q = a.quotient_graph().unwrap();
        assert_eq!(q.graph.vertex_count(), 9);
    }

    #[test]
    fn dihedral_line() {
        let a = build_coset_graph(&fixture("dinf").unwrap(), 4).unwrap();
        assert_eq!(a.translate("s", 0).unwrap(), Some(0));
        assert!((0..a.vertex_count()).all(|v| a.graph().degree(v) <= 2));
        assert_eq!(a.graph().edges().len() + 1, a.vertex_count());
        let q = a.quotient_graph().unwrap();
        // line tst - t - o - st - stst folds to o - [t, st] - [tst, stst]
        assert_eq!(a.vertex_count(), 5);
        assert_eq!(q.graph.vertex_count(), 3);
        assert!(q.graph.edges().iter().all(|e| e.capacity == 1));
    }

    #[test]
    fn free_group_tree() {
        let a = build_coset_graph(&fixture("f2").unwrap(), 3).unwrap();
        assert_eq!(a.graph().edges().len() + 1, a.vertex_count());
        let b = a.vertex_of("b").unwrap().unwrap();
        let ab = a.vertex_of("ab").unwrap().unwrap();
        assert_eq!(a.vertex_orbit(b), a.vertex_orbit(ab));
        assert_eq!(a.graph().degree(0), a.graph().neighbors(0).count());
    }

    #[test]
    fn plane_mod_axis() {
        let a = build_coset_graph(&fixture("z2").unwrap(), 4).unwrap();
        let q = a.quotient_graph().unwrap();
        assert_eq!(q.graph.vertex_count(), a.vertex_count());
        assert_eq!(q.graph.edges().len() + 1, q.graph.vertex_count());
    }

    #[test]
    fn act_reports_escapes() {
        let a = build_coset_graph(&fixture("z").unwrap(), 4).unwrap();
        let far = VertexSet::from_indices(9, [a.vertex_of("tttt").unwrap().unwrap()]);
        assert!(matches!(a.act("t", &far), Err(Error::Truncation(_))));
        assert_eq!(a.act("", &far).unwrap(), far);
    }

    #[test]
    fn empty_set_is_finite() {
        let a = build_coset_graph(&fixture("f2").unwrap(), 3).unwrap();
        assert_eq!(a.edge_finiteness(&[]), Finiteness::Confirmed { orbits: 0 });
    }
}
