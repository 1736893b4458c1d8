//! Relative structure: walls lifted from `H\X` to the arena, the relative
//! tree, corners of translated walls, and trees assembled from translates.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::arena::{Arena, Finiteness, Quotient};
use crate::bitset::VertexSet;
use crate::cuts::{
    extract_nested_generators, extract_uncrossed_generators, representative, sets_nested, NestedSystem,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::pocset::{half, Pocset};
use crate::tree::{build_tree, StructureTree};

/// Quotients up to this size use the exhaustive greedy extraction.
const EXHAUSTIVE_QUOTIENT_LIMIT: usize = 16;

/// A vertex set whose membership is known only on `exact`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Window {
    set: VertexSet,
    exact: VertexSet,
}

impl Window {
    pub fn new(set: &VertexSet, exact: &VertexSet) -> Self {
        Window { set: set.intersection(exact), exact: exact.clone() }
    }

    /// A set known on the arena's interior.
    pub fn interior(arena: &Arena, set: &VertexSet) -> Self {
        Self::new(set, &arena.interior_set())
    }

    pub fn set(&self) -> &VertexSet {
        &self.set
    }

    pub fn exact(&self) -> &VertexSet {
        &self.exact
    }

    pub fn complement(&self) -> Window {
        Window { set: self.exact.difference(&self.set), exact: self.exact.clone() }
    }

    /// `Some(true)` inside, `Some(false)` outside, `None` where unknown.
    pub fn contains(&self, v: usize) -> Option<bool> {
        self.exact.contains(v).then(|| self.set.contains(v))
    }

    /// Left translate; membership stays known on the image of the exact region.
    pub fn translate(&self, arena: &Arena, word: &str) -> Result<Window> {
        let map = arena.translation(word)?;
        let n = arena.vertex_count();
        let image = |s: &VertexSet| VertexSet::from_indices(n, s.iter().filter_map(|v| map[v]));
        Ok(Window { set: image(&self.set), exact: image(&self.exact) })
    }

    pub fn restrict(&self, region: &VertexSet) -> Window {
        Window::new(&self.set, &self.exact.intersection(region))
    }
}

fn h_sample(arena: &Arena, length: usize) -> Result<Vec<String>> {
    let oracle = arena.oracle();
    let mut seen: BTreeSet<String> = BTreeSet::from([String::new()]);
    let mut frontier = vec![String::new()];
    for _ in 0..length {
        let mut next = Vec::new();
        for w in &frontier {
            for &h in oracle.h_letters() {
                let v = oracle.multiply(w, &h.to_string())?;
                if seen.insert(v.clone()) {
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<String> = seen.into_iter().collect();
    out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    Ok(out)
}

/// Sampled elements of `H ∩ gHg^-1`.
fn intersection_sample(arena: &Arena, g: &str) -> Result<Vec<String>> {
    let oracle = arena.oracle();
    let mut out = Vec::new();
    for h in h_sample(arena, arena.radius())? {
        if oracle.in_conjugate(&h, g)? {
            out.push(h);
        }
    }
    Ok(out)
}

/// Classes of `edges` under the sampled elements, as labels.
fn edge_classes(arena: &Arena, edges: &[usize], elements: &[String]) -> Result<Vec<usize>> {
    let es = arena.graph().edges();
    let position: HashMap<usize, usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut parent: Vec<usize> = (0..edges.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for w in elements {
        let map = arena.translation(w)?;
        for (i, &e) in edges.iter().enumerate() {
            if let (Some(a), Some(b)) = (map[es[e].u], map[es[e].v]) {
                if let Some(j) = arena.edge_index(a, b).and_then(|k| position.get(&k)) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, *j));
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    Ok((0..edges.len()).map(|i| find(&mut parent, i)).collect())
}

/// Coboundary edges of `set` with both ends in `region`.
fn coboundary_within(arena: &Arena, set: &VertexSet, region: &VertexSet) -> Vec<usize> {
    arena
        .coboundary(set)
        .into_iter()
        .filter(|&e| {
            let edge = &arena.graph().edges()[e];
            region.contains(edge.u) && region.contains(edge.v)
        })
        .collect()
}

/// One component of the preimage of a quotient cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedCut {
    pub component: VertexSet,
    /// Index of the quotient member it lifts.
    pub parent: usize,
    /// Sampled `h` with `hC = C` on the common exact region.
    pub stabilizer_sample: Vec<String>,
    /// Every sampled `hC` equals `C` or misses it.
    pub disjoint_or_equal: bool,
    /// The sampled translates cover the preimage one step inside the interior.
    pub covers_preimage: bool,
    /// `H`-orbits of interior edges of `δC` and of the preimage's coboundary agree.
    pub projection_matches: bool,
    pub coboundary_orbits: usize,
}

/// Lifts of the quotient cut `e` (a set of quotient vertices).
pub fn lift_cut(arena: &Arena, quotient: &Quotient, e: &VertexSet, parent: usize) -> Result<Vec<LiftedCut>> {
    let preimage = quotient.pullback(e);
    let interior = arena.interior_set();
    let sample = h_sample(arena, arena.radius())?;
    // translates of a truncated component reach one step less far
    let deep = arena.ball_set(arena.interior_radius().saturating_sub(1));
    let lifted_orbits: BTreeSet<usize> = coboundary_within(arena, &preimage, &interior)
        .into_iter()
        .map(|x| arena.edge_orbit(x))
        .collect();
    let mut out = Vec::new();
    for component in arena.graph().components(&preimage) {
        if component.is_disjoint(&interior) {
            continue;
        }
        let window = Window::interior(arena, &component);
        let whole = Window::new(&component, &VertexSet::full(arena.vertex_count()));
        let mut stabilizer_sample = Vec::new();
        let mut disjoint_or_equal = true;
        let mut covered = VertexSet::empty(arena.vertex_count());
        for h in &sample {
            let moved = window.translate(arena, h)?;
            covered = covered.union(whole.translate(arena, h)?.set());
            let common = moved.exact().intersection(window.exact());
            let (a, b) = (moved.set().intersection(&common), window.set().intersection(&common));
            if a == b {
                stabilizer_sample.push(h.clone());
            } else if !a.is_disjoint(&b) {
                disjoint_or_equal = false;
            }
        }
        let own: BTreeSet<usize> = coboundary_within(arena, &component, &interior)
            .into_iter()
            .map(|x| arena.edge_orbit(x))
            .collect();
        let all_edges = arena.coboundary(&component);
        out.push(LiftedCut {
            covers_preimage: preimage.intersection(&deep).is_subset(&covered),
            projection_matches: own == lifted_orbits,
            coboundary_orbits: all_edges.iter().map(|&x| arena.edge_orbit(x)).collect::<BTreeSet<_>>().len(),
            component,
            parent,
            stabilizer_sample,
            disjoint_or_equal,
        });
    }
    Ok(out)
}

/// `E_n` of the quotient and its lifts, with the tree they define.
#[derive(Debug, Clone)]
pub struct RelativeSystem {
    pub quotient: Quotient,
    pub quotient_system: NestedSystem,
    pub walls: Vec<LiftedCut>,
    pub system: NestedSystem,
    pub tree: StructureTree,
    /// Largest number of walls strictly between two comparable half-spaces.
    pub longest_interval: usize,
}

pub fn quotient_generators(q: &Graph, n: u64) -> Result<NestedSystem> {
    if q.vertex_count() <= EXHAUSTIVE_QUOTIENT_LIMIT {
        extract_nested_generators(q, n)
    } else {
        extract_uncrossed_generators(q, n)
    }
}

pub fn relative_nested_system(arena: &Arena, n: u64) -> Result<RelativeSystem> {
    let quotient = arena.quotient_graph()?;
    let quotient_system = quotient_generators(&quotient.graph, n)?;
    let mut walls = Vec::new();
    for (i, e) in quotient_system.member_sets().iter().enumerate() {
        for lift in lift_cut(arena, &quotient, e, i)? {
            if lift.coboundary_orbits as u64 <= n {
                walls.push(lift);
            }
        }
    }
    let sets: Vec<VertexSet> = walls.iter().map(|w| w.component.clone()).collect();
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if !sets_nested(&sets[i], &sets[j]) {
                return Err(Error::invariant(format!(
                    "lifted walls {:?} and {:?} cross",
                    arena.graph().names(&sets[i]),
                    arena.graph().names(&sets[j])
                )));
            }
        }
    }
    let system = NestedSystem::new(arena.graph().clone(), sets, n, vec![])?;
    let longest_interval = longest_interval(&Pocset::from_members(system.member_sets()));
    let tree = build_tree(&system)?;
    Ok(RelativeSystem { quotient, quotient_system, walls, system, tree, longest_interval })
}

fn longest_interval(p: &Pocset) -> usize {
    let h = 2 * p.pairs();
    let mut best = 0;
    for a in 0..h {
        for b in 0..h {
            if a != b && p.le(a, b) {
                best = best.max((0..h).filter(|&c| c != a && c != b && p.le(a, c) && p.le(c, b)).count());
            }
        }
    }
    best
}

impl RelativeSystem {
    pub fn wall_windows(&self, arena: &Arena) -> Vec<Window> {
        self.system.member_sets().iter().map(|c| Window::interior(arena, c)).collect()
    }

    /// Longest path in the relative tree.
    pub fn tree_diameter(&self) -> usize {
        let far = |start: usize| {
            let mut dist = vec![usize::MAX; self.tree.vertex_count()];
            dist[start] = 0;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for w in self.tree.neighbors(v) {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
            (0..dist.len()).max_by_key(|&v| (dist[v], std::cmp::Reverse(v))).map(|v| (v, dist[v])).unwrap_or((start, 0))
        };
        let (a, _) = far(0);
        far(a).1
    }

    /// Tree vertex of the base coset.
    pub fn base_vertex(&self) -> usize {
        self.tree.nu(0)
    }

    /// Whether every sampled `H` element fixes the base vertex of the tree.
    pub fn base_fixed_by_h(&self, arena: &Arena) -> Result<bool> {
        let base = self.base_vertex();
        for h in h_sample(arena, arena.radius())? {
            let perm = self.wall_permutation(arena, &h)?;
            let o = &self.tree.vertices()[base];
            for (p, q) in perm.iter().enumerate() {
                if let Some((q, flipped)) = *q {
                    if o.takes_complement(q) != (o.takes_complement(p) ^ flipped) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Where a word sends each wall, when the image is a wall on the window.
    pub fn wall_permutation(&self, arena: &Arena, word: &str) -> Result<Vec<Option<(usize, bool)>>> {
        let members = self.system.member_sets();
        let windows = self.wall_windows(arena);
        windows
            .iter()
            .map(|w| {
                let moved = w.translate(arena, word)?;
                let common = moved.exact().intersection(&arena.interior_set());
                if moved.set().intersection(&common).is_empty() || common.is_subset(moved.set()) {
                    return Ok(None);
                }
                Ok(members.iter().enumerate().find_map(|(q, m)| {
                    let m = m.intersection(&common);
                    let s = moved.set().intersection(&common);
                    if m == s {
                        Some((q, false))
                    } else if m == common.difference(&s) {
                        Some((q, true))
                    } else {
                        None
                    }
                }))
            })
            .collect()
    }
}

/// Labels for the corners `A∩gB`, `A∩gB*`, `A*∩gB`, `A*∩gB*`.
pub const CORNER_NAMES: [&str; 4] = ["A∩gB", "A∩gB*", "A*∩gB", "A*∩gB*"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerReport {
    pub word: String,
    pub corner: Vec<String>,
    pub empty_corners: Vec<String>,
    pub nested: bool,
    pub finiteness: Finiteness,
    pub sampled_intersection: usize,
}

fn check_positions(arena: &Arena, a: &Window, b: &Window, g: &str) -> Result<usize> {
    // o ∈ gB exactly when g^-1 o ∈ B
    let back = arena.vertex_of(&arena.oracle().inverse(g)?)?;
    match back.and_then(|v| b.contains(v)) {
        Some(false) => {}
        Some(true) => return Err(Error::precondition("o ∈ gB* fails: o lies in gB")),
        None => return Err(Error::truncation("o ∈ gB* undecided: o outside the translated window")),
    }
    let go = arena
        .vertex_of(g)?
        .ok_or_else(|| Error::truncation(format!("go for g = {g:?} lies outside the arena")))?;
    match a.contains(go) {
        Some(false) => Ok(go),
        Some(true) => Err(Error::precondition("go ∈ A* fails: go lies in A")),
        None => Err(Error::truncation("go ∈ A* undecided: go outside the window of A")),
    }
}

fn corners(a: &Window, gb: &Window) -> (VertexSet, [VertexSet; 4]) {
    let common = a.exact().intersection(gb.exact());
    let (a_in, a_out) = (a.set().intersection(&common), common.difference(a.set()));
    let (b_in, b_out) = (gb.set().intersection(&common), common.difference(gb.set()));
    let c = [
        a_in.intersection(&b_in),
        a_in.intersection(&b_out),
        a_out.intersection(&b_in),
        a_out.intersection(&b_out),
    ];
    (common, c)
}

/// The corner `A ∩ gB` and the `(H ∩ gHg^-1)`-orbits its coboundary meets.
///
/// An orbit class is trusted when it has an edge off the outer shell of the
/// interior; the count is confirmed when every class is trusted.
pub fn kropholler_corner(arena: &Arena, a: &Window, b: &Window, g: &str) -> Result<CornerReport> {
    check_positions(arena, a, b, g)?;
    let gb = b.translate(arena, g)?;
    let (common, c) = corners(a, &gb);
    let edges = coboundary_within(arena, &c[0], &common);
    let sample = intersection_sample(arena, g)?;
    let classes = edge_classes(arena, &edges, &sample)?;
    let inner = arena.ball_set(arena.interior_radius().saturating_sub(1)).intersection(&common);
    let es = arena.graph().edges();
    let distinct: BTreeSet<usize> = classes.iter().copied().collect();
    let trusted: BTreeSet<usize> = edges
        .iter()
        .zip(&classes)
        .filter(|(&e, _)| inner.contains(es[e].u) && inner.contains(es[e].v))
        .map(|(_, &k)| k)
        .collect();
    let finiteness = if trusted.len() == distinct.len() {
        Finiteness::Confirmed { orbits: distinct.len() }
    } else {
        Finiteness::Inconclusive { orbits_seen: distinct.len(), beyond_interior: distinct.len() - trusted.len() }
    };
    let empty_corners: Vec<String> =
        (0..4).filter(|&i| c[i].is_empty()).map(|i| CORNER_NAMES[i].to_string()).collect();
    Ok(CornerReport {
        word: g.to_string(),
        corner: arena.graph().names(&c[0]),
        nested: !empty_corners.is_empty(),
        empty_corners,
        finiteness,
        sampled_intersection: sample.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossingVerdict {
    /// The named corner is empty.
    EmptyCorner(usize),
    /// `A = gB` as walls.
    Equal,
    /// `A = gB*` as walls.
    Opposite,
    /// No corner is empty on the common window.
    Crossing,
}

impl CrossingVerdict {
    pub fn is_nested(&self) -> bool {
        !matches!(self, CrossingVerdict::Crossing)
    }
}

/// Counts of wall pairs joining corners, in the labelling of the crossing
/// figure: `a` top, `b` bottom, `c` left, `d` right, `e` and `f` diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingCase {
    pub word: String,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
    pub e: usize,
    pub f: usize,
    /// Corner index of `o` and of `go`.
    pub o_corner: usize,
    pub go_corner: usize,
    pub verdict: CrossingVerdict,
}

impl CrossingCase {
    pub fn sums_hold(&self) -> bool {
        self.a + self.e + self.f + self.b == 1 && self.c + self.e + self.f + self.d == 1
    }
}

fn corner_of(a: &Window, gb: &Window, v: usize) -> usize {
    let (x, y) = (a.set().contains(v), gb.set().contains(v));
    match (x, y) {
        (true, true) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (false, false) => 3,
    }
}

/// Crossing counts for `A` and `gB` from the tree of the two walls.
pub fn crossing_case(arena: &Arena, a: &Window, b: &Window, g: &str) -> Result<CrossingCase> {
    let go = check_positions(arena, a, b, g)?;
    let gb = b.translate(arena, g)?;
    let (common, c) = corners(a, &gb);
    if c[0].is_empty() {
        return Err(Error::precondition("the corner A∩gB is empty"));
    }
    let mut case = CrossingCase {
        word: g.to_string(),
        a: 0,
        b: 0,
        c: 0,
        d: 0,
        e: 0,
        f: 0,
        o_corner: corner_of(a, &gb, arena.base()),
        go_corner: corner_of(a, &gb, go),
        verdict: CrossingVerdict::Crossing,
    };
    let (a_in, b_in) = (a.set().intersection(&common), gb.set().intersection(&common));
    if a_in == b_in {
        case.f = 1;
        case.verdict = CrossingVerdict::Equal;
        return Ok(case);
    }
    if a_in == common.difference(&b_in) {
        case.e = 1;
        case.verdict = CrossingVerdict::Opposite;
        return Ok(case);
    }
    let pocset = Pocset::from_pairs(&[(a_in.clone(), common.difference(&a_in)), (b_in.clone(), common.difference(&b_in))]);
    let Ok((vertices, ends)) = pocset.tree() else {
        return Ok(case);
    };
    // edge of wall A: both ends agree on gB
    let (x, y) = ends[0];
    debug_assert_eq!(vertices[x].chosen(1), vertices[y].chosen(1));
    if vertices[x].chosen(1) == half(1, false) {
        case.a = 1;
    } else {
        case.b = 1;
    }
    let (x, _) = ends[1];
    if vertices[x].chosen(0) == half(0, false) {
        case.c = 1;
    } else {
        case.d = 1;
    }
    case.verdict = CrossingVerdict::EmptyCorner((0..4).find(|&i| c[i].is_empty()).expect("nested walls leave a corner empty"));
    Ok(case)
}

/// Walls of `T(H)` and of `g T(H)` compared on their common window.
#[derive(Debug, Clone)]
pub struct OverlapReport {
    pub word: String,
    pub region: VertexSet,
    pub red: Vec<VertexSet>,
    pub blue: Vec<VertexSet>,
    pub brown: Vec<VertexSet>,
    pub brown_is_subtree: bool,
    /// Walls separating `o` from `go`.
    pub geodesic: Vec<VertexSet>,
    /// `(H ∩ gHg^-1)`-orbit counts of each shared wall's coboundary.
    pub brown_finiteness: Vec<Finiteness>,
    pub graph: Graph,
    pub tree: StructureTree,
    colors: Vec<&'static str>,
}

/// Connected part of `region` containing the base.
fn base_component(arena: &Arena, region: &VertexSet) -> VertexSet {
    arena
        .graph()
        .components(region)
        .into_iter()
        .find(|c| c.contains(arena.base()))
        .unwrap_or_else(|| VertexSet::empty(arena.vertex_count()))
}

/// Restricted walls, as base-free sides, with trivial restrictions dropped.
fn restricted(windows: &[Window], region: &VertexSet, base: usize) -> Vec<VertexSet> {
    let mut out: Vec<VertexSet> = windows
        .iter()
        .filter_map(|w| {
            let s = w.set().intersection(region);
            if s.is_empty() || s == *region {
                return None;
            }
            let other = region.difference(&s);
            Some(if s.contains(base) { other } else { s })
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// The walls restricted to `region`, as a nested system on the induced graph.
fn system_on(arena: &Arena, region: &VertexSet, walls: &[VertexSet], n: u64) -> Result<(Graph, Vec<usize>, NestedSystem)> {
    let (graph, map) = arena.graph().induced(region, Some(arena.base()))?;
    let local: HashMap<usize, usize> = map.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let sets: Vec<VertexSet> = walls
        .iter()
        .map(|w| VertexSet::from_indices(graph.vertex_count(), w.iter().map(|v| local[&v])))
        .collect();
    let system = NestedSystem::new(graph.clone(), sets, n, vec![])?;
    Ok((graph, map, system))
}

pub fn tree_overlap(arena: &Arena, rel: &RelativeSystem, g: &str) -> Result<OverlapReport> {
    let windows = rel.wall_windows(arena);
    let moved: Vec<Window> = windows.iter().map(|w| w.translate(arena, g)).collect::<Result<_>>()?;
    let interior = arena.interior_set();
    let image = Window::new(&interior, &interior).translate(arena, g)?;
    let region = base_component(arena, &interior.intersection(image.exact()));
    let base = arena.base();
    let ours = restricted(&windows, &region, base);
    let theirs = restricted(&moved, &region, base);
    let theirs_set: BTreeSet<&VertexSet> = theirs.iter().collect();
    let ours_set: BTreeSet<&VertexSet> = ours.iter().collect();
    let brown: Vec<VertexSet> = ours.iter().filter(|w| theirs_set.contains(w)).cloned().collect();
    let red: Vec<VertexSet> = ours.iter().filter(|w| !theirs_set.contains(w)).cloned().collect();
    let blue: Vec<VertexSet> = theirs.iter().filter(|w| !ours_set.contains(w)).cloned().collect();

    let mut all: Vec<VertexSet> = ours.iter().chain(&theirs).cloned().collect();
    all.sort();
    all.dedup();
    let (graph, map, system) = system_on(arena, &region, &all, rel.system.level())?;
    let tree = build_tree(&system)?;
    let global = |local: &VertexSet| VertexSet::from_indices(arena.vertex_count(), local.iter().map(|i| map[i]));
    let members: Vec<VertexSet> = system.member_sets().iter().map(global).collect();
    let colors: Vec<&'static str> = members
        .iter()
        .map(|m| {
            if brown.contains(m) {
                "brown"
            } else if red.contains(m) {
                "red"
            } else {
                "blue"
            }
        })
        .collect();

    let brown_pairs: Vec<usize> = (0..members.len()).filter(|&p| colors[p] == "brown").collect();
    let brown_is_subtree = edges_connected(&tree, &brown_pairs);
    let go = arena.vertex_of(g)?.filter(|v| region.contains(*v));
    let geodesic = match go {
        Some(go) => members.iter().filter(|m| m.contains(base) != m.contains(go)).cloned().collect(),
        None => vec![],
    };
    let sample = intersection_sample(arena, g)?;
    let brown_finiteness = brown
        .iter()
        .map(|w| {
            let edges = coboundary_within(arena, w, &region);
            let classes = edge_classes(arena, &edges, &sample)?;
            let distinct = classes.iter().collect::<BTreeSet<_>>().len();
            Ok(arena.edge_finiteness(&edges).is_confirmed().then_some(Finiteness::Confirmed { orbits: distinct }).unwrap_or(
                Finiteness::Inconclusive { orbits_seen: distinct, beyond_interior: 0 },
            ))
        })
        .collect::<Result<_>>()?;
    Ok(OverlapReport {
        word: g.to_string(),
        region,
        red,
        blue,
        brown,
        brown_is_subtree,
        geodesic,
        brown_finiteness,
        graph,
        tree,
        colors,
    })
}

fn edges_connected(tree: &StructureTree, pairs: &[usize]) -> bool {
    if pairs.len() <= 1 {
        return true;
    }
    let chosen: BTreeSet<usize> = pairs.iter().copied().collect();
    let mut seen = BTreeSet::from([pairs[0]]);
    let mut stack = vec![pairs[0]];
    while let Some(p) = stack.pop() {
        let e = tree.edges()[p];
        for v in [e.inside, e.outside] {
            for &q in tree.incident_pairs(v) {
                if chosen.contains(&q) && seen.insert(q) {
                    stack.push(q);
                }
            }
        }
    }
    seen.len() == chosen.len()
}

impl OverlapReport {
    pub fn to_dot(&self) -> String {
        let mut out = format!("graph overlap {{\n  label=\"g = {}\";\n", if self.word.is_empty() { "1" } else { &self.word });
        for t in 0..self.tree.vertex_count() {
            let pre = self.graph.names(&self.tree.preimage(t));
            out.push_str(&format!("  t{t} [label=\"{}\"];\n", if pre.is_empty() { "·".to_string() } else { pre.join(",") }));
        }
        for e in self.tree.edges() {
            out.push_str(&format!("  t{} -- t{} [color={}];\n", e.inside, e.outside, self.colors[e.pair]));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_spec(&self, arena: &Arena) -> OverlapSpec {
        let names = |ws: &[VertexSet]| ws.iter().map(|w| arena.graph().names(w)).collect();
        OverlapSpec {
            word: self.word.clone(),
            red: names(&self.red),
            blue: names(&self.blue),
            brown: names(&self.brown),
            brown_is_subtree: self.brown_is_subtree,
            geodesic: names(&self.geodesic),
            brown_finiteness: self.brown_finiteness.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapSpec {
    pub word: String,
    pub red: Vec<Vec<String>>,
    pub blue: Vec<Vec<String>>,
    pub brown: Vec<Vec<String>>,
    pub brown_is_subtree: bool,
    pub geodesic: Vec<Vec<String>>,
    pub brown_finiteness: Vec<Finiteness>,
}

/// The translates `g·C` of the relative walls over a word set, as a tree on
/// the region where every translate is known.
#[derive(Debug, Clone)]
pub struct AssembledTree {
    pub words: Vec<String>,
    pub region: VertexSet,
    pub graph: Graph,
    /// Region vertex index to arena vertex.
    pub region_map: Vec<usize>,
    pub system: NestedSystem,
    pub tree: StructureTree,
    /// For each member, the words and wall indices producing it.
    pub provenance: Vec<Vec<(String, usize)>>,
    /// Some generator moves the tree vertex of `o`.
    pub base_moved: bool,
    /// Tree vertices in the image of `ν` that no generator moves.
    pub fixed_vertices: Vec<usize>,
    /// Classes of image vertices under the generator action seen in the region.
    pub vertex_orbits: usize,
    /// Pairs (generator, wall) whose image is not a wall on the window.
    pub equivariance_failures: usize,
    /// Largest number of right `H`-cosets met by a sampled wall stabilizer.
    pub stabilizer_cosets: usize,
}

/// Normal forms of the words of length at most `radius` in `S ∪ S^-1`.
pub fn word_ball(arena: &Arena, radius: usize) -> Result<Vec<String>> {
    let oracle = arena.oracle();
    let mut steps = Vec::new();
    for (_, w) in oracle.s_words() {
        steps.push(oracle.normal_form(w)?);
        steps.push(oracle.inverse(w)?);
    }
    let mut seen: BTreeSet<String> = BTreeSet::from([String::new()]);
    let mut frontier = vec![String::new()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for w in &frontier {
            for s in &steps {
                let v = oracle.multiply(w, s)?;
                if seen.insert(v.clone()) {
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<String> = seen.into_iter().collect();
    out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    Ok(out)
}

pub fn assemble_g_nested(arena: &Arena, rel: &RelativeSystem, words: &[String]) -> Result<AssembledTree> {
    let oracle = arena.oracle();
    let words: Vec<String> = words.iter().map(|w| oracle.normal_form(w)).collect::<Result<_>>()?;
    let interior = arena.interior_set();
    let mut region = interior.clone();
    for w in &words {
        region = region.intersection(Window::new(&interior, &interior).translate(arena, w)?.exact());
    }
    let region = base_component(arena, &region);
    if region.count() < 2 {
        return Err(Error::truncation("translates share no window beyond the base vertex"));
    }
    let windows = rel.wall_windows(arena);
    let base = arena.base();
    let mut provenance: BTreeMap<VertexSet, Vec<(String, usize)>> = BTreeMap::new();
    for w in &words {
        for (i, win) in windows.iter().enumerate() {
            let moved = win.translate(arena, w)?;
            for set in restricted(&[moved], &region, base) {
                provenance.entry(set).or_default().push((w.clone(), i));
            }
        }
    }
    let walls: Vec<VertexSet> = provenance.keys().cloned().collect();
    let (graph, region_map, system) = system_on(arena, &region, &walls, rel.system.level())?;
    let tree = build_tree(&system)?;
    let global = |local: &VertexSet| VertexSet::from_indices(arena.vertex_count(), local.iter().map(|i| region_map[i]));
    let members: Vec<VertexSet> = system.member_sets().iter().map(global).collect();
    let provenance: Vec<Vec<(String, usize)>> = members.iter().map(|m| provenance[m].clone()).collect();

    let local_of: HashMap<usize, usize> = region_map.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut base_moved = false;
    let mut equivariance_failures = 0;
    for (_, s) in oracle.s_words() {
        if let Some(so) = arena.translate(s, base)?.and_then(|v| local_of.get(&v)) {
            base_moved |= tree.nu(*so) != tree.nu(local_of[&base]);
        }
        let shifted = Window::new(&region, &region).translate(arena, s)?;
        let both = region.intersection(shifted.exact());
        let known: BTreeSet<VertexSet> = restricted(&members.iter().map(|m| Window::new(m, &region)).collect::<Vec<_>>(), &both, base)
            .into_iter()
            .collect();
        for m in &members {
            let image = Window::new(m, &region).translate(arena, s)?;
            for set in restricted(&[image], &both, base) {
                if !known.contains(&set) {
                    equivariance_failures += 1;
                }
            }
        }
    }

    let es = arena.graph().edges();
    let mut stabilizer_cosets = 0;
    let ball = word_ball(arena, 2)?;
    for m in &members {
        let boundary: BTreeSet<usize> = coboundary_within(arena, m, &region).into_iter().collect();
        if boundary.is_empty() {
            continue;
        }
        let mut cosets = BTreeSet::new();
        for k in &ball {
            let map = arena.translation(k)?;
            let image: Option<BTreeSet<usize>> = boundary
                .iter()
                .map(|&e| match (map[es[e].u], map[es[e].v]) {
                    (Some(x), Some(y)) => arena.edge_index(x, y),
                    _ => None,
                })
                .collect();
            if image.as_ref() != Some(&boundary) {
                continue;
            }
            let moved = Window::new(m, &region).translate(arena, k)?;
            let common = moved.exact().intersection(&region);
            if moved.set().intersection(&common) == m.intersection(&common) {
                // right coset Hk is the left coset of k^-1
                cosets.insert(oracle.coset_key(&oracle.inverse(k)?)?);
            }
        }
        stabilizer_cosets = stabilizer_cosets.max(cosets.len());
    }

    // generator action on tree vertices, where defined
    let mut parent: Vec<usize> = (0..tree.vertex_count()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut moved_somewhere = vec![false; tree.vertex_count()];
    let mut acted_on = vec![false; tree.vertex_count()];
    let mut steps = Vec::new();
    for (_, s) in oracle.s_words() {
        steps.push(s.clone());
        steps.push(oracle.inverse(s)?);
    }
    for s in &steps {
        let map = arena.translation(s)?;
        for (i, &v) in region_map.iter().enumerate() {
            if let Some(j) = map[v].and_then(|w| local_of.get(&w)) {
                let (t, u) = (tree.nu(i), tree.nu(*j));
                moved_somewhere[t] |= t != u;
                acted_on[t] = true;
                let (a, b) = (find(&mut parent, t), find(&mut parent, u));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let image: Vec<usize> = (0..tree.vertex_count()).filter(|&t| tree.in_image(t)).collect();
    let vertex_orbits = image.iter().map(|&t| find(&mut parent, t)).collect::<BTreeSet<_>>().len();
    let fixed_vertices: Vec<usize> = image.iter().copied().filter(|&t| acted_on[t] && !moved_somewhere[t]).collect();

    Ok(AssembledTree {
        words,
        region,
        graph,
        region_map,
        system,
        tree,
        provenance,
        base_moved,
        fixed_vertices,
        vertex_orbits,
        equivariance_failures,
        stabilizer_cosets,
    })
}

/// Walls whose coboundary has an edge within `radius` of the base.
pub fn walls_near_base(arena: &Arena, rel: &RelativeSystem, radius: usize) -> Vec<usize> {
    let ball = arena.ball_set(radius);
    let es = arena.graph().edges();
    (0..rel.system.member_sets().len())
        .filter(|&i| {
            arena
                .coboundary(&rel.system.member_sets()[i])
                .into_iter()
                .any(|e| ball.contains(es[e].u) || ball.contains(es[e].v))
        })
        .collect()
}

/// Arena vertices separated from the base by a wall, for reports.
pub fn wall_names(arena: &Arena, set: &VertexSet) -> Vec<String> {
    arena.graph().names(&representative(set, arena.base()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::build_coset_graph;
    use crate::cuts::extract_nested_generators;
    use crate::group::fixture;

    fn arena(name: &str, r: usize) -> Arena {
        build_coset_graph(&fixture(name).unwrap(), r).unwrap()
    }

    #[test]
    fn trivial_subgroup_lifts_are_the_cuts() {
        let a = arena("z", 5);
        let rel = relative_nested_system(&a, 1).unwrap();
        let interior = a.interior_set();
        let direct = extract_nested_generators(a.graph(), 1).unwrap();
        let direct: Vec<&VertexSet> = direct.member_sets().iter().filter(|m| !m.is_disjoint(&interior)).collect();
        assert_eq!(rel.system.member_sets().iter().collect::<Vec<_>>(), direct);
        assert!(rel.walls.iter().all(|w| w.disjoint_or_equal && w.covers_preimage));
    }

    #[test]
    fn dihedral_lifts_split_in_two() {
        let a = arena("dinf", 6);
        let q = a.quotient_graph().unwrap();
        let far = VertexSet::from_indices(q.graph.vertex_count(), (2..q.graph.vertex_count()).filter(|&v| q.min_depth[v] >= 3));
        let lifts = lift_cut(&a, &q, &far, 0).unwrap();
        assert_eq!(lifts.len(), 2);
        for l in &lifts {
            assert!(l.disjoint_or_equal, "{l:?}");
            assert!(l.covers_preimage, "{l:?}");
            assert!(l.projection_matches, "{l:?}");
            assert_eq!(l.coboundary_orbits, 1);
        }
    }

    #[test]
    fn dihedral_relative_tree_is_a_line() {
        let a = arena("dinf", 6);
        let rel = relative_nested_system(&a, 1).unwrap();
        let t = &rel.tree;
        assert!((0..t.vertex_count()).all(|v| t.degree(v) <= 2));
        assert!(rel.base_fixed_by_h(&a).unwrap());
    }

    #[test]
    fn plane_lift_is_one_half_plane() {
        let a = arena("z2", 5);
        let q = a.quotient_graph().unwrap();
        let y = q.projection[a.vertex_of("y").unwrap().unwrap()];
        let side = crate::cuts::enumerate_bonds(&q.graph, 1)
            .unwrap()
            .into_iter()
            .find(|s| s.contains(y) && s.count() > 1)
            .unwrap();
        let lifts = lift_cut(&a, &q, &side, 0).unwrap();
        assert_eq!(lifts.len(), 1);
    }

    #[test]
    fn crossing_case_preconditions() {
        let a = arena("dinf", 6);
        let rel = relative_nested_system(&a, 1).unwrap();
        let w = &rel.wall_windows(&a)[0];
        let same = crossing_case(&a, w, w, "").unwrap();
        assert_eq!(same.verdict, CrossingVerdict::Equal);
        assert!(same.sums_hold());
        assert!(matches!(crossing_case(&a, w, &w.complement(), ""), Err(Error::Precondition(_))));
    }
}
