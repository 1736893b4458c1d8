//! The Boolean ring of weight-bounded cuts: enumeration, corners, crossing
//! counts, ring closure, automorphisms and nested generating systems.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::bitset::VertexSet;
use crate::error::{check_guard, Error, Result};
use crate::graph::{Cut, Graph};

/// Vertex limit for exhaustive cut enumeration.
pub const ENUMERATION_GUARD: usize = 24;
/// Vertex limit for the public automorphism search.
pub const AUTOMORPHISM_GUARD: usize = 10;
/// Limits for [`ring_closure`].
pub const CLOSURE_GENERATOR_GUARD: usize = 20;
pub const CLOSURE_VERTEX_GUARD: usize = 16;
/// Largest number of ring elements [`Ring::elements`] will materialize.
pub const CLOSURE_SIZE_GUARD: usize = 1 << 20;

/// All cuts `A` with `∅ ≠ A ≠ V` and weight at most `n`, one per `{A, A*}`
/// pair, represented by the side that excludes the base vertex. Output is
/// in increasing bitset order.
pub fn enumerate_cuts(g: &Graph, n: u64, both_sides_connected: bool) -> Result<Vec<Cut>> {
    enumerate_sets(g, n, both_sides_connected)
        .map(|sets| sets.into_iter().map(|s| g.cut_unchecked(s)).collect())
}

pub(crate) fn enumerate_sets(g: &Graph, n: u64, both_sides_connected: bool) -> Result<Vec<VertexSet>> {
    let nv = g.vertex_count();
    check_guard("vertex count for cut enumeration", nv, ENUMERATION_GUARD)?;
    if nv > 63 {
        return Err(Error::Guard { what: "vertex count for bitmask enumeration", actual: nv, limit: 63 });
    }
    let base = g.base();
    let edges: Vec<(u64, u64, u64)> =
        g.edges().iter().map(|e| (1u64 << e.u, 1u64 << e.v, e.capacity as u64)).collect();
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << nv) {
        if mask >> base & 1 == 1 {
            continue;
        }
        let mut w = 0;
        for &(a, b, c) in &edges {
            if (mask & a == 0) != (mask & b == 0) {
                w += c;
                if w > n {
                    break;
                }
            }
        }
        if w > n {
            continue;
        }
        let set = VertexSet::from_mask(nv, mask);
        if both_sides_connected
            && !(g.is_connected_set(&set) && g.is_connected_set(&set.complement()))
        {
            continue;
        }
        out.push(set);
    }
    Ok(out)
}

/// Limit on edge subsets examined by [`enumerate_bonds`].
pub const BOND_SUBSET_GUARD: usize = 2_000_000;

/// Cuts with both sides connected and weight at most `n`, found as minimal
/// edge sets whose removal leaves exactly two components. Polynomial in the
/// edge count for fixed `n`; output as base-excluding sides in bitset order.
pub fn enumerate_bonds(g: &Graph, n: u64) -> Result<Vec<VertexSet>> {
    let m = g.edges().len();
    let mut budget = 0usize;
    let mut k = 1usize;
    let mut subsets = 1usize;
    while k as u64 <= n && k <= m {
        subsets = subsets.saturating_mul(m + 1 - k) / k;
        budget = budget.saturating_add(subsets);
        k += 1;
    }
    check_guard("edge subsets for bond enumeration", budget, BOND_SUBSET_GUARD)?;
    let mut found = BTreeSet::new();
    let mut chosen = Vec::new();
    bond_search(g, n, 0, &mut chosen, &mut found);
    Ok(found.into_iter().collect())
}

fn bond_search(g: &Graph, left: u64, start: usize, chosen: &mut Vec<usize>, found: &mut BTreeSet<VertexSet>) {
    let edges = g.edges();
    for i in start..edges.len() {
        let c = edges[i].capacity as u64;
        if c > left {
            continue;
        }
        chosen.push(i);
        if let Some(side) = bond_side(g, chosen) {
            found.insert(representative(&side, g.base()));
        }
        bond_search(g, left - c, i + 1, chosen, found);
        chosen.pop();
    }
}

/// The side of the base-free component when `removed` is exactly the
/// coboundary of a connected set with connected complement.
fn bond_side(g: &Graph, removed: &[usize]) -> Option<VertexSet> {
    let edges = g.edges();
    let (u, v) = (edges[removed[0]].u, edges[removed[0]].v);
    let mut side = VertexSet::from_indices(g.vertex_count(), [u]);
    let mut stack = vec![u];
    while let Some(x) = stack.pop() {
        for &(y, e) in g.adjacency(x) {
            if !side.contains(y) && !removed.contains(&e) {
                side.insert(y);
                stack.push(y);
            }
        }
    }
    if side.contains(v) {
        return None;
    }
    let crossing: Vec<usize> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| side.contains(e.u) != side.contains(e.v))
        .map(|(i, _)| i)
        .collect();
    let mut sorted = removed.to_vec();
    sorted.sort();
    (crossing == sorted && g.is_connected_set(&side.complement())).then_some(side)
}

/// The bonds of weight at most `n` that cross no other such bond. The family
/// is canonical, hence invariant under every automorphism, and is accepted
/// only when it generates every bond of weight at most `n`.
pub fn extract_uncrossed_generators(g: &Graph, n: u64) -> Result<NestedSystem> {
    let bonds = enumerate_bonds(g, n)?;
    let kept: Vec<VertexSet> = bonds
        .iter()
        .filter(|a| bonds.iter().all(|b| sets_nested(a, b)))
        .cloned()
        .collect();
    let ring = Ring::generated_by(g.vertex_count(), &kept);
    let uncovered: Vec<Vec<String>> = bonds.iter().filter(|b| !ring.contains(b)).map(|b| g.names(b)).collect();
    if !uncovered.is_empty() {
        return Err(Error::Generation { uncovered });
    }
    NestedSystem::new(g.clone(), kept, n, vec![])
}

/// The four corners of two cuts and whether they are nested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CornerReport {
    /// `A∩B`, `A∩B*`, `A*∩B`, `A*∩B*`.
    pub corners: [Cut; 4],
    pub empty: [bool; 4],
    pub nested: bool,
}

pub fn corner_analysis(a: &Cut, b: &Cut) -> Result<CornerReport> {
    if !a.same_graph(b) {
        return Err(Error::structural("corner analysis of cuts from different graphs"));
    }
    let (ac, bc) = (a.complement(), b.complement());
    let corners = [
        a.with_set(a.set().intersection(b.set())),
        a.with_set(a.set().intersection(bc.set())),
        a.with_set(ac.set().intersection(b.set())),
        a.with_set(ac.set().intersection(bc.set())),
    ];
    let empty = [0, 1, 2, 3].map(|i| corners[i].is_empty());
    let nested = empty.iter().any(|&e| e);
    Ok(CornerReport { corners, empty, nested })
}

/// At least one of the four corners is empty.
pub fn sets_nested(a: &VertexSet, b: &VertexSet) -> bool {
    a.is_disjoint(b) || a.is_subset(b) || b.is_subset(a) || a.union(b).is_full()
}

/// Canonical representative of `{A, A*}`: the side avoiding `base`.
pub fn representative(set: &VertexSet, base: usize) -> VertexSet {
    if set.contains(base) {
        set.complement()
    } else {
        set.clone()
    }
}

/// A complement-closed family of pairwise nested proper cuts.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedSystem {
    graph: Graph,
    members: Vec<VertexSet>,
    level: u64,
    automorphisms: Vec<Vec<usize>>,
}

impl NestedSystem {
    /// Validates and normalizes a family of cuts given by either side.
    pub fn new(
        graph: Graph,
        sets: Vec<VertexSet>,
        level: u64,
        automorphisms: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let base = graph.base();
        let mut members: Vec<VertexSet> = Vec::with_capacity(sets.len());
        for s in &sets {
            if s.universe() != graph.vertex_count() {
                return Err(Error::structural("nested system member from another graph"));
            }
            if s.is_empty() || s.is_full() {
                return Err(Error::precondition("nested system member with an empty side"));
            }
            members.push(representative(s, base));
        }
        members.sort();
        members.dedup();
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                if !sets_nested(&members[i], &members[j]) {
                    return Err(Error::precondition(format!(
                        "members {:?} and {:?} cross",
                        graph.names(&members[i]),
                        graph.names(&members[j])
                    )));
                }
            }
        }
        let system = NestedSystem { graph, members, level, automorphisms };
        if let Some(sigma) = system.automorphisms.iter().find(|s| !system.invariant_under(s)) {
            return Err(Error::precondition(format!("system is not invariant under {sigma:?}")));
        }
        Ok(system)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn automorphisms(&self) -> &[Vec<usize>] {
        &self.automorphisms
    }

    /// Representatives, one per `{C, C*}` pair, in canonical order.
    pub fn member_sets(&self) -> &[VertexSet] {
        &self.members
    }

    pub fn members(&self) -> Vec<Cut> {
        self.members.iter().map(|s| self.graph.cut_unchecked(s.clone())).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Both sides of every pair.
    pub fn half_spaces(&self) -> Vec<VertexSet> {
        self.members.iter().flat_map(|m| [m.clone(), m.complement()]).collect()
    }

    /// Index of the pair containing `set` as either side.
    pub fn pair_of(&self, set: &VertexSet) -> Option<usize> {
        let rep = representative(set, self.graph.base());
        self.members.binary_search(&rep).ok()
    }

    pub fn invariant_under(&self, sigma: &[usize]) -> bool {
        let base = self.graph.base();
        self.members.iter().all(|m| {
            let image = apply_permutation(m, sigma);
            self.members.binary_search(&representative(&image, base)).is_ok()
        })
    }

    pub fn is_subsystem_of(&self, other: &NestedSystem) -> bool {
        self.members.iter().all(|m| other.members.binary_search(m).is_ok())
    }

    pub fn to_spec(&self) -> NestedSystemSpec {
        NestedSystemSpec {
            level: self.level,
            members: self.members.iter().map(|m| self.graph.names(m)).collect(),
        }
    }
}

/// JSON form of a nested system: member vertex-id lists plus the level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedSystemSpec {
    pub level: u64,
    pub members: Vec<Vec<String>>,
}

/// Number of pairs of `system` that cross `a`.
pub fn mu(a: &Cut, system: &NestedSystem) -> Result<usize> {
    if a.set().universe() != system.graph.vertex_count() {
        return Err(Error::structural("cut and system live on different graphs"));
    }
    Ok(mu_set(a.set(), system.member_sets()))
}

pub(crate) fn mu_set(a: &VertexSet, members: &[VertexSet]) -> usize {
    members.iter().filter(|c| !sets_nested(a, c)).count()
}

pub fn apply_permutation(set: &VertexSet, sigma: &[usize]) -> VertexSet {
    VertexSet::from_indices(set.universe(), set.iter().map(|i| sigma[i]))
}

/// The ring generated by a family of vertex sets together with the
/// complements of its nonempty members, kept as its atoms.
///
/// An element of the ring is exactly a union of atoms.
#[derive(Debug, Clone)]
pub struct Ring {
    universe: usize,
    atoms: Vec<VertexSet>,
}

impl Ring {
    pub fn generated_by(universe: usize, gens: &[VertexSet]) -> Ring {
        let mut extended: Vec<VertexSet> = gens.to_vec();
        extended.extend(gens.iter().filter(|g| !g.is_empty()).map(|g| g.complement()));
        let mut atoms: Vec<VertexSet> = Vec::new();
        let mut signature_of: Vec<Vec<bool>> = Vec::new();
        for v in 0..universe {
            let sig: Vec<bool> = extended.iter().map(|g| g.contains(v)).collect();
            if !sig.iter().any(|&b| b) {
                continue;
            }
            match signature_of.iter().position(|s| *s == sig) {
                Some(k) => atoms[k].insert(v),
                None => {
                    signature_of.push(sig);
                    atoms.push(VertexSet::from_indices(universe, [v]));
                }
            }
        }
        Ring { universe, atoms }
    }

    pub fn atoms(&self) -> &[VertexSet] {
        &self.atoms
    }

    pub fn contains(&self, set: &VertexSet) -> bool {
        if set.universe() != self.universe {
            return false;
        }
        let mut covered = VertexSet::empty(self.universe);
        for atom in &self.atoms {
            if atom.is_subset(set) {
                covered = covered.union(atom);
            } else if !atom.is_disjoint(set) {
                return false;
            }
        }
        covered == *set
    }

    pub fn elements(&self) -> Result<BTreeSet<VertexSet>> {
        let k = self.atoms.len();
        if k >= 63 || (1usize << k) > CLOSURE_SIZE_GUARD {
            return Err(Error::Guard { what: "ring closure size", actual: k, limit: 20 });
        }
        Ok((0u64..(1u64 << k))
            .map(|mask| {
                self.atoms
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .fold(VertexSet::empty(self.universe), |acc, (_, a)| acc.union(a))
            })
            .collect())
    }
}

/// Closure of the generators (each paired with its complement) under
/// symmetric difference and intersection, including `∅`.
pub fn ring_closure(generators: &[Cut]) -> Result<BTreeSet<Cut>> {
    let Some(first) = generators.first() else {
        return Ok(BTreeSet::new());
    };
    check_guard("closure generator count", generators.len(), CLOSURE_GENERATOR_GUARD)?;
    check_guard("closure vertex count", first.set().universe(), CLOSURE_VERTEX_GUARD)?;
    if generators.iter().any(|g| !g.same_graph(first)) {
        return Err(Error::structural("closure generators from different graphs"));
    }
    let sets: Vec<VertexSet> = generators.iter().map(|g| g.set().clone()).collect();
    let ring = Ring::generated_by(first.set().universe(), &sets);
    Ok(ring.elements()?.into_iter().map(|s| first.with_set(s)).collect())
}

/// All capacity-preserving automorphisms of a graph with at most
/// [`AUTOMORPHISM_GUARD`] vertices, in lexicographic order.
pub fn automorphisms(g: &Graph) -> Result<Vec<Vec<usize>>> {
    check_guard("vertex count for automorphism search", g.vertex_count(), AUTOMORPHISM_GUARD)?;
    Ok(automorphisms_unguarded(g))
}

pub(crate) fn automorphisms_unguarded(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut cap = vec![vec![0u32; n]; n];
    for e in g.edges() {
        cap[e.u][e.v] = e.capacity;
        cap[e.v][e.u] = e.capacity;
    }
    let profile: Vec<(usize, Vec<u32>)> = (0..n)
        .map(|v| {
            let mut caps: Vec<u32> = cap[v].iter().copied().filter(|&c| c > 0).collect();
            caps.sort();
            (g.degree(v), caps)
        })
        .collect();
    let mut out = Vec::new();
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn extend(
        v: usize,
        n: usize,
        cap: &[Vec<u32>],
        profile: &[(usize, Vec<u32>)],
        image: &mut [usize],
        used: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        if v == n {
            out.push(image.to_vec());
            return;
        }
        for w in 0..n {
            if used[w] || profile[w] != profile[v] {
                continue;
            }
            if (0..v).all(|u| cap[u][v] == cap[image[u]][w]) {
                image[v] = w;
                used[w] = true;
                extend(v + 1, n, cap, profile, image, used, out);
                used[w] = false;
            }
        }
    }
    extend(0, n, &cap, &profile, &mut image, &mut used, &mut out);
    out
}

/// Extracts a nested, automorphism-invariant generating set of the ring of
/// cuts of weight at most `n`.
///
/// Candidates are the weight-bounded cuts with both sides connected, taken
/// in order of weight, then crossing count against the candidates of no
/// larger weight, then bitset order. A candidate's whole automorphism orbit
/// is accepted at once when it is pairwise nested and nested with every
/// accepted cut. Selection stops as soon as the accepted cuts generate every
/// cut of weight at most `n`.
pub fn extract_nested_generators(g: &Graph, n: u64) -> Result<NestedSystem> {
    let all = enumerate_sets(g, n, false)?;
    let autos = automorphisms_unguarded(g);
    let base = g.base();
    let weights: Vec<u64> = all.iter().map(|s| g.weight_of(s)).collect();
    let pool: Vec<usize> = (0..all.len())
        .filter(|&i| g.is_connected_set(&all[i]) && g.is_connected_set(&all[i].complement()))
        .collect();
    let mut order: Vec<(u64, usize, usize)> = pool
        .iter()
        .map(|&i| {
            let crossing = pool
                .iter()
                .filter(|&&j| weights[j] <= weights[i] && !sets_nested(&all[i], &all[j]))
                .count();
            (weights[i], crossing, i)
        })
        .collect();
    order.sort_by(|a, b| (a.0, a.1, &all[a.2]).cmp(&(b.0, b.1, &all[b.2])));

    let universe = g.vertex_count();
    let covered = |accepted: &[VertexSet]| {
        let ring = Ring::generated_by(universe, accepted);
        all.iter().all(|s| ring.contains(s))
    };
    let mut accepted: Vec<VertexSet> = Vec::new();
    let mut decided: HashSet<VertexSet> = HashSet::new();
    let mut done = covered(&accepted);
    for &(_, _, i) in &order {
        if done {
            break;
        }
        if decided.contains(&all[i]) {
            continue;
        }
        let mut orbit: Vec<VertexSet> = autos
            .iter()
            .map(|sigma| representative(&apply_permutation(&all[i], sigma), base))
            .collect();
        orbit.sort();
        orbit.dedup();
        decided.extend(orbit.iter().cloned());
        let orbit_nested = orbit
            .iter()
            .enumerate()
            .all(|(k, a)| orbit[k + 1..].iter().all(|b| sets_nested(a, b)));
        let fits = orbit.iter().all(|a| accepted.iter().all(|b| sets_nested(a, b)));
        if orbit_nested && fits {
            accepted.extend(orbit);
            done = covered(&accepted);
        }
    }
    if !done {
        let ring = Ring::generated_by(universe, &accepted);
        let uncovered = all.iter().filter(|s| !ring.contains(s)).map(|s| g.names(s)).collect();
        return Err(Error::Generation { uncovered });
    }
    NestedSystem::new(g.clone(), accepted, n, autos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    fn names(g: &Graph, cuts: &[Cut]) -> Vec<Vec<String>> {
        cuts.iter().map(|c| g.names(c.set())).collect()
    }

    fn v(ids: &[&str]) -> Vec<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    /// Every subset, weight checked by a direct edge scan.
    fn brute_cut_pairs(g: &Graph, n: u64) -> BTreeSet<BTreeSet<VertexSet>> {
        let nv = g.vertex_count();
        let mut out = BTreeSet::new();
        for mask in 1u64..(1 << nv) - 1 {
            let s = VertexSet::from_mask(nv, mask);
            let w: u64 = g
                .edges()
                .iter()
                .filter(|e| s.contains(e.u) ^ s.contains(e.v))
                .map(|e| e.capacity as u64)
                .sum();
            if w <= n {
                out.insert(BTreeSet::from([s.clone(), s.complement()]));
            }
        }
        out
    }

    #[test]
    fn enumerate_examples() {
        let p = path(4);
        let cuts = enumerate_cuts(&p, 1, false).unwrap();
        assert_eq!(names(&p, &cuts), vec![v(&["1"]), v(&["1", "2"]), v(&["1", "2", "3"])]);
        assert!(enumerate_cuts(&cycle(4), 1, false).unwrap().is_empty());
        let b = barbell();
        assert_eq!(names(&b, &enumerate_cuts(&b, 1, false).unwrap()), vec![v(&["1", "2", "3"])]);
    }

    #[test]
    fn enumerate_matches_subset_oracle() {
        for g in [path(4), cycle(4), barbell(), cycle(6), grid(2, 3)] {
            for n in 1..=3 {
                let got: BTreeSet<BTreeSet<VertexSet>> = enumerate_cuts(&g, n, false)
                    .unwrap()
                    .into_iter()
                    .map(|c| BTreeSet::from([c.set().clone(), c.set().complement()]))
                    .collect();
                assert_eq!(got, brute_cut_pairs(&g, n));
            }
        }
    }

    #[test]
    fn enumeration_guard() {
        let big = path(30);
        assert!(matches!(enumerate_cuts(&big, 1, false), Err(Error::Guard { .. })));
    }

    #[test]
    fn corner_examples() {
        let c = cycle(4);
        let a = c.cut(&["1", "2"]).unwrap();
        assert!(corner_analysis(&a, &a).unwrap().nested);
        let r = corner_analysis(&a, &c.cut(&["2", "3"]).unwrap()).unwrap();
        assert!(!r.nested);
        assert_eq!(r.empty, [false; 4]);
        let p = path(4);
        let r = corner_analysis(&p.cut(&["1"]).unwrap(), &p.cut(&["1", "2"]).unwrap()).unwrap();
        assert!(r.nested);
        assert!(r.empty[1]);
        assert!(corner_analysis(&a, &p.cut(&["1"]).unwrap()).is_err());
    }

    #[test]
    fn corners_partition_the_vertices() {
        let g = grid(2, 3);
        for x in enumerate_cuts(&g, 3, false).unwrap() {
            for y in enumerate_cuts(&g, 3, false).unwrap() {
                let r = corner_analysis(&x, &y).unwrap();
                let total: usize = r.corners.iter().map(|c| c.set().count()).sum();
                assert_eq!(total, g.vertex_count());
                assert_eq!(r.nested, corner_analysis(&y, &x).unwrap().nested);
            }
        }
    }

    #[test]
    fn mu_examples() {
        let p = path(4);
        let e1 = extract_nested_generators(&p, 1).unwrap();
        assert_eq!(mu(&p.cut(&["1", "3"]).unwrap(), &e1).unwrap(), 1);
        assert_eq!(mu(&p.cut(&["1"]).unwrap(), &e1).unwrap(), 0);
        for m in e1.members() {
            assert_eq!(mu(&m, &e1).unwrap(), 0);
        }
    }

    /// Fixpoint closure under xor and intersection, seeded with the
    /// generators, their complements and the empty set.
    fn fixpoint_closure(gens: &[VertexSet]) -> BTreeSet<VertexSet> {
        let universe = gens[0].universe();
        let mut set: BTreeSet<VertexSet> = gens.iter().cloned().collect();
        set.extend(gens.iter().filter(|g| !g.is_empty()).map(|g| g.complement()));
        set.insert(VertexSet::empty(universe));
        loop {
            let items: Vec<VertexSet> = set.iter().cloned().collect();
            let before = set.len();
            for a in &items {
                for b in &items {
                    set.insert(a.symmetric_difference(b));
                    set.insert(a.intersection(b));
                }
            }
            if set.len() == before {
                return set;
            }
        }
    }

    #[test]
    fn ring_closure_examples() {
        let p = path(4);
        let e1 = extract_nested_generators(&p, 1).unwrap();
        let closure = ring_closure(&e1.members()).unwrap();
        assert_eq!(closure.len(), 16);

        let empty = p.cut::<&str>(&[]).unwrap();
        let only_empty = ring_closure(&[empty.clone()]).unwrap();
        assert_eq!(only_empty.into_iter().collect::<Vec<_>>(), vec![empty]);

        let b = barbell();
        let closure = ring_closure(&[b.cut(&["1", "2", "3"]).unwrap()]).unwrap();
        let got: Vec<Vec<String>> = closure.iter().map(|c| b.names(c.set())).collect();
        let mut expected = vec![
            vec![],
            v(&["1", "2", "3"]),
            v(&["4", "5", "6"]),
            v(&["1", "2", "3", "4", "5", "6"]),
        ];
        expected.sort_by_key(|x| b.cut(x).unwrap().into_set());
        assert_eq!(got, expected);
    }

    #[test]
    fn ring_closure_matches_fixpoint_and_is_idempotent() {
        let g = cycle(6);
        let cuts = enumerate_cuts(&g, 2, false).unwrap();
        for window in cuts.windows(3) {
            let sets: Vec<VertexSet> = window.iter().map(|c| c.set().clone()).collect();
            let closure = ring_closure(window).unwrap();
            let got: BTreeSet<VertexSet> = closure.iter().map(|c| c.set().clone()).collect();
            assert_eq!(got, fixpoint_closure(&sets));
            let again: Vec<Cut> = closure.iter().cloned().collect();
            let twice: BTreeSet<VertexSet> =
                ring_closure(&again).unwrap().iter().map(|c| c.set().clone()).collect();
            assert_eq!(twice, got);
            let smaller: BTreeSet<VertexSet> =
                ring_closure(&window[..2]).unwrap().iter().map(|c| c.set().clone()).collect();
            assert!(smaller.is_subset(&got));
        }
    }

    #[test]
    fn automorphism_counts() {
        assert_eq!(automorphisms(&cycle(4)).unwrap().len(), 8);
        assert_eq!(automorphisms(&path(4)).unwrap().len(), 2);
        // two in-triangle swaps and the swap of the triangles
        assert_eq!(automorphisms(&barbell()).unwrap().len(), 8);
        assert!(automorphisms(&path(12)).is_err());
    }

    #[test]
    fn automorphisms_match_permutation_oracle() {
        fn permutations(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in permutations(n - 1) {
                for k in 0..n {
                    let mut q = p.clone();
                    q.insert(k, n - 1);
                    out.push(q);
                }
            }
            out
        }
        for g in [cycle(4), path(4), barbell(), grid(2, 3)] {
            let n = g.vertex_count();
            let mut expected: Vec<Vec<usize>> = permutations(n)
                .into_iter()
                .filter(|s| g.edges().iter().all(|e| g.has_edge(s[e.u], s[e.v])))
                .collect();
            expected.sort();
            assert_eq!(automorphisms(&g).unwrap(), expected);
        }
    }

    #[test]
    fn extraction_examples() {
        let p = path(4);
        let e = extract_nested_generators(&p, 1).unwrap();
        assert_eq!(
            names(&p, &e.members()),
            vec![v(&["1"]), v(&["1", "2"]), v(&["1", "2", "3"])]
        );
        let b = barbell();
        assert_eq!(names(&b, &extract_nested_generators(&b, 1).unwrap().members()), vec![v(&["1", "2", "3"])]);

        let c = cycle(4);
        let e = extract_nested_generators(&c, 2).unwrap();
        let pairs: BTreeSet<BTreeSet<VertexSet>> = e
            .member_sets()
            .iter()
            .map(|s| BTreeSet::from([s.clone(), s.complement()]))
            .collect();
        let expected: BTreeSet<BTreeSet<VertexSet>> = ["1", "2", "3", "4"]
            .iter()
            .map(|x| {
                let s = c.cut(&[*x]).unwrap().into_set();
                BTreeSet::from([s.clone(), s.complement()])
            })
            .collect();
        assert_eq!(pairs, expected);
        assert!(extract_nested_generators(&c, 1).unwrap().is_empty());
    }

    #[test]
    fn nested_system_rejects_crossing_members() {
        let c = cycle(4);
        let sets = vec![c.cut(&["1", "2"]).unwrap().into_set(), c.cut(&["2", "3"]).unwrap().into_set()];
        assert!(matches!(NestedSystem::new(c, sets, 2, vec![]), Err(Error::Precondition(_))));
    }

    #[test]
    fn bonds_match_connected_enumeration() {
        let mut graphs: Vec<Graph> = NAMES.iter().map(|n| by_name(n).unwrap()).collect();
        graphs.extend(corpus(6, 20, 5));
        for g in &graphs {
            for n in 1..=3 {
                assert_eq!(enumerate_bonds(g, n).unwrap(), enumerate_sets(g, n, true).unwrap());
            }
        }
    }

    #[test]
    fn uncrossed_generators_on_small_graphs() {
        let s = extract_uncrossed_generators(&path(30), 1).unwrap();
        assert_eq!(s.len(), 29);
        let s = extract_uncrossed_generators(&cycle(4), 2).unwrap();
        assert_eq!(names(s.graph(), &s.members()), vec![v(&["1"]), v(&["2"]), v(&["3"]), v(&["1", "2", "3"])]);
        // the two extractions agree on trees, where every bond is one edge
        let trees: Vec<Graph> = corpus(7, 40, 9).into_iter().filter(|g| g.edges().len() + 1 == g.vertex_count()).collect();
        assert!(trees.len() > 5);
        for g in trees.iter().chain([&path(4)]) {
            for n in 1..=2 {
                let a = extract_uncrossed_generators(g, n).unwrap();
                let b = extract_nested_generators(g, n).unwrap();
                assert_eq!(a.member_sets(), b.member_sets());
            }
        }
        let b = extract_nested_generators(&barbell(), 1).unwrap();
        assert_eq!(extract_uncrossed_generators(&barbell(), 1).unwrap().member_sets(), b.member_sets());
    }
}
