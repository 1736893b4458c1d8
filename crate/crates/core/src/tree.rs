//! Structure trees of nested systems and canonical decompositions of cuts.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::bitset::VertexSet;
use crate::cuts::{apply_permutation, extract_nested_generators, sets_nested, NestedSystem};
use crate::error::{Error, Result};
use crate::graph::{Cut, Graph};
use crate::pocset::{half, Orientation, Pocset};

/// Above this many pairs the per-vertex orientation check is skipped.
const ORIENTATION_CHECK_LIMIT: usize = 128;

/// Edge `pair` of the tree. `inside` lies on the representative's side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub pair: usize,
    pub inside: usize,
    pub outside: usize,
}

#[derive(Debug, Clone)]
pub struct StructureTree {
    system: NestedSystem,
    vertices: Vec<Orientation>,
    edges: Vec<TreeEdge>,
    nu: Vec<usize>,
    incident: Vec<Vec<usize>>,
    index: HashMap<Orientation, usize>,
}

pub fn build_tree(system: &NestedSystem) -> Result<StructureTree> {
    let members = system.member_sets();
    let graph = system.graph();
    let pocset = Pocset::from_members(members);
    let (raw_vertices, ends) = pocset.tree()?;

    let nu_orientation = |x: usize| Orientation::new(members.iter().map(|m| !m.contains(x)).collect());
    let raw_index: HashMap<&Orientation, usize> = raw_vertices.iter().enumerate().map(|(i, o)| (o, i)).collect();
    let mut raw_nu = Vec::with_capacity(graph.vertex_count());
    for x in 0..graph.vertex_count() {
        let o = nu_orientation(x);
        let i = *raw_index
            .get(&o)
            .ok_or_else(|| Error::invariant(format!("vertex {} has no tree vertex", graph.id(x))))?;
        raw_nu.push(i);
    }

    // image vertices first, in order of their least preimage, then the rest
    let mut order: Vec<usize> = Vec::with_capacity(raw_vertices.len());
    for &i in &raw_nu {
        if !order.contains(&i) {
            order.push(i);
        }
    }
    let mut rest: Vec<usize> = (0..raw_vertices.len()).filter(|i| !order.contains(i)).collect();
    rest.sort_by(|&a, &b| raw_vertices[a].cmp(&raw_vertices[b]));
    order.extend(rest);
    let mut renumber = vec![0; raw_vertices.len()];
    for (new, &old) in order.iter().enumerate() {
        renumber[old] = new;
    }

    let vertices: Vec<Orientation> = order.iter().map(|&i| raw_vertices[i].clone()).collect();
    let edges: Vec<TreeEdge> = ends
        .iter()
        .enumerate()
        .map(|(p, &(a, b))| TreeEdge { pair: p, inside: renumber[a], outside: renumber[b] })
        .collect();
    let nu = raw_nu.iter().map(|&i| renumber[i]).collect();
    let mut incident = vec![Vec::new(); vertices.len()];
    for e in &edges {
        incident[e.inside].push(e.pair);
        incident[e.outside].push(e.pair);
    }
    let index = vertices.iter().cloned().enumerate().map(|(i, o)| (o, i)).collect();
    let tree = StructureTree { system: system.clone(), vertices, edges, nu, incident, index };
    tree.verify(&pocset)?;
    Ok(tree)
}

/// The structure tree at level `n`: the tree of the extracted generators.
pub fn structure_tree(g: &Graph, n: u64) -> Result<StructureTree> {
    build_tree(&extract_nested_generators(g, n)?)
}

impl StructureTree {
    fn verify(&self, pocset: &Pocset) -> Result<()> {
        if self.edges.len() + 1 != self.vertices.len() {
            return Err(Error::invariant(format!(
                "{} vertices and {} edges do not form a tree",
                self.vertices.len(),
                self.edges.len()
            )));
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invariant("structure tree is disconnected"));
        }
        for e in &self.edges {
            let diff = self.vertices[e.inside].difference(&self.vertices[e.outside]);
            if diff != [e.pair] {
                return Err(Error::invariant(format!("edge {} joins orientations differing on {diff:?}", e.pair)));
            }
        }
        if pocset.pairs() <= ORIENTATION_CHECK_LIMIT && !self.vertices.iter().all(|o| pocset.is_orientation(o)) {
            return Err(Error::invariant("tree vertex is not an orientation"));
        }
        Ok(())
    }

    pub fn system(&self) -> &NestedSystem {
        &self.system
    }

    pub fn graph(&self) -> &Graph {
        self.system.graph()
    }

    pub fn level(&self) -> u64 {
        self.system.level()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Orientation] {
        &self.vertices
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn nu(&self, x: usize) -> usize {
        self.nu[x]
    }

    pub fn nu_map(&self) -> &[usize] {
        &self.nu
    }

    pub fn vertex_of(&self, o: &Orientation) -> Option<usize> {
        self.index.get(o).copied()
    }

    pub fn preimage(&self, t: usize) -> VertexSet {
        VertexSet::from_indices(self.nu.len(), (0..self.nu.len()).filter(|&x| self.nu[x] == t))
    }

    pub fn in_image(&self, t: usize) -> bool {
        self.nu.contains(&t)
    }

    pub fn degree(&self, t: usize) -> usize {
        self.incident[t].len()
    }

    pub fn incident_pairs(&self, t: usize) -> &[usize] {
        &self.incident[t]
    }

    pub fn neighbors(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        self.incident[t].iter().map(move |&p| {
            let e = self.edges[p];
            if e.inside == t {
                e.outside
            } else {
                e.inside
            }
        })
    }

    /// The half-space reached from `t` by crossing edge `pair`.
    fn branch(&self, t: usize, pair: usize) -> VertexSet {
        let m = &self.system.member_sets()[pair];
        if self.edges[pair].inside == t {
            m.complement()
        } else {
            m.clone()
        }
    }

    /// The tree automorphism induced by a graph automorphism preserving the
    /// system.
    pub fn induced_automorphism(&self, sigma: &[usize]) -> Result<Vec<usize>> {
        let members = self.system.member_sets();
        let mut image_of_half = Vec::with_capacity(2 * members.len());
        for m in members {
            for set in [m.clone(), m.complement()] {
                let moved = apply_permutation(&set, sigma);
                let q = self
                    .system
                    .pair_of(&moved)
                    .ok_or_else(|| Error::precondition("permutation does not preserve the system"))?;
                image_of_half.push(half(q, moved != members[q]));
            }
        }
        self.vertices
            .iter()
            .map(|o| {
                let mut comp = vec![false; members.len()];
                for p in 0..members.len() {
                    let h = image_of_half[o.chosen(p)];
                    comp[h / 2] = h % 2 == 1;
                }
                self.vertex_of(&Orientation::new(comp))
                    .ok_or_else(|| Error::invariant("induced map leaves the tree"))
            })
            .collect()
    }

    pub fn to_dot(&self) -> String {
        let g = self.graph();
        let mut out = format!("graph structure_tree_{} {{\n", self.level());
        for t in 0..self.vertices.len() {
            let pre = g.names(&self.preimage(t));
            if pre.is_empty() {
                out.push_str(&format!("  t{t} [label=\"t{t}\", shape=box];\n"));
            } else {
                out.push_str(&format!("  t{t} [label=\"t{t}\\n{}\"];\n", pre.join(",")));
            }
        }
        for e in &self.edges {
            let m = g.names(&self.system.member_sets()[e.pair]);
            out.push_str(&format!("  t{} -- t{} [label=\"{{{}}}\"];\n", e.inside, e.outside, m.join(",")));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_spec(&self) -> TreeSpec {
        let g = self.graph();
        TreeSpec {
            level: self.level(),
            vertices: (0..self.vertices.len())
                .map(|t| TreeVertexSpec { id: t, preimage: g.names(&self.preimage(t)), degree: self.degree(t) })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| TreeEdgeSpec {
                    inside: e.inside,
                    outside: e.outside,
                    member: g.names(&self.system.member_sets()[e.pair]),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub level: u64,
    pub vertices: Vec<TreeVertexSpec>,
    pub edges: Vec<TreeEdgeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeVertexSpec {
    pub id: usize,
    pub preimage: Vec<String>,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEdgeSpec {
    pub inside: usize,
    pub outside: usize,
    pub member: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpressionForm {
    /// The cut is the union of the generators.
    DirectUnion,
    /// The cut is the complement of the union of the generators.
    ComplementedUnion,
    /// The cut is the symmetric difference of the generators, complemented
    /// when `contains_base` is set.
    RecursiveMerge,
}

/// A generator: side `complement` of pair `pair`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub pair: usize,
    pub complement: bool,
    pub set: VertexSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalExpression {
    /// Tree vertices on the side of the cut.
    pub a_side: Vec<bool>,
    pub form: ExpressionForm,
    pub generators: Vec<Generator>,
    pub contains_base: bool,
    /// Vertices outside the image of the tree map decided by an exact tie.
    pub ties: Vec<usize>,
    pub graph: u64,
    pub universe: usize,
}

/// A twig of the crossing subtree: the half-space on its leaf side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Twig {
    pub pair: usize,
    pub complement: bool,
}

/// Decomposition recursing on the first admissible twig.
pub fn canonical_decomposition(a: &Cut, tree: &StructureTree) -> Result<CanonicalExpression> {
    canonical_decomposition_with(a, tree, &mut |_| 0)
}

/// Decomposition with a caller-chosen twig at every recursive step.
pub fn canonical_decomposition_with(
    a: &Cut,
    tree: &StructureTree,
    choose: &mut dyn FnMut(&[Twig]) -> usize,
) -> Result<CanonicalExpression> {
    check_ring_member(a, tree)?;
    let set = a.set();
    let (a_side, ties) = sides(tree, set, choose)?;
    let members = tree.system.member_sets();
    let crossing = crossing_pairs(set, members);
    let half_set = |pair: usize, complement: bool| {
        let m = &members[pair];
        Generator { pair, complement, set: if complement { m.complement() } else { m.clone() } }
    };
    let (form, generators) = if !crossing.is_empty() {
        let gens = tree
            .edges
            .iter()
            .filter(|e| a_side[e.inside] != a_side[e.outside])
            .map(|e| half_set(e.pair, false))
            .collect();
        (ExpressionForm::RecursiveMerge, gens)
    } else if set.is_empty() {
        (ExpressionForm::DirectUnion, vec![])
    } else if set.is_full() {
        (ExpressionForm::ComplementedUnion, vec![])
    } else if let Some(g) = (0..members.len())
        .flat_map(|p| [half_set(p, false), half_set(p, true)])
        .find(|g| &g.set == set)
    {
        (ExpressionForm::DirectUnion, vec![g])
    } else {
        let z = (0..tree.vertex_count())
            .find(|&t| tree.incident[t].iter().all(|&p| pure(&tree.branch(t, p), set).is_some()))
            .ok_or_else(|| Error::invariant("nested cut determines no vertex"))?;
        let mut inside = Vec::new();
        let mut outside = Vec::new();
        for &p in &tree.incident[z] {
            let g = half_set(p, tree.edges[p].inside == z);
            if pure(&g.set, set) == Some(true) {
                inside.push(g);
            } else {
                outside.push(g);
            }
        }
        let union = |gs: &[Generator]| gs.iter().fold(VertexSet::empty(set.universe()), |u, g| u.union(&g.set));
        if &union(&inside) == set {
            (ExpressionForm::DirectUnion, inside)
        } else if union(&outside) == set.complement() {
            (ExpressionForm::ComplementedUnion, outside)
        } else {
            return Err(Error::invariant("nested cut is not a union of branches at its vertex"));
        }
    };
    let mut generators = generators;
    generators.sort_by_key(|g| (g.pair, g.complement));
    let expr = CanonicalExpression {
        a_side,
        form,
        generators,
        contains_base: set.contains(tree.graph().base()),
        ties,
        graph: a.graph_fingerprint(),
        universe: set.universe(),
    };
    if evaluate_expression(&expr)?.set() != set {
        return Err(Error::invariant("expression does not evaluate back to the cut"));
    }
    Ok(expr)
}

/// Side assignments produced by every admissible sequence of twig choices.
pub fn all_twig_orders(a: &Cut, tree: &StructureTree) -> Result<Vec<Vec<bool>>> {
    check_ring_member(a, tree)?;
    let mut out = all_sides(tree, a.set())?;
    out.sort();
    out.dedup();
    Ok(out)
}

fn all_sides(tree: &StructureTree, set: &VertexSet) -> Result<Vec<Vec<bool>>> {
    let crossing = crossing_pairs(set, tree.system.member_sets());
    if crossing.is_empty() {
        return Ok(vec![flat_sides(tree, set).0]);
    }
    let mut out = Vec::new();
    for twig in twigs(tree, &crossing) {
        let (near, far) = split(tree, set, twig);
        let (p1, _) = flat_sides(tree, &near);
        for p2 in all_sides(tree, &far)? {
            out.push(p1.iter().zip(&p2).map(|(x, y)| x ^ y).collect());
        }
    }
    Ok(out)
}

pub fn evaluate_expression(expr: &CanonicalExpression) -> Result<Cut> {
    let mut acc = VertexSet::empty(expr.universe);
    for g in &expr.generators {
        if g.set.universe() != expr.universe {
            return Err(Error::structural("generator over a different vertex set"));
        }
        acc = match expr.form {
            ExpressionForm::RecursiveMerge => acc.symmetric_difference(&g.set),
            _ => acc.union(&g.set),
        };
    }
    let set = match expr.form {
        ExpressionForm::DirectUnion => acc,
        ExpressionForm::ComplementedUnion => acc.complement(),
        ExpressionForm::RecursiveMerge if expr.contains_base => acc.complement(),
        ExpressionForm::RecursiveMerge => acc,
    };
    Ok(Cut::from_parts(set, expr.graph))
}

impl CanonicalExpression {
    pub fn to_spec(&self, tree: &StructureTree) -> ExpressionSpec {
        let g = tree.graph();
        ExpressionSpec {
            form: self.form,
            cut: evaluate_expression(self).map(|c| g.names(c.set())).unwrap_or_default(),
            a_side: (0..self.a_side.len()).filter(|&t| self.a_side[t]).collect(),
            generators: self.generators.iter().map(|gen| g.names(&gen.set)).collect(),
            contains_base: self.contains_base,
            ties: self.ties.clone(),
            tie_rule: TIE_RULE.to_string(),
        }
    }
}

pub const TIE_RULE: &str = "strict majority of pure incident branches, ties to the complement side";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpressionSpec {
    pub form: ExpressionForm,
    pub cut: Vec<String>,
    pub a_side: Vec<usize>,
    pub generators: Vec<Vec<String>>,
    pub contains_base: bool,
    pub ties: Vec<usize>,
    pub tie_rule: String,
}

fn check_ring_member(a: &Cut, tree: &StructureTree) -> Result<()> {
    if a.graph_fingerprint() != tree.graph().fingerprint() || a.set().universe() != tree.nu.len() {
        return Err(Error::structural("cut and tree live on different graphs"));
    }
    for t in 0..tree.vertex_count() {
        let fiber = tree.preimage(t);
        if !fiber.is_subset(a.set()) && !fiber.is_disjoint(a.set()) {
            return Err(Error::Domain(format!(
                "cut splits the fiber {:?} and is not in the ring of the system",
                tree.graph().names(&fiber)
            )));
        }
    }
    Ok(())
}

fn crossing_pairs(set: &VertexSet, members: &[VertexSet]) -> Vec<usize> {
    (0..members.len()).filter(|&p| !sets_nested(set, &members[p])).collect()
}

/// `Some(true)` if `branch` lies in `set`, `Some(false)` if it misses it.
fn pure(branch: &VertexSet, set: &VertexSet) -> Option<bool> {
    if branch.is_subset(set) {
        Some(true)
    } else if branch.is_disjoint(set) {
        Some(false)
    } else {
        None
    }
}

/// Side assignment for a cut nested with every member.
fn flat_sides(tree: &StructureTree, set: &VertexSet) -> (Vec<bool>, Vec<usize>) {
    let mut ties = Vec::new();
    let sides = (0..tree.vertex_count())
        .map(|t| {
            if let Some(x) = tree.preimage(t).first() {
                return set.contains(x);
            }
            let (mut inside, mut outside) = (0, 0);
            for &p in &tree.incident[t] {
                match pure(&tree.branch(t, p), set) {
                    Some(true) => inside += 1,
                    Some(false) => outside += 1,
                    None => {}
                }
            }
            if inside == outside {
                ties.push(t);
            }
            inside > outside
        })
        .collect();
    (sides, ties)
}

fn twigs(tree: &StructureTree, crossing: &[usize]) -> Vec<Twig> {
    let mut fdeg = vec![0usize; tree.vertex_count()];
    for &p in crossing {
        fdeg[tree.edges[p].inside] += 1;
        fdeg[tree.edges[p].outside] += 1;
    }
    let mut out = Vec::new();
    for &p in crossing {
        let e = tree.edges[p];
        if fdeg[e.inside] == 1 {
            out.push(Twig { pair: p, complement: false });
        }
        if fdeg[e.outside] == 1 {
            out.push(Twig { pair: p, complement: true });
        }
    }
    out
}

/// `set` cut along a twig into its leaf-side part and the remainder.
fn split(tree: &StructureTree, set: &VertexSet, twig: Twig) -> (VertexSet, VertexSet) {
    let m = &tree.system.member_sets()[twig.pair];
    let c = if twig.complement { m.complement() } else { m.clone() };
    (set.intersection(&c), set.difference(&c))
}

fn sides(
    tree: &StructureTree,
    set: &VertexSet,
    choose: &mut dyn FnMut(&[Twig]) -> usize,
) -> Result<(Vec<bool>, Vec<usize>)> {
    let members = tree.system.member_sets();
    let crossing = crossing_pairs(set, members);
    if crossing.is_empty() {
        return Ok(flat_sides(tree, set));
    }
    let options = twigs(tree, &crossing);
    let pick = choose(&options);
    let twig = *options.get(pick).ok_or_else(|| Error::precondition(format!("twig choice {pick} out of range")))?;
    let (near, far) = split(tree, set, twig);
    if !crossing_pairs(&near, members).is_empty() {
        return Err(Error::invariant("leaf side of a twig still crosses the system"));
    }
    let (p1, mut t1) = flat_sides(tree, &near);
    let (p2, t2) = sides(tree, &far, choose)?;
    let merged: Vec<bool> = p1.iter().zip(&p2).map(|(x, y)| x ^ y).collect();
    t1.extend(t2);
    t1.sort();
    t1.dedup();
    Ok((merged, t1))
}
