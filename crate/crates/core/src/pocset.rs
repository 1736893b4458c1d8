//! Half-space systems with an inclusion relation, and their orientations.
//!
//! Half-space `2p` is the representative side of pair `p`, `2p + 1` its
//! complement. An orientation picks one half-space per pair and is upward
//! closed: these are the vertices of structure trees and of the cubing.

use crate::bitset::VertexSet;
use crate::error::{check_guard, Error, Result};

pub const ORIENTATION_GUARD: usize = 16;

#[inline]
pub fn half(pair: usize, complement: bool) -> usize {
    2 * pair + complement as usize
}

#[inline]
pub fn opposite(h: usize) -> usize {
    h ^ 1
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pocset {
    pairs: usize,
    le: Vec<VertexSet>,
}

/// One chosen half-space per pair; `true` means the complement side.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Orientation {
    complement: Vec<bool>,
}

impl Orientation {
    pub fn new(complement: Vec<bool>) -> Self {
        Orientation { complement }
    }

    pub fn pairs(&self) -> usize {
        self.complement.len()
    }

    pub fn chosen(&self, pair: usize) -> usize {
        half(pair, self.complement[pair])
    }

    pub fn takes_complement(&self, pair: usize) -> bool {
        self.complement[pair]
    }

    pub fn chooses(&self, h: usize) -> bool {
        self.chosen(h / 2) == h
    }

    pub fn flip(&self, pair: usize) -> Orientation {
        let mut c = self.complement.clone();
        c[pair] = !c[pair];
        Orientation { complement: c }
    }

    /// Pairs on which two orientations disagree.
    pub fn difference(&self, other: &Orientation) -> Vec<usize> {
        (0..self.pairs()).filter(|&p| self.complement[p] != other.complement[p]).collect()
    }

    pub fn as_bits(&self) -> &[bool] {
        &self.complement
    }
}

impl Pocset {
    /// Inclusion among explicit half-spaces `(C, C*)`.
    pub fn from_pairs(pairs: &[(VertexSet, VertexSet)]) -> Self {
        let halves: Vec<&VertexSet> = pairs.iter().flat_map(|(a, b)| [a, b]).collect();
        let n = halves.len();
        let le = (0..n)
            .map(|i| VertexSet::from_indices(n, (0..n).filter(|&j| halves[i].is_subset(halves[j]))))
            .collect();
        Pocset { pairs: pairs.len(), le }
    }

    /// Builds from a representative per pair, the complement taken in the
    /// set's universe.
    pub fn from_members(members: &[VertexSet]) -> Self {
        let pairs: Vec<(VertexSet, VertexSet)> =
            members.iter().map(|m| (m.clone(), m.complement())).collect();
        Self::from_pairs(&pairs)
    }

    /// An abstract relation `le[h][k]` meaning half-space `h` is contained
    /// in `k`. Checked for reflexivity, transitivity, antisymmetry and
    /// complement reversal.
    pub fn from_relation(pairs: usize, le: Vec<Vec<bool>>) -> Result<Self> {
        let n = 2 * pairs;
        if le.len() != n || le.iter().any(|r| r.len() != n) {
            return Err(Error::structural("inclusion relation has the wrong shape"));
        }
        for i in 0..n {
            if !le[i][i] {
                return Err(Error::structural(format!("half-space {i} not contained in itself")));
            }
            if le[i][opposite(i)] {
                return Err(Error::structural(format!("half-space {i} lies in its own complement")));
            }
            for j in 0..n {
                if i != j && le[i][j] && le[j][i] {
                    return Err(Error::structural(format!("half-spaces {i} and {j} coincide")));
                }
                if le[i][j] && !le[opposite(j)][opposite(i)] {
                    return Err(Error::structural(format!("inclusion {i} <= {j} not reversed by complement")));
                }
                for k in 0..n {
                    if le[i][j] && le[j][k] && !le[i][k] {
                        return Err(Error::structural(format!("inclusion not transitive at {i},{j},{k}")));
                    }
                }
            }
        }
        let le = le
            .iter()
            .map(|row| VertexSet::from_indices(n, (0..n).filter(|&j| row[j])))
            .collect();
        Ok(Pocset { pairs, le })
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn le(&self, h: usize, k: usize) -> bool {
        self.le[h].contains(k)
    }

    /// Some half-space of `p` is contained in some half-space of `q`.
    pub fn nested(&self, p: usize, q: usize) -> bool {
        p == q
            || [half(p, false), half(p, true)]
                .iter()
                .any(|&h| self.le(h, half(q, false)) || self.le(h, half(q, true)))
    }

    pub fn crossing_pair(&self) -> Option<(usize, usize)> {
        (0..self.pairs).flat_map(|p| (p + 1..self.pairs).map(move |q| (p, q))).find(|&(p, q)| !self.nested(p, q))
    }

    /// Exactly one side per pair and upward closed.
    pub fn is_orientation(&self, o: &Orientation) -> bool {
        o.pairs() == self.pairs
            && (0..self.pairs).all(|p| {
                let h = o.chosen(p);
                self.le[h].iter().all(|k| o.chooses(k))
            })
    }

    /// Every orientation, by depth-first search with upward propagation.
    pub fn orientations(&self) -> Result<Vec<Orientation>> {
        check_guard("wall pairs for orientation enumeration", self.pairs, ORIENTATION_GUARD)?;
        let mut out = Vec::new();
        let mut assign: Vec<Option<bool>> = vec![None; self.pairs];
        self.search(0, &mut assign, &mut out);
        out.sort();
        Ok(out)
    }

    fn search(&self, p: usize, assign: &mut Vec<Option<bool>>, out: &mut Vec<Orientation>) {
        if p == self.pairs {
            out.push(Orientation::new(assign.iter().map(|a| a.expect("assigned")).collect()));
            return;
        }
        if assign[p].is_some() {
            self.search(p + 1, assign, out);
            return;
        }
        for side in [false, true] {
            let saved = assign.clone();
            if self.force(half(p, side), assign) {
                self.search(p + 1, assign, out);
            }
            *assign = saved;
        }
    }

    fn force(&self, h: usize, assign: &mut [Option<bool>]) -> bool {
        for k in self.le[h].iter() {
            let (q, side) = (k / 2, k % 2 == 1);
            match assign[q] {
                Some(s) if s != side => return false,
                _ => assign[q] = Some(side),
            }
        }
        true
    }

    /// For a nested system, the endpoint of each half-space's edge on that
    /// half-space's side; together these are all the tree vertices.
    pub fn vertex_at(&self, h: usize) -> Result<Orientation> {
        let hc = opposite(h);
        let mut comp = vec![false; self.pairs];
        for q in 0..self.pairs {
            if q == h / 2 {
                comp[q] = h % 2 == 1;
                continue;
            }
            let (d0, d1) = (half(q, false), half(q, true));
            comp[q] = if self.le(h, d0) {
                false
            } else if self.le(h, d1) {
                true
            } else if self.le(hc, d0) {
                false
            } else if self.le(hc, d1) {
                true
            } else {
                return Err(Error::precondition(format!("pairs {} and {q} cross", h / 2)));
            };
        }
        Ok(Orientation::new(comp))
    }

    /// The vertices and edges of the tree of a nested pocset. Edge `p` joins
    /// the vertices at its two half-spaces.
    pub fn tree(&self) -> Result<(Vec<Orientation>, Vec<(usize, usize)>)> {
        if let Some((p, q)) = self.crossing_pair() {
            return Err(Error::precondition(format!("pairs {p} and {q} cross")));
        }
        if self.pairs == 0 {
            return Ok((vec![Orientation::new(vec![])], vec![]));
        }
        let mut vertices: Vec<Orientation> = Vec::new();
        let mut ends = Vec::with_capacity(self.pairs);
        let mut index = std::collections::HashMap::new();
        for p in 0..self.pairs {
            let mut pair_ends = [0usize; 2];
            for (k, side) in [false, true].into_iter().enumerate() {
                let v = self.vertex_at(half(p, side))?;
                let next = vertices.len();
                let id = *index.entry(v.clone()).or_insert(next);
                if id == next {
                    vertices.push(v);
                }
                pair_ends[k] = id;
            }
            ends.push((pair_ends[0], pair_ends[1]));
        }
        Ok((vertices, ends))
    }
}
