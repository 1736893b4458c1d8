//! Groups given by finite complete rewriting systems.
//!
//! Lowercase letters are generators and the matching uppercase letters
//! their inverses. Free cancellation is always part of the system.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

const REWRITE_STEP_LIMIT: usize = 100_000;

pub fn inverse_letter(c: char) -> char {
    if c.is_ascii_lowercase() {
        c.to_ascii_uppercase()
    } else {
        c.to_ascii_lowercase()
    }
}

/// The formal inverse of a word: reversed, with every letter inverted.
pub fn formal_inverse(word: &str) -> String {
    word.chars().rev().map(inverse_letter).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewritingSystem {
    letters: Vec<char>,
    rules: Vec<(Vec<char>, Vec<char>)>,
}

impl RewritingSystem {
    /// Rules over the generators `gens` (lowercase); cancellation rules are added.
    pub fn new(gens: &[char], rules: &[(&str, &str)]) -> Result<Self> {
        if let Some(c) = gens.iter().find(|c| !c.is_ascii_lowercase()) {
            return Err(Error::Oracle(format!("generator {c:?} is not a lowercase letter")));
        }
        let letters: Vec<char> = gens.iter().flat_map(|&c| [c, inverse_letter(c)]).collect();
        let mut all: Vec<(Vec<char>, Vec<char>)> = Vec::new();
        for &c in gens {
            all.push((vec![c, inverse_letter(c)], vec![]));
            all.push((vec![inverse_letter(c), c], vec![]));
        }
        for (l, r) in rules {
            let (l, r): (Vec<char>, Vec<char>) = (l.chars().collect(), r.chars().collect());
            if l.is_empty() || l.iter().chain(&r).any(|c| !letters.contains(c)) {
                return Err(Error::Oracle(format!("rule {l:?} -> {r:?} uses unknown letters")));
            }
            all.push((l, r));
        }
        Ok(RewritingSystem { letters, rules: all })
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    pub fn reduce(&self, word: &str) -> Result<String> {
        let mut w: Vec<char> = word.chars().collect();
        if let Some(c) = w.iter().find(|c| !self.letters.contains(c)) {
            return Err(Error::Oracle(format!("letter {c:?} is not in the alphabet")));
        }
        for _ in 0..REWRITE_STEP_LIMIT {
            match self.first_redex(&w) {
                None => return Ok(w.into_iter().collect()),
                Some((pos, rule)) => {
                    let (l, r) = &self.rules[rule];
                    w.splice(pos..pos + l.len(), r.iter().copied());
                }
            }
        }
        Err(Error::Oracle(format!("rewriting of {word:?} did not terminate")))
    }

    fn first_redex(&self, w: &[char]) -> Option<(usize, usize)> {
        (0..w.len()).find_map(|pos| {
            self.rules.iter().position(|(l, _)| w[pos..].starts_with(l)).map(|r| (pos, r))
        })
    }

    /// Critical pairs that fail to join, as the two irreducible results.
    pub fn unjoinable_critical_pairs(&self) -> Result<Vec<(String, String, String)>> {
        let mut bad = Vec::new();
        for (l1, r1) in &self.rules {
            for (l2, r2) in &self.rules {
                // proper overlaps: a suffix of l1 is a prefix of l2
                for k in 1..l1.len().min(l2.len()) {
                    if l1[l1.len() - k..] == l2[..k] {
                        let overlap: Vec<char> = l1.iter().chain(&l2[k..]).copied().collect();
                        let left: String = r1.iter().chain(&l2[k..]).collect();
                        let right: String = l1[..l1.len() - k].iter().chain(r2).collect();
                        self.record(&overlap, &left, &right, &mut bad)?;
                    }
                }
                // inclusion: l2 occurs inside l1
                if l2.len() < l1.len() {
                    for pos in 0..=l1.len() - l2.len() {
                        if l1[pos..pos + l2.len()] == l2[..] {
                            let left: String = r1.iter().collect();
                            let right: String =
                                l1[..pos].iter().chain(r2).chain(&l1[pos + l2.len()..]).collect();
                            self.record(l1, &left, &right, &mut bad)?;
                        }
                    }
                }
            }
        }
        Ok(bad)
    }

    fn record(&self, source: &[char], left: &str, right: &str, bad: &mut Vec<(String, String, String)>) -> Result<()> {
        let (a, b) = (self.reduce(left)?, self.reduce(right)?);
        if a != b {
            bad.push((source.iter().collect(), a, b));
        }
        Ok(())
    }
}

/// A group with a subgroup `H` generated by some of its letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupOracle {
    name: String,
    generators: Vec<char>,
    system: RewritingSystem,
    h_letters: Vec<char>,
    s_words: Vec<(String, String)>,
}

impl GroupOracle {
    /// `h_gens` must be generator letters that every normal form lists last,
    /// so that stripping them yields a coset key.
    pub fn new(
        name: &str,
        generators: &[char],
        rules: &[(&str, &str)],
        h_gens: &[char],
        s_words: &[(&str, &str)],
    ) -> Result<Self> {
        let system = RewritingSystem::new(generators, rules)?;
        let bad = system.unjoinable_critical_pairs()?;
        if let Some((w, a, b)) = bad.first() {
            return Err(Error::Oracle(format!("rewriting system not confluent: {w:?} reduces to {a:?} and {b:?}")));
        }
        if let Some(c) = h_gens.iter().find(|c| !generators.contains(c)) {
            return Err(Error::Oracle(format!("subgroup generator {c:?} is not a generator")));
        }
        let mut oracle = GroupOracle {
            name: name.to_string(),
            generators: generators.to_vec(),
            system,
            h_letters: h_gens.iter().flat_map(|&c| [c, inverse_letter(c)]).collect(),
            s_words: vec![],
        };
        let s: Vec<(String, String)> = if s_words.is_empty() {
            generators.iter().map(|c| (c.to_string(), c.to_string())).collect()
        } else {
            s_words.iter().map(|(n, w)| Ok((n.to_string(), oracle.normal_form(w)?))).collect::<Result<_>>()?
        };
        oracle.s_words = s;
        Ok(oracle)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generators(&self) -> &[char] {
        &self.generators
    }

    pub fn letters(&self) -> &[char] {
        self.system.letters()
    }

    /// The generating set `S` used for coset graphs, as named words.
    pub fn s_words(&self) -> &[(String, String)] {
        &self.s_words
    }

    pub fn h_letters(&self) -> &[char] {
        &self.h_letters
    }

    pub fn h_generators(&self) -> Vec<char> {
        self.h_letters.iter().copied().filter(|c| c.is_ascii_lowercase()).collect()
    }

    /// The same group with a different subgroup.
    pub fn with_subgroup(&self, h_gens: &[char]) -> Result<Self> {
        if let Some(c) = h_gens.iter().find(|c| !self.generators.contains(c)) {
            return Err(Error::Oracle(format!("subgroup generator {c:?} is not a generator")));
        }
        let mut out = self.clone();
        out.h_letters = h_gens.iter().flat_map(|&c| [c, inverse_letter(c)]).collect();
        Ok(out)
    }

    pub fn identity(&self) -> String {
        String::new()
    }

    pub fn normal_form(&self, word: &str) -> Result<String> {
        self.system.reduce(word)
    }

    pub fn multiply(&self, a: &str, b: &str) -> Result<String> {
        self.system.reduce(&format!("{a}{b}"))
    }

    pub fn inverse(&self, w: &str) -> Result<String> {
        self.system.reduce(&formal_inverse(w))
    }

    /// Key of the left coset `gH`: the normal form without trailing `H` letters.
    pub fn coset_key(&self, word: &str) -> Result<String> {
        let nf = self.normal_form(word)?;
        Ok(nf.trim_end_matches(|c| self.h_letters.contains(&c)).to_string())
    }

    pub fn in_subgroup(&self, word: &str) -> Result<bool> {
        Ok(self.coset_key(word)?.is_empty())
    }

    /// Membership in `gHg^-1`.
    pub fn in_conjugate(&self, word: &str, g: &str) -> Result<bool> {
        self.in_subgroup(&format!("{}{word}{g}", formal_inverse(g)))
    }

    /// Normal forms of all words of length at most `radius` in the letters.
    pub fn ball(&self, radius: usize) -> Result<Vec<String>> {
        let mut seen: BTreeSet<String> = BTreeSet::from([String::new()]);
        let mut frontier = vec![String::new()];
        for _ in 0..radius {
            let mut next = Vec::new();
            for w in &frontier {
                for &c in self.letters() {
                    let v = self.multiply(w, &c.to_string())?;
                    if seen.insert(v.clone()) {
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        Ok(seen.into_iter().collect())
    }

    /// Sampled checks: associativity on triples, inverses, subgroup closure,
    /// and that coset keys are constant on cosets.
    pub fn check_axioms(&self, radius: usize) -> Result<()> {
        let ball = self.ball(radius)?;
        for a in &ball {
            if !self.multiply(a, &self.inverse(a)?)?.is_empty() {
                return Err(Error::Oracle(format!("{a:?} times its inverse is not the identity")));
            }
            for &h in &self.h_letters {
                if self.coset_key(&format!("{a}{h}"))? != self.coset_key(a)? {
                    return Err(Error::Oracle(format!("coset key of {a:?} changes under {h}")));
                }
            }
            for b in &ball {
                let ab = self.multiply(a, b)?;
                let same_coset = self.coset_key(a)? == self.coset_key(b)?;
                if same_coset != self.in_subgroup(&format!("{}{b}", formal_inverse(a)))? {
                    return Err(Error::Oracle(format!("coset key disagrees with membership for {a:?}, {b:?}")));
                }
                if self.in_subgroup(a)? && self.in_subgroup(b)? && !self.in_subgroup(&ab)? {
                    return Err(Error::Oracle(format!("subgroup not closed at {a:?}, {b:?}")));
                }
                for c in ball.iter().step_by(3) {
                    if self.multiply(&ab, c)? != self.multiply(a, &self.multiply(b, c)?)? {
                        return Err(Error::Oracle(format!("associativity fails at {a:?}, {b:?}, {c:?}")));
                    }
                }
            }
        }
        Ok(())
    }
}

pub const FIXTURES: [&str; 6] = ["z", "z2", "f2", "dinf", "z2z3", "bs-amalgam"];

/// Fixture groups with their default subgroups.
pub fn fixture(name: &str) -> Result<GroupOracle> {
    match name {
        "z" => GroupOracle::new("z", &['t'], &[], &[], &[]),
        "z2" => GroupOracle::new(
            "z2",
            &['x', 'y'],
            &[("xy", "yx"), ("xY", "Yx"), ("Xy", "yX"), ("XY", "YX")],
            &['x'],
            &[],
        ),
        "f2" => GroupOracle::new("f2", &['a', 'b'], &[], &['a'], &[]),
        "dinf" => GroupOracle::new("dinf", &['s', 't'], &[("S", "s"), ("T", "t"), ("ss", ""), ("tt", "")], &['s'], &[]),
        "z2z3" => GroupOracle::new("z2z3", &['a', 'b'], &[("A", "a"), ("aa", ""), ("bb", "B"), ("BB", "b")], &['a'], &[]),
        // <a, b | a^2 = b^2> as <x, y | x y x^-1 = y^-1> with a = x, b = x y^-1
        "bs-amalgam" => GroupOracle::new(
            "bs-amalgam",
            &['x', 'y'],
            &[("xy", "Yx"), ("xY", "yx"), ("Xy", "YX"), ("XY", "yX")],
            &['x'],
            &[("a", "x"), ("b", "xY")],
        ),
        _ => Err(Error::Domain(format!("unknown group fixture {name:?}; known: {}", FIXTURES.join(", ")))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_fixtures_are_confluent_groups() {
        for name in FIXTURES {
            let g = fixture(name).unwrap();
            g.check_axioms(3).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn non_confluent_system_is_rejected() {
        // ab -> c-free rules with overlapping left sides that do not join
        let err = GroupOracle::new("bad", &['a', 'b'], &[("ab", "b"), ("ba", "a")], &[], &[]).unwrap_err();
        assert!(matches!(err, Error::Oracle(_)));
    }

    #[test]
    fn normal_forms() {
        let z2 = fixture("z2").unwrap();
        assert_eq!(z2.normal_form("xyXy").unwrap(), "yy");
        assert_eq!(z2.coset_key("yxx").unwrap(), "y");
        let d = fixture("dinf").unwrap();
        assert_eq!(d.normal_form("stts").unwrap(), "");
        assert_eq!(d.coset_key("ts").unwrap(), "t");
        let k = fixture("bs-amalgam").unwrap();
        // a^2 = b^2 is central
        assert_eq!(k.normal_form("xx").unwrap(), k.normal_form("xYxY").unwrap());
        assert_eq!(k.multiply("xx", "y").unwrap(), k.multiply("y", "xx").unwrap());
    }

    #[test]
    fn conjugate_membership() {
        let f = fixture("f2").unwrap();
        assert!(!f.in_conjugate("bab", "b").unwrap());
        assert!(f.in_conjugate("baB", "b").unwrap());
        assert!(!f.in_conjugate("a", "b").unwrap());
    }

    #[test]
    fn unknown_letters_rejected() {
        assert!(fixture("z").unwrap().normal_form("q").is_err());
        assert!(fixture("nope").is_err());
    }
}
