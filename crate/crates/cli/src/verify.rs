//! Oracle suites behind `cutforest verify`. Each suite checks library output
//! against brute-force enumeration or a direct recount.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::Serialize;
use serde_json::{json, Value};

use cutforest::arena::{build_coset_graph, Arena, Finiteness};
use cutforest::cubing::*;
use cutforest::cuts::{apply_permutation, automorphisms, extract_nested_generators, Ring};
use cutforest::graph::fixtures;
use cutforest::group::fixture;
use cutforest::relative::*;
use cutforest::tree::{all_twig_orders, canonical_decomposition, evaluate_expression, structure_tree};
use cutforest::{Error, Graph, Result, VertexSet};

pub const SUITES: [&str; 10] = [
    "separation",
    "generators",
    "decomposition",
    "crossing",
    "corner",
    "relative-shape",
    "geometry",
    "sageev",
    "hyperbolicity",
    "round-trip",
];

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub checked: usize,
    /// Checks left undecided by truncation.
    pub inconclusive: usize,
    pub failures: Vec<String>,
    pub details: Value,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport { suite: suite.into(), pass: true, checked: 0, inconclusive: 0, failures: vec![], details: Value::Null }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.pass = false;
            if self.failures.len() < 20 {
                self.failures.push(what());
            }
        }
    }

    /// 0 on success, 2 when nothing could be decided, 3 on a failed check.
    pub fn exit_code(&self) -> i32 {
        if !self.pass {
            3
        } else if self.checked == 0 && self.inconclusive > 0 {
            2
        } else {
            0
        }
    }

    pub fn line(&self) -> String {
        let word = if self.pass { "PASS" } else { "FAIL" };
        let first = self.failures.first().map(|f| format!(": {f}")).unwrap_or_default();
        format!("{word} {} ({} checks, {} inconclusive){first}", self.suite, self.checked, self.inconclusive)
    }
}

pub fn run_suites(only: Option<&str>, seed: u64) -> Result<Vec<SuiteReport>> {
    let names: Vec<&str> = match only {
        Some(s) if SUITES.contains(&s) => vec![s],
        Some(s) => return Err(Error::Domain(format!("unknown suite {s:?}; known: {}", SUITES.join(", ")))),
        None => SUITES.to_vec(),
    };
    let mut sweep_cache: Option<Sweep> = None;
    let mut out = Vec::new();
    for name in names {
        let report = match name {
            "separation" => separation(seed)?,
            "generators" => generators(seed)?,
            "decomposition" => decomposition(seed)?,
            "crossing" | "corner" => {
                let s = match sweep_cache.take() {
                    Some(s) => s,
                    None => sweep()?,
                };
                let r = if name == "crossing" { crossing(&s) } else { corner(&s) };
                sweep_cache = Some(s);
                r
            }
            "relative-shape" => relative_shape()?,
            "geometry" => geometry()?,
            "sageev" => sageev()?,
            "hyperbolicity" => hyperbolicity(seed)?,
            _ => round_trip()?,
        };
        out.push(report);
    }
    Ok(out)
}

fn weight(g: &Graph, mask: u64) -> u64 {
    g.edges().iter().filter(|e| (mask >> e.u & 1) != (mask >> e.v & 1)).map(|e| e.capacity as u64).sum()
}

fn corpus(seed: u64) -> Vec<(String, Graph)> {
    let mut out: Vec<(String, Graph)> =
        fixtures::NAMES.iter().map(|n| (n.to_string(), fixtures::by_name(n).expect("fixture"))).collect();
    for (i, g) in fixtures::corpus(8, 60, seed).into_iter().enumerate() {
        out.push((format!("corpus{i}"), g));
    }
    out
}

fn separation(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("separation");
    for (name, g) in corpus(seed) {
        let nv = g.vertex_count();
        let w: Vec<u64> = (0..1u64 << nv).map(|m| weight(&g, m)).collect();
        for n in 1..=3 {
            let t = structure_tree(&g, n)?;
            for x in 0..nv {
                for y in x + 1..nv {
                    let separated = (1..(1u64 << nv) - 1).any(|m| (m >> x & 1) != (m >> y & 1) && w[m as usize] <= n);
                    r.check((t.nu(x) != t.nu(y)) == separated, || format!("{name} n={n}: {},{}", g.id(x), g.id(y)));
                }
            }
        }
    }
    Ok(r)
}

fn nested(a: &VertexSet, b: &VertexSet) -> bool {
    let (x, y, full) = (a.mask(), b.mask(), (1u64 << a.universe()) - 1);
    x & y == 0 || x & !y & full == 0 || !x & y & full == 0 || (x | y) == full
}

fn generators(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("generators");
    for (name, g) in corpus(seed) {
        let nv = g.vertex_count();
        let autos = automorphisms(&g)?;
        let mut previous: Vec<VertexSet> = vec![];
        for n in 1..=3 {
            let sys = extract_nested_generators(&g, n)?;
            let m = sys.member_sets();
            let has = |s: &VertexSet| m.contains(s) || m.contains(&s.complement());
            r.check(m.iter().all(|a| m.iter().all(|b| nested(a, b))), || format!("{name} n={n}: crossing members"));
            r.check(autos.iter().all(|s| m.iter().all(|a| has(&apply_permutation(a, s)))), || {
                format!("{name} n={n}: not invariant")
            });
            r.check(previous.iter().all(has), || format!("{name} n={n}: not monotone"));
            let ring = Ring::generated_by(nv, m);
            r.check((1..(1u64 << nv) - 1).all(|k| weight(&g, k) > n || ring.contains(&VertexSet::from_mask(nv, k))), || {
                format!("{name} n={n}: closure misses a cut")
            });
            previous = m.to_vec();
        }
    }
    Ok(r)
}

fn decomposition(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("decomposition");
    let mut forms: BTreeMap<String, usize> = BTreeMap::new();
    for (name, g) in corpus(seed) {
        let autos = automorphisms(&g)?;
        for n in 1..=3 {
            let t = structure_tree(&g, n)?;
            let induced: Vec<Vec<usize>> = autos.iter().map(|s| t.induced_automorphism(s)).collect::<Result<_>>()?;
            for set in Ring::generated_by(g.vertex_count(), t.system().member_sets()).elements()? {
                let a = g.cut_from_set(set.clone())?;
                let e = canonical_decomposition(&a, &t)?;
                *forms.entry(format!("{:?}", e.form)).or_default() += 1;
                r.check(evaluate_expression(&e)? == a, || format!("{name} n={n}: round trip"));
                r.check(all_twig_orders(&a, &t)? == vec![e.a_side.clone()], || format!("{name} n={n}: twig order"));
                for (sigma, ind) in autos.iter().zip(&induced) {
                    let f = canonical_decomposition(&g.cut_from_set(apply_permutation(&set, sigma))?, &t)?;
                    r.check((0..t.vertex_count()).all(|v| f.a_side[ind[v]] == e.a_side[v]) && f.form == e.form, || {
                        format!("{name} n={n}: not equivariant")
                    });
                }
            }
        }
    }
    r.details = json!({ "forms": forms });
    Ok(r)
}

const SWEEP: [&str; 4] = ["dinf", "f2", "z2", "bs-amalgam"];
const RADII: [usize; 3] = [4, 5, 6];

type Key = (String, Vec<String>, bool, Vec<String>, bool, String);

struct Sweep {
    cases: Vec<(String, usize, CrossingCase)>,
    crossing_errors: Vec<String>,
    corners: BTreeMap<Key, BTreeMap<usize, Finiteness>>,
    corner_errors: Vec<String>,
    confirmed: usize,
    inconclusive: usize,
    truncated: usize,
}

fn sweep() -> Result<Sweep> {
    let mut s = Sweep {
        cases: vec![],
        crossing_errors: vec![],
        corners: BTreeMap::new(),
        corner_errors: vec![],
        confirmed: 0,
        inconclusive: 0,
        truncated: 0,
    };
    for name in SWEEP {
        for r in RADII {
            let arena = build_coset_graph(&fixture(name)?, r)?;
            let rel = relative_nested_system(&arena, 1)?;
            let windows = rel.wall_windows(&arena);
            let ball2 = arena.ball_set(2);
            let mut sides: Vec<(Vec<String>, bool, Window)> = vec![];
            for i in walls_near_base(&arena, &rel, 1) {
                for c in [false, true] {
                    let w = if c { windows[i].complement() } else { windows[i].clone() };
                    sides.push((arena.graph().names(&w.set().intersection(&ball2)), c, w));
                }
            }
            let mut seen: BTreeMap<(Vec<String>, bool), usize> = BTreeMap::new();
            for (t, c, _) in &sides {
                *seen.entry((t.clone(), *c)).or_default() += 1;
            }
            let unique = |t: &Vec<String>, c: bool| seen[&(t.clone(), c)] == 1;
            for g in word_ball(&arena, 3)? {
                for (ta, ca, a) in &sides {
                    for (tb, cb, b) in &sides {
                        match kropholler_corner(&arena, a, b, &g) {
                            Ok(k) if !k.corner.is_empty() => {
                                if k.finiteness.is_confirmed() {
                                    s.confirmed += 1;
                                } else {
                                    s.inconclusive += 1;
                                }
                                if unique(ta, *ca) && unique(tb, *cb) {
                                    let key = (name.to_string(), ta.clone(), *ca, tb.clone(), *cb, g.clone());
                                    s.corners.entry(key).or_default().insert(r, k.finiteness);
                                }
                            }
                            Ok(_) | Err(Error::Precondition(_)) => continue,
                            Err(Error::Truncation(_)) => {
                                s.truncated += 1;
                                continue;
                            }
                            Err(e) => {
                                s.corner_errors.push(format!("{name} r={r} g={g}: {e}"));
                                continue;
                            }
                        }
                        match crossing_case(&arena, a, b, &g) {
                            Ok(c) => s.cases.push((name.to_string(), r, c)),
                            Err(Error::Precondition(_)) | Err(Error::Truncation(_)) => {}
                            Err(e) => s.crossing_errors.push(format!("{name} r={r} g={g}: {e}")),
                        }
                    }
                }
            }
        }
    }
    Ok(s)
}

fn crossing(s: &Sweep) -> SuiteReport {
    let mut r = SuiteReport::new("crossing");
    for e in &s.crossing_errors {
        r.check(false, || e.clone());
    }
    let mut table: BTreeMap<String, usize> = BTreeMap::new();
    for (name, radius, c) in &s.cases {
        r.check(c.a + c.e + c.f + c.b == 1 && c.c + c.e + c.f + c.d == 1, || format!("{name} r={radius} {}: sums", c.word));
        r.check(c.verdict.is_nested(), || format!("{name} r={radius} {}: {:?}", c.word, c.verdict));
        let row = format!(
            "o@{} go@{} a={} b={} c={} d={} e={} f={} -> {:?}",
            c.o_corner, c.go_corner, c.a, c.b, c.c, c.d, c.e, c.f, c.verdict
        );
        *table.entry(row).or_default() += 1;
    }
    r.details = json!({ "fixtures": SWEEP, "radii": RADII, "table": table });
    r
}

fn corner(s: &Sweep) -> SuiteReport {
    let mut r = SuiteReport::new("corner");
    for e in &s.corner_errors {
        r.check(false, || e.clone());
    }
    let mut fixtures_confirmed = BTreeSet::new();
    for ((name, _, _, _, _, g), by_r) in &s.corners {
        let v: Vec<(&usize, &Finiteness)> = by_r.iter().collect();
        for w in v.windows(2) {
            r.check(w[0].1.orbits() <= w[1].1.orbits(), || {
                format!("{name} g={g}: {} orbits at r={} then {} at r={}", w[0].1.orbits(), w[0].0, w[1].1.orbits(), w[1].0)
            });
        }
        if v.iter().any(|(_, f)| f.is_confirmed()) {
            fixtures_confirmed.insert(name.clone());
        }
    }
    for name in SWEEP {
        r.check(fixtures_confirmed.contains(name), || format!("{name}: no confirmed corner count"));
    }
    r.inconclusive = s.inconclusive;
    r.details = json!({ "confirmed": s.confirmed, "inconclusive": s.inconclusive, "truncated": s.truncated });
    r
}

fn relative_shape() -> Result<SuiteReport> {
    let mut r = SuiteReport::new("relative-shape");
    let arena = build_coset_graph(&fixture("bs-amalgam")?, 6)?;
    let rel = relative_nested_system(&arena, 1)?;
    let d = rel.tree_diameter();
    let fixed = rel.base_fixed_by_h(&arena)?;
    r.check(d == 2, || format!("amalgam relative tree has diameter {d}, expected 2"));
    r.check(fixed, || "the base tree vertex is moved by H".into());
    r.details = json!({ "diameter": d, "tree_vertices": rel.tree.vertex_count(), "base_fixed_by_h": fixed });
    Ok(r)
}

fn geometry() -> Result<SuiteReport> {
    let mut r = SuiteReport::new("geometry");
    for n in 2..=4usize {
        let labels: Vec<String> = (0..n).map(|i| format!("H{i}")).collect();
        let ball = gamma_ball(&MetricPoint::base("A"), n, &labels)?;
        let far = ball.index_of(&MetricPoint::with_delta("A", labels.iter().cloned())).expect("far corner");
        let count = ball.geodesic_count(0, far);
        r.check(count == (1..=n).product::<usize>(), || format!("n={n}: {count} geodesics"));
        r.check(ball.interval(0, far).count() == 1 << n, || format!("n={n}: interval size"));
    }
    for k in 1..=5usize {
        let labels: Vec<String> = (0..k).map(|i| format!("H{i}")).collect();
        for radius in 1..=k.min(4) {
            let ball = gamma_ball(&MetricPoint::base("A"), radius, &labels)?;
            for l in &labels {
                let h = hyperplane(&ball, l)?;
                r.check(h.inside.count() + h.outside.count() == ball.points.len(), || format!("k={k} r={radius} {l}"));
            }
        }
    }
    Ok(r)
}

fn sageev() -> Result<SuiteReport> {
    let mut r = SuiteReport::new("sageev");
    let check = |r: &mut SuiteReport, sys: &HalfSpaceSystem, what: &str| -> Result<()> {
        let rep = crate::sageev_report(sys)?;
        r.check(rep["injective"] == true && rep["isometric"] == true, || format!("{what}: not an isometric embedding"));
        if sys.all_nested() {
            r.check(rep["principal_component_is_tree"] == true, || format!("{what}: nested but not a tree"));
        }
        Ok(())
    };
    for (name, radius, words) in [("z", 6, 2), ("dinf", 6, 2), ("z2", 5, 1), ("f2", 4, 1), ("bs-amalgam", 6, 1)] {
        let arena = build_coset_graph(&fixture(name)?, radius)?;
        let rel = relative_nested_system(&arena, 1)?;
        let ws = word_ball(&arena, words)?;
        for i in walls_near_base(&arena, &rel, 1) {
            let Ok(sys) = HalfSpaceSystem::from_translates(&arena, &rel.wall_windows(&arena)[i], &ws) else { continue };
            if sys.pairs() <= 16 {
                check(&mut r, &sys, &format!("{name} wall {i}"))?;
            }
        }
    }
    let proper: Vec<VertexSet> = (1u64..7).map(|m| VertexSet::from_mask(4, m)).collect();
    for mask in 1u32..(1 << proper.len()) {
        let sets: Vec<VertexSet> = (0..proper.len()).filter(|i| mask >> i & 1 == 1).map(|i| proper[i].clone()).collect();
        let labels = (0..sets.len()).map(|i| format!("W{i}")).collect();
        check(&mut r, &HalfSpaceSystem::from_sets(labels, sets, 0)?, &format!("family {mask:06b}"))?;
    }
    Ok(r)
}

fn cayley_line(name: &str) -> Result<(Arena, RelativeSystem)> {
    let arena = build_coset_graph(&fixture(name)?.with_subgroup(&[])?, 8)?;
    let rel = relative_nested_system(&arena, 1)?;
    Ok((arena, rel))
}

fn hyperbolicity(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("hyperbolicity");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for name in ["z", "dinf"] {
        let (arena, rel) = cayley_line(name)?;
        let v = rel.base_vertex();
        let pair = rel.tree.incident_pairs(v)[0];
        let a = AlmostInvariant::new(&arena, &rel.tree, pair, rel.tree.edges()[pair].inside != v, v)?;
        let pts = orbit_points(&a, &word_ball(&arena, 3)?, 5)?;
        let verdict = zero_hyperbolicity_check(&pts)?;
        r.check(verdict.pass, || format!("{name}: witness {:?}", verdict.witness));
        let d: Vec<Vec<usize>> = pts.iter().map(|p| pts.iter().map(|q| metric_d(p, q)).collect::<Result<_>>()).collect::<Result<_>>()?;
        let t = build_z_tree(&d)?;
        r.check(t.distance_matrix() == d, || format!("{name}: re-measure"));
        for _ in 0..10 {
            let mut order: Vec<usize> = (0..d.len()).collect();
            order.shuffle(&mut rng);
            let p: Vec<Vec<usize>> = order.iter().map(|&i| order.iter().map(|&j| d[i][j]).collect()).collect();
            let u = build_z_tree(&p)?;
            let mut embedding = vec![0; d.len()];
            for (k, &i) in order.iter().enumerate() {
                embedding[i] = u.embedding[k];
            }
            let u = ZTree { graph: u.graph, embedding };
            r.check(u.distance_matrix() == d && u.canonical_form() == t.canonical_form(), || format!("{name}: order {order:?}"));
        }
    }
    Ok(r)
}

fn round_trip() -> Result<SuiteReport> {
    let mut r = SuiteReport::new("round-trip");
    let mut details = serde_json::Map::new();
    for name in ["z", "dinf"] {
        let (arena, rel) = cayley_line(name)?;
        let counting = fixture(name)?;
        let v = rel.base_vertex();
        for &pair in rel.tree.incident_pairs(v) {
            let toward = rel.tree.edges()[pair].inside != v;
            let rep = tree_to_almost_invariant(&arena, &rel.tree, pair, toward, v, 4, &counting)?;
            for (x, f) in &rep.differences {
                r.check(f.is_confirmed(), || format!("{name} pair {pair} x={x}: {f:?}"));
            }
        }
        let pair = rel.tree.incident_pairs(v)[0];
        let a = AlmostInvariant::new(&arena, &rel.tree, pair, rel.tree.edges()[pair].inside != v, v)?;
        let sys = HalfSpaceSystem::from_translates(&arena, &Window::interior(&arena, &a.wall()), &word_ball(&arena, 2)?)?;
        let vs = sageev_vertices(&sys)?;
        let g = sageev_graph(&vs)?;
        let path = g.edges().len() + 1 == vs.len() && (0..vs.len()).all(|x| g.degree(x) <= 2);
        r.check(path && sys.all_nested(), || format!("{name}: Sageev graph is not a line"));
        details.insert(name.into(), json!({ "walls": sys.pairs(), "vertices": vs.len() }));
    }
    r.details = Value::Object(details);
    Ok(r)
}
