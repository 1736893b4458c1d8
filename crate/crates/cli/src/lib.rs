//! Argument parsing and command dispatch for the `cutforest` binary.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use cutforest::arena::{build_coset_graph, Arena};
use cutforest::cubing::*;
use cutforest::cuts::{enumerate_cuts, extract_nested_generators};
use cutforest::graph::fixtures;
use cutforest::group::{fixture, FIXTURES};
use cutforest::relative::*;
use cutforest::tree::{canonical_decomposition, evaluate_expression, structure_tree, StructureTree};
use cutforest::{Error, Graph, Result};

pub mod verify;

#[derive(Debug, Parser)]
#[command(name = "cutforest", version, about = "Structure trees, relative trees and Sageev cubings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<std::path::PathBuf>,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate cuts of weight at most n and the nested generators.
    Cuts {
        #[command(flatten)]
        graph: GraphSource,
        #[arg(short = 'n', long, default_value_t = 1)]
        level: u64,
        /// Keep only cuts with both sides connected.
        #[arg(long)]
        connected: bool,
    },
    /// Structure tree and the map from vertices to tree vertices.
    Tree {
        #[command(flatten)]
        graph: GraphSource,
        #[arg(short = 'n', long, default_value_t = 1)]
        level: u64,
    },
    /// Canonical expression of a cut over the structure tree.
    Decompose {
        #[command(flatten)]
        graph: GraphSource,
        #[arg(short = 'n', long, default_value_t = 1)]
        level: u64,
        /// Comma-separated vertex ids.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        cut: Vec<String>,
    },
    /// Build a truncated coset graph.
    Arena {
        #[command(flatten)]
        group: GroupSource,
    },
    /// Relative structure tree and the checks built on it.
    Relative {
        #[command(flatten)]
        group: GroupSource,
        #[arg(short = 'n', long, default_value_t = 1)]
        level: u64,
        #[command(subcommand)]
        action: Option<RelativeAction>,
    },
    /// Gamma balls, Sageev graphs and almost invariant sets.
    Cubing {
        #[command(subcommand)]
        action: CubingAction,
    },
    /// Tree containing the orbit points of an almost invariant set, or of a
    /// distance matrix.
    Ztree {
        #[command(flatten)]
        group: GroupSource,
        /// Length bound of the translating words.
        #[arg(long, default_value_t = 3)]
        words: usize,
        /// JSON file holding a square distance matrix; overrides the group.
        #[arg(long)]
        matrix: Option<std::path::PathBuf>,
    },
    /// Run the oracle suites.
    Verify {
        /// One suite; all suites when omitted.
        #[arg(long)]
        suite: Option<String>,
    },
    /// List graph and group fixtures.
    Fixtures,
}

#[derive(Debug, Args)]
pub struct GraphSource {
    /// Named graph fixture.
    #[arg(long, conflicts_with = "input")]
    pub fixture: Option<String>,
    /// Graph JSON file.
    #[arg(long)]
    pub input: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct GroupSource {
    /// Named group fixture.
    #[arg(long, default_value = "z")]
    pub group: String,
    #[arg(long, short, default_value_t = 6)]
    pub radius: usize,
    /// Use the trivial subgroup, giving the Cayley graph.
    #[arg(long)]
    pub cayley: bool,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// Index of wall A among the relative walls.
    #[arg(long)]
    pub a: usize,
    #[arg(long)]
    pub b: usize,
    #[arg(long)]
    pub a_complement: bool,
    #[arg(long)]
    pub b_complement: bool,
    /// Normal-form word g.
    #[arg(long, default_value = "")]
    pub word: String,
}

#[derive(Debug, Subcommand)]
pub enum RelativeAction {
    /// The relative tree (default).
    Tree,
    /// Kropholler corner A∩gB.
    Corner(PairArgs),
    /// Crossing-case counts for A and gB.
    Crossing(PairArgs),
    /// Overlap of the tree with its g-translate.
    Overlap {
        #[arg(long, default_value = "")]
        word: String,
    },
    /// Assemble the translates over a word ball.
    Assemble {
        #[arg(long, default_value_t = 2)]
        words: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum CubingAction {
    /// A ball of Gamma about a point.
    Ball {
        /// Coset labels of the universe.
        #[arg(long, value_delimiter = ',', required = true)]
        labels: Vec<String>,
        #[arg(long, default_value_t = 2)]
        radius: usize,
        /// Labels where the center differs from A.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        center: Vec<String>,
        /// Label whose hyperplane is reported and highlighted.
        #[arg(long)]
        hyperplane: Option<String>,
    },
    /// Sageev graph of the translates of one relative wall.
    Sageev {
        #[command(flatten)]
        group: GroupSource,
        #[arg(short = 'n', long, default_value_t = 1)]
        level: u64,
        /// Wall index; the first wall near the base when omitted.
        #[arg(long)]
        wall: Option<usize>,
        #[arg(long, default_value_t = 2)]
        words: usize,
    },
    /// The almost invariant sets read off the Cayley line tree at the base.
    Almost {
        #[command(flatten)]
        group: GroupSource,
        /// Sample radius.
        #[arg(long, default_value_t = 4)]
        sample: usize,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Exit status for an error: 1 for bad input or preconditions, 2 for
/// truncation, 3 for internal invariant failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Truncation(_) => 2,
        Error::Invariant(_) | Error::Generation { .. } => 3,
        _ => 1,
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let report = match dispatch(cli) {
        Ok(r) => r,
        Err(e) => return Outcome { code: exit_code(&e), stdout: String::new(), stderr: format!("error: {e}\n") },
    };
    let text = match (&report.dot, cli.format) {
        (Some(dot), Format::Dot) => dot.clone(),
        (None, Format::Dot) => {
            return Outcome { code: 1, stdout: String::new(), stderr: "error: this command has no DOT output\n".into() }
        }
        (_, Format::Json) => serde_json::to_string_pretty(&report.json).expect("reports serialize") + "\n",
    };
    let stderr = report.note.map(|n| n + "\n").unwrap_or_default();
    match &cli.output {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome { code: report.code, stdout: String::new(), stderr },
            Err(e) => Outcome { code: 1, stdout: String::new(), stderr: format!("error: cannot write {}: {e}\n", path.display()) },
        },
        None => Outcome { code: report.code, stdout: text, stderr },
    }
}

struct Report {
    json: Value,
    dot: Option<String>,
    code: i32,
    note: Option<String>,
}

impl Report {
    fn json(json: Value) -> Self {
        Report { json, dot: None, code: 0, note: None }
    }

    fn with_dot(json: Value, dot: String) -> Self {
        Report { json, dot: Some(dot), code: 0, note: None }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn load_graph(src: &GraphSource) -> Result<Graph> {
    match (&src.fixture, &src.input) {
        (Some(name), _) => fixtures::by_name(name).ok_or_else(|| {
            Error::Domain(format!("unknown graph fixture {name:?}; known: {}", fixtures::NAMES.join(", ")))
        }),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::structural(format!("cannot read {}: {e}", path.display())))?;
            Graph::from_json(&text)
        }
        (None, None) => Err(Error::precondition("give --fixture or --input")),
    }
}

fn load_arena(src: &GroupSource) -> Result<Arena> {
    let mut oracle = fixture(&src.group)?;
    if src.cayley {
        oracle = oracle.with_subgroup(&[])?;
    }
    build_coset_graph(&oracle, src.radius)
}

fn graph_dot(g: &Graph, name: &str) -> String {
    let mut out = format!("graph {name} {{\n");
    for id in g.ids() {
        let _ = writeln!(out, "  \"{id}\";");
    }
    for e in g.edges() {
        let label = if e.capacity == 1 { String::new() } else { format!(" [label=\"{}\"]", e.capacity) };
        let _ = writeln!(out, "  \"{}\" -- \"{}\"{label};", g.id(e.u), g.id(e.v));
    }
    out.push_str("}\n");
    out
}

fn tree_json(t: &StructureTree) -> Value {
    let g = t.graph();
    let nu: serde_json::Map<String, Value> = (0..g.vertex_count()).map(|x| (g.id(x).to_string(), json!(t.nu(x)))).collect();
    json!({ "tree": to_value(&t.to_spec()), "nu": nu })
}

fn dispatch(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Fixtures => Ok(Report::json(json!({
            "graphs": fixtures::NAMES,
            "groups": FIXTURES.iter().map(|name| {
                let o = fixture(name).expect("fixtures build");
                json!({ "name": name, "generators": o.s_words().iter().map(|(n, w)| json!([n, w])).collect::<Vec<_>>(),
                        "subgroup": o.h_generators().iter().map(|c| c.to_string()).collect::<Vec<_>>() })
            }).collect::<Vec<_>>(),
        }))),
        Command::Cuts { graph, level, connected } => {
            let g = load_graph(graph)?;
            let cuts = enumerate_cuts(&g, *level, *connected)?;
            let listed: Vec<Value> = cuts
                .iter()
                .map(|c| Ok(json!({ "side": g.names(c.set()), "weight": g.cut_weight(c)? })))
                .collect::<Result<_>>()?;
            let system = extract_nested_generators(&g, *level)?;
            Ok(Report::json(json!({ "level": level, "cuts": listed, "generators": to_value(&system.to_spec()) })))
        }
        Command::Tree { graph, level } => {
            let g = load_graph(graph)?;
            let t = structure_tree(&g, *level)?;
            Ok(Report::with_dot(tree_json(&t), t.to_dot()))
        }
        Command::Decompose { graph, level, cut } => {
            let g = load_graph(graph)?;
            let t = structure_tree(&g, *level)?;
            let a = g.cut(cut)?;
            let e = canonical_decomposition(&a, &t)?;
            let back = evaluate_expression(&e)?;
            if back != a {
                return Err(Error::invariant("the expression does not evaluate back to the cut"));
            }
            Ok(Report::json(json!({ "expression": to_value(&e.to_spec(&t)), "round_trip": true })))
        }
        Command::Arena { group } => {
            let a = load_arena(group)?;
            Ok(Report::with_dot(to_value(&a.to_spec()), graph_dot(a.graph(), "arena")))
        }
        Command::Relative { group, level, action } => relative(group, *level, action.as_ref()),
        Command::Cubing { action } => cubing(action),
        Command::Ztree { group, words, matrix } => ztree(group, *words, matrix.as_deref()),
        Command::Verify { suite } => {
            let reports = verify::run_suites(suite.as_deref(), cli.seed)?;
            let code = reports.iter().map(|r| r.exit_code()).max().unwrap_or(0);
            let note = reports.iter().map(|r| r.line()).collect::<Vec<_>>().join("\n");
            Ok(Report { json: to_value(&reports), dot: None, code, note: Some(note) })
        }
    }
}

fn relative(group: &GroupSource, level: u64, action: Option<&RelativeAction>) -> Result<Report> {
    let arena = load_arena(group)?;
    let rel = relative_nested_system(&arena, level)?;
    let windows = rel.wall_windows(&arena);
    let pick = |p: &PairArgs| -> Result<(Window, Window)> {
        let get = |i: usize, c: bool| {
            windows
                .get(i)
                .map(|w| if c { w.complement() } else { w.clone() })
                .ok_or_else(|| Error::precondition(format!("no wall {i}; there are {}", windows.len())))
        };
        Ok((get(p.a, p.a_complement)?, get(p.b, p.b_complement)?))
    };
    match action.unwrap_or(&RelativeAction::Tree) {
        RelativeAction::Tree => {
            let walls: Vec<Value> = rel
                .walls
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    json!({ "index": i, "side": wall_names(&arena, &w.component), "coboundary_orbits": w.coboundary_orbits,
                            "stabilizer_sample": w.stabilizer_sample, "disjoint_or_equal": w.disjoint_or_equal,
                            "covers_preimage": w.covers_preimage })
                })
                .collect();
            let json = json!({
                "group": arena.oracle().name(),
                "radius": arena.radius(),
                "quotient_vertices": rel.quotient.graph.vertex_count(),
                "walls": walls,
                "tree": tree_json(&rel.tree),
                "diameter": rel.tree_diameter(),
                "base_vertex": rel.base_vertex(),
                "base_fixed_by_h": rel.base_fixed_by_h(&arena)?,
                "longest_interval": rel.longest_interval,
            });
            Ok(Report::with_dot(json, rel.tree.to_dot()))
        }
        RelativeAction::Corner(p) => {
            let (a, b) = pick(p)?;
            let k = kropholler_corner(&arena, &a, &b, &p.word)?;
            let mut r = Report::json(to_value(&k));
            if !k.finiteness.is_confirmed() {
                r.code = 2;
                r.note = Some("corner count is inconclusive at this radius".into());
            }
            Ok(r)
        }
        RelativeAction::Crossing(p) => {
            let (a, b) = pick(p)?;
            let c = crossing_case(&arena, &a, &b, &p.word)?;
            if !c.sums_hold() || !c.verdict.is_nested() {
                return Err(Error::invariant(format!("crossing case violates the table: {c:?}")));
            }
            Ok(Report::json(to_value(&c)))
        }
        RelativeAction::Overlap { word } => {
            let o = tree_overlap(&arena, &rel, word)?;
            Ok(Report::with_dot(to_value(&o.to_spec(&arena)), o.to_dot()))
        }
        RelativeAction::Assemble { words } => {
            let words = word_ball(&arena, *words)?;
            let t = assemble_g_nested(&arena, &rel, &words)?;
            let json = json!({
                "words": t.words,
                "region": arena.graph().names(&t.region),
                "tree": tree_json(&t.tree),
                "base_moved": t.base_moved,
                "fixed_vertices": t.fixed_vertices,
                "vertex_orbits": t.vertex_orbits,
                "equivariance_failures": t.equivariance_failures,
                "stabilizer_cosets": t.stabilizer_cosets,
            });
            Ok(Report::with_dot(json, t.tree.to_dot()))
        }
    }
}

fn first_near_base(arena: &Arena, rel: &RelativeSystem) -> Result<usize> {
    walls_near_base(arena, rel, 1).first().copied().ok_or_else(|| Error::precondition("no relative wall meets the 1-ball"))
}

/// Orientation map data for a half-space system.
pub fn sageev_report(sys: &HalfSpaceSystem) -> Result<Value> {
    let vs = sageev_vertices(sys)?;
    let g = sageev_graph(&vs)?;
    let comp = principal_component(sys, &vs, &g);
    let members: Vec<usize> = comp.iter().collect();
    let points: Vec<MetricPoint> = members.iter().map(|&v| vertex_to_set(&vs[v], sys, "A")).collect();
    let mut distinct = points.clone();
    distinct.sort();
    distinct.dedup();
    let dist = graph_distances_within(&g, &comp);
    let mut isometric = true;
    for (i, &v) in members.iter().enumerate() {
        for (j, &w) in members.iter().enumerate() {
            isometric &= dist[v][w] == metric_d(&points[i], &points[j])?;
        }
    }
    let edges_in = g.edges().iter().filter(|e| comp.contains(e.u) && comp.contains(e.v)).count();
    Ok(json!({
        "walls": sys.labels(),
        "nested": sys.all_nested(),
        "vertices": vs.iter().enumerate().map(|(i, v)| json!({
            "id": i,
            "orientation": v.orientation.as_bits(),
            "principal_at": v.principal_at,
            "point": vertex_to_set(v, sys, "A").to_string(),
            "principal_component": comp.contains(i),
        })).collect::<Vec<_>>(),
        "edges": g.edges().iter().map(|e| [e.u, e.v]).collect::<Vec<_>>(),
        "injective": distinct.len() == points.len(),
        "isometric": isometric,
        "principal_component_is_tree": edges_in + 1 == members.len(),
    }))
}

fn graph_distances_within(g: &Graph, region: &cutforest::VertexSet) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    (0..n)
        .map(|s| {
            let mut d = vec![usize::MAX; n];
            if !region.contains(s) {
                return d;
            }
            d[s] = 0;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for w in g.neighbors(v) {
                    if region.contains(w) && d[w] == usize::MAX {
                        d[w] = d[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
            d
        })
        .collect()
}

fn cubing(action: &CubingAction) -> Result<Report> {
    match action {
        CubingAction::Ball { labels, radius, center, hyperplane: label } => {
            let c = MetricPoint::with_delta("A", center.iter().cloned());
            let ball = gamma_ball(&c, *radius, labels)?;
            let h = label.as_deref().map(|l| hyperplane(&ball, l)).transpose()?;
            let json = json!({
                "center": c.to_string(),
                "points": ball.points.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "edges": ball.graph.edges().iter().zip(&ball.edge_labels).map(|(e, l)| json!([e.u, e.v, l])).collect::<Vec<_>>(),
                "hyperplane": h.map(|h| json!({ "label": h.label, "edges": h.edges,
                    "inside": h.inside.iter().collect::<Vec<_>>(), "outside": h.outside.iter().collect::<Vec<_>>() })),
            });
            Ok(Report::with_dot(json, ball.to_dot(label.as_deref())))
        }
        CubingAction::Sageev { group, level, wall, words } => {
            let arena = load_arena(group)?;
            let rel = relative_nested_system(&arena, *level)?;
            let i = match wall {
                Some(i) => *i,
                None => first_near_base(&arena, &rel)?,
            };
            let w = rel.wall_windows(&arena).get(i).cloned().ok_or_else(|| Error::precondition(format!("no wall {i}")))?;
            let sys = HalfSpaceSystem::from_translates(&arena, &w, &word_ball(&arena, *words)?)?;
            let mut report = sageev_report(&sys)?;
            report["wall"] = json!(i);
            Ok(Report::json(report))
        }
        CubingAction::Almost { group, sample } => {
            let counting = fixture(&group.group)?;
            let arena = build_coset_graph(&counting.with_subgroup(&[])?, group.radius)?;
            let rel = relative_nested_system(&arena, 1)?;
            let v = rel.base_vertex();
            let mut out = Vec::new();
            for &pair in rel.tree.incident_pairs(v) {
                let toward = rel.tree.edges()[pair].inside != v;
                let rep = tree_to_almost_invariant(&arena, &rel.tree, pair, toward, v, *sample, &counting)?;
                out.push(json!({ "pair": pair, "report": to_value(&rep) }));
            }
            Ok(Report::json(json!({ "group": group.group, "vertex": v, "sets": out })))
        }
    }
}

fn ztree(group: &GroupSource, words: usize, matrix: Option<&std::path::Path>) -> Result<Report> {
    let (labels, d) = match matrix {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::structural(format!("cannot read {}: {e}", path.display())))?;
            let d: Vec<Vec<usize>> =
                serde_json::from_str(&text).map_err(|e| Error::structural(format!("bad distance matrix: {e}")))?;
            ((0..d.len()).map(|i| i.to_string()).collect::<Vec<_>>(), d)
        }
        None => {
            let arena = build_coset_graph(&fixture(&group.group)?.with_subgroup(&[])?, group.radius)?;
            let rel = relative_nested_system(&arena, 1)?;
            let v = rel.base_vertex();
            let pair = *rel.tree.incident_pairs(v).first().ok_or_else(|| Error::precondition("the base has no tree edge"))?;
            let a = AlmostInvariant::new(&arena, &rel.tree, pair, rel.tree.edges()[pair].inside != v, v)?;
            let ws = word_ball(&arena, words)?;
            let sample = arena.radius().saturating_sub(words);
            let pts = orbit_points(&a, &ws, sample)?;
            let d = pts.iter().map(|p| pts.iter().map(|q| metric_d(p, q)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
            (ws.iter().map(|w| if w.is_empty() { "1".to_string() } else { w.clone() }).collect(), d)
        }
    };
    let t = build_z_tree(&d)?;
    let mut dot = String::from("graph ztree {\n");
    for v in 0..t.graph.vertex_count() {
        let names: Vec<&str> = (0..labels.len()).filter(|&i| t.embedding[i] == v).map(|i| labels[i].as_str()).collect();
        let _ = writeln!(dot, "  z{v} [label=\"{}\"];", names.join(","));
    }
    for e in t.graph.edges() {
        let _ = writeln!(dot, "  z{} -- z{};", e.u, e.v);
    }
    dot.push_str("}\n");
    let json = json!({
        "points": labels,
        "distances": d,
        "tree_vertices": t.graph.vertex_count(),
        "edges": t.graph.edges().iter().map(|e| [e.u, e.v]).collect::<Vec<_>>(),
        "embedding": t.embedding,
        "branch_vertices": t.branch_vertices(),
        "canonical_form": t.canonical_form(),
    });
    Ok(Report::with_dot(json, dot))
}
