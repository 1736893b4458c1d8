use cutforest::cuts::{apply_permutation, automorphisms, extract_nested_generators, Ring};
use cutforest::graph::fixtures;
use cutforest::{Graph, VertexSet};
use proptest::prelude::*;

fn weight(g: &Graph, mask: u64) -> u64 {
    g.edges().iter().filter(|e| (mask >> e.u & 1) != (mask >> e.v & 1)).map(|e| e.capacity as u64).sum()
}

fn set(g: &Graph, mask: u64) -> VertexSet {
    VertexSet::from_mask(g.vertex_count(), mask)
}

/// Random connected graph on `n` vertices from a seed-free strategy.
fn graph_strategy() -> impl Strategy<Value = Graph> {
    (3usize..9).prop_flat_map(|n| {
        let parents = (1..n).map(|v| 0..v).collect::<Vec<_>>();
        let extra = prop::collection::vec((0..n, 0..n, 1u32..3), 0..n);
        (Just(n), parents, extra)
    })
    .prop_map(|(n, parents, extra)| {
        let mut edges: Vec<(usize, usize, u32)> = parents.into_iter().enumerate().map(|(i, p)| (p, i + 1, 1)).collect();
        for (a, b, c) in extra {
            if a != b && !edges.iter().any(|&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a)) {
                edges.push((a, b, c));
            }
        }
        let ids: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        let named: Vec<(String, String, u32)> = edges.iter().map(|&(a, b, c)| (ids[a].clone(), ids[b].clone(), c)).collect();
        Graph::new(&ids, &named, None).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn coboundary_of_complement_is_the_same(g in graph_strategy(), raw in any::<u64>()) {
        let full = (1u64 << g.vertex_count()) - 1;
        let mask = raw & full;
        let a = g.cut_from_set(set(&g, mask)).unwrap();
        prop_assert_eq!(g.coboundary(&a).unwrap(), g.coboundary(&a.complement()).unwrap());
        prop_assert_eq!(g.cut_weight(&a).unwrap(), weight(&g, mask));
    }

    #[test]
    fn weight_is_submodular(g in graph_strategy(), x in any::<u64>(), y in any::<u64>()) {
        let full = (1u64 << g.vertex_count()) - 1;
        let (x, y) = (x & full, y & full);
        let w = |m| weight(&g, m);
        prop_assert!(w(x & y) + w(x | y) <= w(x) + w(y));
        prop_assert!(w(x ^ y) <= w(x) + w(y));
        let (a, b) = (g.cut_from_set(set(&g, x)).unwrap(), g.cut_from_set(set(&g, y)).unwrap());
        let meet = g.cut_from_set(a.set().intersection(b.set())).unwrap();
        let join = g.cut_from_set(a.set().union(b.set())).unwrap();
        prop_assert!(
            g.cut_weight(&meet).unwrap() + g.cut_weight(&join).unwrap()
                <= g.cut_weight(&a).unwrap() + g.cut_weight(&b).unwrap()
        );
    }

    #[test]
    fn paths_cross_the_coboundary_with_separation_parity(g in graph_strategy(), raw in any::<u64>(), u in 0usize..9, v in 0usize..9) {
        let n = g.vertex_count();
        let (u, v) = (u % n, v % n);
        let mask = raw & ((1u64 << n) - 1);
        let a = g.cut_from_set(set(&g, mask)).unwrap();
        // BFS path from u to v
        let mut prev = vec![usize::MAX; n];
        prev[u] = u;
        let mut queue = std::collections::VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            for y in g.neighbors(x) {
                if prev[y] == usize::MAX {
                    prev[y] = x;
                    queue.push_back(y);
                }
            }
        }
        let mut crossings = 0;
        let mut x = v;
        while x != u {
            let p = prev[x];
            if (mask >> x & 1) != (mask >> p & 1) {
                crossings += 1;
            }
            x = p;
        }
        let separated = g.separates(&a, g.id(u), g.id(v)).unwrap();
        prop_assert_eq!(crossings % 2 == 1, separated);
    }
}

fn corpus() -> Vec<Graph> {
    let mut out: Vec<Graph> = fixtures::NAMES.iter().map(|n| fixtures::by_name(n).unwrap()).collect();
    out.extend(fixtures::corpus(8, 40, 3));
    out
}

fn brute_nested(a: &VertexSet, b: &VertexSet) -> bool {
    let (x, y, full) = (a.mask(), b.mask(), (1u64 << a.universe()) - 1);
    x & y == 0 || x & !y & full == 0 || !x & y & full == 0 || (x | y) == full
}

#[test]
fn nested_generators_satisfy_their_properties() {
    for g in corpus() {
        let nv = g.vertex_count();
        let autos = automorphisms(&g).unwrap();
        let mut previous: Option<Vec<VertexSet>> = None;
        for n in 1..=3 {
            let sys = extract_nested_generators(&g, n).unwrap();
            let members = sys.member_sets();
            for a in members {
                for b in members {
                    assert!(brute_nested(a, b), "{:?}", g.ids());
                }
            }
            for sigma in &autos {
                for m in members {
                    let image = apply_permutation(m, sigma);
                    assert!(members.contains(&image) || members.contains(&image.complement()), "{:?} n={n}", g.ids());
                }
            }
            if let Some(prev) = &previous {
                for m in prev {
                    assert!(members.contains(m) || members.contains(&m.complement()), "{:?} n={n}", g.ids());
                }
            }
            let ring = Ring::generated_by(nv, members);
            for mask in 1..(1u64 << nv) - 1 {
                if weight(&g, mask) <= n {
                    assert!(ring.contains(&set(&g, mask)), "{:?} n={n} mask={mask:b}", g.ids());
                }
            }
            previous = Some(members.to_vec());
        }
    }
}
