use cutforest::arena::{build_coset_graph, Arena, Finiteness};
use cutforest::cuts::extract_nested_generators;
use cutforest::group::fixture;
use cutforest::relative::*;
use cutforest::{Error, VertexSet};

fn arena(name: &str, r: usize) -> Arena {
    build_coset_graph(&fixture(name).unwrap(), r).unwrap()
}

/// Walls and their complements.
fn sides(a: &Arena, rel: &RelativeSystem) -> Vec<Window> {
    let walls = rel.wall_windows(a);
    walls.iter().cloned().chain(walls.iter().map(|w| w.complement())).collect()
}

#[test]
fn component_lemma_holds_on_every_fixture() {
    // the triangles of Z2*Z3 only split at level 2
    for (name, r, n) in [("z", 5, 1), ("dinf", 6, 1), ("z2", 5, 1), ("f2", 4, 1), ("bs-amalgam", 6, 1), ("z2z3", 5, 2)] {
        let a = arena(name, r);
        let rel = relative_nested_system(&a, n).unwrap();
        assert!(!rel.walls.is_empty(), "{name}");
        for w in &rel.walls {
            assert!(w.disjoint_or_equal, "{name}: {:?}", a.graph().names(&w.component));
            assert!(w.covers_preimage, "{name}: {:?}", a.graph().names(&w.component));
            assert!(w.coboundary_orbits as u64 <= n, "{name}");
            assert!(w.stabilizer_sample.contains(&String::new()));
        }
    }
}

#[test]
fn lifted_walls_are_nested_with_finite_intervals() {
    for (name, r) in [("dinf", 6), ("z2", 5), ("f2", 4)] {
        let a = arena(name, r);
        let rel = relative_nested_system(&a, 1).unwrap();
        let members = rel.system.member_sets();
        for x in members {
            for y in members {
                assert!(cutforest::cuts::sets_nested(x, y), "{name}");
            }
        }
        assert!(rel.longest_interval < members.len(), "{name}");
    }
}

#[test]
fn trivial_subgroup_gives_the_plain_system() {
    let a = arena("z", 6);
    let rel = relative_nested_system(&a, 1).unwrap();
    let interior = a.interior_set();
    let plain = extract_nested_generators(a.graph(), 1).unwrap();
    let plain: Vec<&VertexSet> = plain.member_sets().iter().filter(|m| !m.is_disjoint(&interior)).collect();
    assert_eq!(rel.system.member_sets().iter().collect::<Vec<_>>(), plain);
}

#[test]
fn dihedral_relative_tree_is_a_line_fixed_at_the_base() {
    for r in 4..=6 {
        let a = arena("dinf", r);
        let rel = relative_nested_system(&a, 1).unwrap();
        let t = &rel.tree;
        assert!((0..t.vertex_count()).all(|v| t.degree(v) <= 2));
        assert_eq!(rel.tree_diameter(), t.vertex_count() - 1);
        assert!(rel.base_fixed_by_h(&a).unwrap());
    }
}

#[test]
fn plane_lift_is_connected() {
    let a = arena("z2", 5);
    let q = a.quotient_graph().unwrap();
    for side in cutforest::cuts::enumerate_bonds(&q.graph, 1).unwrap() {
        let lifts = lift_cut(&a, &q, &side, 0).unwrap();
        assert!(lifts.len() <= 1, "{:?}", q.graph.names(&side));
    }
}

#[test]
fn crossing_table_cases_occur() {
    let a = arena("dinf", 6);
    let rel = relative_nested_system(&a, 1).unwrap();
    let ws = sides(&a, &rel);
    let words = word_ball(&a, 3).unwrap();
    let mut top_left = false;
    let mut equal = false;
    for x in &ws {
        for y in &ws {
            for g in &words {
                let Ok(c) = crossing_case(&a, x, y, g) else { continue };
                assert!(c.sums_hold() && c.verdict.is_nested(), "{c:?}");
                if c.o_corner == 1 && c.go_corner == 2 {
                    assert_eq!((c.a, c.c, c.b, c.d, c.e, c.f), (1, 1, 0, 0, 0, 0));
                    assert_eq!(c.verdict, CrossingVerdict::EmptyCorner(3));
                    top_left = true;
                }
                if c.verdict == CrossingVerdict::Equal {
                    assert_eq!((c.o_corner, c.go_corner, c.f), (3, 3, 1));
                    equal = true;
                }
                // each verdict pins the two nonzero counts
                match c.verdict {
                    CrossingVerdict::EmptyCorner(3) => assert_eq!((c.a, c.c), (1, 1)),
                    CrossingVerdict::EmptyCorner(1) => assert_eq!((c.a, c.d), (1, 1)),
                    CrossingVerdict::EmptyCorner(2) => assert_eq!((c.b, c.c), (1, 1)),
                    _ => {}
                }
            }
        }
    }
    assert!(top_left && equal);
}

#[test]
fn crossing_case_rejects_bad_positions() {
    let a = arena("dinf", 6);
    let rel = relative_nested_system(&a, 1).unwrap();
    let w = &rel.wall_windows(&a)[0];
    assert!(matches!(crossing_case(&a, w, &w.complement(), ""), Err(Error::Precondition(_))));
    // for A = B the b-side in F2/<a> and g = bab^-1, g^-1 = bAB lies in B
    let f = arena("f2", 4);
    let rel = relative_nested_system(&f, 1).unwrap();
    let b = f.vertex_of("b").unwrap().unwrap();
    let k = rel.system.member_sets().iter().position(|m| m.contains(b) && f.graph().names(m).len() == 20).unwrap();
    let bside = &rel.wall_windows(&f)[k];
    match kropholler_corner(&f, bside, bside, "baB") {
        Err(Error::Precondition(msg)) => assert!(msg.contains("o ∈ gB*")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn dihedral_corners_meet_few_orbits() {
    let a = arena("dinf", 6);
    let rel = relative_nested_system(&a, 1).unwrap();
    let walls = rel.wall_windows(&a);
    let mut seen = 0;
    for x in &walls {
        for y in &walls {
            for g in word_ball(&a, 3).unwrap() {
                if let Ok(k) = kropholler_corner(&a, x, y, &g) {
                    if let Finiteness::Confirmed { orbits } = k.finiteness {
                        if !k.corner.is_empty() {
                            assert_eq!(orbits, 1, "{k:?}");
                            seen += 1;
                        }
                    }
                }
            }
        }
    }
    assert!(seen > 0);
}

#[test]
fn free_group_corners_are_finite() {
    let a = arena("f2", 4);
    let rel = relative_nested_system(&a, 1).unwrap();
    let ws = rel.wall_windows(&a);
    let near = walls_near_base(&a, &rel, 1);
    let mut confirmed = 0;
    for &i in &near {
        for &j in &near {
            for g in ["baB", "b", "ab", "bA"] {
                if let Ok(k) = kropholler_corner(&a, &ws[i], &ws[j], g) {
                    if let Finiteness::Confirmed { orbits } = k.finiteness {
                        assert!(orbits <= 4);
                        confirmed += 1;
                    }
                }
            }
        }
    }
    assert!(confirmed > 0);
}

#[test]
fn overlap_with_itself_and_with_commuting_translates() {
    let a = arena("dinf", 6);
    let rel = relative_nested_system(&a, 1).unwrap();
    let o = tree_overlap(&a, &rel, "").unwrap();
    assert!(o.red.is_empty() && o.blue.is_empty());
    assert_eq!(o.brown.len(), rel.system.member_sets().len());

    let a = arena("z2", 5);
    let rel = relative_nested_system(&a, 1).unwrap();
    let o = tree_overlap(&a, &rel, "y").unwrap();
    assert!(o.red.is_empty() && o.blue.is_empty() && !o.brown.is_empty());
    assert!(o.brown_is_subtree);
    assert_eq!(o.geodesic.len(), 1);
}

#[test]
fn free_group_overlap_shares_single_edge_walls() {
    // every wall has one coboundary edge, so its stabilizer is trivial and
    // the wall lies in both trees
    let a = arena("f2", 4);
    let rel = relative_nested_system(&a, 1).unwrap();
    let o = tree_overlap(&a, &rel, "b").unwrap();
    assert!(o.red.is_empty() && o.blue.is_empty());
    assert!(o.brown_is_subtree);
    assert!(o.brown_finiteness.iter().all(|f| f.is_confirmed()));
    let dot = o.to_dot();
    assert!(dot.contains("color=brown") && !dot.contains("color=red"));
}

#[test]
fn assembling_the_identity_returns_the_relative_tree() {
    let a = arena("dinf", 6);
    let rel = relative_nested_system(&a, 1).unwrap();
    let t = assemble_g_nested(&a, &rel, &[String::new()]).unwrap();
    assert_eq!(t.system.member_sets().len(), rel.system.member_sets().len());
    assert_eq!(t.tree.vertex_count(), rel.tree.vertex_count());
}

#[test]
fn assembled_trees_are_equivariant_and_nontrivial() {
    for (name, r) in [("dinf", 6), ("z", 6), ("z2", 6), ("bs-amalgam", 6), ("f2", 5)] {
        let a = arena(name, r);
        let rel = relative_nested_system(&a, 1).unwrap();
        let words = word_ball(&a, 2).unwrap();
        let t = assemble_g_nested(&a, &rel, &words).unwrap();
        assert_eq!(t.equivariance_failures, 0, "{name}");
        assert!(t.fixed_vertices.is_empty(), "{name}");
        assert!(t.base_moved, "{name}");
        assert_eq!(t.stabilizer_cosets, 1, "{name}");
        if name == "dinf" {
            assert!((0..t.tree.vertex_count()).all(|v| t.tree.degree(v) <= 2));
        }
    }
}
