"""Quick check of the pycutforest bindings. Run after installing the wheel."""

import pycutforest as cf

g = cf.Graph(["a", "b", "c", "d"], [("a", "b"), ("b", "c", 2), ("c", "d")])
assert g.cut_weight(["a"]) == 1
assert g.cut_weight(["a", "b"]) == 2
assert g.separates(["a"], "a", "d")

t = cf.Graph.fixture("barbell").structure_tree(1)
assert t.vertex_count == 2
assert t.nu("1") != t.nu("6")
assert t.to_dot().startswith("graph")

p = cf.Graph.fixture("path4")
e = p.structure_tree(1).decompose(["1", "3"])
assert e["cut"] == ["1", "3"], e

sq = cf.Graph.fixture("c4")
assert len(sq.cuts(2, connected=True)) == 6

arena = cf.Arena("z", 6, cayley=True)
rel = arena.relative(1)
assert rel.diameter >= 1 and rel.walls

a, b = cf.MetricPoint(), cf.MetricPoint(["x", "y"])
assert a.distance(b) == 2
assert len(cf.gamma_ball(["H0", "H1", "H2"], 3)["points"]) == 8

pts = cf.orbit_points("z", 3)
assert cf.zero_hyperbolicity(pts)["pass"]
tree = cf.z_tree([[x.distance(y) for y in pts] for x in pts])
assert tree["branch_vertices"] == []

try:
    cf.Graph.fixture("nope")
except ValueError:
    pass
else:
    raise AssertionError("unknown fixture accepted")

try:
    cf.orbit_points("z", 5, radius=4)
except cf.TruncationError:
    pass

print("smoke test ok:", len(pts), "orbit points,", tree["vertices"], "tree vertices")
