"""Smoke test for the `onerel` Python module.

Build it first, e.g. `maturin develop -m crates/python/Cargo.toml`, or
`cargo build -p onerel-py --features extension-module` and put
`target/debug/libonerel_py.so` on the path as `onerel.so`.
"""

import json

import onerel

torus = onerel.Presentation("<a, b | a b a^-1 b^-1>")
assert torus.generators == ["a", "b"]
assert torus.relator_len == 4

cert = torus.decompose()
assert cert.tower_bound == 2 and cert.paper_bound == 2
assert cert.verify() == []
print(cert.render(), end="")

trefoil = onerel.decompose("<a, b | a^2 b^-3>")
assert (trefoil.paper_bound, trefoil.tower_bound) == (3, 2)
assert trefoil.kinds[0] == "case2_embed"

doc = json.loads(trefoil.to_json())
assert doc["schema_version"] == 1
assert onerel.verify_json(trefoil.to_json()) == []
doc["root"]["bound"] += 1
assert onerel.verify_json(json.dumps(doc)) != []

try:
    onerel.Presentation("<a | b>")
except ValueError as e:
    print("rejected:", e)
else:
    raise AssertionError("undeclared generator accepted")

rows = onerel.batch(onerel.random_presentations(200, 10, 3, seed=1))
assert len(rows) == 200 and all(r["verified"] for r in rows)
assert all(r["tower_bound"] <= max(1, onerel.ceil_half(r["relator_length"])) for r in rows)

print("smoke test ok")
