"""
Static tail analysis of a small program
=======================================

Compile a model, read off the tail class of every node, pick sampleable
representatives and check the predictions by simulation.
"""

from tailalgebra import compile_model, analyze, model_source
from tailalgebra.representative import representative
from tailalgebra.verify import mc_verify

src = model_source("products")
print(src)

# one pass over the graph assigns a class to every node
g = compile_model(src)
report = analyze(g)
for e in report.entries.values():
    print(f"{e.id:2d}  {e.expr:28s} {e.cls}")

# representatives are laws we can sample that share each queried tail
for i in g.queries:
    print(g.display_name(i), "->", representative(report.cls(i)))

# forward-sample the program and test each prediction; the reciprocal rule
# assumes the density near zero mirrors the tail, which a product of normals
# violates (it has a log singularity at zero), so recip_product is flagged
vr = mc_verify(g, report, 1_000_000, seed=0)
for e in vr.entries:
    print(f"{e.name:15s} {e.verdict:12s} {dict(e.detail)}")
