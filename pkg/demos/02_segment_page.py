# From label image to PAGE XML in one call.
#
#     python3 demos/02_segment_page.py [outdir]
import sys
from pathlib import Path

from scriptorium import pageio, viz
from scriptorium.pipeline import segment_page
from scriptorium.synth import SynthSpec, generate_page

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(parents=True, exist_ok=True)

spec = SynthSpec(seed=5, n=900, m=800, line_count=6, line_height=46, gap=80, blob_size=20,
                 gloss_prob=0.7, decoration_prob=1.0, spur_prob=0.2, skew=3)
page = generate_page(spec)
result = segment_page(page.labels)

print(len(result.components.areas), "components,", len(result.bins), "lines")
for poly, b in zip(result.polygons, result.bins):
    rows = [r for r, _ in poly.vertices]
    print(f"  line {poly.index}: {len(b.members):3d} components, "
          f"{len(poly.vertices):4d} vertices, rows {min(rows)}..{max(rows)}")

doc = pageio.PageDocument.from_polygons("page.png", (spec.n, spec.m), result.polygons)
pageio.write_page_xml(doc, out / "page.xml")
viz.save(viz.polygon_overlay(result.mask, result.polygons), out / "page.polygons.png")
print("wrote", out / "page.xml")
