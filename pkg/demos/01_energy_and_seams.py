# Energy map and seams on one synthetic page.
#
#     python3 demos/01_energy_and_seams.py [outdir]
#
# Writes the four energy rasters and a seam overlay (left-to-right seams in
# black, right-to-left in white) to outdir (default: demo_out/).
import sys
from pathlib import Path

import numpy as np

from scriptorium import viz
from scriptorium.ingest import denoise
from scriptorium.energy import total_energy
from scriptorium.seams import SeamParams, cast_all, merge_seams
from scriptorium.synth import SynthSpec, generate_page

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
page = generate_page(SynthSpec(seed=1, n=700, m=700, line_count=5, line_height=44, gap=76,
                               blob_size=20, gloss_prob=1.0, skew=2))
mask = denoise(page.text)
em = total_energy(mask)
print("B range", em.B.min(), em.B.max())
print("E range", em.E.min(), em.E.max())

E = em.normalized()
seams = cast_all(E, SeamParams(alpha=120, beta=3.0))
merged = merge_seams(seams)
changed = sum(not np.array_equal(a.rows, b.rows) for a, b in zip(seams, merged))
print(len(seams), "seams cast,", changed, "rewritten by merging")
for s in merged[:4]:
    print(f"  {s.direction:>13} from row {s.start_row:4d}: rows {s.rows.min()}..{s.rows.max()}, cost {s.cost:.2f}")

viz.dump_energy(em, out, "page")
viz.save(viz.seam_overlay(mask, merged), out / "page.seams.png")
print("wrote", out)
