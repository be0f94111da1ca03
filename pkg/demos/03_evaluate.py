# Line IU and pixel IU, first on a clean result, then on a broken one.
import numpy as np

from scriptorium.evaluation import evaluate_page
from scriptorium.pipeline import segment_page
from scriptorium.synth import SynthSpec, generate_page

page = generate_page(SynthSpec(seed=8, n=700, m=700, line_count=4, line_height=44, gap=90, blob_size=20,
                               gloss_prob=1.0))
pred = [p.vertices for p in segment_page(page.labels).polygons]
rep = evaluate_page(pred, page.gt_polygons, page.text)
print(f"pipeline:      TP={rep.tp} FP={rep.fp} FN={rep.fn} line IU={rep.line_iu:.3f} pixel IU={rep.pixel_iu:.4f}")

# Cut the second ground-truth line in half down the middle. Neither half
# reaches the 0.75 match threshold, so the line counts once as a miss and
# both halves count as false positives.
verts = np.asarray(page.gt_polygons[1])
mid = int(np.median(verts[:, 1]))
top, bottom = verts[:, 0].min() - 1, verts[:, 0].max() + 1
left = [(top, 0), (top, mid), (bottom, mid), (bottom, 0)]
right = [(top, mid), (top, 699), (bottom, 699), (bottom, mid)]
broken = [page.gt_polygons[0], left, right] + page.gt_polygons[2:]
rep = evaluate_page(broken, page.gt_polygons, page.text)
L = len(page.gt_polygons)
print(f"split line:    TP={rep.tp} FP={rep.fp} FN={rep.fn} line IU={rep.line_iu:.3f} "
      f"(expected (L-1)/(L+2) = {(L - 1) / (L + 2):.3f})")
