# How much do alpha and beta matter? A small grid over a few pages.
#
# The seam-independent work (denoising, labelling, energy) is done once per
# page and shared by every cell of the grid.
import numpy as np

from scriptorium.evaluation import evaluate_page
from scriptorium.pipeline import PageAnalysis
from scriptorium.seams import SeamParams
from scriptorium.synth import corpus_specs, generate_page

alphas = (60, 120, 180)
betas = (1.0, 3.0, 10.0)
pages = [generate_page(s) for s in corpus_specs(4, seed=11)]
analyses = [PageAnalysis(p.labels) for p in pages]

grid = np.zeros((len(alphas), len(betas)))
for i, a in enumerate(alphas):
    for j, b in enumerate(betas):
        scores = []
        for page, an in zip(pages, analyses):
            pred = an.segment(SeamParams(a, b)).polygons
            scores.append(evaluate_page(pred, page.gt_polygons, page.text).line_iu)
        grid[i, j] = np.mean(scores)

print("line counts:", [p.spec.line_count for p in pages])
print("pitch (rows):", [p.spec.line_height + p.spec.gap for p in pages])
print("mean line IU; rows alpha", alphas, "columns beta", betas)
print(np.array2string(grid, precision=3))
