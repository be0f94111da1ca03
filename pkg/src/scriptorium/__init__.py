"""Text-line segmentation of pixel-labelled document pages.

Pipeline: main-text mask -> energy map -> seams -> centroid bins ->
one tight polygon per line. Also ships a Line IU / Pixel IU evaluator and a
synthetic page generator with exact ground truth.
"""
from .binning import LineBin, bin_centroids, seams_below
from .energy import EnergyMap, SmoothingConfig, total_energy
from .evaluation import CorpusReport, PageReport, evaluate_page, iu
from .ingest import LabelEncoding, LabelImage, decode_label_image, denoise, text_mask
from .pageio import PageDocument, parse_page_xml, write_page_xml
from .pipeline import PageAnalysis, PipelineConfig, segment_page
from .polygons import LinePolygon, minimum_spanning_tree
from .seams import Seam, SeamParams, cast_all, cast_seam, merge_seams
from .synth import SynthSpec, generate_page

__version__ = "0.1.0"
