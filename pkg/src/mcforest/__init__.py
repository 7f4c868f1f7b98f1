"""Cluster detection by a-contrario testing of single-link components."""

from .dataset import (EUCLIDEAN, Metric, PointSet, Window, bounding_window,
                      generate_uniform, load_csv, save_csv, save_labels)
from .mst import Edge, Mst, compute_mst, kruskal_mst
from .hierarchy import Component, Dendrogram, build_hierarchy, internal_components
from .background import (BackgroundModel, BackgroundModelParams, cdf_omega,
                         fit_background)
from .detection import (Forest, ScoredComponent, detect_mcf, exclusion_prune,
                        meaningful_components, score_component)
from .scenes import SCENES, generate_scene
from .stabilization import StabilizationTrace, stabilize, stabilized_mcf
from .unmasking import UnmaskTrace, unmask

__version__ = "0.1.0"
