"""Volumetric click guidance signals and a simulated click-refinement harness."""

from .distance import (DistanceKind, DistanceMap, GeodesicParams, SeedSet, dijkstra_oracle,
                       dilate_seeds, edt, gdt)
from .encoders import (GuidanceConfig, GuidanceKind, GuidanceVolume, adaptive_sigma, encode,
                       encode_adaptive_heatmap, encode_disk, encode_distance_guidance,
                       encode_heatmap, encode_pair, sigma_from_mean_distance, tuned_config)
from .io import load_mask, load_volume, save_mask, save_volume
from .metrics import MetricsReport, aggregate, consistent_improvement, dice, efficiency, gt_overlap
from .simulation import (ClickPlacement, GeodesicOracle, OracleParams, SessionTrace,
                         SimulationConfig, run_session, sample_click)
from .volume import (Click, ClickSet, Mask, PhantomKind, Polarity, Volume, connected_components,
                     make_phantom, phantom_batch)

__version__ = "0.1.0"
