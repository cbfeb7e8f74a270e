"""Perceptual frame resequencing: pairwise deep-feature distances, outlier
pruning, and graph solvers that recover smooth frame orderings."""

from .errors import (
    ContractError,
    FitError,
    FormatError,
    IngestionError,
    NumericalError,
    PruneError,
    ReseqError,
    ValidationError,
)
from .evalkit import (
    EvalConfig,
    EvalReport,
    ReconstructionCase,
    kendall_tau_normalized,
    run_reconstruction,
    run_suite,
)
from .frameset import (
    DistanceMatrix,
    FeatureArchive,
    FrameCollection,
    FrameRecord,
    LayerSpec,
    channel_unit_normalize,
    ingest_images,
    load_archive,
    load_matrix,
    save_archive,
    save_matrix,
)
from .graphseq import (
    CompleteGraph,
    MstTree,
    SequenceResult,
    SolverConfig,
    build_graph,
    keyframe_path,
    minimum_spanning_tree,
    shortest_hamiltonian_cycle,
    shortest_hamiltonian_path,
)
from .layout import Embedding2D, LayoutSheet, embed_mst_2d, render_layout
from .metrics import (
    METRICS,
    CalibrationWeights,
    FitConfig,
    JudgeNetParams,
    JudgmentTriple,
    compute_distance_matrix,
    cosine_distance,
    fit_calibration,
    judge,
    l2_image_distance,
    lpips_distance,
)
from .outliers import (
    GenGammaFit,
    GenGammaFitConfig,
    KnnStatistic,
    PruneReport,
    fit_gengamma_mle,
    gengamma_cdf,
    gengamma_pdf,
    gengamma_quantile,
    knn_mean_distance,
    prune_outliers,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
