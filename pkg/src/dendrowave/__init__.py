"""Wavelet transforms, p-adic codes, and ultrametric validators on dendrograms."""

from .tree import (
    Dendrogram,
    NodeRef,
    SwapMask,
    ValidationError,
    apply_swap,
    branch_signs,
    build_from_merges,
    canonical_orient,
    cluster,
    from_json,
    random_dendrogram,
    terminal,
    to_json,
)
from .hcluster import LINKAGES, agglomerate, merge_levels, pairwise_euclidean
from .haar import (
    WaveletDecomposition,
    detail_norms,
    forward,
    forward_indicator,
    forward_weighted,
    hard_threshold,
    inverse,
    inverse_weighted,
    reconstruct_matrix_form,
)
from .padic import (
    PAdicCode,
    cluster_code,
    code_from_decimal,
    decimal_value,
    decode,
    dilate,
    dilate_tree,
    dilation_operator_norm,
    dilation_steps_to_null,
    encode,
    padd,
    parse_code,
    pdistance,
    pmultiply,
    pnorm,
    poly_from_code,
    power_repr,
)
from .ultrametric import (
    TriangleCensus,
    Verdict,
    ball,
    canonical_form,
    check_ball_axioms,
    cophenetic,
    distance_from_proximity,
    is_ultrametric,
    matrix_from_csv,
    matrix_to_csv,
    proximity_from_distance,
    triangle_classify,
)
from .pway import (
    B3_SPLINE,
    BOX,
    TRIANGLE,
    PWayTree,
    ScalingFilter,
    build_pway,
    convolve_filters,
    random_pway_tree,
    scaling_filters,
    unfold,
)
from .demo import demo_names, load_demo, walkthrough_text, walkthrough_tree

__version__ = "0.1.0"

__all__ = [
    "Dendrogram",
    "NodeRef",
    "PAdicCode",
    "PWayTree",
    "ScalingFilter",
    "SwapMask",
    "TriangleCensus",
    "ValidationError",
    "Verdict",
    "WaveletDecomposition",
    "agglomerate",
    "apply_swap",
    "B3_SPLINE",
    "BOX",
    "TRIANGLE",
    "ball",
    "branch_signs",
    "build_from_merges",
    "build_pway",
    "canonical_form",
    "canonical_orient",
    "check_ball_axioms",
    "cluster",
    "cluster_code",
    "code_from_decimal",
    "convolve_filters",
    "cophenetic",
    "decimal_value",
    "decode",
    "demo_names",
    "detail_norms",
    "dilate",
    "dilate_tree",
    "dilation_operator_norm",
    "dilation_steps_to_null",
    "distance_from_proximity",
    "encode",
    "forward",
    "forward_indicator",
    "forward_weighted",
    "from_json",
    "hard_threshold",
    "inverse",
    "inverse_weighted",
    "is_ultrametric",
    "LINKAGES",
    "load_demo",
    "matrix_from_csv",
    "matrix_to_csv",
    "merge_levels",
    "padd",
    "pairwise_euclidean",
    "parse_code",
    "pdistance",
    "pmultiply",
    "pnorm",
    "poly_from_code",
    "power_repr",
    "proximity_from_distance",
    "random_dendrogram",
    "random_pway_tree",
    "reconstruct_matrix_form",
    "scaling_filters",
    "terminal",
    "to_json",
    "triangle_classify",
    "unfold",
    "walkthrough_text",
    "walkthrough_tree",
]
