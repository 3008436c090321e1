"""Box spaces of quotient chains, coarse and fibred coarse embeddings into
l^p, cocycle localization, and spectral gap diagnostics."""

from .boxspace import (
    BoxPoint,
    BoxSpace,
    assemble_box_space,
    box_distance,
    format_point,
    parse_point,
)
from .chainspec import load_chain, parse_chain
from .cocycles import (
    BlockMap,
    CocycleFamily,
    CocycleReport,
    LiftedCocycle,
    LocalCocycle,
    LocalRepresentation,
    QuotientCarrier,
    UltraReport,
    averaged_cocycle,
    family_from_fce,
    lift_to_group,
    local_cocycle_from_fce,
    ultraproduct_hypothesis_check,
    verify_local_action,
)
from .embedding import (
    CoarseEmbeddingMap,
    CoarseReport,
    ControlPair,
    PnormReport,
    cycle_plane_embedding,
    identity_controls,
    linf_embedding,
    pnorm_power_check,
    profile,
    torus_coordinate_embedding,
    verify_coarse,
)
from .errors import (
    ActionCheckError,
    BoxlabError,
    ChainExhaustedError,
    ChainValidationError,
    ControlSampleError,
    InvalidGroupError,
    MissingTrivializationError,
    NonStabilizedLengthError,
    SpecFormatError,
)
from .fibration import (
    FceReport,
    FibredEmbedding,
    ProperAction,
    from_proper_action,
    translation_action,
    trivial_fibration,
    verify_fce,
)
from .groups import (
    AmbientGroup,
    CyclicQuotient,
    GroupChain,
    MarkedQuotient,
    TableQuotient,
    ambient_sphere,
    ambient_word_length,
    build_chain,
    build_quotient,
    cayley_distance,
    project_to_level,
    quotient_diameter,
    r_isometric_radius,
    select_level_for_r,
)
from .lpspace import AffineIsometry, LpVector, SignedPermutation, identity_isometry, lp_norm
from .spectral import (
    DENSE_LIMIT,
    SpectralScan,
    averaging_matrix,
    expander_scan,
    laplacian_gap,
    write_gap_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AffineIsometry",
    "AmbientGroup",
    "BlockMap",
    "BoxPoint",
    "BoxSpace",
    "CoarseEmbeddingMap",
    "CoarseReport",
    "CocycleFamily",
    "CocycleReport",
    "ControlPair",
    "CyclicQuotient",
    "DENSE_LIMIT",
    "FceReport",
    "FibredEmbedding",
    "GroupChain",
    "LiftedCocycle",
    "LocalCocycle",
    "LocalRepresentation",
    "LpVector",
    "MarkedQuotient",
    "PnormReport",
    "ProperAction",
    "QuotientCarrier",
    "SignedPermutation",
    "SpectralScan",
    "TableQuotient",
    "UltraReport",
    "ActionCheckError",
    "BoxlabError",
    "ChainExhaustedError",
    "ChainValidationError",
    "ControlSampleError",
    "InvalidGroupError",
    "MissingTrivializationError",
    "NonStabilizedLengthError",
    "SpecFormatError",
    "assemble_box_space",
    "averaged_cocycle",
    "ambient_sphere",
    "ambient_word_length",
    "averaging_matrix",
    "box_distance",
    "build_chain",
    "build_quotient",
    "cayley_distance",
    "cycle_plane_embedding",
    "expander_scan",
    "family_from_fce",
    "format_point",
    "from_proper_action",
    "identity_controls",
    "identity_isometry",
    "laplacian_gap",
    "lift_to_group",
    "linf_embedding",
    "load_chain",
    "local_cocycle_from_fce",
    "lp_norm",
    "parse_chain",
    "parse_point",
    "pnorm_power_check",
    "profile",
    "project_to_level",
    "quotient_diameter",
    "r_isometric_radius",
    "select_level_for_r",
    "torus_coordinate_embedding",
    "translation_action",
    "trivial_fibration",
    "ultraproduct_hypothesis_check",
    "verify_coarse",
    "verify_fce",
    "verify_local_action",
    "write_gap_csv",
]
