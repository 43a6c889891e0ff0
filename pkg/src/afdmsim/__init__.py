"""AFDM link-level simulation library: DAFT modem, doubly dispersive
channels, message-passing detection, and a seeded Monte Carlo harness."""

from .channel import (
    ChannelPath,
    ChannelRealization,
    NoiseModel,
    SparseEffectiveChannel,
    apply_channel_timedomain,
    build_channel_matrix,
    build_effective_dense,
    build_effective_sparse,
    channel_from_text,
    channel_to_text,
    draw_channel,
    received_daft_frame,
)
from .daft import AfdmParams, chirp_diagonal, chirp_periodic_extend, daft, daft_matrix, idaft
from .detect import (
    DetectionResult,
    MpConfig,
    map_oracle,
    mmse_detect,
    mp_detect,
    mrc_detect,
    mrc_estimate,
    symbol_map_oracle,
)
from .harness import (
    BerRecord,
    ConfigError,
    ExperimentConfig,
    parse_config,
    point_seed,
    run_point,
    run_sweep,
)
from .modem import (
    Constellation,
    TxFrame,
    afdm_demodulate,
    afdm_modulate,
    hard_demap,
    map_bits,
    slice_to_index,
)

__version__ = "0.1.0"
