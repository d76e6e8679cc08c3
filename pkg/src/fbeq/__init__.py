"""fbeq: low-latency subband speech enhancement via a filter-bank equalizer.

Subband analysis at high spectral resolution, per-frame gain estimation,
mapping of the gains to a short time-domain filter, and overlap-save
filtering that emits ``hop`` new samples per frame — so the signal-path
latency is the short filter's group delay, not a long synthesis window.
"""

from .audio_io import AudioBuffer, mix_at_snr, read_wav, write_wav
from .config import Config, build_config, load_config_file
from .equalizer import (
    EngineState,
    FreqResponse,
    HighOrderFilter,
    LatencyReport,
    ShortenedFilter,
    direct_filter_block,
    filter_to_freq,
    ols_filter_frame,
    process_stream,
    shorten_filter,
    subband_to_time,
)
from .errors import ConfigError, DataError, FbeqError, FormatError, NumericError
from .fbeg import (
    TYPE_DFT_RESPONSES,
    TYPE_SUBBAND_GAINS,
    StreamHeader,
    check_stream_geometry,
    load_gain_stream,
    write_gain_stream,
)
from .filterbank import (
    AnalysisFrameSeq,
    FilterbankSpec,
    PolyphaseAnalyzer,
    PrototypeFilter,
    analyze_direct,
    analyze_polyphase,
    design_prototype,
    expand_hermitian,
    modulation,
)
from .gains import (
    EstimatorParams,
    GainFrame,
    NoiseTrackerState,
    estimate_gains,
    mmse_lsa_gain,
    update_noise_psd,
)
from .metrics import (
    FrameLabeling,
    MetricReport,
    compute_report,
    label_noise_only,
    ri_mag_loss,
    seg_na,
    seg_snr,
)
from .special import exp_integral_e1

__version__ = "0.1.0"

__all__ = [
    "AnalysisFrameSeq",
    "AudioBuffer",
    "Config",
    "ConfigError",
    "DataError",
    "EngineState",
    "EstimatorParams",
    "FbeqError",
    "FilterbankSpec",
    "FormatError",
    "FrameLabeling",
    "FreqResponse",
    "GainFrame",
    "HighOrderFilter",
    "LatencyReport",
    "MetricReport",
    "NoiseTrackerState",
    "NumericError",
    "PolyphaseAnalyzer",
    "PrototypeFilter",
    "ShortenedFilter",
    "StreamHeader",
    "TYPE_DFT_RESPONSES",
    "TYPE_SUBBAND_GAINS",
    "analyze_direct",
    "analyze_polyphase",
    "build_config",
    "check_stream_geometry",
    "compute_report",
    "design_prototype",
    "direct_filter_block",
    "estimate_gains",
    "exp_integral_e1",
    "expand_hermitian",
    "filter_to_freq",
    "label_noise_only",
    "load_config_file",
    "load_gain_stream",
    "mix_at_snr",
    "mmse_lsa_gain",
    "modulation",
    "ols_filter_frame",
    "process_stream",
    "read_wav",
    "ri_mag_loss",
    "seg_na",
    "seg_snr",
    "shorten_filter",
    "subband_to_time",
    "update_noise_psd",
    "write_gain_stream",
    "write_wav",
]
