from .bsm import (BsmSignature, bell_analyzer_probabilities, classify_clicks,
                  outcome_probabilities)
from .sources import (BIN_SEPARATION_PS, PULSE_PERIOD_PS, PhotonRecord, PulseEvent,
                      SourceSpec, apply_loss, encode_user_qubit, generate_bell_pair,
                      generate_heralded_pairs, sample_pair_count, thermal_pmf,
                      two_mode_thermal_pmf, vbs_settings)
from .umzi import projective_umzi, umzi_network
from .wavepacket import (Wavepacket, beta2_from_dispersion, disperse, mode_overlap,
                         transform_limited_sigma)

__all__ = [
    "BIN_SEPARATION_PS", "PULSE_PERIOD_PS", "BsmSignature", "PhotonRecord", "PulseEvent",
    "SourceSpec", "Wavepacket", "apply_loss", "bell_analyzer_probabilities",
    "beta2_from_dispersion", "classify_clicks", "disperse", "encode_user_qubit",
    "generate_bell_pair", "generate_heralded_pairs", "mode_overlap", "outcome_probabilities",
    "projective_umzi", "sample_pair_count", "thermal_pmf", "transform_limited_sigma",
    "two_mode_thermal_pmf", "umzi_network", "vbs_settings",
]
