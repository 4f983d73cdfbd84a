"""Sparse active-element RIS link toolkit.

Synthetic multipath channel data for a UPA-shaped RIS, learned selection
of the sensing elements (perturbed-argmax sampling with a tempered-softmax
straight-through gradient), a CNN that completes the zero-filled channel
tensor, an FNN that picks codebook beams directly, and the reflection
design chain that turns estimates into achievable rates.
"""

from .beamforming import (PhaseQuantizer, continuous_optimum,
                          eigen_upper_bound, project_phases, quantize_project)
from .beamsearch import (Codebook, beam_rates, build_beam_net, build_codebook,
                         cross_entropy, one_hot, oracle_label, oracle_labels,
                         predict_beams)
from .channel import (ArrayGeometry, OfdmGrid, PathSet, achievable_rate,
                      build_tensor, freq_channel, gen_pathset, split_tensor,
                      steering_vector)
from .config import DatasetConfig, TrainConfig, config_hash, load_config, save_config
from .dataio import Dataset, gen_data, read_dataset, read_labels, write_labels
from .extrapolation import (ExtrapNetSpec, build_extrap_net, extrapolate,
                            mse_loss, nmse)
from .selection import (SubsampleMatrix, entropy_penalty, extract_pattern,
                        init_logits, sample_selection, subsample,
                        uniform_pattern, zero_fill)
from .training import TrainResult, train_beam, train_extrapolation

__version__ = "0.1.0"
