"""Cell-free massive MIMO SWIPT simulator with beyond-diagonal RIS designs."""

from .estimation import (EstimateSet, PilotShortageError, gamma_coefficient,
                         run_pilot_phase)
from .experiment import (ResultRow, SweepSpec, desk_config, desk_sweep_spec,
                         emit_report, paper_sweep_spec, run_sweep)
from .metrics import (MetricsReport, closed_form_Q, closed_form_sinr,
                      harvested_energy_bound, logistic, se_from_sinr)
from .oracles import (DownlinkInstance, build_instance, closed_form_norm_moments,
                      quartic_form_check, mc_channel_moments, mc_received_energy,
                      mc_sinr)
from .precoding import (PrecoderSet, analytic_normalizers, build_precoders,
                        orthogonal_projection, pmrt_precoder, power_control,
                        pzf_precoder, transmit_vector)
from .ris_channel import (ChannelSet, CorrelationModel, aggregate_eu_channel,
                          build_correlation_model, covariance_factor,
                          delta_coefficient, delta_table,
                          ris_correlation_matrix, sample_channel_set)
from .scattering import (ScatteringMatrix, heuristic_scattering,
                         random_scattering, scattering_objective,
                         validate_scattering)
from .topology import (ConfigurationError, NetworkRealization, SystemConfig,
                       assign_ap_modes, build_config, generate_topology,
                       load_config, three_slope_pathloss)

__version__ = "0.1.0"
