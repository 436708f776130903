"""Link-level simulation of DS-UWB receivers with low spreading factor.

Selective RAKE with decision-feedback equalization versus iterative
selective multipath interference cancellation with linear equalization,
plus a semi-analytic matched filter bound and complexity formulas.
"""
from .analysis import captured_energy, complexity_receiver, mfb_average, mfb_ber
from .channel_model import ChannelParams, discretize, generate_realization, load_channel_params
from .rake_frontend import select_fingers, srake_detect
from .signal_core import FrameConfig, SpreadingCode, make_chip_pulse, synthesize_frame
from .smpic import SmpicConfig, smpic_detect
from .sim_harness import SimConfig, load_config, run_mfb, run_sweep

__version__ = "0.1.0"
