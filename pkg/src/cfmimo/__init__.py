"""Stochastic-geometry toolkit for cell-free massive MIMO.

Monte-Carlo simulation of random AP deployments with closed-form validation:
channel-gain statistics, channel hardening (X_ch), favorable propagation
(X_fp), and uplink/downlink achievable-rate bounds under MR processing.
"""

__version__ = "0.1.0"

from cfmimo.backend import BACKEND

__all__ = ["BACKEND", "__version__"]
