"""Subcell shape reconstruction and measurement-constrained state recovery.

Subpackages split by concern: exact half-plane geometry (geometry), cell-
average measurement synthesis and error norms (measurements), cellwise
linear and nonlinear reconstruction (recon), inverse-stability constants
(stability), Hilbert-space state estimation (pbdw), binary sparse recovery
(sparse), and the command-line front end (cli).
"""

__version__ = "0.1.0"
