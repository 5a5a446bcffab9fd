"""Numerical systems package.

This package contains the estimation systems:
- basis: sine basis, projection and synthesis
- spectral_ops: diagonal operators and model operators
- arh_sim: ARH(1) simulation
- gls_core: known-covariance GLS
- plugin_est: plug-in GLS and prediction
- model_catalog: model presets
- experiment_runner: Monte Carlo experiments
"""
