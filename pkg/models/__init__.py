"""Data models package.

This package contains the core data models:
- function_space: Interval, Grid, HFunction
- operators: SpectralOperator, RegressorOperator, RegressorPanel
- model_spec: Law, ModelSpec
- experiment: ExperimentConfig, MetricsReport (import directly; it depends on systems)
"""

from .function_space import DEFAULT_INTERVAL, Grid, HFunction, Interval
from .model_spec import Law, ModelSpec
from .operators import OperatorKind, RegressorOperator, RegressorPanel, SpectralOperator

__all__ = [
    'DEFAULT_INTERVAL', 'Grid', 'HFunction', 'Interval',
    'Law', 'ModelSpec',
    'OperatorKind', 'RegressorOperator', 'RegressorPanel', 'SpectralOperator',
]
