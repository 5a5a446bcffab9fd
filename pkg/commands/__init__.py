"""Command handlers for the arhgls command line.

Handlers are organized by category and take (app, args):
- data: simulate
- estimation: fit, predict
- experiments: experiment, sweep, normality
"""

from .data import simulate_command
from .estimation import fit_command, predict_command
from .experiments import experiment_command, normality_command, sweep_command

COMMANDS = {
    'simulate': simulate_command,
    'fit': fit_command,
    'predict': predict_command,
    'experiment': experiment_command,
    'sweep': sweep_command,
    'normality': normality_command,
}

__all__ = [
    'simulate_command', 'fit_command', 'predict_command',
    'experiment_command', 'sweep_command', 'normality_command',
    'COMMANDS',
]
