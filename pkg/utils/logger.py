"""Logging module for run audit trails and numerical events."""

import logging
import os

LOG_DIR_ENV = "ARHGLS_LOG_DIR"
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


class RunLogger:
    """Handles experiment audit logging and numerical event logging."""

    def __init__(self, log_dir=None):
        self.log_dir = log_dir
        self.setup_logging()

    def setup_logging(self):
        """Set up logging configuration"""
        self.experiment_logger = logging.getLogger('arhgls.experiment')
        self.experiment_logger.setLevel(logging.INFO)
        self.numerics_logger = logging.getLogger('arhgls.numerics')
        self.numerics_logger.setLevel(logging.INFO)
        if self.log_dir is None:
            return
        os.makedirs(self.log_dir, exist_ok=True)

        # Run audit log
        self._attach(self.experiment_logger, os.path.join(self.log_dir, "experiment.log"))
        # Numerical warnings from the estimation library
        self._attach(self.numerics_logger, os.path.join(self.log_dir, "numerics.log"))

    @staticmethod
    def _attach(target, path):
        path = os.path.abspath(path)
        for handler in target.handlers:
            if isinstance(handler, logging.FileHandler) and handler.baseFilename == path:
                return
        handler = logging.FileHandler(path)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        target.addHandler(handler)

    def close(self):
        """Detach and close this logger's file handlers."""
        if self.log_dir is None:
            return
        root = os.path.abspath(self.log_dir)
        for target in (self.experiment_logger, self.numerics_logger):
            for handler in list(target.handlers):
                if isinstance(handler, logging.FileHandler) and os.path.dirname(handler.baseFilename) == root:
                    target.removeHandler(handler)
                    handler.close()

    def log_run_start(self, command, settings):
        """Log the start of a subcommand with its settings"""
        self.experiment_logger.info(f"RUN START - Command: {command}, Settings: {self.describe_settings(settings)}")

    def log_run_end(self, command, outputs):
        """Log the files a subcommand produced"""
        self.experiment_logger.info(f"RUN END - Command: {command}, Outputs: {', '.join(outputs) or 'none'}")

    def log_repetition_failure(self, index, error):
        """Log a Monte Carlo repetition excluded from the report"""
        self.numerics_logger.warning(
            f"REPETITION FAILED - Index: {index}, Error: {type(error).__name__}, Details: {error}"
        )

    def log_error(self, error_type, message, context=None):
        """Log errors"""
        context_str = f", Context: {context}" if context else ""
        self.experiment_logger.error(f"{error_type}{context_str} - {message}")

    def log_info(self, message):
        """Log general information"""
        self.experiment_logger.info(message)

    def describe_settings(self, settings):
        """One-line key=value summary, lists shortened to their ends"""
        parts = []
        for key, value in settings.items():
            if isinstance(value, (list, tuple)) and len(value) > 4:
                value = f"[{value[0]}, {value[1]}, ..., {value[-1]}] ({len(value)})"
            parts.append(f"{key}={value}")
        return " ".join(parts)


def resolve_log_dir(out_dir):
    """ARHGLS_LOG_DIR if set, else <out>/logs."""
    override = os.getenv(LOG_DIR_ENV)
    if override:
        return override
    return os.path.join(out_dir, "logs")
