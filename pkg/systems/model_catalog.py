"""Model preset catalog (contributions/models/README.md)."""

import json
import logging
import os

from models.model_spec import ModelSpec
from utils.errors import ModelError

logger = logging.getLogger("arhgls.numerics")


def _models_dir():
    # Resolve relative to project root (parent of systems/) so it works from any cwd
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    return os.path.join(root, "contributions", "models")


class ModelCatalog:
    """Loads model presets from contributions/models/ and resolves names or paths."""

    def __init__(self, models_dir=None):
        self.models_dir = models_dir or _models_dir()
        self.models = {}
        self.load_errors = {}

    def load(self):
        """Load every *.json preset; malformed files are reported and skipped."""
        if not os.path.exists(self.models_dir):
            logger.warning("No model directory at %s - no presets loaded", self.models_dir)
            return self
        for filename in sorted(os.listdir(self.models_dir)):
            if not filename.endswith(".json"):
                continue
            filepath = os.path.join(self.models_dir, filename)
            try:
                spec = self.read_file(filepath)
            except ModelError as e:
                self.load_errors[filename] = str(e)
                logger.warning("Error loading model preset %s: %s", filename, e)
                continue
            self.models[spec.model_id] = spec
        return self

    @staticmethod
    def read_file(filepath):
        try:
            with open(filepath, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ModelError(f"cannot read model file {filepath}: {e}") from e
        spec = ModelSpec.from_dict(data, source=os.path.basename(filepath))
        spec.check_admissible()
        return spec

    def names(self):
        return sorted(self.models)

    def get(self, name_or_path):
        """Preset by model_id, or a ModelSpec read from a JSON path."""
        if name_or_path in self.models:
            return self.models[name_or_path]
        if name_or_path.endswith(".json") or os.path.sep in name_or_path:
            return self.read_file(name_or_path)
        raise ModelError(f"unknown model {name_or_path!r}; available presets: {', '.join(self.names())}")


_default_catalog = None


def load_model(name_or_path, K=None):
    """Resolve a preset name or JSON path to a ModelSpec, optionally re-truncated at K."""
    global _default_catalog
    if _default_catalog is None:
        _default_catalog = ModelCatalog().load()
    spec = _default_catalog.get(name_or_path).with_K(K)
    spec.check_admissible()
    return spec
