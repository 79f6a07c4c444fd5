"""
Settings manager for the Buffon toolkit.
Handles reading tolerances and run options from a JSON file / environment and providing defaults.
"""

import json
import logging
import os
from typing import Any, Dict

logger = logging.getLogger(__name__)

SETTINGS_ENV = 'BUFFON_SETTINGS'
DEFAULT_SETTINGS_FILE = 'buffon_settings.json'
ENV_PREFIX = 'BUFFON_'


class SettingsManager:
    """
    Manages numerical tolerances and run options.
    """

    def __init__(self):
        self._cache = {}
        self._cache_valid = False

    def get_setting(self, key: str, default_value: Any = None) -> Any:
        """Get a setting value with caching."""
        if not self._cache_valid:
            self._refresh_cache()

        return self._cache.get(key, default_value)

    def set_setting(self, key: str, value: Any):
        """Override a setting for the current process (CLI flags)."""
        if not self._cache_valid:
            self._refresh_cache()
        self._cache[key] = value

    def _refresh_cache(self):
        """Refresh settings cache from the settings file and environment."""
        settings = self._get_default_settings()
        path = os.environ.get(SETTINGS_ENV, DEFAULT_SETTINGS_FILE)

        try:
            if os.path.exists(path):
                with open(path, 'r', encoding='utf-8') as f:
                    loaded = json.load(f)
                if not isinstance(loaded, dict):
                    raise ValueError("settings file must contain a JSON object")
                settings.update(loaded)
                logger.debug(f"Loaded {len(loaded)} settings from {path}")
        except Exception as e:
            logger.warning(f"Failed to read settings file {path}: {e}")
            # Use defaults if the file is not usable
            settings = self._get_default_settings()

        for key in settings:
            raw = os.environ.get(ENV_PREFIX + key.upper())
            if raw is None:
                continue
            try:
                # Try to parse JSON for numbers and booleans
                settings[key] = json.loads(raw)
            except (json.JSONDecodeError, TypeError):
                settings[key] = raw

        self._cache = settings
        self._cache_valid = True
        logger.debug(f"Refreshed settings cache with {len(self._cache)} settings")

    def _get_default_settings(self) -> Dict[str, Any]:
        """Get default settings if no settings file is available."""
        return {
            'group_tol': 1e-9,
            'ambiguity_factor': 10.0,
            'eigensolver': 'lapack',
            'jacobi_tol': 1e-13,
            'max_steps': 100000,
            'shape_tol': 1e-10,
            'collapse_tol': 1e-8,
            'planarity_tol': 1e-6,
            'convex_tol': 1e-9,
            'degenerate_area_tol': 1e-12,
            'polar_tol': 1e-8,
            'cdv_rank_tol': 1e-8,
            'automorphism_budget': 1000000,
            'kis_lift': 0.1,
            'perturb_eps': 0.05,
            'rng_seed': 0,
            'log_level': 'WARNING',
            'log_file': None,
        }

    def invalidate_cache(self):
        """Invalidate the settings cache to force refresh on next access."""
        self._cache_valid = False

    def get_spectral_config(self) -> Dict[str, Any]:
        """Get eigensolver and grouping configuration."""
        return {
            'group_tol': float(self.get_setting('group_tol', 1e-9)),
            'ambiguity_factor': float(self.get_setting('ambiguity_factor', 10.0)),
            'solver': self.get_setting('eigensolver', 'lapack'),
            'jacobi_tol': float(self.get_setting('jacobi_tol', 1e-13)),
            'cdv_rank_tol': float(self.get_setting('cdv_rank_tol', 1e-8)),
            'polar_tol': float(self.get_setting('polar_tol', 1e-8)),
        }

    def get_dynamics_config(self) -> Dict[str, Any]:
        """Get iteration configuration."""
        return {
            'max_steps': int(self.get_setting('max_steps', 100000)),
            'shape_tol': float(self.get_setting('shape_tol', 1e-10)),
            'collapse_tol': float(self.get_setting('collapse_tol', 1e-8)),
            'perturb_eps': float(self.get_setting('perturb_eps', 0.05)),
            'rng_seed': int(self.get_setting('rng_seed', 0)),
        }

    def get_geometry_config(self) -> Dict[str, Any]:
        """Get geometric verdict tolerances."""
        return {
            'planarity_tol': float(self.get_setting('planarity_tol', 1e-6)),
            'convex_tol': float(self.get_setting('convex_tol', 1e-9)),
            'degenerate_area_tol': float(self.get_setting('degenerate_area_tol', 1e-12)),
            'collapse_tol': float(self.get_setting('collapse_tol', 1e-8)),
            'kis_lift': float(self.get_setting('kis_lift', 0.1)),
        }

    def get_symmetry_config(self) -> Dict[str, Any]:
        """Get automorphism search configuration."""
        return {
            'budget': int(self.get_setting('automorphism_budget', 1000000)),
        }


# Global settings manager instance
settings_manager = SettingsManager()
