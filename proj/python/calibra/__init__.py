"""Simulation-based calibration of Bayes factors for repeated-measures designs.

The heavy lifting lives in the compiled extension `_calibra`; this package
re-exports its public surface. The extension sits inside the package for
wheel installs and on sys.path for in-tree test runs.
"""

try:
    from ._calibra import *  # noqa: F401,F403
    from ._calibra import __version__  # noqa: F401
except ImportError:  # in-tree build: extension next to the package
    from _calibra import *  # noqa: F401,F403
    from _calibra import __version__  # noqa: F401

__all__ = [
    "REGRESSION_DEFAULT_SCALE",
    "TTEST_DEFAULT_SCALE",
    "__version__",
    "alpha_power_sim",
    "bf_report",
    "contrast_matrix",
    "jzs_linreg_bf",
    "jzs_ttest_bf",
    "min_f",
    "posterior_model_prob",
    "preset_names",
    "qmatrix",
    "run_sbc",
    "scenario_json",
    "simulate_dataset",
    "summarize_sbc",
]
