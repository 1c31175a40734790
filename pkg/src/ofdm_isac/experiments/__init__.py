"""Experiment definitions, configuration files and the command line tool."""

from .config import EXPERIMENTS, SweepSpec, load_spec, spec_from_dict
from .runners import (budget_rows, measure_point, range_cut_profile, render_csv, run,
                      run_interferer_sweep, run_multi_sweep, run_range_cut, run_single_sweep,
                      write_csv)

__all__ = [
    "EXPERIMENTS", "SweepSpec", "load_spec", "spec_from_dict", "budget_rows", "measure_point",
    "range_cut_profile", "render_csv", "run", "run_interferer_sweep", "run_multi_sweep",
    "run_range_cut", "run_single_sweep", "write_csv",
]
