# Copyright 2026 The TEA Robustness Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Attribution-robustness estimation for text classifiers."""

import json
import os

from ._core import (
    ConfigError,
    Error,
    ResolutionError,
    attribution_distance,
    auc_k,
    batch_size,
    bucket_index,
    default_rho_edges,
    make_batches,
    pearson_correlation,
    position_budget,
    predicted_queries,
    preprocess,
    relative_auc_increase,
    rho_b_rule,
    sample_k,
)
from . import _core

__all__ = [
    "ConfigError",
    "Error",
    "ResolutionError",
    "attribution_distance",
    "auc_k",
    "batch_size",
    "bucket_index",
    "default_rho_edges",
    "load_experiment_config",
    "make_batches",
    "pearson_correlation",
    "position_budget",
    "predicted_queries",
    "preprocess",
    "regenerate_reports",
    "relative_auc_increase",
    "rho_b_rule",
    "run_experiment",
    "sample_k",
]


def load_experiment_config(path):
    """Returns the fully resolved configuration as a dict."""
    return json.loads(_core.load_experiment_config(os.fspath(path)))


def run_experiment(config, base_dir=None):
    """Runs an experiment from a config path or dict.

    Relative paths in a dict are resolved against base_dir (default: cwd).
    Returns a dict with per-attack reports, validation accuracy per seed and
    the written artifacts.
    """
    if isinstance(config, (str, os.PathLike)):
        path = os.fspath(config)
        base_dir = os.path.dirname(os.path.abspath(path))
        with open(path, encoding="utf-8") as f:
            config = json.load(f)
    if base_dir is None:
        base_dir = os.getcwd()
    return json.loads(_core.run_experiment(json.dumps(config),
                                           os.fspath(base_dir)))


def regenerate_reports(output_dir):
    """Rebuilds reports from stored per-sample records; returns artifacts."""
    return list(_core.regenerate_reports(os.fspath(output_dir)))
