# Copyright 2026 The CZSL Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# =============================================================================

"""Compositional graph embedding for compositional zero-shot learning."""

from ._czsl import (
    CzslError,
    cross_entropy,
    evaluate,
    generate_synthetic,
    graph_stats,
    harmonic_mean,
    load_splits,
    make_splits,
    propagation_matrix,
    sweep,
    train,
    validate_splits,
)

__all__ = [
    "CzslError",
    "cross_entropy",
    "evaluate",
    "generate_synthetic",
    "graph_stats",
    "harmonic_mean",
    "load_splits",
    "make_splits",
    "propagation_matrix",
    "sweep",
    "train",
    "validate_splits",
]
