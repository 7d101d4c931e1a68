# Copyright 2026 The cogcl Authors.
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

"""Python bindings for the cogcl engine."""

from cogcl._core import (
    Error,
    UsageError,
    assign_codes,
    dataset_stats,
    default_config,
    read_checkpoint,
    run_cli,
)

__all__ = [
    "Error",
    "UsageError",
    "assign_codes",
    "dataset_stats",
    "default_config",
    "read_checkpoint",
    "run_cli",
]
