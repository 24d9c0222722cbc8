# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

from .directory import BindResult, Location, PlacementDirectory
from .models import BindingMode, BindingPolicy, ClusterState
from .policy import clb_select, initial_user_assignment, ulb_select

__all__ = [
    "BindResult",
    "BindingMode",
    "BindingPolicy",
    "ClusterState",
    "Location",
    "PlacementDirectory",
    "clb_select",
    "initial_user_assignment",
    "ulb_select",
]
