# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

from .settings import Settings, SettingsBase, load_settings

__all__ = ["Settings", "SettingsBase", "load_settings"]
