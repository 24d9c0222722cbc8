# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

from .cache import LocalCache
from .client import RetrievalReport, StorageClient, SyncReport, UploadReport
from .settings import ChunkingSettings, ClientSettings

__all__ = ["ChunkingSettings", "ClientSettings", "LocalCache", "RetrievalReport", "StorageClient", "SyncReport", "UploadReport"]
