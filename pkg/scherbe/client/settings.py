# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

from pydantic import BaseModel, Field
from pydantic_settings import SettingsConfigDict

from scherbe.chunking import ChunkParams
from scherbe.core.settings import Settings


class ChunkingSettings(BaseModel):
    MIN_SIZE: int = Field(1024, gt=0)
    MAX_SIZE: int = Field(8192, gt=0)
    MASK_BITS: int = Field(12, ge=1, le=31, description="expected chunk size is about MIN_SIZE + 2**MASK_BITS")
    WINDOW_SIZE: int = Field(48, ge=1, le=64)

    @property
    def params(self) -> ChunkParams:
        return ChunkParams(min_size=self.MIN_SIZE, max_size=self.MAX_SIZE, boundary_mask_bits=self.MASK_BITS, window_size=self.WINDOW_SIZE)


class ClientSettings(Settings):
    """End device configuration."""

    model_config = SettingsConfigDict(env_prefix="CLIENT__")

    FETCH_WINDOW: int = Field(4, ge=1, description="chunks fetched concurrently, 1 fetches strictly one after another")
    UPLOAD_WINDOW: int = Field(4, ge=1, description="chunks uploaded concurrently")
    CACHE_BUDGET: int = Field(256 * 1024 * 1024, ge=0, description="bytes of chunk payload kept on the device")
    RETRIES: int = Field(2, ge=0)
    REQUEST_TIMEOUT: float = Field(30.0, gt=0, description="seconds")
    DECODE_ATTEMPTS: int = Field(32, ge=1, description="k-subsets tried per chunk when a decoded digest mismatches")
    CHUNKING: ChunkingSettings = ChunkingSettings()
