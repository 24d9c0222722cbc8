# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

from .codec import CodedPiece, CodingParams, decode_chunk, encode_chunk, generator_matrix

__all__ = ["CodedPiece", "CodingParams", "decode_chunk", "encode_chunk", "generator_matrix"]
