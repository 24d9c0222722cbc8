# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""CLI program."""

import importlib.metadata

from scherbe.exceptions import CorruptChunkError, NotFoundError, UnrecoverableChunkError

__all__ = ["EXIT_NOT_FOUND", "EXIT_OK", "EXIT_OTHER", "EXIT_UNRECOVERABLE", "exit_code"]
try:
    __version__ = importlib.metadata.version("scherbe")
# pylint: disable-next=bare-except
except:  # noqa: E722
    __version__ = "dev"
__version_info__ = __version__.split(".")

EXIT_OK = 0
EXIT_NOT_FOUND = 1
EXIT_UNRECOVERABLE = 2
EXIT_OTHER = 3


def exit_code(err: BaseException) -> int:
    """Process exit code of a failed command."""
    if isinstance(err, NotFoundError):
        return EXIT_NOT_FOUND
    if isinstance(err, UnrecoverableChunkError | CorruptChunkError):
        return EXIT_UNRECOVERABLE
    return EXIT_OTHER
