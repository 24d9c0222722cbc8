# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""CLI Entry."""

from __future__ import annotations

import logging
import logging.config
import os
import warnings
from typing import Annotated

import typer

app = typer.Typer(
    no_args_is_help=True,
    context_settings={"help_option_names": ["-h", "--help"]},
)

# ruff: noqa: E402
from scherbe.cli import (  # pylint: disable=wrong-import-position
    cmd_client,
    cmd_harness,
    cmd_node,
)

app.add_typer(cmd_node.app, name="node")
app.add_typer(cmd_client.app, name="client")
app.add_typer(cmd_harness.app, name="harness")

log = logging.getLogger(__name__)


def version_callback(value: bool):
    if value:
        from scherbe.cli import __version__  # pylint: disable=import-outside-toplevel

        typer.echo(__version__)
        raise typer.Exit()


def update_log_level(log_level: str):
    """Rich output for interactive sessions."""
    from scherbe.core.logging import get_logging_dict_config  # pylint: disable=import-outside-toplevel

    log_config = get_logging_dict_config(log_level)
    log_config["formatters"]["default"] = {
        "()": "scherbe.cli.logger.WithExtraFormatter",
        "reduced": ["INFO"],
    }
    log_config["handlers"]["default"] = {
        "()": "rich.logging.RichHandler",
        "formatter": "default",
    }
    logging.config.dictConfig(log_config)


@app.callback()
def main_args(
    verbose: Annotated[bool, typer.Option("--verbose")] = False,
    log_level: Annotated[
        str,
        typer.Option(
            "--log-level",
            autocompletion=lambda: ["CRITICAL", "FATAL", "ERROR", "WARN", "INFO", "DEBUG"],
        ),
    ] = "INFO",
    _version: Annotated[bool, typer.Option("--version", callback=version_callback, is_eager=True)] = False,
):
    """Global settings, main."""
    from scherbe.core.logging import (  # pylint: disable=import-outside-toplevel
        get_logging_dict_config,
        setup_uncaught_exception_logging,
        warnings_to_logger,
    )

    if not os.isatty(1):
        logging.config.dictConfig(get_logging_dict_config(log_level, "scherbe.core.logging.JsonStringFormatter"))
        app.pretty_exceptions_enable = False
        app.pretty_exceptions_show_locals = False
    else:
        # Interactive Session
        update_log_level(log_level)
        app.pretty_exceptions_enable = True
        app.pretty_exceptions_show_locals = True
        app.pretty_exceptions_short = not verbose
    warnings.showwarning = warnings_to_logger  # type: ignore[assignment]
    setup_uncaught_exception_logging()


def main():
    """Main."""
    app()
