# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

from pathlib import Path
from typing import TypeVar

from pydantic import ValidationError
from pydantic_settings import BaseSettings as _PydanticBaseSettings
from pydantic_settings import DotEnvSettingsSource, PydanticBaseSettingsSource, SettingsConfigDict

from scherbe.exceptions import ConfigError


class SettingsBase(_PydanticBaseSettings):
    """Used as the PydanticSettingsBase, sets delimiter etc.

    Values are read, in falling priority, from init kwargs, the environment (with the
    class env_prefix) and a flat `KEY=value` file handed in as `_env_file` (without prefix). Nested models are addressed with `__`:
    ```
        class _LatencySettings(BaseModel):
            BASE_MS: float = 5.0
        class MySettings(SettingsBase):
            LATENCY: _LatencySettings = _LatencySettings()
    ```
    reads `LATENCY__BASE_MS`.
    """

    model_config = SettingsConfigDict(
        env_nested_delimiter="__",
        extra="forbid",
        case_sensitive=True,
        frozen=False,
        revalidate_instances="always",
    )

    @classmethod
    # pylint: disable-next=too-many-positional-arguments
    def settings_customise_sources(
        cls,
        settings_cls: type[_PydanticBaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        # config files use the bare field names, the env prefix only applies to the environment
        file_settings = DotEnvSettingsSource(settings_cls, env_file=getattr(dotenv_settings, "env_file", None), env_prefix="")
        return init_settings, env_settings, file_settings


class Settings(SettingsBase):
    """Settings of one component.

    Field names must match the config keys exactly:
    ```python
    from scherbe.core.settings import Settings

    class MySettings(Settings):
        HOST: str = "localhost"
        PORT: int = 8080


    s = MySettings()
    print(s.HOST)
    #> localhost
    ```
    """


SettingsT = TypeVar("SettingsT", bound=SettingsBase)


def load_settings(cls: type[SettingsT], path: Path | None = None, **overrides) -> SettingsT:
    """Load settings of `cls` from a flat key=value file, the environment and overrides.

    Raises:
        ConfigError: the file is missing or a value does not validate.

    """
    if path is not None and not Path(path).is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        return cls(_env_file=path, **overrides)  # type: ignore[call-arg]
    except ValidationError as err:
        raise ConfigError(f"invalid {cls.__name__}: {err}") from err


__all__ = ["Settings", "SettingsBase", "load_settings"]
