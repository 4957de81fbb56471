"""
Run configuration.

Values come from three layers: the defaults below, an optional YAML file
(with ``${VAR}`` environment interpolation) and command-line overrides, each
overriding the previous one. Secrets are never stored in the file; the API key
is read from the environment variable named by `api_key_env`.

"""
import re
from dataclasses import (
    asdict,
    dataclass,
    fields,
    replace,
)
from os import environ
from typing import Optional

import yaml

from zk_coder.constants import (
    CIRCOM,
    DEFAULT_COMPILE_TIMEOUT,
    DEFAULT_GENERATED_CASES,
    DEFAULT_LLM_RETRIES,
    DEFAULT_RUN_TIMEOUT,
    DEFAULT_SAMPLES,
    DEFAULT_SEMANTIC_REPAIRS,
    DEFAULT_SKETCH_ATTEMPTS,
    DEFAULT_SYNTAX_REPAIRS,
    PROMPT_TEMPLATE_VERSION,
    VARIANT_BASELINE,
    VARIANT_FULL,
    VARIANT_NO_SEMANTIC_REPAIR,
    VARIANT_NO_SKETCH,
    VARIANT_NO_SYNTAX_REPAIR,
    VARIANT_ONLY_REPAIR,
)
from zk_coder.errors import ConfigError
from zk_coder.llm import DEFAULT_API_KEY_ENV


_INTERPOLATION = re.compile(r"\$\{(?P<name>[A-Za-z_][A-Za-z0-9_]*)(?::-(?P<default>[^}]*))?\}")


@dataclass(frozen=True)
class RunConfig:
    """
    Settings of pipeline runs and benchmark sweeps.

    The budgets count LLM rounds: `sketch_attempts` sketches in total,
    `syntax_repairs` repair rounds after the first compile attempt and
    `semantic_repairs` repair rounds after the first suite run.

    """
    target: str = CIRCOM
    variant: str = VARIANT_FULL
    backend: str = "http"
    model: Optional[str] = None
    api_endpoint: Optional[str] = None
    api_key_env: str = DEFAULT_API_KEY_ENV
    script_path: Optional[str] = None
    temperature: Optional[float] = None
    max_tokens: int = 4096
    llm_retries: int = DEFAULT_LLM_RETRIES
    llm_timeout: float = 180.
    sketch_attempts: int = DEFAULT_SKETCH_ATTEMPTS
    syntax_repairs: int = DEFAULT_SYNTAX_REPAIRS
    semantic_repairs: int = DEFAULT_SEMANTIC_REPAIRS
    samples: int = DEFAULT_SAMPLES
    compile_timeout: float = DEFAULT_COMPILE_TIMEOUT
    run_timeout: float = DEFAULT_RUN_TIMEOUT
    circom_bin: str = "circom"
    node_bin: str = "node"
    nargo_bin: str = "nargo"
    circomlib_path: str = "node_modules"
    max_processes: Optional[int] = None
    max_workers: int = 4
    kb_path: Optional[str] = None
    workspace_root: Optional[str] = None
    transcript_dir: str = "transcripts"
    keep_workspaces: bool = False
    generate_tests: bool = False
    generated_cases: int = DEFAULT_GENERATED_CASES
    prompt_version: str = PROMPT_TEMPLATE_VERSION

    @property
    def uses_sketch(self):
        return self.variant not in (VARIANT_NO_SKETCH, VARIANT_ONLY_REPAIR, VARIANT_BASELINE)

    @property
    def uses_retrieval(self):
        return self.variant in (VARIANT_FULL, VARIANT_NO_SYNTAX_REPAIR, VARIANT_NO_SEMANTIC_REPAIR)

    @property
    def uses_catalog_hints(self):
        return self.variant == VARIANT_NO_SKETCH

    @property
    def syntax_budget(self):
        if self.variant in (VARIANT_NO_SYNTAX_REPAIR, VARIANT_BASELINE):
            return 0
        return self.syntax_repairs

    @property
    def max_compile_attempts(self):
        """The first compile attempt plus `syntax_repairs`, across the compile loop and semantic repair."""
        return 1 + self.syntax_repairs

    @property
    def semantic_budget(self):
        if self.variant in (VARIANT_NO_SEMANTIC_REPAIR, VARIANT_BASELINE):
            return 0
        return self.semantic_repairs

    def with_overrides(self, **overrides):
        """Copy with the given fields replaced; None values leave a field unchanged."""
        known = {item.name for item in fields(self)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise ConfigError("unknown configuration key(s): {}".format(", ".join(unknown)))
        return replace(self, **{key: value for key, value in overrides.items() if value is not None})

    def serialize(self):
        return asdict(self)


def interpolate(value, env=None):
    """Replace ``${VAR}`` and ``${VAR:-default}`` in strings, recursively."""
    env = environ if env is None else env
    if isinstance(value, str):
        def substitute(match):
            name, default = match.group("name"), match.group("default")
            if name in env:
                return env[name]
            if default is not None:
                return default
            raise ConfigError("environment variable {} is not set".format(name))
        return _INTERPOLATION.sub(substitute, value)
    if isinstance(value, list):
        return [interpolate(item, env) for item in value]
    if isinstance(value, dict):
        return {key: interpolate(item, env) for key, item in value.items()}
    return value


def load_config(path=None, env=None, **overrides):
    """
    Build a RunConfig from defaults, an optional YAML file and overrides.

    Raises
    ------
    ConfigError
        If the file cannot be read, is not a mapping, names unknown keys or
        references an unset environment variable without a default.

    """
    cfg = RunConfig()
    if path:
        try:
            with open(path) as stream:
                document = yaml.safe_load(stream) or {}
        except (OSError, yaml.YAMLError) as error:
            raise ConfigError("cannot read configuration {}: {}".format(path, error))
        if not isinstance(document, dict):
            raise ConfigError("{}: configuration must be a mapping".format(path))
        if "api_key" in document:
            raise ConfigError("{}: put the API key in the environment and name it with 'api_key_env'".format(path))
        cfg = cfg.with_overrides(**interpolate(document, env))
    return cfg.with_overrides(**overrides)
