"""Validation helpers."""
from zk_coder.constants import VALID_BACKEND, VALID_TARGET, VALID_VARIANT
from zk_coder.errors import ConfigError


class ParameterValidator(object):
    """Parameter validation logic for the RunConfig class."""
    def __init__(self, instance):
        self.instance = instance

    def __getattr__(self, name):
        return getattr(self.instance, name)

    def __call__(self):
        return self._validate()

    def _validate(self):
        if self.target not in VALID_TARGET:
            raise ConfigError(
                "'target' must be set to one of: {}.".format(
                    ", ".join(VALID_TARGET),
                )
            )

        if self.variant not in VALID_VARIANT:
            raise ConfigError(
                "'variant' must be set to one of: {}.".format(
                    ", ".join(VALID_VARIANT),
                )
            )

        if self.backend not in VALID_BACKEND:
            raise ConfigError(
                "'backend' must be set to one of: {}.".format(
                    ", ".join(VALID_BACKEND),
                )
            )

        if (self.backend == "scripted") ^ bool(self.script_path):
            raise ConfigError(
                """When 'backend' is set to "scripted", 'script_path' must be set
                to a script file. Conversely, script_path should not be specified
                when backend is not set to "scripted"."""
            )

        if self.backend == "http" and not (self.api_endpoint and self.model):
            raise ConfigError(
                """When 'backend' is set to "http", both 'api_endpoint' and 'model' must be set."""
            )

        for name in ("sketch_attempts", "samples", "max_workers", "llm_retries", "max_tokens"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError("'{}' must be set to a positive integer.".format(name))

        for name in ("syntax_repairs", "generated_cases"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ConfigError("'{}' must be set to a non-negative integer.".format(name))

        if self.semantic_repairs not in (0, 1) or isinstance(self.semantic_repairs, bool):
            raise ConfigError("'semantic_repairs' must be set to 0 or 1.")

        for name in ("compile_timeout", "run_timeout", "llm_timeout"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
                raise ConfigError("'{}' must be set to a positive number of seconds.".format(name))

        if self.temperature is not None and not (
            isinstance(self.temperature, (int, float)) and 0 <= self.temperature <= 2
        ):
            raise ConfigError("'temperature' must be set to a number between 0 and 2.")

        if self.max_processes is not None and (not isinstance(self.max_processes, int) or self.max_processes < 1):
            raise ConfigError("'max_processes' must be set to a positive integer.")


def validate_config(instance):
    return ParameterValidator(instance)()
