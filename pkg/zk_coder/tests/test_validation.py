"""Test validation logic."""
from hamcrest import (
    assert_that,
    calling,
    is_,
    raises,
)
from parameterized import parameterized

from zk_coder.errors import ConfigError
from zk_coder.tests.fixtures import make_config
from zk_coder.validation import validate_config


def test_parameter_validation():
    """Test parameter validation checks for consistent assignment."""
    test_cases = [
        dict(target="halo2"),
        dict(variant="some_invalid_variant"),
        dict(backend="carrier_pigeon"),
        dict(backend="http", model="m", api_endpoint="http://localhost"),
        dict(llm_retries=0),
        dict(sketch_attempts=0),
        dict(samples=-1),
        dict(max_workers=True),
        dict(syntax_repairs=-1),
        dict(generated_cases=1.5),
        dict(semantic_repairs=2),
        dict(compile_timeout=0),
        dict(run_timeout="soon"),
        dict(temperature=2.5),
        dict(max_processes=0),
    ]

    for overrides in test_cases:
        cfg = make_config(**overrides)
        assert_that(calling(validate_config).with_args(cfg), raises(TypeError))


def test_scripted_backend_rejects_script_less_config():
    """Test the scripted backend needs a script."""
    assert_that(
        calling(validate_config).with_args(make_config().with_overrides(script_path="")),
        raises(ConfigError, "'script_path' must be set"),
    )


@parameterized.expand([
    ("semantic_repairs", dict(semantic_repairs=3), "'semantic_repairs' must be set to 0 or 1."),
    ("target", dict(target="halo2"), "'target' must be set to one of: circom, noir."),
    ("timeout", dict(llm_timeout=-1.), "'llm_timeout' must be set to a positive number of seconds."),
])
def test_validation_messages(name, overrides, message):
    """Test validation errors name the offending parameter."""
    assert_that(calling(validate_config).with_args(make_config(**overrides)), raises(ConfigError, message))


def test_defaults_are_valid():
    """Test the scripted default configuration passes validation."""
    assert_that(validate_config(make_config()), is_(None))
