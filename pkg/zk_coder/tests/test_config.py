"""
Unit-tests for run configuration loading.

"""
from tempfile import NamedTemporaryFile

from hamcrest import (
    assert_that,
    calling,
    equal_to,
    has_entries,
    has_properties,
    is_,
    raises,
)
from parameterized import parameterized

from zk_coder.config import RunConfig, interpolate, load_config
from zk_coder.errors import ConfigError


def write_config(tmp_path, text):
    path = tmp_path / "config.yaml"
    path.write_text(text)
    return str(path)


def test_defaults():
    """Test the default configuration targets Circom with the full pipeline."""
    assert_that(load_config(), has_properties(
        target="circom",
        variant="full",
        syntax_repairs=8,
        semantic_repairs=1,
        samples=10,
    ))


def test_layers_override_in_order(tmp_path):
    """Test file values override defaults and keyword overrides override the file."""
    path = write_config(tmp_path, "target: noir\nsamples: 3\nmodel: local\n")

    cfg = load_config(path, samples=5, model=None)

    assert_that(cfg, has_properties(target="noir", samples=5, model="local"))


def test_environment_interpolation(tmp_path):
    """Test ${VAR} and ${VAR:-default} are resolved against the environment."""
    path = write_config(tmp_path, "api_endpoint: ${ENDPOINT}/v1\nmodel: ${MODEL:-fallback}\n")

    cfg = load_config(path, env={"ENDPOINT": "http://gpu-box:8000"})

    assert_that(cfg, has_properties(api_endpoint="http://gpu-box:8000/v1", model="fallback"))


def test_interpolate_nested_values():
    """Test interpolation walks lists and mappings and leaves other values alone."""
    value = {"a": ["${X}", 3], "b": {"c": "${Y:-}"}}

    assert_that(interpolate(value, {"X": "x"}), is_(equal_to({"a": ["x", 3], "b": {"c": ""}})))


def test_interpolate_unset_variable():
    """Test an unset variable without default raises ConfigError."""
    assert_that(calling(interpolate).with_args("${MISSING}", {}), raises(ConfigError, "MISSING is not set"))


@parameterized.expand([
    ("api_key", "api_key: sk-123\n", "environment"),
    ("unknown", "temprature: 0.2\n", "unknown configuration key"),
    ("list", "- target\n", "must be a mapping"),
    ("yaml", "target: [noir\n", "cannot read configuration"),
])
def test_load_config_errors(name, text, message):
    """Test bad configuration files raise ConfigError."""
    with NamedTemporaryFile("w", suffix=".yaml") as stream:
        stream.write(text)
        stream.flush()
        assert_that(calling(load_config).with_args(stream.name), raises(ConfigError, message))


def test_with_overrides_rejects_unknown_keys():
    """Test overriding a field that does not exist raises ConfigError."""
    assert_that(calling(RunConfig().with_overrides).with_args(colour="red"), raises(ConfigError, "colour"))


@parameterized.expand([
    ("full", True, True, False, 8, 1),
    ("no-rag", True, False, False, 8, 1),
    ("no-sketch", False, False, True, 8, 1),
    ("no-syntax-repair", True, True, False, 0, 1),
    ("no-semantic-repair", True, True, False, 8, 0),
    ("only-repair", False, False, False, 8, 1),
    ("baseline", False, False, False, 0, 0),
])
def test_variant_switches(variant, sketch, retrieval, catalog, syntax_budget, semantic_budget):
    """Test each ablation variant switches pipeline components on and off."""
    assert_that(RunConfig(variant=variant), has_properties(
        uses_sketch=sketch,
        uses_retrieval=retrieval,
        uses_catalog_hints=catalog,
        syntax_budget=syntax_budget,
        semantic_budget=semantic_budget,
    ))


def test_serialize():
    """Test serialization lists every field."""
    assert_that(RunConfig(samples=2).serialize(), has_entries(samples=2, target="circom", backend="http"))
