import math

import numpy as np
import pytest

from fmasim.config import (
    ScenarioConfig,
    build_scenario,
    builtin_scenario_names,
    load_scenario,
    parse_config,
    replace_values,
    serialize_config,
)
from fmasim.errors import ConfigError
from fmasim.simulation import FmaScenario, ForceControlScenario

MINIMAL_FMA = """
[plant]
kind = fma
actuator = fma-paper

[reference]
profile = trapezoid
duration = 10 s
"""

MINIMAL_FORCE = """
[plant]
kind = chain
chain = powercube6
surface = compliant-scale

[controller]
law = force-pid
kp = 0.1 mm/lbf

[reference]
profile = constant-force
duration = 20 s
"""


def test_minimal_fma_parses_with_defaults():
    cfg = parse_config(MINIMAL_FMA)
    assert cfg.kind == "fma"
    # absent controller model falls back to the actuator itself
    assert cfg.plant["controller_model"] == "fma-paper"
    assert cfg.controller["kp"] == 100.0
    assert cfg.run["timestep"] == 1.0e-3
    # trapezoid peak speed defaults to one sweep over the duration
    assert cfg.reference["omega_peak"] == pytest.approx(2.0 * math.pi / 10.0)


def test_minimal_force_parses_with_defaults():
    cfg = parse_config(MINIMAL_FORCE)
    assert cfg.kind == "force"
    assert cfg.controller["control_rate"] == 15.0
    assert cfg.reference["force"] == pytest.approx(5.0 * 4.4482216)
    assert cfg.disturbance["kind"] == "none"


def test_unknown_section_is_named():
    with pytest.raises(ConfigError, match="telemetry"):
        parse_config(MINIMAL_FMA + "\n[telemetry]\nrate = 1\n")


def test_unknown_key_is_named():
    with pytest.raises(ConfigError, match="warp_factor"):
        parse_config(MINIMAL_FMA + "\nwarp_factor = 9\n")


def test_missing_required_key_is_named():
    with pytest.raises(ConfigError, match="duration"):
        parse_config("[plant]\nkind = fma\nactuator = fma-paper\n\n[reference]\nprofile = trapezoid\n")


def test_choice_validation():
    bad = MINIMAL_FMA.replace("profile = trapezoid", "profile = spline")
    with pytest.raises(ConfigError, match="spline"):
        parse_config(bad)


def test_band_unit_degrees_converted():
    text = MINIMAL_FMA + "\n[disturbance]\nkind = burr\nbands = 30:60:5\nband_unit = deg\n"
    cfg = parse_config(text)
    lo, hi, gain = cfg.disturbance["bands"][0]
    assert lo == pytest.approx(math.pi / 6.0)
    assert hi == pytest.approx(math.pi / 3.0)
    assert gain == 5.0
    assert cfg.disturbance["band_unit"] == "rad"


def test_band_order_validated():
    text = MINIMAL_FMA + "\n[disturbance]\nkind = burr\nbands = 2:1:5\nband_unit = rad\n"
    with pytest.raises(ConfigError):
        parse_config(text)


def test_round_trip_identity_for_builtins():
    for name in builtin_scenario_names():
        cfg = load_scenario(name)
        again = parse_config(serialize_config(cfg))
        assert again == cfg, name


def test_serialized_text_is_explicit():
    text = serialize_config(parse_config(MINIMAL_FMA))
    # every key materialized, units attached
    assert "timestep = 0.001 s" in text
    assert "kp = 100" in text
    assert "[run]" in text


def test_replace_values_revalidates():
    cfg = parse_config(MINIMAL_FMA)
    bumped = replace_values(cfg, "run", seed=7)
    assert bumped.run["seed"] == 7
    assert cfg.run["seed"] == 0
    with pytest.raises(ConfigError):
        replace_values(cfg, "run", warp=1)
    with pytest.raises(ConfigError):
        replace_values(cfg, "reference", duration=-1.0)


def test_build_fma_scenario():
    scenario = build_scenario(load_scenario("fma-paper-deburr"))
    assert isinstance(scenario, FmaScenario)
    assert scenario.kp == 900.0
    assert scenario.kv == 60.0
    assert scenario.seed == 20040815
    assert scenario.disturbance is not None
    assert scenario.disturbance.bands[1][2] == 25.0


def test_build_force_scenario():
    scenario = build_scenario(load_scenario("force-regulation"))
    assert isinstance(scenario, ForceControlScenario)
    assert scenario.control_rate == 15.0
    assert scenario.force_target == pytest.approx(5.0 * 4.4482216)
    assert np.count_nonzero(scenario.gains.kp) == 1


def test_build_unknown_fixture_is_config_error():
    bad = MINIMAL_FMA.replace("actuator = fma-paper", "actuator = not-a-thing")
    with pytest.raises(ConfigError, match="not-a-thing"):
        build_scenario(parse_config(bad))


def test_load_scenario_from_path(tmp_path):
    path = tmp_path / "local.ini"
    path.write_text(MINIMAL_FORCE)
    cfg = load_scenario(str(path))
    assert cfg.kind == "force"
    with pytest.raises(ConfigError, match="no such scenario file"):
        load_scenario(str(tmp_path / "missing.ini"))


def test_load_scenario_unknown_name_lists_builtins():
    with pytest.raises(ConfigError, match="fma-paper-deburr"):
        load_scenario("bogus-name")


def test_fixture_dir_override_precedence(tmp_path, monkeypatch):
    override = tmp_path / "fixtures"
    override.mkdir()
    (override / "force-regulation.ini").write_text(
        MINIMAL_FORCE.replace("duration = 20 s", "duration = 99 s")
    )
    monkeypatch.setenv("FMA_SIM_FIXTURES", str(override))
    cfg = load_scenario("force-regulation")
    assert cfg.reference["duration"] == 99.0
    # names not present in the override still come from the package
    packaged = load_scenario("fma-paper-deburr")
    assert packaged.kind == "fma"
    assert "force-regulation" in builtin_scenario_names()


def test_builtin_names_include_all_packaged():
    names = builtin_scenario_names()
    for expected in (
        "fma-paper-deburr",
        "force-regulation",
        "compliant-kp03",
        "compliant-kp01",
        "force-sine-tracking",
    ):
        assert expected in names


def test_kind_property_drives_schema():
    cfg = parse_config(MINIMAL_FORCE)
    assert isinstance(cfg, ScenarioConfig)
    # fma-only key under the force schema
    bad = MINIMAL_FORCE.replace("chain = powercube6", "chain = powercube6\nweighting = fma-paper")
    with pytest.raises(ConfigError, match="weighting"):
        parse_config(bad)
