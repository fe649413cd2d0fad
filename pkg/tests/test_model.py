import dataclasses
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _build import request, scenario, service
from fluidcomp.model import (
    Location,
    ProvisionSeries,
    distance,
    dumps_scenario,
    load_scenario,
    loads_scenario,
    save_scenario,
    series_from_dict,
    series_to_dict,
    validate_scenario,
)
from fluidcomp.workload import GeneratorConfig, generate_scenario


def test_well_formed_two_service_scenario_has_no_violations():
    s = scenario([service("e1", 0, 5), service("e2", 3, 9)], [request(0, 10)])
    assert validate_scenario(s) == []


def test_degenerate_service_interval_is_reported():
    s = scenario([service("e1", 5, 5)], [request(0, 10)])
    assert validate_scenario(s) == ["service e1: start_tick < end_tick violated"]


def test_out_of_range_probability_names_its_tick():
    svc = service("e1", 0, 4)
    av = dataclasses.replace(svc.availability, probabilities=(1.0, 1.0, 1.3, 1.0))
    s = scenario([dataclasses.replace(svc, availability=av)], [request(0, 10)])
    problems = validate_scenario(s)
    assert len(problems) == 1
    assert "tick 2" in problems[0]


def test_request_and_duplicate_id_violations():
    bad_req = dataclasses.replace(request(0, 10), re_mah=0.0, du_ticks=0)
    s = scenario([service("e1", 0, 4), service("e1", 4, 8)], [bad_req])
    problems = validate_scenario(s)
    assert "service e1: unique eid violated" in problems
    assert "request q: re_mah > 0 violated" in problems
    assert "request q: du_ticks >= 1 violated" in problems


def test_validate_is_pure():
    s = scenario([service("e1", 5, 5)], [request(0, 10)])
    assert validate_scenario(s) == validate_scenario(s)


@pytest.mark.parametrize(
    "a, b, expected",
    [((0, 0), (3, 4), 5.0), ((1, 1), (1, 1), 0.0), ((0, 0), (1, 1), math.sqrt(2))],
)
def test_distance_examples(a, b, expected):
    assert distance(Location(*a), Location(*b)) == pytest.approx(expected, abs=1e-9)


coord = st.floats(-1e3, 1e3, allow_nan=False)
point = st.builds(Location, coord, coord)


@settings(max_examples=1000)
@given(point, point, point)
def test_distance_triangle_inequality(a, b, c):
    assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9


def test_series_rejects_bad_length_and_values():
    with pytest.raises(ValueError):
        ProvisionSeries("e", "q", 0, 3, (1, 1))
    with pytest.raises(ValueError):
        ProvisionSeries("e", "q", 0, 2, (1, 2))
    ps = ProvisionSeries("e", "q", 4, 7, (1, 0, 1))
    assert ps.at(5) == 0 and ps.at(6) == 1 and ps.at(7) == 0


def test_series_json_round_trip():
    ps = ProvisionSeries("e", "q", 4, 7, (1, 0, 1))
    assert series_from_dict(series_to_dict(ps)) == ps


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 3.0))
def test_scenario_json_round_trip(seed, freq):
    cfg = GeneratorConfig(n_services=8, n_requests=4, horizon_ticks=60, seed=seed,
                          disconnection_freq=freq, switch_cost_mah=1.5)
    s = generate_scenario(cfg)
    assert loads_scenario(dumps_scenario(s)) == s


def test_scenario_file_round_trip(tmp_path):
    s = scenario([service("e1", 0, 5, [1, 0, 1, 1, 0])], [request(0, 10)], switch_cost=2.0)
    path = tmp_path / "s.json"
    save_scenario(s, path)
    assert load_scenario(path) == s


def test_scenario_document_missing_keys():
    with pytest.raises(ValueError, match="missing keys"):
        loads_scenario('{"area": {"width_m": 1, "height_m": 1}}')
