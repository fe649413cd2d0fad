import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _build import AREA, request, service
from fluidcomp.mobility import (
    Disconnection,
    HistoryRecord,
    count_connected_runs,
    connected_segments,
    derive_provision,
    disconnection_ratio,
    estimate_availability,
    extract_disconnections,
    provision_map,
    stability_score,
)
from fluidcomp.model import (
    AvailabilityPattern,
    EnergyService,
    Location,
    ProvisionSeries,
    QoS,
)

series_values = st.lists(st.integers(0, 1), min_size=1, max_size=60)


def _ps(pr, start=0):
    return ProvisionSeries("e", "q", start, start + len(pr), pr)


# --- availability estimation ---------------------------------------------------


def test_identical_traces_give_certain_presence():
    trace = [Location(0.5, 0.5), Location(1.5, 0.5), Location(1.5, 1.5)]
    hist = [HistoryRecord("o", range(3), trace) for _ in range(10)]
    av = estimate_availability(hist, AREA, 0, 3)
    assert av.probabilities == (1.0, 1.0, 1.0)
    assert av.locations == tuple(trace)


def test_modal_cell_and_its_frequency():
    a, b = Location(2.2, 3.7), Location(8.1, 8.9)
    hist = [HistoryRecord("o", [4], [a]) for _ in range(7)]
    hist += [HistoryRecord("o", [4], [b]) for _ in range(3)]
    av = estimate_availability(hist, AREA, 4, 5)
    assert av.probabilities[0] == pytest.approx(0.7)
    assert av.locations[0] == Location(2.5, 3.5)


def test_each_tick_follows_its_own_mode():
    hist = [
        HistoryRecord("o", [0, 1], [Location(0.2, 0.2), Location(9.5, 9.5)]),
        HistoryRecord("o", [0, 1], [Location(0.7, 0.9), Location(9.1, 9.9)]),
        HistoryRecord("o", [0, 1], [Location(5.5, 5.5), Location(9.6, 9.2)]),
    ]
    av = estimate_availability(hist, AREA, 0, 2)
    assert av.locations == (Location(0.5, 0.5), Location(9.5, 9.5))
    assert av.probabilities == pytest.approx((2 / 3, 1.0))


def test_unobserved_ticks_and_bad_history():
    hist = [HistoryRecord("o", [0], [Location(1, 1)])]
    av = estimate_availability(hist, AREA, 0, 3)
    assert av.probabilities == (1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        estimate_availability([], AREA, 0, 3)
    with pytest.raises(ValueError):
        estimate_availability([HistoryRecord("o", [0], [Location(11, 1)])], AREA, 0, 1)
    with pytest.raises(ValueError):
        HistoryRecord("o", [1, 1], [Location(0, 0), Location(0, 0)])


# --- provision --------------------------------------------------------------------


def _walker(locs, probs=None):
    n = len(locs)
    probs = [1.0] * n if probs is None else probs
    return EnergyService("e", "o", QoS(0, n, 10.0, 500.0, range_m=5.0),
                         AvailabilityPattern(range(n), locs, probs))


def test_provision_follows_distance():
    locs = [Location(1, 1), Location(2, 2), Location(6, 0), Location(3, 0), Location(4, 0)]
    req = request(0, 5, loc=Location(0, 0))
    assert derive_provision(_walker(locs), req).pr == (1, 1, 0, 1, 1)


def test_pinned_and_absent_services():
    req = request(0, 4, loc=Location(3, 3))
    assert derive_provision(_walker([Location(3, 3)] * 4), req).pr == (1, 1, 1, 1)
    assert derive_provision(_walker([Location(3, 3)] * 4, [0.0] * 4), req).pr == (0, 0, 0, 0)


def test_provision_window_is_the_overlap():
    ps = derive_provision(service("e", 3, 12), request(0, 8))
    assert (ps.start_tick, ps.end_tick) == (3, 8)
    empty = derive_provision(service("e", 10, 12), request(0, 8))
    assert len(empty) == 0


def test_threshold_and_sampled_modes():
    probs = [0.1, 0.4, 0.6, 0.9]
    svc = _walker([Location(0, 0)] * 4, probs)
    req = request(0, 4, loc=Location(0, 0))
    assert derive_provision(svc, req).pr == (0, 0, 1, 1)
    assert derive_provision(svc, req, "threshold", tau=0.3).pr == (0, 1, 1, 1)
    a = derive_provision(svc, req, "sampled", seed=7)
    b = derive_provision(svc, req, "sampled", seed=7)
    assert a == b
    with pytest.raises(ValueError):
        derive_provision(svc, req, "psychic")
    with pytest.raises(ValueError):
        derive_provision(svc, req, "threshold", tau=1.5)


@settings(max_examples=50)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=40), st.integers(0, 2**31))
def test_sampled_provision_is_reproducible(probs, seed):
    svc = _walker([Location(0, 0)] * len(probs), probs)
    req = request(0, len(probs), loc=Location(0, 0))
    assert derive_provision(svc, req, "sampled", seed=seed) == derive_provision(
        svc, req, "sampled", seed=seed
    )
    m1 = provision_map([svc], req, "sampled", seed=seed)
    m2 = provision_map([svc], req, "sampled", seed=seed)
    assert m1 == m2


# --- disconnections and metrics -----------------------------------------------------


def test_disconnection_examples():
    assert extract_disconnections(_ps([1, 1, 0, 0, 1, 0, 1])) == [
        Disconnection(2, 4), Disconnection(5, 6)
    ]
    assert extract_disconnections(_ps([1] * 5)) == []
    assert extract_disconnections(_ps([0] * 6, start=3)) == [Disconnection(3, 9)]


def test_stability_examples():
    assert stability_score(_ps([1, 0, 1, 1, 0, 1, 1, 0, 1, 1])) == pytest.approx(2 / 3, abs=1e-9)
    assert stability_score(_ps([1] * 10)) == 0.0
    assert stability_score(_ps([1, 1, 0, 1])) == 0.0


def test_ratio_examples():
    assert disconnection_ratio(_ps([1, 0, 0, 1, 1, 1, 0, 1, 1, 1])) == pytest.approx(0.3)
    assert disconnection_ratio(_ps([1] * 4)) == 0.0
    assert disconnection_ratio(_ps([0] * 4)) == 1.0
    with pytest.raises(ValueError):
        disconnection_ratio(_ps([]))


@given(series_values)
def test_runs_reconstruct_the_series(pr):
    ps = _ps(pr, start=7)
    rebuilt = [None] * len(pr)
    for d in extract_disconnections(ps):
        for k in range(d.start_tick, d.end_tick):
            rebuilt[k - 7] = 0
    for a, b in connected_segments(ps):
        for k in range(a, b):
            rebuilt[k - 7] = 1
    assert rebuilt == pr
    assert count_connected_runs(pr) == len(connected_segments(ps))


@given(series_values)
def test_gap_lengths_sum_to_zero_count(pr):
    ps = _ps(pr)
    assert sum(d.length_ticks for d in extract_disconnections(ps)) == len(pr) - sum(pr)
    for d in extract_disconnections(ps):
        assert d.length_ticks >= 1
        assert ps.at(d.start_tick - 1) == 1 or d.start_tick == ps.start_tick
        assert ps.at(d.end_tick) == 1 or d.end_tick == ps.end_tick


@given(series_values)
def test_ratio_is_one_minus_mean(pr):
    assert abs(disconnection_ratio(_ps(pr)) - (1 - sum(pr) / len(pr))) <= 1e-12


@given(series_values)
def test_stability_zero_iff_at_most_one_gap_tick(pr):
    z = len(pr) - sum(pr)
    assert (stability_score(_ps(pr)) == 0.0) == (z <= 1)


@given(series_values, st.data())
def test_stability_grows_with_gap_ticks(pr, data):
    ones = [i for i, v in enumerate(pr) if v]
    z = len(pr) - sum(pr)
    if not ones or z < 1:
        return
    i = data.draw(st.sampled_from(ones))
    more = list(pr)
    more[i] = 0
    assert stability_score(_ps(more)) > stability_score(_ps(pr))
