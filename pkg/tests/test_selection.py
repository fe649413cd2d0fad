import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _build import request, service
from fluidcomp.mobility import provision_map
from fluidcomp.model import Location
from fluidcomp.selection import Chunk, chunk_timeline, filter_composable, partition_violations


def test_overlapping_in_range_service_is_kept():
    assert [s.eid for s in filter_composable([service("a", 5, 15)], request(0, 10))] == ["a"]


def test_non_overlapping_service_is_dropped():
    assert filter_composable([service("a", 12, 20)], request(0, 10)) == []


def test_far_service_is_dropped():
    far = service("a", 0, 10, loc=Location(9.0, 0.0))
    assert filter_composable([far], request(0, 10, loc=Location(0.0, 0.0))) == []


def test_advertised_chunks_example():
    chunks = chunk_timeline([service("A", 1, 5), service("B", 3, 9)], request(0, 10))
    assert chunks == [
        Chunk(0, 1, ()),
        Chunk(1, 3, ("A",)),
        Chunk(3, 5, ("A", "B")),
        Chunk(5, 9, ("B",)),
        Chunk(9, 10, ()),
    ]


def test_single_full_service_is_one_chunk():
    assert chunk_timeline([service("A", 0, 10)], request(0, 10)) == [Chunk(0, 10, ("A",))]


def test_fine_mode_cuts_at_gaps():
    a = service("A", 0, 5, [1, 1, 0, 1, 1])
    chunks = chunk_timeline([a], request(0, 5), "fine")
    assert chunks == [Chunk(0, 2, ("A",)), Chunk(2, 3, ()), Chunk(3, 5, ("A",))]
    with pytest.raises(ValueError):
        chunk_timeline([a], request(0, 5), "weekly")


def test_partition_checker_flags_holes():
    req = request(0, 10)
    assert partition_violations([Chunk(0, 4, ()), Chunk(5, 10, ())], req)
    assert partition_violations([], req) == ["no chunks"]
    assert partition_violations([Chunk(0, 10, ())], req) == []


@st.composite
def worlds(draw):
    t = draw(st.integers(0, 10))
    du = draw(st.integers(1, 25))
    services = []
    for i in range(draw(st.integers(0, 6))):
        a = draw(st.integers(0, 40))
        b = draw(st.integers(a + 1, a + 20))
        pr = draw(st.lists(st.integers(0, 1), min_size=b - a, max_size=b - a))
        services.append(service(f"s{i}", a, b, pr))
    return services, request(t, du)


@settings(max_examples=300)
@given(worlds())
def test_chunks_partition_the_request(world):
    services, req = world
    series = provision_map(services, req)
    adv = chunk_timeline(services, req, "advertised")
    fine = chunk_timeline(services, req, "fine", series)
    assert partition_violations(adv, req) == []
    assert partition_violations(fine, req) == []
    assert len(adv) <= 2 * len(services) + 1
    assert len(fine) >= len(adv)
    for c in fine:
        for eid in c.candidates:
            assert all(series[eid].at(k) for k in range(c.start_tick, c.end_tick))
