import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluidcomp.knapsack import ChunkItem, select_greedy, select_knapsack, total_energy
from oracles import best_subset_energy


def _items(*pairs):
    return [ChunkItem(f"s{i}", float(ma), float(e)) for i, (ma, e) in enumerate(pairs)]


def test_exact_beats_first_fit_example():
    items = _items((600, 30), (500, 25), (400, 22))
    chosen = select_knapsack(items, 1000)
    assert sorted(it.intensity_ma for it in chosen) == [400, 600]
    assert total_energy(chosen) == 52


def test_single_fitting_item():
    items = _items((700, 5))
    assert select_knapsack(items, 1000) == items


def test_exact_versus_greedy_example():
    items = _items((900, 50), (600, 40), (400, 35))
    assert total_energy(select_knapsack(items, 1000)) == 75
    greedy = select_greedy(items, 1000)
    assert [it.intensity_ma for it in greedy] == [900]
    assert total_energy(greedy) == 50


def test_greedy_edge_cases():
    assert select_greedy(_items((1500, 9), (1200, 3)), 1000) == []
    small = _items((100, 1), (200, 2), (300, 3))
    assert select_greedy(small, 1000) == small


def test_zero_energy_and_oversized_items_are_skipped():
    items = [ChunkItem("a", 100, 0.0), ChunkItem("b", 5000, 9.0), ChunkItem("c", 100, 1.0)]
    assert [it.service_id for it in select_knapsack(items, 1000)] == ["c"]


def test_ties_prefer_smaller_ids():
    items = [ChunkItem("b", 600, 10.0), ChunkItem("a", 600, 10.0), ChunkItem("c", 400, 0.5)]
    assert [it.service_id for it in select_knapsack(items, 1000)] == ["a", "c"]


def test_non_integral_intensity_is_rejected():
    with pytest.raises(ValueError):
        select_knapsack([ChunkItem("a", 100.5, 1.0)], 1000)
    with pytest.raises(ValueError):
        select_knapsack([], 0)
    with pytest.raises(ValueError):
        select_greedy([], -1)


item_lists = st.lists(
    st.builds(
        ChunkItem,
        service_id=st.text("abcdef", min_size=1, max_size=3),
        intensity_ma=st.integers(1, 1500).map(float),
        energy_mah=st.floats(0, 100, allow_nan=False),
    ),
    max_size=10,
    unique_by=lambda it: it.service_id,
)


@settings(max_examples=300)
@given(item_lists, st.integers(1, 3000))
def test_knapsack_matches_enumeration(items, ci):
    chosen = select_knapsack(items, ci)
    assert sum(it.intensity_ma for it in chosen) <= ci
    assert total_energy(chosen) == pytest.approx(best_subset_energy(items, ci), rel=1e-12, abs=1e-12)


@settings(max_examples=300)
@given(item_lists, st.integers(1, 3000))
def test_exact_dominates_greedy(items, ci):
    greedy = select_greedy(items, ci)
    assert sum(it.intensity_ma for it in greedy) <= ci
    assert total_energy(select_knapsack(items, ci)) >= total_energy(greedy) - 1e-9


@given(item_lists, st.integers(1, 3000), st.randoms())
def test_selection_ignores_input_order(items, ci, rnd):
    shuffled = list(items)
    rnd.shuffle(shuffled)
    assert select_knapsack(items, ci) == select_knapsack(shuffled, ci)
    assert select_greedy(items, ci) == select_greedy(shuffled, ci)
