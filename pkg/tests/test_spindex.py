import numpy as np
import pytest

from netqa.spindex import GridIndex


def _boxes_intersect(a, b):
    return not (a[2] < b[0] or b[2] < a[0] or a[3] < b[1] or b[3] < a[1])


def test_rejects_bad_cell_size():
    with pytest.raises(ValueError):
        GridIndex(0.0)


def test_query_is_superset_of_true_hits():
    rng = np.random.default_rng(7)
    boxes = []
    index = GridIndex(cell_size=5.0)
    for i in range(300):
        x, y = rng.uniform(0, 100, size=2)
        w, h = rng.uniform(0, 10, size=2)
        box = (x, y, x + w, y + h)
        boxes.append(box)
        index.insert(i, box)
    for _ in range(50):
        x, y = rng.uniform(-10, 110, size=2)
        w, h = rng.uniform(0, 20, size=2)
        probe = (x, y, x + w, y + h)
        hits = set(index.query(probe))
        true_hits = {i for i, b in enumerate(boxes) if _boxes_intersect(probe, b)}
        assert true_hits <= hits


def test_query_sorted_and_deduped():
    index = GridIndex(cell_size=1.0)
    index.insert("b", (0, 0, 3, 3))
    index.insert("a", (1, 1, 2, 2))
    result = index.query((0, 0, 3, 3))
    assert result == ["a", "b"]


def test_query_point():
    index = GridIndex(cell_size=2.0)
    index.insert(1, (10, 10, 11, 11))
    assert index.query_point(9.5, 9.5, 1.0) == [1]
    assert index.query_point(50, 50, 1.0) == []
