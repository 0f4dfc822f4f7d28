import numpy as np
import pytest
from hypothesis import given, strategies as st

from blockbench.core import (
    Blocking,
    DesignSpec,
    Method,
    OutcomeModel,
    Sample,
    Unit,
    parity,
    validate_blocking,
)


def test_sample_from_array_defaults():
    s = Sample.from_array([3.0, 1.0, 2.0])
    assert s.n == 3 and s.dim == 1
    assert s.ids == ["1", "2", "3"]
    assert s.covariates.shape == (3, 1)


@pytest.mark.parametrize(
    "units",
    [
        (),
        (Unit("a", (1.0,)), Unit("b", (1.0, 2.0))),
        (Unit("a", (1.0,)), Unit("a", (2.0,))),
        (Unit("a", (float("nan"),)),),
    ],
)
def test_sample_rejects_bad_units(units):
    with pytest.raises(ValueError):
        Sample(units)


def test_blocking_is_canonical():
    a = Blocking([[4, 3], [2, 0, 1]])
    b = Blocking([(0, 1, 2), (3, 4)])
    assert a == b
    assert a.blocks == ((0, 1, 2), (3, 4))
    assert str(a) == "{{1,2,3}, {4,5}}"
    assert a.one_based() == [[1, 2, 3], [4, 5]]
    assert a.mean_block_size == 2.5


def test_validate_reports_each_condition():
    assert validate_blocking(4, Blocking([[0, 1], [2, 3]]), DesignSpec.fixed(2)).valid

    r = validate_blocking(4, Blocking([[0, 1], [1, 2]]))
    assert not r.disjoint and r.duplicated == (1,) and r.uncovered == (3,)
    assert any("uncovered units {4}" in m for m in r.messages())

    r = validate_blocking(3, Blocking([[0, 1, 2, 5]]))
    assert r.out_of_range == (5,) and not r.covers

    r = validate_blocking(2, Blocking([[], [0, 1]]))
    assert not r.nonempty and r.empty_blocks == 1

    r = validate_blocking(5, Blocking([[0, 1, 2], [3, 4]]), DesignSpec.fixed(2))
    assert r.size_ok is False and r.bad_sizes == (3,)
    assert validate_blocking(5, Blocking([[0, 1, 2], [3, 4]]), DesignSpec.threshold(2)).valid


def test_design_spec_admits_sizes():
    assert DesignSpec.fixed(2).admits_size(2) and not DesignSpec.fixed(2).admits_size(3)
    assert DesignSpec.threshold(2).admits_size(5) and not DesignSpec.threshold(2).admits_size(1)
    assert DesignSpec.complete().admits_size(6, 6)
    assert DesignSpec("fixed", 3).method is Method.FIXED
    with pytest.raises(ValueError):
        DesignSpec.threshold(0)


def test_parity():
    assert [parity(k) for k in range(1, 6)] == [1, 0, 1, 0, 1]


@given(st.lists(st.integers(0, 7), min_size=1, max_size=8))
def test_canonical_form_ignores_block_and_member_order(labels):
    groups: dict = {}
    for i, g in enumerate(labels):
        groups.setdefault(g, []).append(i)
    blocks = list(groups.values())
    shuffled = [list(reversed(b)) for b in reversed(blocks)]
    assert Blocking(blocks) == Blocking(shuffled)
    assert validate_blocking(len(labels), Blocking(blocks)).valid


def test_outcome_model_constant_effect_and_draw():
    model = OutcomeModel(mu0=lambda x: x[:, 0], conditional_sd=lambda x: np.ones(len(x)), constant_effect=1.5)
    x = np.array([0.0, 1.0, 2.0])
    po = model.draw(x, np.random.default_rng(0))
    np.testing.assert_allclose(po.y1 - po.y0, 1.5)
    np.testing.assert_allclose(model.mean1(x), x + 1.5)
    with pytest.raises(ValueError):
        OutcomeModel(mu0=lambda x: x[:, 0], conditional_sd=lambda x: 1.0)
