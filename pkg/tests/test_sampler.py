import numpy as np
import pytest

from stochastic_rir import ParamRanges, RirParams, sample, sample_batch
from stochastic_rir import seeding
from stochastic_rir.errors import InvalidParams, UnsatisfiableRanges


def test_point_ranges_give_exact_values():
    r = ParamRanges(rt60=(0.4, 0.4), edt=(0.06, 0.06), itdg=(0.005, 0.005), drr=(-2, -2),
                    deviation_db=(3, 3), base_seed=11)
    p = sample(r, 5)
    assert (p.rt60, p.edt, p.itdg, p.drr_target, p.deviation_db) == (0.4, 0.06, 0.005, -2.0, 3.0)
    assert p.seed == seeding.derive_seed(11, 5)


def test_defaults_are_the_training_ranges():
    r = ParamRanges()
    assert r.rt60 == (0.2, 0.7) and r.edt == (0.05, 0.1)
    assert r.itdg == (0.003, 0.01) and r.drr == (-7.0, 0.0)


def test_default_draws_stay_in_bounds():
    r = ParamRanges()
    for i in range(10_000):
        p = sample(r, i)
        assert 0.2 <= p.rt60 <= 0.7
        assert 0.05 <= p.edt <= 0.1
        assert 0.003 <= p.itdg <= 0.01
        assert -7.0 <= p.drr_target <= 0.0
        p.validate()


def test_contradictory_ranges():
    r = ParamRanges(edt=(0.8, 0.9))
    with pytest.raises(UnsatisfiableRanges):
        sample(r, 0)
    with pytest.raises(UnsatisfiableRanges):
        sample_batch(r, 3)


def test_rejection_keeps_only_valid_draws():
    # About half of the joint draws have edt >= rt60.
    r = ParamRanges(rt60=(0.2, 0.4), edt=(0.2, 0.4))
    for i in range(200):
        p = sample(r, i)
        assert p.edt < p.rt60


@pytest.mark.parametrize("kw", [dict(rt60=(0.5, 0.2)), dict(rt60=(0.0, 0.5)),
                                dict(sample_rate=0), dict(base_seed=-1)])
def test_invalid_ranges(kw):
    with pytest.raises(InvalidParams):
        ParamRanges(**kw)


def test_empty_and_repeatable_batches():
    assert len(sample_batch(ParamRanges(), 0)) == 0
    a = sample_batch(ParamRanges(base_seed=3), 20)
    b = sample_batch(ParamRanges(base_seed=3), 20)
    assert a.items == b.items


def test_index_stability():
    small = sample_batch(ParamRanges(base_seed=9), 5).items
    large = sample_batch(ParamRanges(base_seed=9), 50).items
    assert large[:5] == small
    assert sample(ParamRanges(base_seed=9), 3) == small[3][1]


def test_means_near_midpoints():
    r = ParamRanges()
    items = [p for _, p in sample_batch(r, 1000).items]
    for name, attr in [("rt60", "rt60"), ("edt", "edt"), ("itdg", "itdg"), ("drr", "drr_target")]:
        lo, hi = getattr(r, name)
        mean = np.mean([getattr(p, attr) for p in items])
        mid = (lo + hi) / 2
        assert abs(mean - mid) <= 0.05 * abs(mid)


def test_ranges_dict_round_trip():
    r = ParamRanges(rt60=[0.3, 0.5], base_seed=2**64 - 1)
    assert ParamRanges.from_dict(r.to_dict()) == r
    with pytest.raises(InvalidParams):
        ParamRanges.from_dict({"bogus": 1})
