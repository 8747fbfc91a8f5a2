"""Reproducible draws of ``RirParams`` from parameter ranges."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from . import seeding
from .core import RirParams
from .errors import InvalidParams, UnsatisfiableRanges

MAX_ATTEMPTS = 100
RANGE_FIELDS = ("rt60", "edt", "itdg", "drr", "deviation_db")


def _pair(value) -> tuple[float, float]:
    lo, hi = value
    return float(lo), float(hi)


@dataclass(frozen=True)
class ParamRanges:
    """Inclusive ``(min, max)`` bounds per parameter.

    Defaults reproduce the training distribution used for speech
    enhancement augmentation: RT60 0.2-0.7 s, EDT 50-100 ms, ITDG 3-10 ms
    and DRR -7-0 dB.
    """

    rt60: tuple = (0.2, 0.7)
    edt: tuple = (0.05, 0.1)
    itdg: tuple = (0.003, 0.01)
    drr: tuple = (-7.0, 0.0)
    deviation_db: tuple = (6.0, 6.0)
    sample_rate: float = 16000
    base_seed: int = 0
    early_deletion_prob: float = 0.75

    def __post_init__(self):
        for name in RANGE_FIELDS:
            object.__setattr__(self, name, _pair(getattr(self, name)))
        self.validate()

    def validate(self):
        for name in RANGE_FIELDS:
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise InvalidParams(f"{name} range [{lo:g}, {hi:g}] has min > max")
        if not self.rt60[0] > 0:
            raise InvalidParams("rt60 range must be positive")
        if not self.sample_rate > 0:
            raise InvalidParams("sample_rate must be positive")
        if not 0 <= self.base_seed <= seeding.MASK64:
            raise InvalidParams("base_seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        for name in RANGE_FIELDS:
            d[name] = list(d[name])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ParamRanges":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise InvalidParams(f"unknown range keys: {', '.join(sorted(unknown))}")
        return cls(**d)


@dataclass(frozen=True)
class SampledBatch:
    items: list = field(default_factory=list)
    ranges: ParamRanges = field(default_factory=ParamRanges)

    def __len__(self):
        return len(self.items)


def sample(ranges: ParamRanges, index: int) -> RirParams:
    """Parameters of item ``index``: independent uniform draws, redrawn
    jointly until they form a valid ``RirParams``.

    The returned params carry ``derive_seed(ranges.base_seed, index)`` as
    their seed; the uniform draws come from that seed's sampling stream.
    """
    seed = seeding.derive_seed(ranges.base_seed, index)
    rng = seeding.stream(seed, seeding.SAMPLING)
    last = None
    for _ in range(MAX_ATTEMPTS):
        draw = {name: float(rng.uniform(*getattr(ranges, name))) for name in RANGE_FIELDS}
        try:
            return RirParams(rt60=draw["rt60"], edt=draw["edt"], itdg=draw["itdg"],
                             drr_target=draw["drr"], deviation_db=draw["deviation_db"],
                             sample_rate=ranges.sample_rate, seed=seed,
                             early_deletion_prob=ranges.early_deletion_prob)
        except InvalidParams as exc:
            last = exc
    raise UnsatisfiableRanges(
        f"no valid parameters after {MAX_ATTEMPTS} draws for index {index}: {last}")


def sample_batch(ranges: ParamRanges, count: int) -> SampledBatch:
    if count < 0:
        raise ValueError("count must be nonnegative")
    return SampledBatch([(i, sample(ranges, i)) for i in range(count)], ranges)
