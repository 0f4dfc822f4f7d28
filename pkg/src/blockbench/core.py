"""Shared domain types: samples, blockings, design specs, assignments and outcome models."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np


class BlockbenchError(Exception):
    """Base class for domain errors raised by this package."""


class InfeasibleDesignError(BlockbenchError, ValueError):
    """The requested design admits no blocking (or no valid randomization)."""


class ResourceLimitError(BlockbenchError, RuntimeError):
    """Exhaustive work would exceed the configured ceiling."""


@dataclass(frozen=True)
class Unit:
    id: str
    covariates: tuple[float, ...]


@dataclass(frozen=True)
class Sample:
    units: tuple[Unit, ...]

    def __post_init__(self):
        if len(self.units) < 1:
            raise ValueError("a sample needs at least one unit")
        dims = {len(u.covariates) for u in self.units}
        if len(dims) != 1:
            raise ValueError("covariate vectors must have equal length")
        ids = [u.id for u in self.units]
        if len(set(ids)) != len(ids):
            raise ValueError("unit ids must be unique")
        if not np.all(np.isfinite(self.covariates)):
            raise ValueError("covariates must be finite")

    @classmethod
    def from_array(cls, x, ids: Optional[Sequence] = None) -> "Sample":
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if ids is None:
            ids = [str(i + 1) for i in range(arr.shape[0])]
        units = tuple(Unit(str(i), tuple(float(v) for v in row)) for i, row in zip(ids, arr))
        return cls(units)

    @property
    def n(self) -> int:
        return len(self.units)

    @property
    def dim(self) -> int:
        return len(self.units[0].covariates)

    @property
    def covariates(self) -> np.ndarray:
        """Covariates as an ``(n, dim)`` float array (a fresh copy)."""
        return np.array([u.covariates for u in self.units], dtype=float).reshape(self.n, -1)

    @property
    def ids(self) -> list[str]:
        return [u.id for u in self.units]


Block = tuple[int, ...]


def _canonical(blocks: Iterable[Iterable[int]]) -> tuple[Block, ...]:
    normalized = [tuple(sorted(int(i) for i in b)) for b in blocks]
    # empty blocks sort first so validation can still report them
    return tuple(sorted(normalized, key=lambda b: (len(b) > 0, b[:1], b)))


@dataclass(frozen=True)
class Blocking:
    """A collection of blocks of 0-based unit indices, stored canonically.

    Blocks are sorted internally and ordered by their smallest member, so two
    blockings describing the same partition compare equal. Construction does
    not check the partition conditions; use :func:`validate_blocking`.
    """

    blocks: tuple[Block, ...]

    def __init__(self, blocks: Iterable[Iterable[int]]):
        object.__setattr__(self, "blocks", _canonical(blocks))

    def __iter__(self):
        return iter(self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def sizes(self) -> list[int]:
        return [len(b) for b in self.blocks]

    @property
    def mean_block_size(self) -> float:
        return self.n / len(self.blocks)

    def one_based(self) -> list[list[int]]:
        return [[i + 1 for i in b] for b in self.blocks]

    def __str__(self) -> str:
        return "{" + ", ".join("{" + ",".join(map(str, b)) + "}" for b in self.one_based()) + "}"


def parity(n_b: int) -> int:
    """The odd-size indicator of a block of ``n_b`` units."""
    return n_b % 2


class Method(str, enum.Enum):
    COMPLETE = "complete"
    FIXED = "fixed"
    THRESHOLD = "threshold"


TIE_BREAK_SMALLEST_MEAN_SIZE = "smallest-mean-size"


@dataclass(frozen=True)
class DesignSpec:
    method: Method
    size: int = 2
    objective: object = None  # ObjectiveSpec; None means the default objective
    tie_break: str = TIE_BREAK_SMALLEST_MEAN_SIZE

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.method is not Method.COMPLETE and self.size < 1:
            raise ValueError("size requirement must be positive")

    @classmethod
    def fixed(cls, size: int, **kw) -> "DesignSpec":
        return cls(Method.FIXED, size, **kw)

    @classmethod
    def threshold(cls, size: int, **kw) -> "DesignSpec":
        return cls(Method.THRESHOLD, size, **kw)

    @classmethod
    def complete(cls, **kw) -> "DesignSpec":
        return cls(Method.COMPLETE, 1, **kw)

    @classmethod
    def unconstrained(cls) -> "DesignSpec":
        # every set partition is admissible
        return cls(Method.THRESHOLD, 1)

    def admits_size(self, n_b: int, n: Optional[int] = None) -> bool:
        if self.method is Method.FIXED:
            return n_b == self.size
        if self.method is Method.THRESHOLD:
            return n_b >= self.size
        return n is None or n_b == n


@dataclass(frozen=True)
class ValidityReport:
    nonempty: bool
    covers: bool
    disjoint: bool
    size_ok: Optional[bool]
    empty_blocks: int = 0
    uncovered: tuple[int, ...] = ()
    duplicated: tuple[int, ...] = ()
    out_of_range: tuple[int, ...] = ()
    bad_sizes: tuple[int, ...] = ()

    @property
    def valid(self) -> bool:
        return self.nonempty and self.covers and self.disjoint and self.size_ok is not False

    def messages(self) -> list[str]:
        out = []
        if not self.nonempty:
            out.append(f"{self.empty_blocks} empty block(s)")
        if self.uncovered:
            out.append("uncovered units {" + ",".join(str(i + 1) for i in self.uncovered) + "}")
        if self.out_of_range:
            out.append("unknown units {" + ",".join(str(i + 1) for i in self.out_of_range) + "}")
        if self.duplicated:
            out.append("units in more than one block {" + ",".join(str(i + 1) for i in self.duplicated) + "}")
        if self.size_ok is False:
            out.append("block sizes violate the size requirement: " + ", ".join(map(str, self.bad_sizes)))
        return out


def validate_blocking(sample: Sample | int, blocking: Blocking, design: Optional[DesignSpec] = None) -> ValidityReport:
    """Check the partition conditions and, when ``design`` is given, its size rule.

    Never raises on an invalid blocking; inspect the returned report instead.
    """
    n = sample if isinstance(sample, int) else sample.n
    members = [i for b in blocking.blocks for i in b]
    counts: dict[int, int] = {}
    for i in members:
        counts[i] = counts.get(i, 0) + 1
    empty = sum(1 for b in blocking.blocks if len(b) == 0)
    out_of_range = tuple(sorted(i for i in counts if not 0 <= i < n))
    uncovered = tuple(i for i in range(n) if i not in counts)
    duplicated = tuple(sorted(i for i, c in counts.items() if c > 1))
    size_ok = None
    bad = ()
    if design is not None:
        bad = tuple(len(b) for b in blocking.blocks if not design.admits_size(len(b), n))
        size_ok = not bad
    return ValidityReport(
        nonempty=empty == 0,
        covers=not uncovered and not out_of_range,
        disjoint=not duplicated,
        size_ok=size_ok,
        empty_blocks=empty,
        uncovered=uncovered,
        duplicated=duplicated,
        out_of_range=out_of_range,
        bad_sizes=bad,
    )


@dataclass(frozen=True)
class Assignment:
    """Binary treatment indicators together with the blocking they were drawn for."""

    blocking: Blocking
    indicators: tuple[int, ...]

    @property
    def treated_counts(self) -> list[int]:
        return [sum(self.indicators[i] for i in b) for b in self.blocking.blocks]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indicators, dtype=bool)


Covariates = np.ndarray


@dataclass(frozen=True)
class OutcomeModel:
    """Conditional mean and spread of the potential outcomes given covariates.

    ``mu0`` and ``conditional_sd`` take an ``(n, dim)`` array and return
    length-``n`` arrays. With ``constant_effect`` set, ``mu1`` is derived.
    Noise is independent standard normal scaled by ``conditional_sd``.
    """

    mu0: Callable[[Covariates], np.ndarray]
    conditional_sd: Callable[[Covariates], np.ndarray]
    mu1: Optional[Callable[[Covariates], np.ndarray]] = None
    constant_effect: Optional[float] = None

    def __post_init__(self):
        if self.mu1 is None and self.constant_effect is None:
            raise ValueError("either mu1 or constant_effect is required")

    def mean0(self, x) -> np.ndarray:
        return np.asarray(self.mu0(_as_2d(x)), dtype=float)

    def mean1(self, x) -> np.ndarray:
        x = _as_2d(x)
        if self.constant_effect is not None:
            return self.mean0(x) + self.constant_effect
        return np.asarray(self.mu1(x), dtype=float)

    def sd(self, x) -> np.ndarray:
        x = _as_2d(x)
        return np.broadcast_to(np.asarray(self.conditional_sd(x), dtype=float), (x.shape[0],)).copy()

    def draw(self, x, rng: np.random.Generator) -> "PotentialOutcomes":
        x = _as_2d(x)
        sd = self.sd(x)
        e0 = rng.standard_normal(x.shape[0])
        if self.constant_effect is not None:
            y0 = self.mean0(x) + sd * e0
            return PotentialOutcomes(y0, y0 + self.constant_effect)
        e1 = rng.standard_normal(x.shape[0])
        return PotentialOutcomes(self.mean0(x) + sd * e0, self.mean1(x) + sd * e1)


def _as_2d(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    return arr[:, None] if arr.ndim == 1 else arr


@dataclass(frozen=True)
class PotentialOutcomes:
    y0: np.ndarray
    y1: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.y0) != len(self.y1):
            raise ValueError("potential outcome vectors differ in length")

    def observed(self, treated: np.ndarray) -> np.ndarray:
        return np.where(treated, self.y1, self.y0)
