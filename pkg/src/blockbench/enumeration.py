"""Exhaustive generation and counting of admissible blockings."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterator

import numpy as np

from .core import Blocking, DesignSpec, Method, ResourceLimitError, Sample

DEFAULT_MAX_BLOCKINGS = 200_000


def _allowed_sizes(n: int, design: DesignSpec) -> tuple[int, ...]:
    if design.method is Method.COMPLETE:
        return (n,)
    if design.method is Method.FIXED:
        return (design.size,) if design.size <= n else ()
    return tuple(range(max(design.size, 1), n + 1))


def count_blockings(n: int, design: DesignSpec) -> int:
    """Number of set partitions of ``n`` units whose block sizes the design admits.

    Uses the recurrence on the block holding the lowest index:
    ``a(m) = sum_k C(m-1, k-1) a(m-k)`` over admissible sizes ``k``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    sizes = _allowed_sizes(n, design)

    @lru_cache(maxsize=None)
    def a(m: int) -> int:
        if m == 0:
            return 1
        return sum(comb(m - 1, k - 1) * a(m - k) for k in sizes if k <= m)

    return a(n)


def _completable(m: int, sizes: tuple[int, ...], design: DesignSpec) -> bool:
    if m == 0:
        return True
    if design.method is Method.FIXED:
        return m % design.size == 0
    return m >= min(sizes) if sizes else False


def _check_ceiling(n: int, design: DesignSpec, max_blockings) -> int:
    total = count_blockings(n, design)
    if max_blockings is not None and total > max_blockings:
        raise ResourceLimitError(
            f"{total} admissible blockings exceeds the ceiling of {max_blockings}; "
            "use the dynamic-programming solver for one-dimensional covariates"
        )
    return total


def iter_block_tuples(
    n: int, design: DesignSpec, max_blockings: int = DEFAULT_MAX_BLOCKINGS
) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Like :func:`enumerate_blockings` but yields raw canonical block tuples.

    Skips :class:`Blocking` construction, which dominates the cost of
    exhaustive scans.
    """
    if _check_ceiling(n, design, max_blockings) == 0:
        return
    sizes = _allowed_sizes(n, design)
    acc: list[tuple[int, ...]] = []

    def rec(remaining: tuple[int, ...]):
        if not remaining:
            yield tuple(acc)
            return
        first, rest = remaining[0], remaining[1:]
        m = len(remaining)
        for k in sizes:
            if k > m or not _completable(m - k, sizes, design):
                continue
            for others in combinations(rest, k - 1):
                chosen = set(others)
                acc.append((first,) + others)
                yield from rec(tuple(i for i in rest if i not in chosen))
                acc.pop()

    yield from rec(tuple(range(n)))


def enumerate_blockings(
    n: int, design: DesignSpec, max_blockings: int = DEFAULT_MAX_BLOCKINGS
) -> Iterator[Blocking]:
    """Yield every admissible blocking of units ``0..n-1`` exactly once.

    The block containing the lowest unassigned index is chosen first, so
    blocks come out in canonical order and no partition repeats. Raises
    :class:`ResourceLimitError` before yielding anything if the admissible
    count exceeds ``max_blockings``.
    """
    for blocks in iter_block_tuples(n, design, max_blockings):
        yield Blocking(blocks)


PatternBlock = tuple[tuple[float, ...], ...]
Pattern = tuple[PatternBlock, ...]


def blocking_pattern(blocking: Blocking, x: np.ndarray) -> Pattern:
    """Describe a blocking by the covariate rows it groups, ignoring unit identity.

    Rows inside a block and blocks inside the pattern are sorted in
    descending order, e.g. ``(((1,), (1,)), ((1,), (0,)), ((0,), (0,)))``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    blocks = [tuple(sorted((tuple(x[i].tolist()) for i in b), reverse=True)) for b in blocking]
    return tuple(sorted(blocks, key=lambda b: (-len(b), tuple(-v for row in b for v in row))))


@dataclass(frozen=True)
class PatternClass:
    pattern: Pattern
    multiplicity: int
    representative: Blocking  # first unit-level blocking seen with this pattern


def covariate_pattern_classes(
    sample: Sample, design: DesignSpec, max_blockings: int = DEFAULT_MAX_BLOCKINGS
) -> list[PatternClass]:
    """Group admissible unit blockings into classes sharing one covariate pattern.

    Classes come back in first-seen enumeration order. Only meaningful when
    covariate rows repeat; raises ``ValueError`` when every unit has a
    distinct covariate vector.
    """
    x = sample.covariates
    if sample.n > 1 and len({tuple(r) for r in x.tolist()}) == sample.n:
        raise ValueError("covariate patterns need repeated covariate values; all rows are distinct")
    counts: Counter = Counter()
    first: dict = {}
    for blocking in enumerate_blockings(sample.n, design, max_blockings):
        key = blocking_pattern(blocking, x)
        counts[key] += 1
        first.setdefault(key, blocking)
    return [PatternClass(k, c, first[k]) for k, c in counts.items()]


def format_pattern(pattern: Pattern) -> str:
    def row(r):
        return ",".join(f"{v:g}" for v in r) if len(r) > 1 else f"{r[0]:g}"

    def block(b):
        inner = ",".join(("(" + row(r) + ")") if len(r) > 1 else row(r) for r in b)
        return "{" + inner + "}"

    return "{" + ", ".join(block(b) for b in pattern) + "}"
