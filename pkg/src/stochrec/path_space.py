"""Trajectory and sequence primitives: indexed windows, shifts, and the
summed-and-damped sup metric on sampled functions.

A window stores a finite stretch of a bi-infinite real sequence together with
the absolute index of its first entry, so the coordinate at absolute index
``i`` is ``values[i - offset]``.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import CoverageError

__all__ = [
    "PathWindow",
    "NoiseWindow",
    "SampledFunction",
    "TrajMetric",
    "shift_path",
    "shift_noise",
    "truncate_path",
    "traj_metric",
]


@dataclass(frozen=True)
class PathWindow:
    """A finite window of a real-valued sequence of state values."""

    offset: int
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ValueError("PathWindow requires at least one value")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def first_index(self) -> int:
        return self.offset

    @property
    def last_index(self) -> int:
        return self.offset + len(self.values) - 1

    def covers(self, index: int) -> bool:
        return self.first_index <= index <= self.last_index

    def coordinate(self, index: int) -> float:
        """Value at absolute index ``index``; raises outside the window."""
        if not self.covers(index):
            raise CoverageError(
                f"index {index} outside window [{self.first_index}, {self.last_index}]"
            )
        return self.values[index - self.offset]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


@dataclass(frozen=True)
class NoiseWindow:
    """A finite window of the driving noise sequence, indexed like a path."""

    offset: int
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ValueError("NoiseWindow requires at least one value")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def first_index(self) -> int:
        return self.offset

    @property
    def last_index(self) -> int:
        return self.offset + len(self.values) - 1

    def covers(self, index: int) -> bool:
        return self.first_index <= index <= self.last_index

    def covers_range(self, first: int, last: int) -> bool:
        return self.first_index <= first and last <= self.last_index

    def coordinate(self, index: int) -> float:
        if not self.covers(index):
            raise CoverageError(
                f"index {index} outside noise window [{self.first_index}, {self.last_index}]"
            )
        return self.values[index - self.offset]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


@dataclass(frozen=True)
class SampledFunction:
    """A real function known on a strictly increasing finite time grid."""

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have equal length")
        if not self.times:
            raise ValueError("SampledFunction requires at least one sample")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")


class TrajMetric(NamedTuple):
    """Truncated metric value plus a certified bound on the omitted tail."""

    value: float
    tail_bound: float


def shift_path(p: PathWindow, t: int) -> PathWindow:
    """Translate a path by ``t``: the result at index ``i`` is ``p`` at ``i + t``."""
    return PathWindow(offset=p.offset - t, values=p.values)


def shift_noise(noise: NoiseWindow, t: int) -> NoiseWindow:
    """Translate a noise window by ``t`` with the same convention as paths."""
    return NoiseWindow(offset=noise.offset - t, values=noise.values)


def truncate_path(p: PathWindow, t: int) -> PathWindow:
    """Freeze the path after index ``t``: later coordinates repeat ``p(t)``.

    ``t`` must lie inside the window.
    """
    if not p.covers(t):
        raise CoverageError(
            f"truncation index {t} outside window [{p.first_index}, {p.last_index}]"
        )
    cut = t - p.offset
    held = p.values[cut]
    return PathWindow(
        offset=p.offset,
        values=p.values[: cut + 1] + (held,) * (len(p.values) - cut - 1),
    )


def _damp(r: np.ndarray) -> np.ndarray:
    # r / (1 + r), monotone and subadditive on [0, inf)
    return r / (1.0 + r)


def traj_metric(f: SampledFunction, g: SampledFunction, big_k: int) -> TrajMetric:
    """Damped sup-distance summed over nested time bands, truncated at ``big_k``.

    Computes ``sum_{k=1..K} 2**-k * d_k/(1+d_k)`` where ``d_k`` is the max of
    ``|f - g|`` over grid points in ``[-k, k]``, and returns it with the tail
    bound ``2**-K`` for the omitted terms (each damped band distance is < 1).

    Both functions must share one grid, the grid must span ``[-K, K]``, and
    every band ``[-k, k]`` must contain at least one grid point.
    """
    if big_k < 1:
        raise ValueError("band count must be a positive integer")
    if f.times != g.times:
        raise CoverageError("sampled functions must share the same time grid")
    times = np.asarray(f.times)
    if times[0] > -big_k or times[-1] < big_k:
        raise CoverageError(
            f"grid [{times[0]}, {times[-1]}] does not span [-{big_k}, {big_k}]"
        )
    diffs = np.abs(np.asarray(f.values) - np.asarray(g.values))
    abs_times = np.abs(times)
    value = 0.0
    for k in range(1, big_k + 1):
        in_band = abs_times <= k
        if not in_band.any():
            raise CoverageError(f"grid has no sample point in [-{k}, {k}]")
        value += 2.0**-k * float(_damp(diffs[in_band].max()))
    return TrajMetric(value=value, tail_bound=2.0**-big_k)
