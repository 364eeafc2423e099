"""Iteration machinery for scalar recurrences driven by i.i.d. noise:
``x_next = apply(x, xi)`` stepped forward or backward over indexed windows,
plus the randomly-initialized sampler used by the measure construction.

Index convention: when the state starts at index ``n0``, the noise window
starts at ``n0 + 1``, and the step into index ``k + 1`` consumes the noise
value at index ``k + 1``.
"""

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import CoverageError, InverseUnavailableError
from .path_space import NoiseWindow, PathWindow
from .seeds import draw_normal, draw_u64, draw_unit

__all__ = [
    "UpdateMap",
    "NoiseModel",
    "fractional_map",
    "contraction_map",
    "update_map_from_name",
    "iterate_forward",
    "iterate_backward",
    "stationary_sampler",
]


@dataclass(frozen=True)
class UpdateMap:
    """A one-step update ``x_next = apply(x, xi)`` with an optional inverse.

    ``apply`` and ``inverse_apply`` must accept scalars or numpy arrays in
    the state argument and operate elementwise, so ensembles can be advanced
    in one call.  When present, ``inverse_apply`` satisfies
    ``apply(inverse_apply(x, xi), xi) == x`` on the state domain.
    """

    name: str
    apply: Callable
    inverse_apply: Callable | None = None


def _frac(x):
    # fractional part as x - floor(x); maps negatives into [0, 1).  For
    # inputs a hair below an integer the subtraction can round to exactly
    # 1.0, which is the same point on the circle as 0.0.
    out = x - np.floor(x)
    return np.where(out >= 1.0, 0.0, out)


def fractional_map() -> UpdateMap:
    """Circle rotation by the noise value: ``apply(x, y) = frac(x + y)``.

    The inverse is ``frac(x - y)``, so backward steps stay in [0, 1).
    """
    return UpdateMap(
        name="fractional",
        apply=lambda x, y: _frac(x + y),
        inverse_apply=lambda x, y: _frac(x - y),
    )


def contraction_map(a: float) -> UpdateMap:
    """Affine contraction ``apply(x, y) = a*x + y`` with ``|a| < 1``.

    The contrast case: its ensemble collapses geometrically, the signature of
    a solution that is a function of the noise alone.  For ``a != 0`` the
    inverse is ``(x - y) / a``.
    """
    a = float(a)
    if not abs(a) < 1.0:
        raise ValueError(f"contraction factor must satisfy |a| < 1, got {a}")
    inverse = None if a == 0.0 else (lambda x, y: (x - y) / a)
    return UpdateMap(name=f"contraction:a={a}", apply=lambda x, y: a * x + y, inverse_apply=inverse)


def update_map_from_name(text: str) -> UpdateMap:
    """Parse ``"fractional"`` or ``"contraction:a=<value>"`` into an UpdateMap."""
    if text == "fractional":
        return fractional_map()
    if text.startswith("contraction:a="):
        try:
            a = float(text.removeprefix("contraction:a="))
        except ValueError:
            raise ValueError(f"bad contraction factor in {text!r}") from None
        return contraction_map(a)
    raise ValueError(f"unknown update map {text!r}")


@dataclass(frozen=True)
class NoiseModel:
    """An i.i.d. noise source addressed by absolute sequence index.

    ``law`` is ``"uniform"`` (on [0, 1)) or ``"normal"``.  The value at index
    ``i`` is a pure function of ``(seed, i)``, so overlapping windows agree
    and windows can be generated for any index range in any order.
    """

    law: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        if self.law not in ("uniform", "normal"):
            raise ValueError(f"unknown noise law {self.law!r}")

    def window(self, first_index: int, length: int) -> NoiseWindow:
        """Noise values at absolute indices ``first_index .. first_index+length-1``."""
        if length < 1:
            raise ValueError("noise window length must be positive")
        counters = np.arange(first_index, first_index + length, dtype=np.int64)
        if self.law == "uniform":
            values = draw_unit(self.seed, counters)
        else:
            values = draw_normal(self.seed, counters)
        return NoiseWindow(offset=first_index, values=tuple(values))

    def substream(self, index: int) -> "NoiseModel":
        """An independent child model for replica ``index`` (same law)."""
        return replace(self, seed=int(draw_u64(self.seed, index)))


def iterate_forward(x0: float, noise: NoiseWindow, update_map: UpdateMap) -> PathWindow:
    """Run the recurrence forward through every noise value.

    ``x0`` sits at index ``noise.offset - 1``; the result covers
    ``noise.offset - 1 .. noise.last_index`` and its first coordinate is
    exactly ``x0``.
    """
    x = float(x0)
    values = [x]
    for xi in noise.values:
        x = float(update_map.apply(x, xi))
        values.append(x)
    return PathWindow(offset=noise.offset - 1, values=tuple(values))


def iterate_backward(x_end: float, noise: NoiseWindow, update_map: UpdateMap) -> PathWindow:
    """Run the recurrence backward through every noise value.

    ``x_end`` sits at index ``noise.last_index``; earlier coordinates are
    recovered with ``inverse_apply``, consuming the noise from the top down.
    The result covers the same window as :func:`iterate_forward` and ends at
    ``x_end``.
    """
    if update_map.inverse_apply is None:
        raise InverseUnavailableError(
            f"update map {update_map.name!r} has no inverse; cannot iterate backward"
        )
    x = float(x_end)
    values = [x]
    for xi in reversed(noise.values):
        x = float(update_map.inverse_apply(x, xi))
        values.append(x)
    values.reverse()
    return PathWindow(offset=noise.offset - 1, values=tuple(values))


def stationary_sampler(
    update_map: UpdateMap,
    noise: NoiseWindow,
    init_seed: int,
    *,
    init_index: int | None = None,
    init_bounds: tuple[float, float] = (0.0, 1.0),
) -> PathWindow:
    """One trajectory of the randomly-initialized construction.

    Draws the initializer ``eta`` uniformly on ``init_bounds`` from
    ``init_seed`` (a stream independent of the noise), plants it at
    ``init_index`` (default: the left edge of the output window,
    ``noise.offset - 1``), then fills the window ``noise.offset - 1 ..
    noise.last_index`` forward with ``apply`` and, left of the initializer,
    backward with ``inverse_apply``.

    For the fractional map with the default bounds every coordinate lies in
    [0, 1) and each coordinate is uniform regardless of the noise values.
    """
    lo, hi = float(init_bounds[0]), float(init_bounds[1])
    if not lo < hi:
        raise ValueError("init_bounds must be an increasing pair")
    first = noise.offset - 1
    last = noise.last_index
    anchor = first if init_index is None else int(init_index)
    if not first <= anchor <= last:
        raise CoverageError(f"initializer index {anchor} outside window [{first}, {last}]")

    eta = lo + (hi - lo) * float(draw_unit(init_seed, 0))

    if anchor == first:
        return iterate_forward(eta, noise, update_map)

    back_part = NoiseWindow(
        offset=noise.offset, values=noise.values[: anchor - noise.offset + 1]
    )
    head = iterate_backward(eta, back_part, update_map)
    if anchor == last:
        return head
    fwd_part = NoiseWindow(
        offset=anchor + 1, values=noise.values[anchor - noise.offset + 1 :]
    )
    tail = iterate_forward(eta, fwd_part, update_map)
    return PathWindow(offset=first, values=head.values + tail.values[1:])
