"""Variation margin and dynamic initial margin on the exposure grid.

VM trails the netting-set value by the margin period of risk. IM_general is
a delta-normal quantile of the value change over the MPoR, evaluated at the
same lagged margin date as VM.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import norm

from .instruments import NettingSet, ValueCube, delta_column
from .rates import HullWhiteParams, PathCube

DEFAULT_CONFIDENCE = 0.99
_TIME_ATOL = 1e-10


@dataclass(frozen=True)
class MarginProfile:
    vm: np.ndarray
    im: np.ndarray
    confidence: float = DEFAULT_CONFIDENCE
    mpor: float | None = None

    def __post_init__(self) -> None:
        vm = np.atleast_2d(np.asarray(self.vm, float))
        im = np.atleast_2d(np.asarray(self.im, float))
        if vm.shape != im.shape:
            raise ValueError(f"VM shape {vm.shape} differs from IM shape {im.shape}")
        if np.any(im < 0.0):
            raise ValueError("initial margin must be nonnegative")
        object.__setattr__(self, "vm", vm)
        object.__setattr__(self, "im", im)

    @classmethod
    def zeros(cls, shape: tuple[int, int]) -> "MarginProfile":
        return cls(np.zeros(shape), np.zeros(shape))

    @property
    def shape(self) -> tuple[int, int]:
        return self.vm.shape

    def vm_only(self) -> "MarginProfile":
        return replace(self, im=np.zeros_like(self.im))


def compute_vm(values: ValueCube, mpor: float) -> np.ndarray:
    """VM at each node: the value at t_k - mpor (at t = 0 for t_k < mpor).

    Lag dates that fall on the exposure grid read the grid values; other lag
    dates need the cube's lagged layer, built for the same MPoR.
    """
    if not mpor > 0.0:
        raise ValueError("mpor must be > 0")
    times = values.times
    lag = np.maximum(times - mpor, 0.0)
    vm = np.empty_like(values.values)
    have_layer = (
        values.lag_values is not None
        and values.mpor is not None
        and abs(values.mpor - mpor) <= _TIME_ATOL
    )
    for k, s in enumerate(lag):
        j = int(np.searchsorted(times, s - _TIME_ATOL))
        if j < times.size and abs(times[j] - s) <= _TIME_ATOL:
            vm[:, k] = values.values[:, j]
        elif have_layer:
            vm[:, k] = values.lag_values[:, k]
        else:
            raise ValueError(f"no value available at lag date {s}; build the cube with mpor={mpor}")
    return vm


def im_multiplier(params: HullWhiteParams, confidence: float, mpor: float) -> float:
    """z_confidence times the short-rate stdev over the MPoR."""
    if not 0.5 < confidence < 1.0:
        raise ValueError("confidence must lie in (0.5, 1)")
    if not mpor > 0.0:
        raise ValueError("mpor must be > 0")
    return float(norm.ppf(confidence) * params.short_rate_stdev(mpor))


def compute_im_general(
    params: HullWhiteParams,
    netting_set: NettingSet,
    paths: PathCube,
    confidence: float = DEFAULT_CONFIDENCE,
    mpor: float | None = None,
) -> np.ndarray:
    """Delta-normal IM held over each node's MPoR window, shape (n_paths, N+1)."""
    mpor = paths.grid.mpor if mpor is None else mpor
    scale = im_multiplier(params, confidence, mpor)
    lag = np.round(np.maximum(paths.grid.array - mpor, 0.0), 12)
    cache: dict[float, np.ndarray] = {}
    cols = []
    for s in lag:
        s = float(s)
        if s not in cache:
            cache[s] = scale * np.abs(delta_column(params, netting_set.trade, paths, s))
        cols.append(cache[s])
    return np.column_stack(cols)


def margin_profile(
    params: HullWhiteParams,
    netting_set: NettingSet,
    paths: PathCube,
    values: ValueCube,
    confidence: float = DEFAULT_CONFIDENCE,
    mpor: float | None = None,
) -> MarginProfile:
    mpor = paths.grid.mpor if mpor is None else mpor
    vm = compute_vm(values, mpor)
    im = compute_im_general(params, netting_set, paths, confidence, mpor)
    return MarginProfile(vm, im, confidence, mpor)


def apply_alpha(profile: MarginProfile, alpha: float) -> MarginProfile:
    """Scale IM by (1 + alpha); VM is passed through untouched."""
    if not alpha >= 0.0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    return replace(profile, im=profile.im * (1.0 + alpha))


__all__ = [
    "MarginProfile",
    "compute_vm",
    "compute_im_general",
    "im_multiplier",
    "margin_profile",
    "apply_alpha",
]
