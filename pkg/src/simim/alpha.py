"""Calibration of the counterparty-specific IM multiplier alpha.

alpha solves CVA_j(alpha) = CVA_ref(0) on one shared set of paths. CVA_j is
piecewise linear and nonincreasing in alpha, so the solver is a secant
iteration kept inside a sign-change bracket, falling back to bisection.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .cva import DEFAULT_PD_WEIGHTING, CvaKernel
from .instruments import ValueCube
from .margin import MarginProfile
from .market import CreditCurve, DiscountCurve, LgdAssumption, RatingTable

log = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 100
DEFAULT_ALPHA_MAX = 10.0
ALPHA_CAP = 1e4
ABS_TOL_PER_NOTIONAL = 1e-6
REL_TOL = 1e-9


class AlphaSolverError(RuntimeError):
    def __init__(self, message: str, bracket: tuple[float, float] | None = None):
        super().__init__(message)
        self.bracket = bracket


class NonConvergenceError(AlphaSolverError):
    pass


class BracketError(AlphaSolverError):
    """Even the capped alpha leaves CVA above the reference."""


@dataclass(frozen=True)
class AlphaSolution:
    rating: str
    alpha: float
    cva_reference: float
    cva_at_alpha: float
    residual: float
    iterations: int
    converged: bool
    floored: bool
    tolerance: float
    method: str = "newton"


@dataclass(frozen=True)
class CellFailure:
    rating: str
    error: str
    bracket: tuple[float, float] | None = None


def default_tolerance(notional: float, cva_reference: float) -> float:
    """Residual tolerance: the tighter of 1e-6 * notional and 1e-9 * CVA_ref."""
    cap = ABS_TOL_PER_NOTIONAL * notional
    floor = 1e-15 * notional
    return min(cap, max(REL_TOL * abs(cva_reference), floor))


def _solve(
    f: Callable[[float], float],
    tol: float,
    max_iter: int,
    alpha_max: float,
    use_secant: bool,
) -> tuple[float, float, int, bool]:
    """Root of a nonincreasing f with f(0) > tol; returns (alpha, f(alpha), iterations, floored)."""
    lo, f_lo = 0.0, f(0.0)
    hi = alpha_max
    f_hi = f(hi)
    evals = 2
    while f_hi > 0.0:
        if hi >= ALPHA_CAP:
            raise BracketError(
                f"CVA still above reference at alpha={hi:g}; IM cannot close the gap", (lo, hi)
            )
        lo, f_lo = hi, f_hi
        hi = min(2.0 * hi, ALPHA_CAP)
        f_hi = f(hi)
        evals += 1
    if abs(f_hi) <= tol:
        return hi, f_hi, evals, False

    # (a, fa), (b, fb): the two latest iterates for the secant step
    a, fa, b, fb = lo, f_lo, hi, f_hi
    force_bisect = not use_secant
    for it in range(1, max_iter + 1):
        x = None
        if not force_bisect and fb != fa:
            cand = b - fb * (b - a) / (fb - fa)
            if lo < cand < hi:
                x = cand
        if x is None:
            x = 0.5 * (lo + hi)
        width = hi - lo
        fx = f(x)
        if abs(fx) <= tol:
            return x, fx, it, False
        if fx > 0.0:
            lo, f_lo = x, fx
        else:
            hi, f_hi = x, fx
        a, fa, b, fb = b, fb, x, fx
        # a secant step that fails to halve the bracket forces one bisection
        force_bisect = (not use_secant) or (not force_bisect and hi - lo > 0.5 * width)
        if hi - lo <= 4e-16 * max(1.0, hi):
            best = (lo, f_lo) if abs(f_lo) <= abs(f_hi) else (hi, f_hi)
            if abs(best[1]) <= tol:
                return best[0], best[1], it, False
            break
    raise NonConvergenceError(
        f"no root within tolerance {tol:g} after {max_iter} iterations", (lo, hi)
    )


def solve_alpha(
    values: ValueCube,
    margins: MarginProfile,
    credit_j: CreditCurve,
    credit_ref: CreditCurve,
    lgd: LgdAssumption,
    curve: DiscountCurve,
    tol: float | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    *,
    method: str = "newton",
    alpha_max: float = DEFAULT_ALPHA_MAX,
    weighting: str = DEFAULT_PD_WEIGHTING,
) -> AlphaSolution:
    """Solve for alpha >= 0 equating counterparty j's CVA to the reference CVA.

    Both CVAs are evaluated on the same cubes. A negative root is floored to
    zero and flagged. ``method`` is ``"newton"`` (safeguarded secant) or
    ``"bisect"``.
    """
    if method not in ("newton", "bisect"):
        raise ValueError(f"unknown method {method!r}")
    kernel_ref = CvaKernel(values, margins, credit_ref, lgd, curve, weighting)
    kernel_j = CvaKernel(values, margins, credit_j, lgd, curve, weighting)
    cva_ref = kernel_ref(0.0)
    if tol is None:
        tol = default_tolerance(values.notional, cva_ref)
    if not tol > 0.0:
        raise ValueError("tol must be > 0")

    def f(alpha: float) -> float:
        return kernel_j(alpha) - cva_ref

    f0 = f(0.0)
    if f0 <= tol:
        return AlphaSolution(credit_j.rating, 0.0, cva_ref, f0 + cva_ref, f0, 0, True,
                             f0 <= 0.0, tol, method)
    alpha, res, iters, _ = _solve(f, tol, max_iter, alpha_max, use_secant=(method == "newton"))
    return AlphaSolution(credit_j.rating, alpha, cva_ref, res + cva_ref, res, iters, True, False,
                         tol, method)


@dataclass
class AlphaSurface:
    """alpha per (netting set label, rating); failed cells hold a CellFailure."""

    trades: list[str]
    ratings: list[str]
    cells: dict[tuple[str, str], AlphaSolution | CellFailure] = field(default_factory=dict)

    def __getitem__(self, key: tuple[str, str]) -> AlphaSolution | CellFailure:
        return self.cells[key]

    def alpha(self, trade: str, rating: str) -> float:
        cell = self.cells[(trade, rating)]
        return cell.alpha if isinstance(cell, AlphaSolution) else float("nan")

    @property
    def failures(self) -> list[tuple[str, str]]:
        return [k for k, v in self.cells.items() if isinstance(v, CellFailure)]


def solve_alpha_surface(
    netting_sets: Mapping[str, tuple[ValueCube, MarginProfile]],
    ratings: RatingTable,
    lgd: LgdAssumption,
    curve: DiscountCurve,
    rating_labels: Sequence[str] | None = None,
    *,
    tol: float | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    method: str = "newton",
    weighting: str = DEFAULT_PD_WEIGHTING,
    workers: int = 1,
) -> AlphaSurface:
    """alpha for every (netting set, rating) pair against the table's reference rating.

    Solver errors are recorded per cell; the sweep always completes.
    """
    labels = list(rating_labels) if rating_labels is not None else ratings.labels
    ref = ratings.reference
    jobs = [(name, r) for name in netting_sets for r in labels]

    def cell(job: tuple[str, str]) -> AlphaSolution | CellFailure:
        name, r = job
        values, margins = netting_sets[name]
        try:
            return solve_alpha(values, margins, ratings[r], ref, lgd, curve, tol, max_iter,
                               method=method, weighting=weighting)
        except AlphaSolverError as exc:
            log.warning("alpha solve failed for %s/%s: %s", name, r, exc)
            return CellFailure(r, str(exc), exc.bracket)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(cell, jobs))
    else:
        results = [cell(j) for j in jobs]
    surface = AlphaSurface(list(netting_sets), labels)
    for job, res in zip(jobs, results):
        surface.cells[job] = res
    return surface


__all__ = [
    "AlphaSolution",
    "AlphaSolverError",
    "AlphaSurface",
    "BracketError",
    "CellFailure",
    "NonConvergenceError",
    "default_tolerance",
    "solve_alpha",
    "solve_alpha_surface",
]
