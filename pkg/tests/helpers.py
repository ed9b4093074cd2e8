"""Test-side utilities that need the package (kept apart from the oracles)."""

from __future__ import annotations

from simim.cva import CvaKernel


def alpha_step(values, margins, credit, lgd, curve, solution, h=1e-2):
    """Residual tolerance mapped to alpha: tol / |dCVA/dalpha| just right of the root.

    CVA(alpha) is convex and nonincreasing, so the right-hand secant slope is
    the smallest slope magnitude near the root and the bound is conservative.
    """
    k = CvaKernel(values, margins, credit, lgd, curve)
    a = solution.alpha
    slope = (k(a) - k(a + h)) / h
    if slope <= 0.0:
        return float("inf")
    return solution.tolerance / slope


ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, ok: bool, detail: str) -> None:
    """Print and keep one pass/fail line for an acceptance criterion, then assert it."""
    line = f"AC{criterion:<2} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line
