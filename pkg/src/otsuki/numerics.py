"""Deterministic numerical kernels.

Three reusable building blocks, each a pure function of its inputs:

* :func:`integrate_singular` -- double-exponential (tanh-sinh) quadrature
  that converges geometrically for integrands with algebraic endpoint
  singularities up to ``(x - a)**-0.5`` and ``(b - x)**-0.5``.
* :func:`find_root_monotone` -- safeguarded bracketing root finder
  (bisection refined by inverse quadratic / secant interpolation).
* :func:`integrate_ode` -- adaptive embedded Runge-Kutta 5(4) integration
  with dense output, backed by :func:`scipy.integrate.solve_ivp`.

Everything runs in IEEE double precision; tolerances are carried by small
frozen dataclasses so call sites stay declarative.
"""

from __future__ import annotations

import inspect
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp


class InvalidInterval(ValueError):
    """Integration interval is empty or reversed."""


class NonConvergence(RuntimeError):
    """Level-to-level quadrature estimates failed to settle within tolerance."""


class NoBracket(ValueError):
    """Root finder was called without a sign change on the interval."""


class MaxItersExceeded(RuntimeError):
    """Root finder exhausted its iteration budget."""


class StepUnderflow(RuntimeError):
    """Adaptive ODE step collapsed below machine feasibility."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for :func:`integrate_singular`."""

    target_rel_tol: float = 1e-12
    max_levels: int = 12

    def __post_init__(self):
        if not self.target_rel_tol > 0:
            raise ValueError("target_rel_tol must be positive")
        if self.max_levels < 1:
            raise ValueError("max_levels must be at least 1")


@dataclass(frozen=True)
class RootSpec:
    """Tolerances for :func:`find_root_monotone`."""

    abs_tol_x: float = 1e-13
    max_iters: int = 200

    def __post_init__(self):
        if not self.abs_tol_x > 0:
            raise ValueError("abs_tol_x must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class OdeSpec:
    """Tolerances for :func:`integrate_ode`."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.max_step > 0):
            raise ValueError("all OdeSpec tolerances must be positive")


# --------------------------------------------------------------------------
# tanh-sinh quadrature
# --------------------------------------------------------------------------

# Beyond |u| = 4 the transformed weights are ~1e-36 even against an
# inverse-square-root singularity, far below double-precision relevance.
_U_MAX = 4.0

# level -> (sigma, weight) arrays for the new positive abscissas introduced
# at that trapezoidal refinement.  sigma = 1 - tanh((pi/2) sinh u) is the
# node's distance to the interval endpoint in [-1, 1] coordinates, kept in
# this form so callers never suffer cancellation next to a singularity.
_NODE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _tanh_sinh_nodes(level: int) -> tuple[np.ndarray, np.ndarray]:
    try:
        return _NODE_CACHE[level]
    except KeyError:
        pass
    h = 0.5 ** level
    if level == 0:
        u = np.arange(h, _U_MAX + 0.5 * h, h)
    else:
        u = np.arange(h, _U_MAX + 0.5 * h, 2.0 * h)
    z = 0.5 * math.pi * np.sinh(u)
    sigma = 2.0 / (1.0 + np.exp(2.0 * z))
    weight = 0.5 * math.pi * np.cosh(u) / np.cosh(z) ** 2
    _NODE_CACHE[level] = (sigma, weight)
    return sigma, weight


def _accepts_distances(f: Callable) -> bool:
    """True if the integrand takes (x, dist_lo, dist_hi) instead of just x."""
    try:
        sig = inspect.signature(f)
    except (TypeError, ValueError):  # ufuncs and some builtins
        return False
    n_positional = 0
    for p in sig.parameters.values():
        if p.kind in (p.POSITIONAL_ONLY, p.POSITIONAL_OR_KEYWORD):
            n_positional += 1
        elif p.kind == p.VAR_POSITIONAL:
            return True
    return n_positional >= 3


def integrate_singular(f: Callable, a: float, b: float,
                       spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Integrate ``f`` over ``(a, b)`` by adaptive tanh-sinh quadrature.

    Parameters
    ----------
    f : callable
        Vectorized integrand.  Either ``f(x)`` or the endpoint-aware form
        ``f(x, dist_lo, dist_hi)`` where the extra arrays give the distance
        of each node to ``a`` and to ``b`` in full relative precision.  Use
        the three-argument form whenever the singular factor involves a
        difference against an endpoint (for example ``1/sqrt(x - a)`` with
        ``a != 0``); plain ``x - a`` in user code loses the digits that the
        doubly-exponential nodes deliberately place within an ulp of ``a``.
    a, b : float
        Integration limits, ``a < b``.  Endpoint singularities no worse
        than an inverse square root are handled.
    spec : QuadratureSpec
        Relative tolerance and the refinement budget.

    Returns
    -------
    float
        The integral, once two successive trapezoidal refinements agree to
        ``spec.target_rel_tol``.

    Raises
    ------
    InvalidInterval
        If ``a >= b``.
    NonConvergence
        If the level-to-level estimate has not settled within
        ``spec.max_levels`` refinements.
    """
    if not a < b:
        raise InvalidInterval(f"need a < b, got a={a!r}, b={b!r}")
    three_arg = _accepts_distances(f)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)

    def evaluate(x, d_lo, d_hi):
        if three_arg:
            return np.asarray(f(x, d_lo, d_hi), dtype=float)
        return np.asarray(f(x), dtype=float)

    half_arr = np.array([half])
    raw_sum = 0.5 * math.pi * float(evaluate(np.array([mid]), half_arr, half_arr)[0])
    estimate = raw_sum * half  # h = 1 at level 0
    previous = None
    for level in range(spec.max_levels):
        sigma, weight = _tanh_sinh_nodes(level)
        d = half * sigma
        d_far = half * (2.0 - sigma)
        lower = evaluate(a + d, d, d_far)
        upper = evaluate(b - d, d_far, d)
        raw_sum += float(np.dot(weight, lower + upper))
        h = 0.5 ** level
        estimate = h * half * raw_sum
        if previous is not None and level >= 2:
            scale = max(abs(estimate), abs(previous), np.finfo(float).tiny)
            if abs(estimate - previous) <= spec.target_rel_tol * scale:
                return estimate
        previous = estimate
    raise NonConvergence(
        f"tanh-sinh estimate still moving after {spec.max_levels} levels "
        f"(last change {abs(estimate - previous):.3e})")


# --------------------------------------------------------------------------
# bracketed root finding
# --------------------------------------------------------------------------

_EPS = float(np.finfo(float).eps)


def find_root_monotone(f: Callable[[float], float], lo: float, hi: float,
                       spec: RootSpec = RootSpec()) -> float:
    """Locate the root of a continuous function bracketed by ``[lo, hi]``.

    Bisection refined by inverse quadratic / secant interpolation with
    bracket safeguarding (Brent's scheme); the iterate never leaves the
    initial interval and the terminal bracket width is at most
    ``spec.abs_tol_x`` (plus an unavoidable few-ulp floor).

    Raises
    ------
    NoBracket
        If ``f(lo)`` and ``f(hi)`` do not have opposite signs.
    MaxItersExceeded
        If the bracket has not collapsed after ``spec.max_iters`` steps.
    """
    a, b = float(lo), float(hi)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise NoBracket(f"f({lo!r})={fa!r} and f({hi!r})={fb!r} have the same sign")

    c, fc = a, fa
    e = d = b - a
    for _ in range(spec.max_iters):
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol = 0.5 * spec.abs_tol_x + 2.0 * _EPS * abs(b)
        m = 0.5 * (c - b)
        if abs(m) <= tol or fb == 0.0:
            return b
        if abs(e) < tol or abs(fa) <= abs(fb):
            e = d = m  # interpolation is not trustworthy; bisect
        else:
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            else:
                p = -p
            s, e = e, d
            if 2.0 * p < 3.0 * m * q - abs(tol * q) and p < abs(0.5 * s * q):
                d = p / q
            else:
                e = d = m
        a, fa = b, fb
        if abs(d) > tol:
            b += d
        else:
            b += tol if m > 0 else -tol
        fb = f(b)
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            e = d = b - a
    raise MaxItersExceeded(f"no convergence within {spec.max_iters} iterations")


# --------------------------------------------------------------------------
# adaptive ODE integration with dense output
# --------------------------------------------------------------------------

class Trajectory:
    """Dense ODE solution, queryable at any time inside the integrated span."""

    def __init__(self, solution):
        self._dense = solution.sol
        self.t_start = float(solution.t[0])
        self.t_end = float(solution.t[-1])
        self.n_steps = int(solution.t.size - 1)
        self.y_end = np.array(solution.y[:, -1])

    def __call__(self, t):
        """State at time(s) ``t``; scalar in -> 1-d state, array in -> (dim, n)."""
        return self._dense(t)


def integrate_ode(rhs: Callable, y0: Sequence[float], t_span: tuple[float, float],
                  spec: OdeSpec = OdeSpec()) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` over ``t_span`` adaptively.

    Embedded Runge-Kutta 5(4) with local error control at
    ``(spec.rel_tol, spec.abs_tol)`` and quartic dense output between the
    accepted steps.

    Raises
    ------
    InvalidInterval
        If the span is empty or reversed.
    StepUnderflow
        If the adaptive step collapses below machine feasibility.
    """
    t_start, t_end = float(t_span[0]), float(t_span[1])
    if not t_start < t_end:
        raise InvalidInterval(f"need t_start < t_end, got {t_span!r}")
    solution = solve_ivp(rhs, (t_start, t_end), np.asarray(y0, dtype=float),
                         method="RK45", rtol=spec.rel_tol, atol=spec.abs_tol,
                         max_step=spec.max_step, dense_output=True)
    if not solution.success:
        raise StepUnderflow(solution.message)
    return Trajectory(solution)
