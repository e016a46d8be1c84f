"""Rate functions for the causal erasure channel and classical comparison curves.

All rates are in bits per channel use (logarithms base 2).  The causal
bounds are

    rate_upper(p) = (1 - 2p)^+

and the piecewise lower bound

    rate_lower(p) = 1 - p/log2(4/3)            for p <= p1,
                  = root x of G_p(x) = 0       for p1 < p < 1/2,
                  = 0                          for p >= 1/2,

with G_p(x) = (1-x) H((p-x)/(1-x)) - 1 + 2x and
p1 = 3 log2(4/3) / (2 + 3 log2(4/3)) ~ 0.38369.  The finite-parameter
variant rate_delta_eta keeps explicit (delta, eta) slack and converges to
rate_lower as delta + eta -> 0.

Root finding is plain bisection: G_p is strictly increasing on the bracket
[0, 3p/2 - 1/2], so convergence is guaranteed; tolerance is 1e-12 on x with
a 200-iteration cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

LOG2_4_3 = math.log2(4.0 / 3.0)

#: Fixed emission order for curve collections and CSV rows.
BOUND_ORDER = (
    "upper_causal",
    "lower_causal",
    "lower_causal_finite",
    "gv",
    "plotkin",
    "elias_bassalygo",
    "mrrw",
    "random_capacity",
)

_BISECT_X_TOL = 1e-12
_BISECT_MAX_ITER = 200
_ENDPOINT_SLACK = 1e-9


def binary_entropy(x: float) -> float:
    """H(x) = -x log2 x - (1-x) log2 (1-x), with H(0) = H(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary_entropy argument must be in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def p_one() -> float:
    """Breakpoint between the linear and root branches of rate_lower."""
    return 3.0 * LOG2_4_3 / (2.0 + 3.0 * LOG2_4_3)


P1 = p_one()


def rate_upper(p: float) -> float:
    """Capacity upper bound (1 - 2p)^+."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    return max(1.0 - 2.0 * p, 0.0)


def g_p(p: float, x: float) -> float:
    """G_p(x) = (1-x) H((p-x)/(1-x)) - 1 + 2x for 0 <= x <= p < 1."""
    if not (0.0 <= x <= p < 1.0):
        raise ValueError(f"require 0 <= x <= p < 1, got p={p}, x={x}")
    return (1.0 - x) * binary_entropy((p - x) / (1.0 - x)) - 1.0 + 2.0 * x


def _bisect_increasing(f, lo: float, hi: float) -> float:
    """Root of an increasing f on [lo, hi] to 1e-12 in x.

    Endpoint roots (|f| <= 1e-9) are returned directly; anything else with
    f(lo) > 0 or f(hi) < 0 indicates a broken bracket and is an internal
    error.
    """
    flo, fhi = f(lo), f(hi)
    if flo > 0.0:
        if flo <= _ENDPOINT_SLACK:
            return lo
        raise RuntimeError(f"bisection bracket broken: f({lo}) = {flo} > 0")
    if fhi < 0.0:
        if fhi >= -_ENDPOINT_SLACK:
            return hi
        raise RuntimeError(f"bisection bracket broken: f({hi}) = {fhi} < 0")
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if hi - lo <= _BISECT_X_TOL:
            return mid
        fm = f(mid)
        if fm == 0.0:
            return mid
        if fm < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _root_g_shift(p: float, shift: float) -> float:
    """Root of G_p(x) + shift = 0 on [0, 3p/2 - 1/2]."""
    hi = 1.5 * p - 0.5
    return _bisect_increasing(lambda x: g_p(p, x) + shift, 0.0, hi)


def root_r(p: float) -> float:
    """The unique root of G_p(x) = 0 on [0, 3p/2 - 1/2], for p in [p1, 1/2]."""
    if not (P1 - 1e-12 <= p <= 0.5):
        raise ValueError(f"root_r requires p in [p1, 0.5], got {p}")
    return _root_g_shift(p, 0.0)


def rate_lower(p: float) -> float:
    """Achievable rate for p-bounded causal erasures (piecewise, see module doc)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if p >= 0.5:
        return 0.0
    if p <= P1:
        return 1.0 - p / LOG2_4_3
    return root_r(p)


@dataclass(frozen=True)
class DeltaEta:
    """Slack parameters of the finite-parameter rate; both strictly positive."""

    delta: float
    eta: float

    def __post_init__(self) -> None:
        if not (self.delta > 0.0 and self.eta > 0.0):
            raise ValueError(f"delta and eta must be positive, got {self.delta}, {self.eta}")

    @property
    def total(self) -> float:
        return self.delta + self.eta


def delta_eta_cap(p: float) -> float:
    """Largest feasible delta + eta at erasure fraction p (three-case bound)."""
    if not 0.0 < p < 0.5:
        raise ValueError(f"feasibility cap requires 0 < p < 0.5, got {p}")
    if p < 1.0 / 3.0:
        return 3.0 * LOG2_4_3 - 1.0
    if p < P1:
        return 1.5 * LOG2_4_3 - (1.5 * LOG2_4_3 + 1.0) * p
    return 1.0 - binary_entropy(p)


def constraint_check(p: float, de: DeltaEta) -> bool:
    """True iff (delta, eta) is feasible at p."""
    return de.total <= delta_eta_cap(p)


def rate_delta_eta(p: float, de: DeltaEta) -> float:
    """Finite-parameter rate with explicit (delta, eta) slack.

    Below p1 this is the linear branch of rate_lower minus linear penalties;
    from p1 on it is the root of G_p(x) + delta + eta = 0, plus delta.
    """
    if not constraint_check(p, de):
        raise ValueError(
            f"(delta={de.delta}, eta={de.eta}) infeasible at p={p}: "
            f"delta+eta must be <= {delta_eta_cap(p):.6g}"
        )
    if p < P1:
        return (
            1.0
            - p / LOG2_4_3
            - de.delta * (1.0 - LOG2_4_3) / LOG2_4_3
            - de.eta / LOG2_4_3
        )
    return _root_g_shift(p, de.total) + de.delta


def rate_delta_eta_extended(p: float, de: DeltaEta) -> float:
    """rate_delta_eta extended to the whole [0, 1] grid for curve emission.

    Outside the feasible region the value is clamped: 0 for p >= 1/2, the
    linear formula for p in [0, p1) (feasibility there does not depend on
    p < 1/3), and root-clamped-at-zero (value delta) where delta + eta
    exceeds 1 - H(p).  Result is clipped to [0, 1].
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if p >= 0.5:
        return 0.0
    if p < P1:
        val = (
            1.0
            - p / LOG2_4_3
            - de.delta * (1.0 - LOG2_4_3) / LOG2_4_3
            - de.eta / LOG2_4_3
        )
    elif de.total >= 1.0 - binary_entropy(p):
        val = de.delta
    else:
        val = _root_g_shift(p, de.total) + de.delta
    return min(max(val, 0.0), 1.0)


def _clamp01(x: float) -> float:
    return min(max(x, 0.0), 1.0)


@dataclass(frozen=True)
class ClassicalBounds:
    """Standard minimum-distance bounds plus the random-erasure capacity."""

    gv: float
    plotkin: float
    elias_bassalygo: float
    mrrw: float
    random_capacity: float


def classical_bounds(p: float) -> ClassicalBounds:
    """Evaluate the five comparison curves at p, each clamped to [0, 1].

    GV = 1 - H(p); Plotkin = (1-2p)^+; EB = 1 - H((1 - sqrt(1-2p))/2) for
    p <= 1/2 (0 beyond); MRRW = H(1/2 - sqrt(p(1-p))); random capacity 1 - p.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    gv = _clamp01(1.0 - binary_entropy(p))
    plotkin = rate_upper(p)
    if p <= 0.5:
        eb = _clamp01(1.0 - binary_entropy((1.0 - math.sqrt(1.0 - 2.0 * p)) / 2.0))
    else:
        eb = 0.0
    mrrw = _clamp01(binary_entropy(0.5 - math.sqrt(p * (1.0 - p))))
    return ClassicalBounds(gv, plotkin, eb, mrrw, _clamp01(1.0 - p))


@lru_cache(maxsize=1)
def phi_intersection() -> float:
    """The p where rate_lower meets min(EB, MRRW), located to 1e-9.

    A coarse scan brackets the sign change of the difference, then bisection
    refines it.
    """

    def diff(p: float) -> float:
        cb = classical_bounds(p)
        return rate_lower(p) - min(cb.elias_bassalygo, cb.mrrw)

    lo, hi = None, None
    prev_p, prev_d = 0.25, diff(0.25)
    step = 0.002
    p = 0.25 + step
    while p < 0.49:
        d = diff(p)
        if prev_d > 0.0 >= d:
            lo, hi = prev_p, p
            break
        prev_p, prev_d = p, d
        p += step
    if lo is None:
        raise RuntimeError("no sign change found for the lower-bound intersection")
    return _bisect_increasing(lambda q: -diff(q), lo, hi)


@dataclass(frozen=True)
class RatePoint:
    """One sampled value of one bound curve."""

    p: float
    rate: float
    bound_name: str

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"rate must be in [0, 1], got {self.rate}")
        if self.bound_name not in BOUND_ORDER:
            raise ValueError(f"unknown bound name {self.bound_name!r}")


@dataclass(frozen=True)
class RateCurve:
    """A sampled bound curve with provenance parameters."""

    bound_name: str
    params: tuple[tuple[str, object], ...]
    points: tuple[RatePoint, ...]


_STANDARD_SOURCE = (("source", "standard closed form"),)


def emit_curves(
    p_min: float,
    p_max: float,
    step: float,
    de: DeltaEta | None = None,
) -> list[RateCurve]:
    """Sample every bound on the grid p_min, p_min+step, ..., p_max.

    Curves come back in BOUND_ORDER; each curve's points ascend in p.  The
    finite curve uses `de` (default delta = eta = 0.01) via
    rate_delta_eta_extended.
    """
    if not (0.0 <= p_min < p_max <= 1.0):
        raise ValueError(f"require 0 <= p_min < p_max <= 1, got [{p_min}, {p_max}]")
    if step <= 0.0:
        raise ValueError(f"step must be positive, got {step}")
    count = math.floor((p_max - p_min) / step + 1e-9) + 1
    if count < 2:
        raise ValueError(f"grid [{p_min}, {p_max}] step {step} is degenerate")
    if de is None:
        de = DeltaEta(0.01, 0.01)
    grid = [p_min + i * step for i in range(count)]

    def classical(name: str):
        return lambda p: getattr(classical_bounds(p), name)

    evaluators = {
        "upper_causal": rate_upper,
        "lower_causal": rate_lower,
        "lower_causal_finite": lambda p: rate_delta_eta_extended(p, de),
        "gv": classical("gv"),
        "plotkin": classical("plotkin"),
        "elias_bassalygo": classical("elias_bassalygo"),
        "mrrw": classical("mrrw"),
        "random_capacity": classical("random_capacity"),
    }
    params = {
        "upper_causal": (),
        "lower_causal": (),
        "lower_causal_finite": (
            ("delta", de.delta),
            ("eta", de.eta),
            ("extension", "clamped outside feasible region"),
        ),
        "gv": _STANDARD_SOURCE,
        "plotkin": _STANDARD_SOURCE,
        "elias_bassalygo": _STANDARD_SOURCE,
        "mrrw": _STANDARD_SOURCE,
        "random_capacity": _STANDARD_SOURCE,
    }
    curves = []
    for name in BOUND_ORDER:
        fn = evaluators[name]
        points = tuple(RatePoint(p, fn(p), name) for p in grid)
        curves.append(RateCurve(name, params[name], points))
    return curves


def curves_to_csv(curves: list[RateCurve]) -> str:
    """Render curves as `p,bound,rate` rows: ascending p, fixed bound order.

    9-decimal fixed formatting, LF line endings.
    """
    by_name = {c.bound_name: c for c in curves}
    ordered = [by_name[name] for name in BOUND_ORDER if name in by_name]
    if not ordered:
        raise ValueError("no curves to render")
    npoints = len(ordered[0].points)
    if any(len(c.points) != npoints for c in ordered):
        raise ValueError("curves must share one grid")
    lines = ["p,bound,rate"]
    for i in range(npoints):
        for curve in ordered:
            pt = curve.points[i]
            lines.append(f"{pt.p:.9f},{pt.bound_name},{pt.rate:.9f}")
    return "\n".join(lines) + "\n"
