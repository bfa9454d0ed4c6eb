"""Model parameters, power-law weights, and percolation schedules.

The graph model lives on n vertices with deterministic weights
w_i = c_F * (n/i)**alpha drawn from the quantile function of a pure power
law with tail exponent tau - 1 and tail constant C, for tau in (2, 3).
Percolation is applied with an n-dependent retention probability pi_n that
is tuned to the barely supercritical window; everything downstream is
measured on the scale beta_n = n * pi_n**(1/(3-tau)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CoreEmptyError,
    CoreExceedsGraphError,
    DomainError,
    NumericalFailureError,
    RangeError,
    ScheduleInfeasibleError,
)

MODES = ("multi", "single")
LAMBDA_RULE_KINDS = ("constant", "power", "logpower")

# Relative agreement required between equivalent closed forms of the same scale.
_CROSS_CHECK_RTOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Primitive parameters (tau, C, n) plus the constants derived from them.

    alpha = 1/(tau-1) is the weight decay exponent, eta and eta_s are the
    percolation exponents for the multigraph and simple-graph windows, c_F is
    the weight scale forced by the tail constant, and mu is the limit of the
    average weight ell_n / n.
    """

    tau: float
    C: float
    n: int
    alpha: float
    eta: float
    eta_s: float
    c_F: float
    mu: float


def derive_constants(tau: float, C: float) -> dict[str, float]:
    """Derive (alpha, eta, eta_s, c_F, mu) from the tail exponent and constant.

    Inverting the tail 1 - F(w) = C * w**-(tau-1) at i/n gives
    w = (C*n/i)**(1/(tau-1)), so the weight scale is c_F = C**(+1/(tau-1)).
    """
    if not (2.0 < tau < 3.0):
        raise DomainError(f"tau must lie strictly between 2 and 3, got tau={tau}")
    if not (C > 0.0):
        raise DomainError(f"tail constant C must be positive, got C={C}")
    alpha = 1.0 / (tau - 1.0)
    c_F = C ** (1.0 / (tau - 1.0))
    return {
        "alpha": alpha,
        "eta": (3.0 - tau) / (tau - 1.0),
        "eta_s": (3.0 - tau) / 2.0,
        "c_F": c_F,
        "mu": c_F * (tau - 1.0) / (tau - 2.0),
    }


def model_params(tau: float, C: float, n: int) -> ModelParams:
    """Validate primitives and bundle them with their derived constants."""
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise DomainError(f"n must be an integer, got n={n!r}")
    if n < 1:
        raise DomainError(f"n must be at least 1, got n={n}")
    return ModelParams(tau=float(tau), C=float(C), n=int(n), **derive_constants(tau, C))


@dataclass(frozen=True)
class WeightSequence:
    """Non-increasing vertex weights w_1 >= ... >= w_n with their total ell_n.

    ``cum_weights`` holds inclusive prefix sums and backs exact inverse-CDF
    sampling of the size-biased mark distribution P(M = i) = w_i / ell_n.
    ``params`` is None for hand-built toy sequences used in diagnostics; the
    power-law shape is only guaranteed for sequences from build_weights.
    """

    params: ModelParams | None
    weights: np.ndarray
    ell_n: float
    cum_weights: np.ndarray

    @classmethod
    def from_array(cls, weights, params: ModelParams | None = None) -> "WeightSequence":
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise DomainError("weights must be a non-empty 1-d array")
        if not np.all(w > 0.0):
            raise DomainError("weights must all be positive")
        cum = np.cumsum(w)
        w.setflags(write=False)
        cum.setflags(write=False)
        return cls(params=params, weights=w, ell_n=float(cum[-1]), cum_weights=cum)

    @property
    def n(self) -> int:
        return int(self.weights.size)

    def weight_of(self, vertex: int) -> float:
        """Weight of a 1-based vertex id."""
        if not (1 <= vertex <= self.n):
            raise RangeError(f"vertex id {vertex} outside [1, {self.n}]")
        return float(self.weights[vertex - 1])


def build_weights(params: ModelParams) -> WeightSequence:
    """Materialize w_i = c_F * (n/i)**alpha for i = 1..n."""
    i = np.arange(1, params.n + 1, dtype=np.float64)
    w = params.c_F * (params.n / i) ** params.alpha
    return WeightSequence.from_array(w, params=params)


@dataclass(frozen=True)
class LambdaRule:
    """A named rule mapping n to the percolation strength lambda_n.

    kind "constant" ignores n, "power" evaluates n**value, and "logpower"
    evaluates (log n)**value.  The closed set of rules keeps configs
    serializable and comparisons across n-grids meaningful.
    """

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in LAMBDA_RULE_KINDS:
            raise DomainError(
                f"unknown lambda rule kind {self.kind!r}; expected one of {LAMBDA_RULE_KINDS}"
            )
        if not math.isfinite(self.value):
            raise DomainError(f"lambda rule value must be finite, got {self.value}")
        if self.kind == "constant" and self.value < 1.0:
            raise DomainError(f"constant lambda rule needs value >= 1, got {self.value}")
        if self.kind in ("power", "logpower") and self.value <= 0.0:
            raise DomainError(f"{self.kind} lambda rule needs a positive exponent, got {self.value}")

    def evaluate(self, n: int) -> float:
        if n < 1:
            raise DomainError(f"n must be at least 1, got n={n}")
        if self.kind == "constant":
            return self.value
        if self.kind == "power":
            return float(n) ** self.value
        return math.log(n) ** self.value

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value}

    @classmethod
    def from_dict(cls, d: dict) -> "LambdaRule":
        extra = set(d) - {"kind", "value"}
        if extra:
            raise DomainError(f"unknown lambda rule fields: {sorted(extra)}")
        if "kind" not in d or "value" not in d:
            raise DomainError("lambda rule needs both 'kind' and 'value'")
        return cls(kind=d["kind"], value=float(d["value"]))


@dataclass(frozen=True)
class PercolationSchedule:
    """A concrete (n, pi_n) pair on either the multigraph or simple-graph window.

    multi mode:  pi_n = lambda_n * n**-eta,   eta   = (3-tau)/(tau-1)
    single mode: pi_n = lambda_n * n**-eta_s, eta_s = (3-tau)/2
    beta_n = n * pi_n**(1/(3-tau)) is the component scale; in single mode
    N_n = n * pi_n**((tau-1)/(3-tau)) is the core scale and is None otherwise.
    """

    params: ModelParams
    mode: str
    lambda_rule: LambdaRule
    lambda_n: float
    pi_n: float
    beta_n: float
    N_n: float | None

    def percolated_weights(self, weights: WeightSequence) -> np.ndarray:
        """Retention-thinned weights pi_n * w_i."""
        return self.pi_n * weights.weights

    def percolated_total(self, weights: WeightSequence) -> float:
        return self.pi_n * weights.ell_n


def make_schedule(params: ModelParams, mode: str, lambda_rule: LambdaRule) -> PercolationSchedule:
    """Evaluate a lambda rule at n and turn it into a feasible schedule."""
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    n, tau = params.n, params.tau
    lam = lambda_rule.evaluate(n)
    if lam < 1.0:
        raise ScheduleInfeasibleError(
            f"lambda_n={lam:.6g} < 1 at n={n} (rule {lambda_rule.kind}:{lambda_rule.value}, mode={mode})"
        )
    exponent = params.eta if mode == "multi" else params.eta_s
    pi_n = lam * float(n) ** (-exponent)
    if not (0.0 < pi_n < 1.0):
        raise ScheduleInfeasibleError(
            f"pi_n={pi_n:.6g} outside (0, 1) for n={n}, lambda_n={lam:.6g}, mode={mode}"
        )
    beta_n = n * pi_n ** (1.0 / (3.0 - tau))
    # Same scale written directly in terms of (n, lambda_n); both must agree.
    if mode == "multi":
        beta_direct = float(n) ** (1.0 - params.eta / (3.0 - tau)) * lam ** (1.0 / (3.0 - tau))
    else:
        beta_direct = float(n) ** (1.0 - params.eta_s / (3.0 - tau)) * lam ** (1.0 / (3.0 - tau))
    _cross_check("beta_n", beta_n, beta_direct)

    N_n = None
    if mode == "single":
        N_n = lam ** ((tau - 1.0) / (3.0 - tau)) * float(n) ** ((3.0 - tau) / 2.0)
        N_direct = n * pi_n ** ((tau - 1.0) / (3.0 - tau))
        _cross_check("N_n", N_n, N_direct)
    return PercolationSchedule(
        params=params,
        mode=mode,
        lambda_rule=lambda_rule,
        lambda_n=lam,
        pi_n=pi_n,
        beta_n=beta_n,
        N_n=N_n,
    )


def _cross_check(name: str, primary: float, alternate: float) -> None:
    if abs(primary - alternate) > _CROSS_CHECK_RTOL * max(abs(primary), abs(alternate)):
        raise NumericalFailureError(
            f"{name} closed forms disagree: {primary!r} vs {alternate!r}"
        )


def core_prefix_size(schedule: PercolationSchedule, a: float) -> int:
    """floor(a * N_n), the number of top-weight vertices in the core at level a."""
    if schedule.mode != "single":
        raise DomainError("core prefix is only defined for single-mode schedules")
    if not (a > 0.0):
        raise DomainError(f"core level a must be positive, got a={a}")
    size = math.floor(a * schedule.N_n)
    if size < 1:
        raise CoreEmptyError(
            f"core prefix floor(a*N_n) = {size} is empty for a={a}, N_n={schedule.N_n:.6g}"
        )
    if size > schedule.params.n:
        raise CoreExceedsGraphError(
            f"core prefix {size} exceeds n={schedule.params.n} for a={a}, N_n={schedule.N_n:.6g}"
        )
    return size
