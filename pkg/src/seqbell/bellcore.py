"""Closed-form arithmetic for the n-input bipartite Bell scenario.

Bounds, Bell coefficients, PORAC success probabilities, the sequential
Bell value for pairs of unsharp observers and critical-sharpness schedules.
Nothing here touches operators; see :mod:`seqbell.quantum` for that.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

# 2**(n-1)*sqrt(n) stays a finite double well past this
MAX_N = 1000
STRICT_TOL = 1e-12


def _check_n(n: int, cap: int = MAX_N) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise TypeError(f"n must be an integer, got {n!r}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if n > cap:
        raise ValueError(f"n must be <= {cap}, got {n}")
    return int(n)


def _check_sharpness(value: float, name: str = "sharpness") -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class BellScenario:
    n: int
    alice_inputs: int = field(init=False)
    qubits_per_wing: int = field(init=False)
    local_dim: int = field(init=False)

    def __post_init__(self):
        n = _check_n(self.n)
        m = (n - 1 + 1) // 2  # ceil((n-1)/2)
        object.__setattr__(self, "alice_inputs", 2 ** (n - 1))
        object.__setattr__(self, "qubits_per_wing", m)
        object.__setattr__(self, "local_dim", 2**m)

    @property
    def joint_dim(self) -> int:
        return self.local_dim**2


@dataclass(frozen=True)
class BellCoefficients:
    """Sign matrix ``c[i, y] = (-1)**x^i_y`` over Alice's representative strings."""

    n: int
    matrix: np.ndarray
    representatives: tuple

    def row(self, i: int) -> np.ndarray:
        return self.matrix[i]


@dataclass(frozen=True)
class SharpnessSchedule:
    """Sharpness of each sequential observer, Alice wing and Bob wing.

    The last entry on each wing belongs to the pair whose Bell value is of
    interest; earlier entries are the predecessors that disturb the state.
    """

    alice: tuple
    bob: tuple

    def __post_init__(self):
        alice = tuple(_check_sharpness(v, "alice sharpness") for v in self.alice)
        bob = tuple(_check_sharpness(v, "bob sharpness") for v in self.bob)
        if not alice or not bob:
            raise ValueError("schedule needs at least one entry per wing")
        object.__setattr__(self, "alice", alice)
        object.__setattr__(self, "bob", bob)

    @classmethod
    def symmetric(cls, etas: Sequence[float]) -> "SharpnessSchedule":
        return cls(tuple(etas), tuple(etas))

    @property
    def k(self) -> int:
        return len(self.alice)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.bob)


@dataclass(frozen=True)
class CriticalSchedule:
    """Per-pair critical sharpness for a given target bound.

    ``exact[j]`` is the critical value for pair ``j + 1``. The first
    infeasible value (> 1) is kept; later pairs are ``None`` since the
    recursion cannot continue past a pair that cannot reach its bound.
    ``approx`` is only defined for the preparation non-contextual target.
    """

    n: int
    target: str
    exact: tuple
    feasible: tuple
    approx: tuple
    max_pairs_exact: int
    max_pairs_approx: Optional[int]


def local_bound(n: int) -> int:
    n = _check_n(n)
    return n * math.comb(n - 1, (n - 1) // 2)


def pnc_bound(n: int) -> int:
    n = _check_n(n)
    return 2 ** (n - 1)


def optimal_quantum_value(n: int) -> float:
    n = _check_n(n)
    return 2 ** (n - 1) * math.sqrt(n)


def bound_value(n: int, target: str) -> float:
    if target == "local":
        return float(local_bound(n))
    if target == "pnc":
        return float(pnc_bound(n))
    raise ValueError(f"unknown target bound {target!r}; expected 'local' or 'pnc'")


def porac_classical_success(n: int) -> float:
    n = _check_n(n)
    return 0.5 * (1.0 + 1.0 / n)


def porac_quantum_success_from_bell(n: int, bell_value: float) -> float:
    n = _check_n(n)
    return 0.5 + bell_value / (2**n * n)


def degradation_factor(n: int, sharpness: float) -> float:
    """Factor by which one averaged unsharp measurement damps later Bell values.

    Equals 1 for a trivial measurement and 1/n for a sharp one.
    """
    n = _check_n(n)
    eta = _check_sharpness(sharpness)
    return (1.0 + (n - 1) * math.sqrt(1.0 - eta * eta)) / n


def sequential_value_closed_form(n: int, schedule: SharpnessSchedule) -> float:
    n = _check_n(n)
    value = optimal_quantum_value(n)
    for eta in schedule.alice[:-1]:
        value *= degradation_factor(n, eta)
    for chi in schedule.bob[:-1]:
        value *= degradation_factor(n, chi)
    return value * schedule.alice[-1] * schedule.bob[-1]


def violates(value: float, bound: float, tol: float = STRICT_TOL) -> bool:
    """Strict violation test; a value equal to the bound is not a violation."""
    return value > bound + tol


def critical_bound_approx(n: int, k: int) -> float:
    n = _check_n(n)
    if k < 1:
        raise ValueError(f"pair index must be >= 1, got {k}")
    denom = math.sqrt(n) - (k - 1)
    if denom <= 0:
        raise ValueError(f"approximate critical sharpness undefined for n={n}, k={k}")
    return 1.0 / math.sqrt(denom)


def critical_schedule_exact(n: int, k_max: int, target: str = "pnc") -> CriticalSchedule:
    """Critical sharpness of pairs 1..k_max under symmetric sharing.

    Pair k (with Alice_k and Bob_k equally sharp) just reaches the target
    bound when every earlier pair sits at its own critical value:
    eta_k**2 = bound / (Q_opt * prod_{p<k} gamma(eta_p)**2).
    """
    n = _check_n(n)
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    ratio = bound_value(n, target) / optimal_quantum_value(n)

    exact: list = []
    feasible: list = []
    damping = 1.0
    stopped = False
    for _ in range(k_max):
        if stopped:
            exact.append(None)
            feasible.append(False)
            continue
        eta = math.sqrt(ratio / damping)
        exact.append(eta)
        ok = eta <= 1.0
        feasible.append(ok)
        if not ok:
            stopped = True
            continue
        damping *= degradation_factor(n, eta) ** 2

    max_exact = 0
    for ok in feasible:
        if not ok:
            break
        max_exact += 1

    if target == "pnc":
        approx = tuple(
            critical_bound_approx(n, k) if math.sqrt(n) - (k - 1) > 0 else None
            for k in range(1, k_max + 1)
        )
        max_approx = math.isqrt(n)
    else:
        approx = (None,) * k_max
        max_approx = None

    return CriticalSchedule(
        n=n,
        target=target,
        exact=tuple(exact),
        feasible=tuple(feasible),
        approx=approx,
        max_pairs_exact=max_exact,
        max_pairs_approx=max_approx,
    )


def critical_sharpness_bisect(
    n: int,
    prior_alice: Sequence[float] = (),
    prior_bob: Sequence[float] = (),
    target: str = "pnc",
    xtol: float = 1e-14,
) -> Optional[float]:
    """Root-find the common sharpness of the final pair that reaches the bound.

    Works for asymmetric predecessor schedules. Returns None when even a
    sharp final pair cannot reach the bound.
    """
    bound = bound_value(n, target)

    def excess(eta: float) -> float:
        sched = SharpnessSchedule(tuple(prior_alice) + (eta,), tuple(prior_bob) + (eta,))
        return sequential_value_closed_form(n, sched) - bound

    if excess(1.0) < 0:
        return None
    return brentq(excess, 0.0, 1.0, xtol=xtol, rtol=4 * np.finfo(float).eps)


def max_sharing_pairs(n: int) -> tuple[int, int]:
    """(exact, approx) number of pairs that can share preparation contextuality."""
    n = _check_n(n)
    k_max = 1
    while True:
        sched = critical_schedule_exact(n, k_max)
        if sched.max_pairs_exact < k_max:
            return sched.max_pairs_exact, math.isqrt(n)
        k_max *= 2


def max_pair_values(n: int, pairs: int, target: str) -> list:
    """Bell value of a sharp pair k = 1..pairs when all earlier pairs sit at criticality.

    Entries are None once an earlier pair's critical sharpness exceeds 1.
    """
    sched = critical_schedule_exact(n, max(pairs - 1, 1), target)
    out = []
    for k in range(1, pairs + 1):
        prior = sched.exact[: k - 1]
        if not all(sched.feasible[: k - 1]):
            out.append(None)
            continue
        etas = tuple(prior) + (1.0,)
        out.append(sequential_value_closed_form(n, SharpnessSchedule.symmetric(etas)))
    return out


def representatives(n: int) -> list[tuple[int, ...]]:
    """Bit strings of length n with leading 0, lexicographic order."""
    n = _check_n(n)
    return [(0,) + tail for tail in itertools.product((0, 1), repeat=n - 1)]


def bell_coefficients(n: int) -> BellCoefficients:
    reps = representatives(n)
    bits = np.array(reps, dtype=np.int64)
    matrix = (1 - 2 * bits).astype(np.int64)
    return BellCoefficients(n=n, matrix=matrix, representatives=tuple(reps))


def parity_set(n: int) -> list[tuple[int, ...]]:
    """All n-bit strings of Hamming weight >= 2."""
    n = _check_n(n)
    return [s for s in itertools.product((0, 1), repeat=n) if sum(s) >= 2]
