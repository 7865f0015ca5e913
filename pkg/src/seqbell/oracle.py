"""Brute-force verifiers that share no code path with the closed forms.

Bound oracles enumerate every deterministic sign assignment in integer
arithmetic. The sequential-value oracle walks every chain of inputs and
outcomes of the earlier observers with explicit Kraus products instead of
the averaged channel.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .bellcore import SharpnessSchedule, _check_n, bell_coefficients, parity_set
from .quantum import (
    BellScenario,
    CapacityError,
    alice_observables,
    anticommuting_observables,
    bell_operator,
    maximally_entangled_state,
    unsharp_instrument,
)

ORACLE_MAX_N = 5
CHAIN_MAX_N = 4
CHAIN_MAX_DEPTH = 3
UNDERFLOW = 1e-300


@dataclass(frozen=True)
class DeterministicStrategy:
    alice_outputs: tuple
    bob_outputs: tuple

    def value(self, coeffs: np.ndarray) -> int:
        a = np.asarray(self.alice_outputs, dtype=np.int64)
        b = np.asarray(self.bob_outputs, dtype=np.int64)
        return int(a @ coeffs @ b)


@dataclass(frozen=True)
class ParityConstrainedStrategy(DeterministicStrategy):
    pass


def _sign_table(width: int) -> np.ndarray:
    """All 2**width assignments of ±1, one per row."""
    bits = np.array(list(itertools.product((0, 1), repeat=width)), dtype=np.int64)
    return 1 - 2 * bits


def parity_constraint_matrix(n: int) -> np.ndarray:
    """Rows (-1)^(s·x^i) for each parity string s, over Alice's representatives.

    With a(x̄) = -a(x) the full-cube sum Σ_x (-1)^(s·x) a_x vanishes on its
    own for even-weight s and equals twice the representative sum for odd
    weight, so only odd-weight rows constrain anything.
    """
    reps = np.array(bell_coefficients(n).representatives, dtype=np.int64)
    rows = []
    for s in parity_set(n):
        if sum(s) % 2 == 1:
            rows.append(1 - 2 * ((reps @ np.array(s)) % 2))
    if not rows:
        return np.zeros((0, len(reps)), dtype=np.int64)
    return np.array(rows, dtype=np.int64)


def _check_oracle_n(n: int) -> int:
    n = _check_n(n)
    if n > ORACLE_MAX_N:
        raise CapacityError(
            f"strategy oracle capped at n={ORACLE_MAX_N} "
            f"(search space 2^{2 ** (n - 1) + n})"
        )
    return n


def search_strategies(n: int, parity_constrained: bool = False):
    """Exhaustive maximum of Σ c[i,y] a_i b_y; returns (value, strategy)."""
    n = _check_oracle_n(n)
    coeffs = bell_coefficients(n).matrix
    alice = _sign_table(2 ** (n - 1))
    if parity_constrained:
        cons = parity_constraint_matrix(n)
        alice = alice[np.all(alice @ cons.T == 0, axis=1)]
    bob = _sign_table(n)
    # values[ia, ib] for every pair of assignments
    values = (alice @ coeffs) @ bob.T
    ia, ib = np.unravel_index(np.argmax(values), values.shape)
    cls = ParityConstrainedStrategy if parity_constrained else DeterministicStrategy
    strat = cls(tuple(int(v) for v in alice[ia]), tuple(int(v) for v in bob[ib]))
    return int(values[ia, ib]), strat


def oracle_local_bound(n: int) -> int:
    return search_strategies(n)[0]


def oracle_pnc_bound(n: int) -> int:
    return search_strategies(n, parity_constrained=True)[0]


@dataclass
class ChainResult:
    value: float
    chains: int
    dropped_mass: float


def oracle_sequential_value_detail(n: int, schedule: SharpnessSchedule) -> ChainResult:
    n = _check_n(n)
    depth = (schedule.k - 1) + (schedule.l - 1)
    if n > CHAIN_MAX_N or depth > CHAIN_MAX_DEPTH:
        raise CapacityError(
            f"outcome-chain oracle capped at n<={CHAIN_MAX_N} and {CHAIN_MAX_DEPTH} prior observers"
        )
    scen = BellScenario(n)
    d = scen.local_dim
    eye = np.eye(d)

    # (weight of input choice, joint Kraus operator) for every input/outcome of each prior observer
    steps = []
    for eta in schedule.alice[:-1]:
        ops = []
        obs = alice_observables(n)
        for o in obs:
            inst = unsharp_instrument(o, eta)
            for k in (inst.kraus_plus, inst.kraus_minus):
                ops.append((1.0 / len(obs), np.kron(k, eye)))
        steps.append(ops)
    for chi in schedule.bob[:-1]:
        ops = []
        obs = anticommuting_observables(n)
        for o in obs:
            inst = unsharp_instrument(o, chi)
            for k in (inst.kraus_plus, inst.kraus_minus):
                ops.append((1.0 / len(obs), np.kron(eye, k)))
        steps.append(ops)

    bell = bell_operator(n)
    rho0 = maximally_entangled_state(scen.qubits_per_wing).matrix
    total = 0.0
    mass = 0.0
    dropped = 0.0
    chains = 0

    def walk(level: int, weight: float, rho: np.ndarray):
        # rho is unnormalised; its trace is the outcome-chain probability
        nonlocal total, mass, dropped, chains
        prob = float(np.real(np.trace(rho)))
        if weight * prob < UNDERFLOW:
            dropped += weight * prob
            return
        if level == len(steps):
            chains += 1
            mass += weight * prob
            total += weight * float(np.real(np.trace(rho @ bell)))
            return
        for w, k in steps[level]:
            walk(level + 1, weight * w, k @ rho @ k.conj().T)

    walk(0, 1.0, rho0)
    if dropped > 1e-12 or abs(mass + dropped - 1.0) > 1e-9:
        raise ArithmeticError(f"chain probabilities do not sum to 1 (kept {mass}, dropped {dropped})")
    value = schedule.alice[-1] * schedule.bob[-1] * total
    return ChainResult(value=value, chains=chains, dropped_mass=dropped)


def oracle_sequential_value(n: int, schedule: SharpnessSchedule) -> float:
    return oracle_sequential_value_detail(n, schedule).value
