"""Operator-level simulation of sequential unsharp observers.

Bob's observables are mutually anticommuting Hermitian involutions on
``m = ceil((n-1)/2)`` qubits. Alice's are the transposed, normalised sign
combinations of Bob's, which saturates the optimal Bell value on the
canonical maximally entangled state. Unsharp measurements are Lüders
instruments; a sequential observer who forgets input and outcome acts on
the shared state as the uniform average of those instruments.

The joint state lives on ``A ⊗ B`` with Alice's factor first.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .bellcore import (
    BellScenario,
    SharpnessSchedule,
    _check_n,
    _check_sharpness,
    bell_coefficients,
    parity_set,
    porac_quantum_success_from_bell,
)

SIM_MAX_N = 12
HERMITIAN_TOL = 1e-12
EIG_DEAD_ZONE = 1e-9

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class CapacityError(Exception):
    """Requested size exceeds what the simulator or oracle will attempt."""


def _check_sim_n(n: int) -> int:
    n = _check_n(n)
    if n > SIM_MAX_N:
        raise CapacityError(
            f"simulation capped at n={SIM_MAX_N} (joint density matrix would be "
            f"{BellScenario(n).joint_dim}x{BellScenario(n).joint_dim}); use the closed form"
        )
    return n


@dataclass(frozen=True)
class Observable:
    matrix: np.ndarray
    label: str = ""

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        return spectral_projectors(self.matrix)


@dataclass(frozen=True)
class DensityOperator:
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def validity_residuals(self) -> dict:
        rho = self.matrix
        herm = np.linalg.norm(rho - rho.conj().T, ord=2)
        evals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
        return {
            "hermiticity": float(herm),
            "trace": abs(self.trace() - 1.0),
            "min_eigenvalue": float(evals.min()),
        }

    def is_valid(self, tol: float = HERMITIAN_TOL, psd_tol: float = 1e-10) -> bool:
        r = self.validity_residuals()
        return r["hermiticity"] < tol and r["trace"] < tol and r["min_eigenvalue"] >= -psd_tol


@dataclass(frozen=True)
class UnsharpInstrument:
    kraus_plus: np.ndarray
    kraus_minus: np.ndarray
    sharpness: float

    def completeness_residual(self) -> float:
        kp, km = self.kraus_plus, self.kraus_minus
        total = kp.conj().T @ kp + km.conj().T @ km
        return float(np.linalg.norm(total - np.eye(kp.shape[0]), ord=2))


def spectral_projectors(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenprojectors (Π+, Π-) of a Hermitian dichotomic operator."""
    evals, evecs = np.linalg.eigh(matrix)
    if np.any(np.abs(evals) < EIG_DEAD_ZONE):
        raise ValueError("operator has an eigenvalue inside the sign dead zone")
    plus = evecs[:, evals > 0]
    minus = evecs[:, evals < 0]
    return plus @ plus.conj().T, minus @ minus.conj().T


def _kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


@lru_cache(maxsize=None)
def _anticommuting_generators(m: int) -> tuple:
    # Jordan-Wigner: Z..Z X I..I, Z..Z Y I..I for each slot, then Z..Z
    gens = []
    for j in range(m):
        for p in (_X, _Y):
            gens.append(_kron_all([_Z] * j + [p] + [_I2] * (m - j - 1)))
    gens.append(_kron_all([_Z] * m))
    return tuple(gens)


def anticommuting_observables(n: int) -> list[Observable]:
    n = _check_n(n)
    m = BellScenario(n).qubits_per_wing
    gens = _anticommuting_generators(m)
    return [Observable(gens[y].copy(), f"B{y + 1}") for y in range(n)]


def alice_observables(n: int) -> list[Observable]:
    n = _check_n(n)
    bobs = np.array([b.matrix for b in anticommuting_observables(n)])
    coeffs = bell_coefficients(n).matrix
    out = []
    for i, row in enumerate(coeffs):
        combo = np.tensordot(row.astype(complex), bobs, axes=1)
        out.append(Observable(combo.T / np.sqrt(n), f"A{i + 1}"))
    return out


def anticommutation_residual(observables: Sequence[Observable]) -> float:
    """max over i != j of ||B_i B_j + B_j B_i|| and over i of ||B_i^2 - I||."""
    worst = 0.0
    mats = [o.matrix for o in observables]
    eye = np.eye(mats[0].shape[0])
    for i, a in enumerate(mats):
        worst = max(worst, np.linalg.norm(a @ a - eye, ord=2))
        for b in mats[i + 1:]:
            worst = max(worst, np.linalg.norm(a @ b + b @ a, ord=2))
    return float(worst)


def maximally_entangled_state(m: int) -> DensityOperator:
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    d = 2**m
    psi = np.eye(d, dtype=complex).reshape(d * d) / np.sqrt(d)
    return DensityOperator(np.outer(psi, psi.conj()))


def partial_trace(rho: np.ndarray, d_a: int, d_b: int, keep: str) -> np.ndarray:
    t = rho.reshape(d_a, d_b, d_a, d_b)
    if keep == "A":
        return np.einsum("ibjb->ij", t)
    if keep == "B":
        return np.einsum("aiaj->ij", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def unsharp_instrument(observable: Observable, sharpness: float) -> UnsharpInstrument:
    eta = _check_sharpness(sharpness)
    mat = observable.matrix
    eye = np.eye(mat.shape[0])
    if np.linalg.norm(mat - mat.conj().T, ord=2) > HERMITIAN_TOL or np.linalg.norm(mat @ mat - eye, ord=2) > 1e-10:
        raise ValueError(f"observable {observable.label or ''} is not a Hermitian involution")
    p_plus, p_minus = spectral_projectors(mat)
    # effects E± = (1±η)/2 Π+ + (1∓η)/2 Π-; Π± commute so the square root is entrywise on weights
    hi, lo = np.sqrt((1 + eta) / 2), np.sqrt((1 - eta) / 2)
    return UnsharpInstrument(hi * p_plus + lo * p_minus, lo * p_plus + hi * p_minus, eta)


def _apply_local(rho: np.ndarray, op: np.ndarray, d: int, wing: str) -> np.ndarray:
    """(op ⊗ I) rho (op ⊗ I)^† or (I ⊗ op) rho (I ⊗ op)^†, without forming the kron."""
    t = rho.reshape(d, d, d, d)
    if wing == "A":
        t = np.einsum("ia,abkc,jk->ibjc", op, t, op.conj(), optimize=True)
    else:
        t = np.einsum("ib,abck,jk->aicj", op, t, op.conj(), optimize=True)
    return t.reshape(d * d, d * d)


def wing_average_channel(
    state: DensityOperator,
    observables: Sequence[Observable],
    sharpness: float,
    wing: str,
) -> DensityOperator:
    """Uniform average over inputs of the Lüders instruments on one wing.

    Equivalent to sqrt(1-η²)·ρ + (1-sqrt(1-η²))·mean_x Σ± Π± ρ Π±.
    """
    if wing not in ("A", "B"):
        raise ValueError(f"wing must be 'A' or 'B', got {wing!r}")
    eta = _check_sharpness(sharpness)
    rho = state.matrix
    d = observables[0].dim
    if d * d != rho.shape[0]:
        raise ValueError(f"observables of dimension {d} do not act on a {rho.shape[0]}-dim joint state")
    if eta == 0.0:
        return DensityOperator(rho.copy())
    out = np.zeros_like(rho)
    for obs in observables:
        inst = unsharp_instrument(obs, eta)
        out += _apply_local(rho, inst.kraus_plus, d, wing)
        out += _apply_local(rho, inst.kraus_minus, d, wing)
    return DensityOperator(out / len(observables))


def sequential_state(n: int, schedule: SharpnessSchedule) -> DensityOperator:
    """State handed to the last scheduled pair after all predecessors measured."""
    n = _check_sim_n(n)
    scen = BellScenario(n)
    state = maximally_entangled_state(scen.qubits_per_wing)
    alices = alice_observables(n)
    bobs = anticommuting_observables(n)
    for eta in schedule.alice[:-1]:
        state = wing_average_channel(state, alices, eta, "A")
    for chi in schedule.bob[:-1]:
        state = wing_average_channel(state, bobs, chi, "B")
    return state


@lru_cache(maxsize=16)
def _bell_operator_cached(n: int) -> np.ndarray:
    coeffs = bell_coefficients(n).matrix
    alices = [a.matrix for a in alice_observables(n)]
    bobs = [b.matrix for b in anticommuting_observables(n)]
    # Σ_i A_i ⊗ (Σ_y c[i,y] B_y)
    op = np.zeros((alices[0].shape[0] * bobs[0].shape[0],) * 2, dtype=complex)
    for i, a in enumerate(alices):
        op += np.kron(a, np.tensordot(coeffs[i].astype(complex), np.array(bobs), axes=1))
    op.setflags(write=False)
    return op


def bell_operator(n: int) -> np.ndarray:
    return _bell_operator_cached(_check_sim_n(n))


def bell_expectation(state: DensityOperator, n: int, eta_k: float, chi_l: float) -> float:
    op = bell_operator(n)
    if state.dim != op.shape[0]:
        raise ValueError(f"state dimension {state.dim} does not match scenario n={n}")
    eta = _check_sharpness(eta_k, "eta_k")
    chi = _check_sharpness(chi_l, "chi_l")
    return eta * chi * float(np.real(np.trace(state.matrix @ op)))


def simulated_sequential_value(n: int, schedule: SharpnessSchedule) -> float:
    state = sequential_state(n, schedule)
    return bell_expectation(state, n, schedule.alice[-1], schedule.bob[-1])


def _alice_index(x: tuple) -> tuple[int, int]:
    """(sign, representative index) with A(x̄) = -A(x); representatives lead with 0."""
    if x[0] == 0:
        return 1, int("".join(map(str, x)), 2)
    return -1, int("".join(str(1 - b) for b in x), 2)


@dataclass
class ParityReport:
    n: int
    parity_strings: list
    operator_norms: list
    trace_distances: list
    parity_set_size: int
    nontrivial_count_quoted: int

    @property
    def max_operator_norm(self) -> float:
        return max(self.operator_norms, default=0.0)

    @property
    def max_trace_distance(self) -> float:
        return max(self.trace_distances, default=0.0)

    def passed(self, tol: float = 1e-10) -> bool:
        return self.max_operator_norm < tol and self.max_trace_distance < tol


def parity_obliviousness_check(n: int, sharpness: float = 1.0) -> ParityReport:
    """Check parity-obliviousness over the full cube {0,1}^n.

    Operator condition: ||Σ_x (-1)^(s·x) A_x|| for every parity string s.
    State condition: trace distance between the uniform mixtures of Bob's
    steered states with s·x = 0 and s·x = 1, where ρ_x is Bob's
    conditional state after Alice obtains the outcome encoding x.
    """
    n = _check_sim_n(n)
    scen = BellScenario(n)
    d = scen.local_dim
    alices = alice_observables(n)
    rho = maximally_entangled_state(scen.qubits_per_wing).matrix
    cube = list(itertools.product((0, 1), repeat=n))

    steered = {}
    signed = {}
    for x in cube:
        sign, idx = _alice_index(x)
        obs = alices[idx]
        signed[x] = sign * obs.matrix
        inst = unsharp_instrument(obs, sharpness)
        kraus = inst.kraus_plus if sign > 0 else inst.kraus_minus
        post = _apply_local(rho, kraus, d, "A")
        bob = partial_trace(post, d, d, "B")
        steered[x] = bob / np.real(np.trace(bob))

    strings, norms, dists = [], [], []
    half = 2 ** (n - 1)
    for s in parity_set(n):
        op_sum = np.zeros((d, d), dtype=complex)
        even = np.zeros((d, d), dtype=complex)
        odd = np.zeros((d, d), dtype=complex)
        for x in cube:
            par = sum(a * b for a, b in zip(s, x)) % 2
            op_sum += (-1) ** par * signed[x]
            if par:
                odd += steered[x]
            else:
                even += steered[x]
        diff = (even - odd) / half
        strings.append(s)
        norms.append(float(np.linalg.norm(op_sum, ord=2)))
        dists.append(float(0.5 * np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2)).sum()))

    return ParityReport(
        n=n,
        parity_strings=strings,
        operator_norms=norms,
        trace_distances=dists,
        parity_set_size=len(strings),
        nontrivial_count_quoted=2 ** (n - 1) - n,
    )


def porac_success_simulated(n: int, schedule: SharpnessSchedule) -> float:
    """PORAC success of the last pair from Born-rule joint outcome probabilities.

    Alice's input x ranges over the full cube; she measures A_x (using the
    complement relation) and Bob guesses x_y from the product of outcomes,
    b = a·(-1)^(x_y) being the winning event.
    """
    state = sequential_state(n, schedule)
    scen = BellScenario(n)
    d = scen.local_dim
    alices = alice_observables(n)
    bobs = anticommuting_observables(n)
    eta, chi = schedule.alice[-1], schedule.bob[-1]
    rho = state.matrix

    alice_effects = []
    for obs in alices:
        inst = unsharp_instrument(obs, eta)
        alice_effects.append((inst.kraus_plus @ inst.kraus_plus, inst.kraus_minus @ inst.kraus_minus))
    bob_effects = []
    for obs in bobs:
        inst = unsharp_instrument(obs, chi)
        bob_effects.append((inst.kraus_plus @ inst.kraus_plus, inst.kraus_minus @ inst.kraus_minus))

    # joint[i][y][a][b] with a, b in {0: +1, 1: -1}
    joint = np.zeros((len(alices), n, 2, 2))
    for i, ea in enumerate(alice_effects):
        for y, eb in enumerate(bob_effects):
            for a in range(2):
                for b in range(2):
                    joint[i, y, a, b] = np.real(np.trace(rho @ np.kron(ea[a], eb[b])))

    total = 0.0
    cube = list(itertools.product((0, 1), repeat=n))
    for x in cube:
        sign, i = _alice_index(x)
        for y in range(n):
            want = (-1) ** x[y]
            for a in range(2):
                for b in range(2):
                    outcome_a = sign * (1 - 2 * a)
                    if outcome_a * (1 - 2 * b) == want:
                        total += joint[i, y, a, b]
    return total / (len(cube) * n)


def porac_success_from_simulation(n: int, schedule: SharpnessSchedule) -> float:
    return porac_quantum_success_from_bell(n, simulated_sequential_value(n, schedule))
