import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqbell.bellcore import (
    BellScenario,
    SharpnessSchedule,
    bell_coefficients,
    degradation_factor,
    optimal_quantum_value,
    porac_quantum_success_from_bell,
    sequential_value_closed_form,
)
from seqbell.quantum import (
    CapacityError,
    DensityOperator,
    Observable,
    alice_observables,
    anticommutation_residual,
    anticommuting_observables,
    bell_expectation,
    bell_operator,
    maximally_entangled_state,
    parity_obliviousness_check,
    partial_trace,
    porac_success_simulated,
    sequential_state,
    simulated_sequential_value,
    spectral_projectors,
    unsharp_instrument,
    wing_average_channel,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def random_density(d, rng):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def expect(rho, op):
    return float(np.real(np.trace(rho @ op)))


# -- observables -------------------------------------------------------------

def test_n2_n3_are_single_qubit_paulis():
    b2 = anticommuting_observables(2)
    assert [o.dim for o in b2] == [2, 2]
    assert np.allclose(b2[0].matrix, X) and np.allclose(b2[1].matrix, Y)
    b3 = anticommuting_observables(3)
    assert np.allclose(b3[2].matrix, Z)
    assert anticommutation_residual(b3) < 1e-15


def test_n5_anticommutators():
    obs = anticommuting_observables(5)
    assert all(o.dim == 4 for o in obs)
    eye = np.eye(4)
    for (i, a), (j, b) in itertools.product(enumerate(obs), repeat=2):
        anti = a.matrix @ b.matrix + b.matrix @ a.matrix
        assert np.linalg.norm(anti - 2 * (i == j) * eye) < 1e-12


@pytest.mark.parametrize("n", range(2, 11))
def test_anticommutation_residual(n):
    obs = anticommuting_observables(n)
    assert len(obs) == n
    assert anticommutation_residual(obs) < 1e-12
    for o in obs:
        assert np.linalg.norm(o.matrix - o.matrix.conj().T) < 1e-12


def test_anticommuting_rejects_small_n():
    with pytest.raises(ValueError):
        anticommuting_observables(1)


def test_alice_n2():
    a = alice_observables(2)
    assert np.allclose(a[0].matrix, (X + Y).T / math.sqrt(2))
    assert np.allclose(a[1].matrix, (X - Y).T / math.sqrt(2))


@pytest.mark.parametrize("n", range(2, 9))
def test_alice_involutions_and_combination_square(n):
    alices = alice_observables(n)
    assert len(alices) == 2 ** (n - 1)
    bobs = np.array([b.matrix for b in anticommuting_observables(n)])
    eye = np.eye(alices[0].dim)
    for row, a in zip(bell_coefficients(n).matrix, alices):
        assert np.linalg.norm(a.matrix @ a.matrix - eye) < 1e-12
        assert np.linalg.norm(a.matrix - a.matrix.conj().T) < 1e-12
        combo = np.tensordot(row.astype(complex), bobs, axes=1)
        assert np.linalg.norm(combo @ combo - n * eye) < 1e-12


def test_spectral_projectors_dead_zone():
    with pytest.raises(ValueError):
        spectral_projectors(np.diag([1.0, 0.0]))


# -- states ------------------------------------------------------------------

def test_bell_state_correlations():
    rho = maximally_entangled_state(1).matrix
    assert expect(rho, np.kron(Z, Z)) == pytest.approx(1)
    assert expect(rho, np.kron(X, X)) == pytest.approx(1)
    assert expect(rho, np.kron(Y, Y)) == pytest.approx(-1)


def test_m2_purity_and_marginal_entropy():
    state = maximally_entangled_state(2)
    assert state.purity() == pytest.approx(1, abs=1e-12)
    for keep in "AB":
        marg = partial_trace(state.matrix, 4, 4, keep)
        evals = np.linalg.eigvalsh(marg)
        entropy = -sum(p * math.log2(p) for p in evals if p > 1e-15)
        assert entropy == pytest.approx(2.0, abs=1e-12)


def test_maximally_entangled_rejects_m0():
    with pytest.raises(ValueError):
        maximally_entangled_state(0)


# -- instruments -------------------------------------------------------------

def test_sharp_instrument_is_projective():
    obs = anticommuting_observables(3)[0]
    inst = unsharp_instrument(obs, 1.0)
    plus, minus = spectral_projectors(obs.matrix)
    assert np.allclose(inst.kraus_plus, plus, atol=1e-12)
    assert np.allclose(inst.kraus_minus, minus, atol=1e-12)


def test_trivial_instrument_is_identity_channel():
    obs = alice_observables(3)[1]
    inst = unsharp_instrument(obs, 0.0)
    assert np.allclose(inst.kraus_plus @ inst.kraus_plus, np.eye(2) / 2)
    rng = np.random.default_rng(1)
    rho = random_density(4, rng)
    state = wing_average_channel(DensityOperator(rho), alice_observables(3), 0.0, "A")
    assert np.allclose(state.matrix, rho, atol=1e-14)


@pytest.mark.parametrize("eta", [0.1, 0.5, 0.7598, 0.99])
def test_instrument_matches_dephasing_form(eta):
    rng = np.random.default_rng(7)
    obs = anticommuting_observables(5)[3]
    inst = unsharp_instrument(obs, eta)
    assert inst.completeness_residual() < 1e-12
    for k in (inst.kraus_plus, inst.kraus_minus):
        assert np.linalg.norm(k - k.conj().T) < 1e-12
        assert np.linalg.eigvalsh(k).min() > -1e-12
    rho = random_density(obs.dim, rng)
    plus, minus = spectral_projectors(obs.matrix)
    lhs = inst.kraus_plus @ rho @ inst.kraus_plus + inst.kraus_minus @ rho @ inst.kraus_minus
    s = math.sqrt(1 - eta**2)
    rhs = s * rho + (1 - s) * (plus @ rho @ plus + minus @ rho @ minus)
    assert np.linalg.norm(lhs - rhs) < 1e-12


def test_instrument_rejects_non_involution():
    with pytest.raises(ValueError):
        unsharp_instrument(Observable(np.diag([2.0, -1.0])), 0.5)
    with pytest.raises(ValueError):
        unsharp_instrument(anticommuting_observables(2)[0], 1.2)


# -- channel -----------------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.floats(0, 1), st.sampled_from("AB"), st.integers(0, 2**32 - 1))
def test_channel_validity(n, eta, wing, seed):
    rng = np.random.default_rng(seed)
    d = BellScenario(n).local_dim
    rho = DensityOperator(random_density(d * d, rng))
    obs = alice_observables(n) if wing == "A" else anticommuting_observables(n)
    out = wing_average_channel(rho, obs, eta, wing)
    res = out.validity_residuals()
    assert res["trace"] < 1e-12
    assert res["hermiticity"] < 1e-12
    assert res["min_eigenvalue"] >= -1e-10


def test_channel_acts_on_the_right_factor():
    rng = np.random.default_rng(3)
    rho = random_density(4, rng)
    obs = alice_observables(2)
    out = wing_average_channel(DensityOperator(rho), obs, 1.0, "A")
    # Bob's marginal is untouched by anything Alice does
    assert np.allclose(partial_trace(out.matrix, 2, 2, "B"), partial_trace(rho, 2, 2, "B"))


def test_channel_rejects_bad_dimension():
    with pytest.raises(ValueError):
        wing_average_channel(maximally_entangled_state(2), anticommuting_observables(2), 0.5, "A")
    with pytest.raises(ValueError):
        wing_average_channel(maximally_entangled_state(1), anticommuting_observables(2), 0.5, "C")


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_wings_commute(n):
    rng = np.random.default_rng(n)
    d = BellScenario(n).local_dim
    rho = DensityOperator(random_density(d * d, rng))
    alices, bobs = alice_observables(n), anticommuting_observables(n)
    ab = wing_average_channel(wing_average_channel(rho, alices, 0.6, "A"), bobs, 0.8, "B")
    ba = wing_average_channel(wing_average_channel(rho, bobs, 0.8, "B"), alices, 0.6, "A")
    assert np.linalg.norm(ab.matrix - ba.matrix) < 1e-12


@pytest.mark.parametrize("chi", [0.3, 0.8, 1.0])
def test_bob_channel_chsh_degradation(chi):
    fresh = maximally_entangled_state(1)
    after = wing_average_channel(fresh, anticommuting_observables(2), chi, "B")
    ratio = bell_expectation(after, 2, 1, 1) / bell_expectation(fresh, 2, 1, 1)
    assert ratio == pytest.approx((1 + math.sqrt(1 - chi**2)) / 2, abs=1e-12)


def test_alice_channel_n3_degradation():
    fresh = maximally_entangled_state(1)
    after = wing_average_channel(fresh, alice_observables(3), 0.7598, "A")
    ratio = bell_expectation(after, 3, 1, 1) / optimal_quantum_value(3)
    assert ratio == pytest.approx(degradation_factor(3, 0.7598), abs=1e-12)
    assert ratio == pytest.approx(0.7668, abs=5e-5)


# -- sequential state & Bell values ------------------------------------------

def test_single_pair_schedule_keeps_initial_state():
    state = sequential_state(3, SharpnessSchedule((0.4,), (0.9,)))
    assert np.allclose(state.matrix, maximally_entangled_state(1).matrix)


def test_sharp_first_pair_n2():
    value = simulated_sequential_value(2, SharpnessSchedule.symmetric((1.0, 1.0)))
    assert value == pytest.approx(2 * math.sqrt(2) / 4, abs=1e-12)


def test_second_pair_n3_pnc():
    eta = 3 ** -0.25
    value = simulated_sequential_value(3, SharpnessSchedule.symmetric((eta, 1.0)))
    assert value == pytest.approx(4.073, abs=1e-3)


@pytest.mark.parametrize("n", range(2, 9))
def test_optimal_value_by_simulation(n):
    fresh = maximally_entangled_state(BellScenario(n).qubits_per_wing)
    assert bell_expectation(fresh, n, 1.0, 1.0) == pytest.approx(optimal_quantum_value(n), abs=1e-10)


def test_bell_expectation_zero_sharpness_and_dim_check():
    fresh = maximally_entangled_state(1)
    assert bell_expectation(fresh, 3, 0.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        bell_expectation(fresh, 4, 1.0, 1.0)


@settings(max_examples=50, deadline=None)
@given(
    st.integers(2, 5),
    st.lists(st.floats(0, 1), min_size=1, max_size=3),
    st.lists(st.floats(0, 1), min_size=1, max_size=3),
)
def test_simulation_matches_closed_form(n, alice, bob):
    sched = SharpnessSchedule(tuple(alice), tuple(bob))
    sim = simulated_sequential_value(n, sched)
    assert sim == pytest.approx(sequential_value_closed_form(n, sched), abs=1e-8)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_representative_invariance(n):
    """Swapping representatives for their complements (A -> -A) leaves the Bell value alone."""
    rng = np.random.default_rng(11)
    alices = [a.matrix for a in alice_observables(n)]
    bobs = [b.matrix for b in anticommuting_observables(n)]
    coeffs = bell_coefficients(n).matrix
    state = sequential_state(n, SharpnessSchedule((0.4, 0.9), (0.7, 0.8))).matrix
    reference = expect(state, bell_operator(n))
    for _ in range(5):
        flips = rng.integers(0, 2, size=len(alices))
        op = np.zeros_like(state)
        for i, (a, row) in enumerate(zip(alices, coeffs)):
            sign = -1 if flips[i] else 1
            # complement string has every coefficient negated, and A(x̄) = -A(x)
            for y, b in enumerate(bobs):
                op += (sign * row[y]) * np.kron(sign * a, b)
        assert abs(expect(state, op) - reference) < 1e-12


def test_simulation_capacity():
    with pytest.raises(CapacityError):
        sequential_state(13, SharpnessSchedule((1.0,), (1.0,)))


# -- parity obliviousness ----------------------------------------------------

def test_parity_n3_single_string():
    report = parity_obliviousness_check(3)
    idx = report.parity_strings.index((1, 1, 0))
    assert report.operator_norms[idx] < 1e-12
    assert len(report.parity_strings) == 4
    assert report.passed(1e-10)


def test_parity_n4_counts():
    report = parity_obliviousness_check(4)
    assert report.parity_set_size == 11
    assert report.nontrivial_count_quoted == 4
    assert report.max_operator_norm < 1e-10
    assert report.max_trace_distance < 1e-10


def test_half_cube_sum_does_not_vanish():
    # over representatives alone, weight-2 strings touching the leading bit survive
    alices = [a.matrix for a in alice_observables(3)]
    reps = bell_coefficients(3).representatives
    s = (1, 1, 0)
    total = sum((-1) ** (np.dot(s, x) % 2) * a for x, a in zip(reps, alices))
    assert np.linalg.norm(total, ord=2) > 0.1


@pytest.mark.parametrize("eta", [0.3, 0.9])
def test_parity_holds_for_unsharp_encoding(eta):
    assert parity_obliviousness_check(4, sharpness=eta).passed(1e-10)


# -- PORAC -------------------------------------------------------------------

def test_porac_sharp_n3():
    p = porac_success_simulated(3, SharpnessSchedule((1.0,), (1.0,)))
    assert p == pytest.approx(0.788675, abs=1e-6)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_porac_zero_final_sharpness(n):
    assert porac_success_simulated(n, SharpnessSchedule((0.5, 0.0), (0.2, 1.0))) == pytest.approx(0.5, abs=1e-12)


def test_porac_n2_after_critical_pair():
    p = porac_success_simulated(2, SharpnessSchedule.symmetric((0.8409, 1.0)))
    assert p == pytest.approx(0.5 + 1.679 / 8, abs=2e-4)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 4), st.lists(st.floats(0, 1), min_size=1, max_size=3), st.floats(0, 1))
def test_porac_matches_bell_relation(n, etas, chi):
    sched = SharpnessSchedule(tuple(etas), (0.5, chi))
    sim = simulated_sequential_value(n, sched)
    assert porac_success_simulated(n, sched) == pytest.approx(porac_quantum_success_from_bell(n, sim), abs=1e-10)
