"""Sequential sharing of non-locality and preparation contextuality in the
n-input bipartite Bell scenario."""

__version__ = "0.1.0"

from .bellcore import (  # noqa: E402
    BellCoefficients,
    BellScenario,
    CriticalSchedule,
    SharpnessSchedule,
    bell_coefficients,
    critical_bound_approx,
    critical_schedule_exact,
    critical_sharpness_bisect,
    degradation_factor,
    local_bound,
    max_pair_values,
    max_sharing_pairs,
    optimal_quantum_value,
    parity_set,
    pnc_bound,
    porac_classical_success,
    porac_quantum_success_from_bell,
    sequential_value_closed_form,
)
from .quantum import CapacityError  # noqa: E402
