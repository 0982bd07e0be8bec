"""
Discord-type functionals evaluated at a fixed measurement.

Every function here takes the measurement as an argument; minimization over
bases lives in `gqdemon.optimizer`. Values are in bits.
"""

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import LabelError
from .measurement import (
    PROBABILITY_FLOOR,
    ProductBasisSpec,
    QubitBasis,
    apply_channel,
    mid_basis,
    outcome_distribution,
    selective_outcomes,
)
from .qcore import DensityMatrix, entropy_bits, partial_trace, shannon_entropy, von_neumann_entropy


@dataclass(frozen=True)
class FixedMeasurementValue:
    """A functional evaluated at one measurement, with an optional breakdown."""

    value: float
    spec: ProductBasisSpec
    decomposition: Optional[Mapping[str, float]] = None
    fallback: tuple[str, ...] = field(default=())


def _single(rho: DensityMatrix, apparatus: str, basis: QubitBasis) -> ProductBasisSpec:
    rho.layout.index(apparatus)
    return ProductBasisSpec({apparatus: basis})


def _system(rho: DensityMatrix, apparatus: str) -> tuple[str, ...]:
    system = rho.layout.complement(apparatus)
    if not system:
        raise LabelError(f"apparatus {apparatus!r} leaves no system subsystems")
    return system


def mutual_information(rho: DensityMatrix, partition: Sequence[Sequence[str]]) -> float:
    """I = sum_k S(rho_k) - S(rho) over the groups of `partition`."""
    groups = [tuple([g] if isinstance(g, str) else g) for g in partition]
    flat = [label for group in groups for label in group]
    if any(not group for group in groups):
        raise LabelError("partition groups must be non-empty")
    if len(flat) != len(set(flat)) or set(flat) != set(rho.labels):
        raise LabelError(f"partition {groups} does not split {rho.labels} into disjoint groups")
    marginals = sum(von_neumann_entropy(partial_trace(rho, group)) for group in groups)
    return marginals - von_neumann_entropy(rho)


def _singletons(rho: DensityMatrix) -> list[tuple[str]]:
    return [(label,) for label in rho.labels]


def measured_conditional_entropy(rho: DensityMatrix, apparatus: str, basis: QubitBasis) -> float:
    """S(rho_S | {Pi_A}) = sum_i p_i S(rho_i) over the system's post-measurement states."""
    _system(rho, apparatus)
    total = 0.0
    for outcome in selective_outcomes(rho, _single(rho, apparatus, basis)):
        if outcome.probability < PROBABILITY_FLOOR or outcome.system_state is None:
            continue
        total += outcome.probability * von_neumann_entropy(outcome.system_state)
    return total


def conditional_entropy(rho: DensityMatrix, apparatus: str) -> float:
    """S(rho_S | rho_A) = S(rho) - S(rho_A)."""
    return von_neumann_entropy(rho) - von_neumann_entropy(partial_trace(rho, apparatus))


def locally_accessible_joint_entropy(
    rho: DensityMatrix, apparatus: str, basis: QubitBasis
) -> float:
    """S_A(rho) = H({p_a}) + S(rho_S | {Pi_A})."""
    p = outcome_distribution(rho, apparatus, basis)
    return shannon_entropy(p / p.sum()) + measured_conditional_entropy(rho, apparatus, basis)


def locally_accessible_mutual_information(
    rho: DensityMatrix, apparatus: str, basis: QubitBasis
) -> float:
    """J_A(rho) = S(rho_S) + S(rho_A) - S_A(rho)."""
    system = _system(rho, apparatus)
    return (
        von_neumann_entropy(partial_trace(rho, system))
        + von_neumann_entropy(partial_trace(rho, apparatus))
        - locally_accessible_joint_entropy(rho, apparatus, basis)
    )


def thermal_qd_fixed(rho: DensityMatrix, apparatus: str, basis: QubitBasis) -> FixedMeasurementValue:
    """S_A(rho) - S(rho) before minimization over the apparatus basis.

    The decomposition holds the mutual-information form:
    [I(rho) - I(Phi_A(rho))] + [H({p_a}) - S(rho_A)], with I taken between the
    system (all other labels) and the apparatus.
    """
    system = _system(rho, apparatus)
    spec = _single(rho, apparatus, basis)
    value = locally_accessible_joint_entropy(rho, apparatus, basis) - von_neumann_entropy(rho)

    split = [system, (apparatus,)]
    measured = apply_channel(rho, spec)
    p = outcome_distribution(rho, apparatus, basis)
    decomposition = {
        "mutual_information_loss": mutual_information(rho, split) - mutual_information(measured, split),
        "local": shannon_entropy(p / p.sum()) - von_neumann_entropy(partial_trace(rho, apparatus)),
    }
    return FixedMeasurementValue(value, spec, decomposition)


def original_qd_fixed(rho: DensityMatrix, apparatus: str, basis: QubitBasis) -> float:
    """S(rho_S | {Pi_A}) - S(rho_S | rho_A), the usual discord integrand."""
    return measured_conditional_entropy(rho, apparatus, basis) - conditional_entropy(rho, apparatus)


def _require_complete(rho: DensityMatrix, spec: ProductBasisSpec) -> None:
    spec.check(rho.layout)
    if not spec.covers(rho.layout):
        missing = sorted(set(rho.labels) - set(spec.labels))
        raise LabelError(f"measurement spec must cover every subsystem; missing {missing}")


def gqd_fixed(rho: DensityMatrix, spec: ProductBasisSpec) -> FixedMeasurementValue:
    """S(Phi(rho)) - S(rho) for a product measurement on every subsystem.

    The decomposition exposes the mutual-information form
    I(rho) - I(Phi(rho)) + sum_k [H({p_k}) - S(rho_k)].
    """
    _require_complete(rho, spec)
    measured = apply_channel(rho, spec)
    value = von_neumann_entropy(measured) - von_neumann_entropy(rho)

    decomposition = {
        "mutual_information_loss": mutual_information(rho, _singletons(rho))
        - mutual_information(measured, _singletons(rho)),
    }
    for label in rho.labels:
        p = outcome_distribution(rho, label, spec[label])
        local = float(entropy_bits(p / p.sum())) - von_neumann_entropy(partial_trace(rho, label))
        decomposition[f"local[{label}]"] = local
    return FixedMeasurementValue(value, spec, decomposition)


def symmetric_thermal_qd_fixed(rho: DensityMatrix, spec: ProductBasisSpec) -> float:
    """Bipartite symmetric thermal QD in its mutual-information form.

    Defined for exactly two subsystems; agrees with `gqd_fixed`.
    """
    if rho.n != 2:
        raise LabelError(f"symmetric thermal QD needs two subsystems, got {rho.n}")
    _require_complete(rho, spec)
    split = _singletons(rho)
    total = mutual_information(rho, split) - mutual_information(apply_channel(rho, spec), split)
    for label in rho.labels:
        p = outcome_distribution(rho, label, spec[label])
        total += shannon_entropy(p / p.sum()) - von_neumann_entropy(partial_trace(rho, label))
    return total


def _check_order(rho: DensityMatrix, order: Sequence[str]) -> tuple[str, ...]:
    order = tuple(order)
    if len(order) != rho.n or set(order) != set(rho.labels):
        raise LabelError(f"measurement order {order} is not a permutation of {rho.labels}")
    return order


def chained_decomposition(
    rho: DensityMatrix, spec: ProductBasisSpec, order: Optional[Sequence[str]] = None
) -> list[float]:
    """Per-step thermal QDs along `order`, each on the state already measured before it.

    Step i is thermal_qd_fixed(Phi_{A_1..A_{i-1}}(rho), A_i); the steps sum to
    gqd_fixed(rho, spec).
    """
    _require_complete(rho, spec)
    order = _check_order(rho, rho.labels if order is None else order)
    if rho.n == 1:
        return [gqd_fixed(rho, spec).value]
    steps = []
    state = rho
    for label in order:
        steps.append(thermal_qd_fixed(state, label, spec[label]).value)
        state = apply_channel(state, spec.restrict([label]))
    return steps


def mid_multipartite(rho: DensityMatrix) -> FixedMeasurementValue:
    """GQD functional at the MID basis; no optimization involved.

    `fallback` lists subsystems whose degenerate marginal forced the computational basis.
    """
    basis = mid_basis(rho)
    fixed = gqd_fixed(rho, basis.spec)
    return FixedMeasurementValue(fixed.value, fixed.spec, fixed.decomposition, basis.fallback)


def mid_chained_decomposition(
    rho: DensityMatrix, order: Optional[Sequence[str]] = None
) -> list[float]:
    """The MID value split along `order` by the same chaining rule."""
    return chained_decomposition(rho, mid_basis(rho).spec, order)


def werner_ghz_thermal_gqd(lam: float) -> float:
    """Closed-form thermal GQD of the Werner-GHZ state, attained in the sigma_z basis."""
    a = (1 + 7 * lam) / 8
    b = (1 - lam) / 8
    c = (1 + 3 * lam) / 8
    terms = -entropy_bits(np.array([[a], [b], [c]]))
    return float(terms[0] + terms[1] - 2 * terms[2])
