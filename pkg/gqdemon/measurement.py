"""
Local rank-one projective measurements on qubits.

Bases are parametrized by Bloch angles (theta, phi). A `ProductBasisSpec`
assigns one basis to each measured subsystem; the non-selective channel
Phi(rho) = sum_k Pi_k rho Pi_k acts as the identity on unmeasured subsystems.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import LabelError, ValidationError
from .qcore import (
    DensityMatrix,
    LabelSet,
    SubsystemLayout,
    _as_labels,
    partial_trace,
    spectrum,
)


PROBABILITY_FLOOR = 1e-12
MID_DEGENERACY_GAP = 1e-9
_POLE_TOL = 1e-14


@dataclass(frozen=True)
class QubitBasis:
    """Orthonormal qubit basis {|v>, |v_perp>} with |v> = (cos(theta/2), e^{i phi} sin(theta/2)).

    Angles are wrapped into theta in [0, pi], phi in [0, 2 pi); at the poles phi
    is set to 0 since the projectors do not depend on it.
    """

    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self) -> None:
        theta = float(self.theta)
        phi = float(self.phi)
        if not (math.isfinite(theta) and math.isfinite(phi)):
            raise ValidationError("range", f"basis angles must be finite, got ({theta}, {phi})")
        theta %= 2 * math.pi
        if theta > math.pi:
            theta = 2 * math.pi - theta
            phi += math.pi
        if theta < _POLE_TOL or math.pi - theta < _POLE_TOL:
            phi = 0.0
        phi %= 2 * math.pi
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_vector(cls, vector) -> "QubitBasis":
        """Basis whose first element is `vector` up to a global phase."""
        v = np.asarray(vector, dtype=complex).reshape(2)
        v = v / np.linalg.norm(v)
        a, b = v
        theta = 2 * math.acos(min(max(abs(a), 0.0), 1.0))
        phi = float(np.angle(b) - np.angle(a)) if abs(b) > _POLE_TOL and abs(a) > _POLE_TOL else 0.0
        if abs(a) <= _POLE_TOL:
            theta = math.pi
        return cls(theta, phi)

    def vectors(self) -> np.ndarray:
        """Rows are the two basis vectors |v_0>, |v_1>."""
        c = math.cos(self.theta / 2)
        s = math.sin(self.theta / 2)
        phase = complex(math.cos(self.phi), math.sin(self.phi))
        return np.array([[c, phase * s], [-phase.conjugate() * s, c]], dtype=complex)

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        v0 = self.vectors()[0]
        p0 = np.outer(v0, v0.conj())
        return p0, np.eye(2) - p0

    def bloch_vector(self) -> np.ndarray:
        return np.array(
            [
                math.sin(self.theta) * math.cos(self.phi),
                math.sin(self.theta) * math.sin(self.phi),
                math.cos(self.theta),
            ]
        )

    def to_dict(self) -> dict[str, float]:
        return {"theta": self.theta, "phi": self.phi}


COMPUTATIONAL = QubitBasis(0.0, 0.0)


def make_basis(theta: float, phi: float) -> QubitBasis:
    """Rank-one projective qubit basis for the Bloch direction (theta, phi)."""
    return QubitBasis(theta, phi)


@dataclass(frozen=True)
class ProductBasisSpec:
    """Map from measured subsystem label to its local basis."""

    bases: Mapping[str, QubitBasis] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "bases", dict(self.bases))

    @classmethod
    def uniform(cls, labels: LabelSet, basis: QubitBasis) -> "ProductBasisSpec":
        return cls({label: basis for label in _as_labels(labels)})

    @classmethod
    def computational(cls, labels: LabelSet) -> "ProductBasisSpec":
        return cls.uniform(labels, COMPUTATIONAL)

    @classmethod
    def from_angles(cls, labels: Sequence[str], angles) -> "ProductBasisSpec":
        """Inverse of `angles`: consecutive (theta, phi) pairs per label."""
        angles = np.asarray(angles, dtype=float).reshape(-1)
        if angles.size != 2 * len(labels):
            raise ValidationError("spec", f"expected {2 * len(labels)} angles, got {angles.size}")
        return cls({label: QubitBasis(angles[2 * i], angles[2 * i + 1]) for i, label in enumerate(labels)})

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.bases)

    def __getitem__(self, label: str) -> QubitBasis:
        try:
            return self.bases[label]
        except KeyError:
            raise LabelError(f"no basis given for subsystem {label!r}") from None

    def __contains__(self, label: object) -> bool:
        return label in self.bases

    def angles(self, labels: Optional[Sequence[str]] = None) -> np.ndarray:
        labels = self.labels if labels is None else labels
        return np.array([a for label in labels for a in (self[label].theta, self[label].phi)])

    def restrict(self, labels: LabelSet) -> "ProductBasisSpec":
        return ProductBasisSpec({label: self[label] for label in _as_labels(labels)})

    def merged(self, other: "ProductBasisSpec") -> "ProductBasisSpec":
        return ProductBasisSpec({**self.bases, **other.bases})

    def check(self, layout: SubsystemLayout) -> None:
        """Raise LabelError if a measured label is not part of the layout."""
        layout.indices(self.labels)

    def covers(self, layout: SubsystemLayout) -> bool:
        return set(self.labels) == set(layout.labels)

    def to_dict(self) -> dict[str, dict[str, float]]:
        return {label: basis.to_dict() for label, basis in self.bases.items()}


def _apply_local(entries: np.ndarray, n: int, position: int, kraus: np.ndarray) -> np.ndarray:
    """sum_m K_m rho K_m^dagger with each K_m acting on qubit `position`."""
    left = 2**position
    right = 2 ** (n - position - 1)
    t = entries.reshape(left, 2, right, left, 2, right)
    out = np.einsum("max,ixkjyl,mby->iakjbl", kraus, t, kraus.conj())
    return out.reshape(entries.shape)


def _projector_stack(basis: QubitBasis) -> np.ndarray:
    v = basis.vectors()
    return np.einsum("ja,jx->jax", v, v.conj())


def _ordered(layout: SubsystemLayout, spec: ProductBasisSpec) -> list[tuple[int, str]]:
    spec.check(layout)
    return sorted((layout.index(label), label) for label in spec.labels)


def apply_channel(rho: DensityMatrix, spec: ProductBasisSpec) -> DensityMatrix:
    """Non-selective measurement Phi(rho) = sum_k Pi_k rho Pi_k."""
    entries = rho.entries
    for position, label in _ordered(rho.layout, spec):
        entries = _apply_local(entries, rho.n, position, _projector_stack(spec[label]))
    return DensityMatrix(rho.layout, entries, check=False)


@dataclass(frozen=True, eq=False)
class MeasurementOutcome:
    """One branch of a selective measurement.

    `post_state` is the normalized state on the full layout, or None when the
    branch probability is below 1e-12.
    """

    labels: tuple[str, ...]
    indices: tuple[int, ...]
    probability: float
    post_state: Optional[DensityMatrix]

    @property
    def index_string(self) -> str:
        return "".join(str(i) for i in self.indices)

    @property
    def absent(self) -> bool:
        return self.post_state is None

    @property
    def system_state(self) -> Optional[DensityMatrix]:
        """Post-measurement state of the unmeasured subsystems."""
        if self.post_state is None:
            return None
        rest = self.post_state.layout.complement(self.labels)
        if not rest:
            return None
        return partial_trace(self.post_state, rest)


def selective_outcomes(rho: DensityMatrix, spec: ProductBasisSpec) -> list[MeasurementOutcome]:
    """All outcomes of the product measurement with probabilities and post-states."""
    ordered = _ordered(rho.layout, spec)
    labels = tuple(label for _, label in ordered)
    stacks = [_projector_stack(spec[label]) for label in labels]

    outcomes = []
    for indices in itertools.product(range(2), repeat=len(ordered)):
        entries = rho.entries
        for (position, _), stack, j in zip(ordered, stacks, indices):
            entries = _apply_local(entries, rho.n, position, stack[j : j + 1])
        probability = float(np.real(np.trace(entries)))
        post = None
        if probability > PROBABILITY_FLOOR:
            post = DensityMatrix(rho.layout, entries / probability, check=False)
        outcomes.append(MeasurementOutcome(labels, indices, max(probability, 0.0), post))
    return outcomes


def outcome_distribution(rho: DensityMatrix, label: str, basis: QubitBasis) -> np.ndarray:
    """Outcome probabilities of measuring a single qubit in `basis`."""
    marginal = partial_trace(rho, label).entries
    v = basis.vectors()
    probabilities = np.real(np.einsum("ja,ab,jb->j", v.conj(), marginal, v))
    return np.clip(probabilities, 0.0, 1.0)


@dataclass(frozen=True)
class MIDBasis:
    """Eigenbases of the single-qubit marginals.

    `fallback` lists labels whose marginal was degenerate (gap < 1e-9) and were
    assigned the computational basis instead.
    """

    spec: ProductBasisSpec
    fallback: tuple[str, ...] = ()


def mid_basis(rho: DensityMatrix, measured: Optional[Iterable[str]] = None) -> MIDBasis:
    """Measurement-induced-disturbance basis: eigenprojectors of each marginal."""
    labels = rho.labels if measured is None else _as_labels(measured)
    bases = {}
    fallback = []
    for label in labels:
        values, vectors = spectrum(partial_trace(rho, label))
        if values[0] - values[1] < MID_DEGENERACY_GAP:
            bases[label] = COMPUTATIONAL
            fallback.append(label)
        else:
            bases[label] = QubitBasis.from_vector(vectors[:, 0])
    return MIDBasis(ProductBasisSpec(bases), tuple(fallback))
