"""
Dense density-matrix algebra for multi-qubit states.

Provides subsystem layout bookkeeping, validated density matrices and pure
states, tensor products, partial traces, spectra and entropies. All entropies
are in bits.
"""

import logging
import string
from dataclasses import InitVar, dataclass
from typing import Iterable, NamedTuple, Optional, Sequence, Union

import numpy as np
import scipy.linalg
from scipy.special import entr

from .errors import LabelError, NumericalError, ValidationError


logger = logging.getLogger(__name__)

VALIDATION_TOL = 1e-10
EIGEN_CLIP = 1e-12
MAX_QUBITS = 10
_LN2 = float(np.log(2.0))

LabelSet = Union[str, Iterable[str]]


def default_labels(n: int) -> tuple[str, ...]:
    """Return the default subsystem labels A, B, C, ... for n qubits."""
    if not 1 <= n <= MAX_QUBITS:
        raise ValidationError("range", f"qubit count must be in 1..{MAX_QUBITS}, got {n}")
    return tuple(string.ascii_uppercase[:n])


def _as_labels(labels: LabelSet) -> tuple[str, ...]:
    if isinstance(labels, str):
        return (labels,)
    return tuple(labels)


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered subsystem labels with their local dimensions (always 2)."""

    labels: tuple[str, ...]
    dims: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        dims = tuple(self.dims) if self.dims else (2,) * len(labels)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dims", dims)

        if not labels:
            raise ValidationError("shape", "a layout needs at least one subsystem")
        if len(set(labels)) != len(labels):
            raise LabelError(f"duplicate subsystem labels in {labels}")
        if len(dims) != len(labels):
            raise ValidationError("shape", "one dimension per label is required")
        if any(d != 2 for d in dims):
            raise ValidationError("shape", "only qubit subsystems (dimension 2) are supported")
        if len(labels) > MAX_QUBITS:
            raise ValidationError("range", f"at most {MAX_QUBITS} qubits are supported")

    @classmethod
    def qubits(cls, n: int, labels: Optional[Sequence[str]] = None) -> "SubsystemLayout":
        """Layout of n qubits, labelled A, B, C, ... unless labels are given."""
        if labels is None:
            labels = default_labels(n)
        elif len(labels) != n:
            raise LabelError(f"expected {n} labels, got {len(labels)}")
        return cls(tuple(labels))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, label: str) -> int:
        """Position of a label in the layout."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise LabelError(f"unknown subsystem label {label!r} (layout has {self.labels})") from None

    def indices(self, labels: LabelSet) -> list[int]:
        return [self.index(label) for label in _as_labels(labels)]

    def flatten(self, digits: Sequence[int]) -> int:
        """Row-major index of a tuple of local basis indices."""
        if len(digits) != self.n:
            raise ValidationError("shape", f"expected {self.n} digits, got {len(digits)}")
        k = 0
        for digit, size in zip(digits, self.dims):
            if not 0 <= digit < size:
                raise ValidationError("range", f"digit {digit} out of range for dimension {size}")
            k = k * size + digit
        return k

    def unflatten(self, k: int) -> tuple[int, ...]:
        """Inverse of `flatten`."""
        if not 0 <= k < self.dim:
            raise ValidationError("range", f"index {k} out of range for dimension {self.dim}")
        digits = []
        for size in reversed(self.dims):
            k, digit = divmod(k, size)
            digits.append(digit)
        return tuple(reversed(digits))

    def concat(self, other: "SubsystemLayout") -> "SubsystemLayout":
        collision = set(self.labels) & set(other.labels)
        if collision:
            raise LabelError(f"label collision in tensor product: {sorted(collision)}")
        return SubsystemLayout(self.labels + other.labels, self.dims + other.dims)

    def subset(self, labels: LabelSet) -> "SubsystemLayout":
        """Sub-layout with the given labels, kept in layout order."""
        positions = sorted(set(self.indices(labels)))
        return SubsystemLayout(
            tuple(self.labels[i] for i in positions),
            tuple(self.dims[i] for i in positions),
        )

    def complement(self, labels: LabelSet) -> tuple[str, ...]:
        excluded = set(_as_labels(labels))
        self.indices(excluded)
        return tuple(label for label in self.labels if label not in excluded)


def _hermitian_deviation(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix over a qubit layout.

    Construction validates the invariants unless `check=False` is passed, which
    library operations use for results that are valid by construction.
    """

    layout: SubsystemLayout
    entries: np.ndarray
    check: InitVar[bool] = True

    def __post_init__(self, check: bool) -> None:
        entries = np.array(self.entries, dtype=complex)
        dim = self.layout.dim
        if entries.shape != (dim, dim):
            raise ValidationError("shape", f"expected a {dim}x{dim} matrix, got {entries.shape}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        if check:
            self.validate()

    @classmethod
    def from_array(cls, entries, labels: Optional[Sequence[str]] = None) -> "DensityMatrix":
        """Build from a square array, inferring the qubit count from its side."""
        entries = np.asarray(entries, dtype=complex)
        side = entries.shape[0] if entries.ndim == 2 else 0
        n = int(round(np.log2(side))) if side > 0 else 0
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or side != 2**n or n < 1:
            raise ValidationError("shape", f"side must be a power of two >= 2, got {entries.shape}")
        return cls(SubsystemLayout.qubits(n, labels), entries)

    @classmethod
    def maximally_mixed(cls, layout: SubsystemLayout) -> "DensityMatrix":
        return cls(layout, np.eye(layout.dim) / layout.dim)

    @classmethod
    def basis_state(cls, layout: SubsystemLayout, bits: Sequence[int]) -> "DensityMatrix":
        """Projector onto a computational basis state |b_1 ... b_n><b_1 ... b_n|."""
        entries = np.zeros((layout.dim, layout.dim), dtype=complex)
        k = layout.flatten(bits)
        entries[k, k] = 1.0
        return cls(layout, entries)

    @property
    def n(self) -> int:
        return self.layout.n

    @property
    def labels(self) -> tuple[str, ...]:
        return self.layout.labels

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def validate(self) -> None:
        """Raise ValidationError naming the first violated invariant."""
        if not np.isfinite(self.entries).all():
            raise ValidationError("finite", "entries contain NaN or infinity")
        deviation = _hermitian_deviation(self.entries)
        if deviation > VALIDATION_TOL:
            raise ValidationError("hermitian", f"max |rho - rho^dagger| = {deviation:.3e}")
        trace = np.trace(self.entries)
        if abs(trace - 1.0) > VALIDATION_TOL:
            raise ValidationError("trace", f"trace = {trace.real:.12g}, expected 1")
        lowest = float(hermitian_eigenvalues(self.entries)[0])
        if lowest < -VALIDATION_TOL:
            raise ValidationError("positivity", f"smallest eigenvalue {lowest:.3e} < 0")


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit-norm state vector over a qubit layout."""

    layout: SubsystemLayout
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.shape != (self.layout.dim,):
            raise ValidationError(
                "shape", f"expected {self.layout.dim} amplitudes, got {amplitudes.shape[0]}"
            )
        if not np.isfinite(amplitudes).all():
            raise ValidationError("finite", "amplitudes contain NaN or infinity")
        norm = float(np.linalg.norm(amplitudes))
        if abs(norm - 1.0) > VALIDATION_TOL:
            raise ValidationError("norm", f"state norm is {norm:.12g}, expected 1")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def from_amplitudes(cls, amplitudes, labels: Optional[Sequence[str]] = None) -> "PureState":
        amplitudes = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log2(max(amplitudes.size, 1))))
        if amplitudes.size != 2**n or n < 1:
            raise ValidationError("shape", f"length must be a power of two >= 2, got {amplitudes.size}")
        return cls(SubsystemLayout.qubits(n, labels), amplitudes)

    @property
    def n(self) -> int:
        return self.layout.n

    def to_density(self) -> DensityMatrix:
        psi = self.amplitudes
        return DensityMatrix(self.layout, np.outer(psi, psi.conj()))

    def fidelity(self, other: "PureState") -> float:
        """|<self|other>|^2 for states on the same layout."""
        if other.layout.labels != self.layout.labels:
            raise LabelError(f"layouts differ: {self.layout.labels} vs {other.layout.labels}")
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)


class Spectrum(NamedTuple):
    """Eigenvalues sorted descending with matching eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray


def hermitian_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver did not converge: {exc}") from exc


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """Kronecker product a (x) b over the concatenated layout."""
    layout = a.layout.concat(b.layout)
    return DensityMatrix(layout, np.kron(a.entries, b.entries), check=False)


def partial_trace(rho: DensityMatrix, keep: LabelSet) -> DensityMatrix:
    """Trace out every subsystem not in `keep`.

    The kept subsystems stay in layout order.
    """
    keep_labels = _as_labels(keep)
    if not keep_labels:
        raise LabelError("partial trace needs a non-empty set of subsystems to keep")
    positions = sorted(set(rho.layout.indices(keep_labels)))
    n = rho.n
    if len(positions) == n:
        return rho

    tensor_form = rho.entries.reshape((2,) * (2 * n))
    rows = list(range(n))
    cols = list(range(n, 2 * n))
    for i in range(n):
        if i not in positions:
            cols[i] = rows[i]
    out = [rows[i] for i in positions] + [cols[i] for i in positions]
    reduced = np.einsum(tensor_form, rows + cols, out)
    side = 2 ** len(positions)
    return DensityMatrix(rho.layout.subset(keep_labels), reduced.reshape(side, side), check=False)


def permute(rho: DensityMatrix, order: Sequence[str]) -> DensityMatrix:
    """Reorder subsystems so the layout reads `order`."""
    order = tuple(order)
    if sorted(order) != sorted(rho.labels) or len(order) != rho.n:
        raise LabelError(f"{order} is not a permutation of {rho.labels}")
    n = rho.n
    axes = rho.layout.indices(order)
    tensor_form = rho.entries.reshape((2,) * (2 * n))
    moved = tensor_form.transpose(axes + [n + a for a in axes])
    layout = SubsystemLayout(order, tuple(rho.layout.dims[a] for a in axes))
    return DensityMatrix(layout, moved.reshape(rho.layout.dim, rho.layout.dim), check=False)


def spectrum(rho: DensityMatrix) -> Spectrum:
    """Eigen-decomposition of rho with eigenvalues in descending order."""
    try:
        values, vectors = scipy.linalg.eigh(rho.entries)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver did not converge: {exc}") from exc
    return Spectrum(values[::-1].copy(), vectors[:, ::-1].copy())


def entropy_bits(values, axis: int = -1) -> np.ndarray:
    """-sum v log2 v along `axis`, clipping values below 1e-12 to zero."""
    values = np.asarray(values, dtype=float)
    clipped = np.where(values < EIGEN_CLIP, 0.0, values)
    return entr(clipped).sum(axis=axis) / _LN2


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(rho) = -Tr rho log2 rho."""
    deviation = _hermitian_deviation(rho.entries)
    if deviation > VALIDATION_TOL:
        raise ValidationError("hermitian", f"max |rho - rho^dagger| = {deviation:.3e}")
    value = float(entropy_bits(hermitian_eigenvalues(rho.entries)))
    return min(max(value, 0.0), float(rho.n))


def shannon_entropy(probabilities) -> float:
    """H(p) = -sum p log2 p for a normalized probability vector."""
    p = np.asarray(probabilities, dtype=float).reshape(-1)
    if p.size and p.min() < -EIGEN_CLIP:
        raise ValidationError("positivity", f"negative probability {p.min():.3e}")
    total = float(p.sum())
    if abs(total - 1.0) > VALIDATION_TOL:
        raise ValidationError("normalization", f"probabilities sum to {total:.12g}")
    return max(float(entropy_bits(p)), 0.0)


def work_content(rho: DensityMatrix) -> float:
    """Extractable work log2 d - S(rho), in kT bits."""
    return float(np.log2(rho.layout.dim)) - von_neumann_entropy(rho)
