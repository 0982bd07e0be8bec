"""
Factories for the state families studied here, and the state-spec grammar.

Grammar accepted by `StateFamilySpec.parse` (underscores may replace hyphens):

    schmidt:<n>:<|alpha|^2>      ghz:<n>          w
    werner-ghz:<lambda>          w-ghz:<lambda>
    classical:uniform:<n>        classical:<p0>,<p1>,...
    random-mixed:<n>:<rank>:<seed>
    random-pure:<n>:<seed>
"""

import math
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from .errors import StateSpecError, ValidationError
from .qcore import MAX_QUBITS, VALIDATION_TOL, DensityMatrix, PureState


Family = Literal[
    "schmidt",
    "ghz",
    "w",
    "werner-ghz",
    "w-ghz",
    "classical",
    "random-mixed",
    "random-pure",
]


def _check_qubits(n: int, minimum: int = 1) -> None:
    if not minimum <= n <= MAX_QUBITS:
        raise ValidationError("range", f"qubit count must be in [{minimum}, {MAX_QUBITS}], got {n}")


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValidationError("range", f"{name} must be in [0, 1], got {value}")


def make_schmidt(n: int, alpha: complex) -> PureState:
    """alpha|0...0> + beta|1...1> with beta = sqrt(1 - |alpha|^2) real."""
    _check_qubits(n, 2)
    weight = abs(alpha) ** 2
    if weight > 1.0 + VALIDATION_TOL:
        raise ValidationError("range", f"|alpha| must be <= 1, got {abs(alpha)}")
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = alpha
    psi[-1] = math.sqrt(max(1.0 - weight, 0.0))
    return PureState.from_amplitudes(psi)


def make_ghz(n: int = 3) -> PureState:
    """(|0...0> - |1...1>)/sqrt(2)."""
    _check_qubits(n, 2)
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1 / math.sqrt(2)
    psi[-1] = -1 / math.sqrt(2)
    return PureState.from_amplitudes(psi)


def make_w() -> PureState:
    """(|001> + |010> + |100>)/sqrt(3)."""
    psi = np.zeros(8, dtype=complex)
    psi[[1, 2, 4]] = 1 / math.sqrt(3)
    return PureState.from_amplitudes(psi)


def make_werner_ghz(lam: float) -> DensityMatrix:
    """(1 - lam)/8 I + lam |GHZ><GHZ| on three qubits."""
    _check_unit("lambda", lam)
    ghz = make_ghz(3).to_density().entries
    return DensityMatrix.from_array((1 - lam) / 8 * np.eye(8) + lam * ghz)


def make_w_ghz(lam: float) -> DensityMatrix:
    """lam |W><W| + (1 - lam) |GHZ><GHZ|."""
    _check_unit("lambda", lam)
    w = make_w().to_density().entries
    ghz = make_ghz(3).to_density().entries
    return DensityMatrix.from_array(lam * w + (1 - lam) * ghz)


def make_classical(prob_table) -> DensityMatrix:
    """Diagonal state sum_i p_i |i><i| in the computational product basis."""
    p = np.asarray(prob_table, dtype=float).reshape(-1)
    n = int(round(math.log2(p.size))) if p.size else 0
    if p.size < 2 or 2**n != p.size:
        raise ValidationError("shape", f"probability table needs 2^n entries, got {p.size}")
    if p.min() < 0:
        raise ValidationError("positivity", f"negative probability {p.min():.3e}")
    if abs(p.sum() - 1.0) > VALIDATION_TOL:
        raise ValidationError("normalization", f"probabilities sum to {p.sum():.12g}")
    _check_qubits(n)
    return DensityMatrix.from_array(np.diag(p).astype(complex))


def _gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_pure(n: int, seed: int = 0) -> PureState:
    """Haar-random pure state; bit-identical for equal seeds."""
    _check_qubits(n)
    psi = _gaussian(np.random.default_rng(seed), 2**n)
    return PureState.from_amplitudes(psi / np.linalg.norm(psi))


def random_mixed(n: int, rank: Optional[int] = None, seed: int = 0) -> DensityMatrix:
    """Reduced state of a Haar-random pure state on the system and a rank-dimensional ancilla."""
    _check_qubits(n)
    dim = 2**n
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValidationError("range", f"rank must be in [1, {dim}], got {rank}")
    joint = _gaussian(np.random.default_rng(seed), (dim, rank))
    joint /= np.linalg.norm(joint)
    # tracing out the ancilla column index
    rho = joint @ joint.conj().T
    return DensityMatrix.from_array((rho + rho.conj().T) / 2)


_PARAMETER_COUNTS = {
    "schmidt": (2,),
    "ghz": (0, 1),
    "w": (0,),
    "werner-ghz": (0, 1),
    "w-ghz": (0, 1),
    "classical": (1, 2),
    "random-mixed": (1, 2, 3),
    "random-pure": (1, 2),
}


class StateFamilySpec(BaseModel):
    """A parsed state-family specification."""

    model_config = ConfigDict(frozen=True)

    family: Family
    n: Optional[int] = None
    alpha_squared: Optional[float] = None
    lam: Optional[float] = None
    probabilities: Optional[tuple[float, ...]] = None
    rank: Optional[int] = None
    seed: int = 0

    @field_validator("alpha_squared", "lam")
    @classmethod
    def _unit_interval(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not 0.0 <= value <= 1.0:
            raise ValueError(f"must be in [0, 1], got {value}")
        return value

    @field_validator("n")
    @classmethod
    def _qubits(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and not 1 <= value <= MAX_QUBITS:
            raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {value}")
        return value

    @classmethod
    def parse(cls, text: str) -> "StateFamilySpec":
        """Parse `family[:param[:param...]]`; raise StateSpecError on malformed input."""
        parts = [part.strip() for part in text.strip().split(":")]
        family = parts[0].lower().replace("_", "-")
        params = parts[1:]
        if family not in _PARAMETER_COUNTS:
            raise StateSpecError(f"unknown state family {parts[0]!r}")
        if len(params) not in _PARAMETER_COUNTS[family]:
            raise StateSpecError(f"{family}: unexpected number of parameters in {text!r}")

        try:
            fields = cls._fields_for(family, params)
            return cls(family=family, **fields)
        except StateSpecError:
            raise
        except ValueError as exc:
            raise StateSpecError(f"{family}: {exc}") from None

    @staticmethod
    def _fields_for(family: str, params: list[str]) -> dict:
        if family == "schmidt":
            return {"n": int(params[0]), "alpha_squared": float(params[1])}
        if family == "ghz":
            return {"n": int(params[0]) if params else 3}
        if family == "w":
            return {"n": 3}
        if family in ("werner-ghz", "w-ghz"):
            return {"n": 3, "lam": float(params[0]) if params else None}
        if family == "classical":
            if params[0] == "uniform":
                if len(params) != 2:
                    raise StateSpecError("classical:uniform needs a qubit count")
                n = int(params[1])
                if not 1 <= n <= MAX_QUBITS:
                    raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")
                return {"n": n, "probabilities": (1.0 / 2**n,) * 2**n}
            if len(params) != 1:
                raise StateSpecError("classical table takes one comma-separated parameter")
            table = tuple(float(p) for p in params[0].split(","))
            n = int(round(math.log2(len(table))))
            if len(table) < 2 or len(table) != 2**n or n > MAX_QUBITS:
                raise StateSpecError(
                    f"classical table length must be a power of two >= 2, got {len(table)}"
                )
            return {"n": n, "probabilities": table}
        if family == "random-mixed":
            n = int(params[0])
            rank = int(params[1]) if len(params) > 1 else 2**n
            seed = int(params[2]) if len(params) > 2 else 0
            return {"n": n, "rank": rank, "seed": seed}
        # random-pure
        return {"n": int(params[0]), "seed": int(params[1]) if len(params) > 1 else 0}

    def canonical(self) -> str:
        """Normalized spec string; parses back to an equal model."""
        if self.family == "schmidt":
            return f"schmidt:{self.n}:{self.alpha_squared!r}"
        if self.family == "ghz":
            return f"ghz:{self.n}"
        if self.family == "w":
            return "w"
        if self.family in ("werner-ghz", "w-ghz"):
            return self.family if self.lam is None else f"{self.family}:{self.lam!r}"
        if self.family == "classical":
            return "classical:" + ",".join(repr(p) for p in self.probabilities or ())
        if self.family == "random-mixed":
            return f"random-mixed:{self.n}:{self.rank}:{self.seed}"
        return f"random-pure:{self.n}:{self.seed}"

    def with_lambda(self, lam: float) -> "StateFamilySpec":
        """Same family at another mixing parameter (werner-ghz and w-ghz only)."""
        if self.family not in ("werner-ghz", "w-ghz"):
            raise StateSpecError(f"{self.family} has no lambda parameter")
        return self.model_copy(update={"lam": float(lam)})

    def build(self) -> DensityMatrix:
        """Construct the validated density matrix."""
        return as_density(self.build_state())

    def build_state(self) -> Union[PureState, DensityMatrix]:
        if self.family in ("werner-ghz", "w-ghz") and self.lam is None:
            raise StateSpecError(f"{self.family} needs a lambda parameter, e.g. {self.family}:0.5")
        if self.family == "schmidt":
            return make_schmidt(self.n, math.sqrt(self.alpha_squared))
        if self.family == "ghz":
            return make_ghz(self.n)
        if self.family == "w":
            return make_w()
        if self.family == "werner-ghz":
            return make_werner_ghz(self.lam)
        if self.family == "w-ghz":
            return make_w_ghz(self.lam)
        if self.family == "classical":
            return make_classical(self.probabilities)
        if self.family == "random-mixed":
            return random_mixed(self.n, self.rank, self.seed)
        return random_pure(self.n, self.seed)


def as_density(state: Union[PureState, DensityMatrix]) -> DensityMatrix:
    return state.to_density() if isinstance(state, PureState) else state

