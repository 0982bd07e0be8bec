"""Tests for the demon work-extraction protocol and the purification circuit."""
import math

import numpy as np
import pytest

from gqdemon.correlations import werner_ghz_thermal_gqd
from gqdemon.demon import (
    best_classical_work,
    classical_work,
    erasure_cost,
    quantum_work,
    run_protocol,
    simulate_schmidt_circuit,
)
from gqdemon.errors import LabelError, ValidationError
from gqdemon.measurement import COMPUTATIONAL
from gqdemon.optimizer import CandidateGrid, minimize_thermal_qd
from gqdemon.qcore import DensityMatrix, SubsystemLayout, von_neumann_entropy
from gqdemon.states import make_classical, make_ghz, make_schmidt, make_w_ghz, make_werner_ghz, random_mixed


SMALL = CandidateGrid(theta_steps=5, phi_steps=8)
SMALL_UNREFINED = CandidateGrid(theta_steps=5, phi_steps=8, refine=False)


def binary_entropy(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


class TestWork:
    """Tests for quantum and classical work."""

    def test_pure_state(self):
        """A pure 3-qubit state yields three bits of work."""
        assert quantum_work(make_ghz(3).to_density()) == pytest.approx(3.0, abs=1e-12)

    def test_maximally_mixed(self):
        """Nothing can be extracted from I/8."""
        rho = DensityMatrix.maximally_mixed(SubsystemLayout.qubits(3))
        assert quantum_work(rho) == pytest.approx(0.0, abs=1e-12)

    def test_werner_ghz(self):
        """W^Q = 3 - S for the Werner-GHZ state."""
        rho = make_werner_ghz(0.5)
        assert quantum_work(rho) == pytest.approx(3 - von_neumann_entropy(rho))

    def test_classical_ghz(self):
        """sigma_z on A leaves 3 - 1 = 2 bits for the classical demon."""
        assert classical_work(make_ghz(3).to_density(), "A", COMPUTATIONAL) == pytest.approx(2.0, abs=1e-10)

    def test_classical_bell(self):
        """A Bell pair gives the classical demon one bit."""
        bell = make_schmidt(2, 1 / math.sqrt(2)).to_density()
        assert classical_work(bell, "A", COMPUTATIONAL) == pytest.approx(1.0, abs=1e-10)

    def test_classical_state_no_advantage(self):
        """With zero discord both demons extract the same work."""
        rho = make_classical([0.4, 0.1, 0.1, 0.4])
        assert classical_work(rho, "A", COMPUTATIONAL) == pytest.approx(quantum_work(rho), abs=1e-10)

    def test_unknown_apparatus(self):
        """Measuring an unknown label is an error."""
        with pytest.raises(LabelError):
            classical_work(make_ghz(2).to_density(), "Q", COMPUTATIONAL)

    def test_erasure_cost(self):
        """Erasing a fair bit costs one bit."""
        assert erasure_cost([0.5, 0.5]) == pytest.approx(1.0)
        assert erasure_cost([1.0, 0.0]) == pytest.approx(0.0)

    def test_demon_identity(self):
        """W^Q minus the best grid W^C equals the minimized thermal discord."""
        for seed in range(20):
            rho = random_mixed(2, 2, seed=seed)
            thermal = minimize_thermal_qd(rho, "A", SMALL_UNREFINED)
            best = max(classical_work(rho, "A", basis) for basis in SMALL_UNREFINED.candidates)
            assert quantum_work(rho) - best == pytest.approx(thermal.value, abs=1e-12)

    def test_best_classical_work(self):
        """best_classical_work reports the strategy behind the identity."""
        rho = random_mixed(2, 3, seed=77)
        demon = best_classical_work(rho, "B", SMALL)
        thermal = minimize_thermal_qd(rho, "B", SMALL)
        assert quantum_work(rho) - demon.work == pytest.approx(thermal.value, abs=1e-12)
        assert 0.0 <= demon.erasure_cost <= 1.0


class TestProtocol:
    """Tests for the sequential protocol."""

    @pytest.mark.parametrize("n", [2, 3, 4])
    @pytest.mark.parametrize("weight", [0.1, 0.25, 0.5])
    def test_schmidt_saturates(self, n, weight):
        """Schmidt states reach the GQD bound h(|alpha|^2)."""
        report = run_protocol(make_schmidt(n, math.sqrt(weight)).to_density(), grid=SMALL)
        assert report.gqd_bound == pytest.approx(binary_entropy(weight), abs=1e-4)
        assert report.total_advantage == pytest.approx(binary_entropy(weight), abs=1e-4)
        assert report.saturated

    def test_werner_ghz_saturates(self):
        """Werner-GHZ: all advantage on the first copy, bound saturated."""
        report = run_protocol(make_werner_ghz(0.5), grid=SMALL)
        closed = werner_ghz_thermal_gqd(0.5)
        assert [s.advantage for s in report.steps] == pytest.approx([closed, 0.0, 0.0], abs=1e-6)
        assert report.gqd_bound == pytest.approx(closed, abs=1e-6)
        assert report.saturated

    @pytest.mark.slow
    def test_w_ghz_sweep(self):
        """W-GHZ: GQD rises from 1 to log2 3, interior points never saturate."""
        grid = CandidateGrid(theta_steps=13, phi_steps=16)
        lams = [k / 20 for k in range(21)]
        reports = [run_protocol(make_w_ghz(lam), grid=grid) for lam in lams]
        gqds = [r.gqd_bound for r in reports]
        assert gqds[0] == pytest.approx(1.0, abs=1e-3)
        assert gqds[-1] == pytest.approx(math.log2(3), abs=1e-3)
        assert all(b >= a - 1e-3 for a, b in zip(gqds, gqds[1:]))
        for report in reports:
            assert report.mid_bound >= report.gqd_bound - 1e-9
            assert report.gqd_bound >= report.total_advantage - 1e-9
        assert not any(r.saturated for r in reports[1:-1])

    @pytest.mark.parametrize("seed", range(4))
    def test_bound_chain(self, seed):
        """dW_t <= GQD <= MID on random states."""
        rho = random_mixed(2 + seed % 2, 2, seed=seed)
        report = run_protocol(rho, grid=SMALL)
        assert report.total_advantage <= report.gqd_bound + 1e-9
        assert report.gqd_bound <= report.mid_bound + 2e-9

    def test_total_is_sum_of_steps(self):
        """The total advantage is the sum of the per-step advantages."""
        report = run_protocol(random_mixed(3, 3, seed=12), grid=SMALL)
        assert report.total_advantage == pytest.approx(sum(s.advantage for s in report.steps), abs=1e-12)

    def test_step_work_balance(self):
        """Each step's advantage is its W^Q minus its W^C."""
        report = run_protocol(random_mixed(3, 2, seed=19), ["B", "C", "A"], SMALL)
        for step in report.steps:
            assert step.quantum_work - step.classical_work == pytest.approx(step.advantage, abs=1e-9)
        assert [s.apparatus for s in report.steps] == ["B", "C", "A"]
        assert [s.index for s in report.steps] == [1, 2, 3]

    def test_bound_independent_of_order(self):
        """Changing the order leaves the GQD bound unchanged."""
        rho = random_mixed(3, 4, seed=23)
        first = run_protocol(rho, ["A", "B", "C"], SMALL)
        second = run_protocol(rho, ["C", "A", "B"], SMALL)
        assert first.gqd_bound == second.gqd_bound

    def test_report_dict(self):
        """The serialized report carries every headline number."""
        report = run_protocol(make_ghz(2).to_density(), grid=SMALL)
        data = report.to_dict()
        assert set(data) >= {"steps", "dw_total", "gqd_bound", "mid_bound", "saturated", "grid"}
        assert data["grid"]["theta_steps"] == 5

    def test_needs_two_qubits(self):
        """A single qubit cannot host the protocol."""
        with pytest.raises(ValidationError):
            run_protocol(make_classical([0.5, 0.5]), grid=SMALL)


class TestSchmidtCircuit:
    """Tests for the CNOT purification circuit."""

    def test_equal_superposition(self):
        """alpha = beta = 1/sqrt(2), n = 3: W^Q = 3, W^C = 2."""
        a = 1 / math.sqrt(2)
        trace = simulate_schmidt_circuit(a, a, 3)
        assert trace.fidelity > 1 - 1e-10
        assert trace.quantum_work == pytest.approx(3.0, abs=1e-10)
        assert trace.classical_work == pytest.approx(2.0, abs=1e-10)
        assert trace.advantage == pytest.approx(1.0, abs=1e-10)
        assert trace.gates == [("A1", "A2"), ("A1", "A3")]

    def test_product_input(self):
        """alpha = 1 is already factorized; no advantage."""
        trace = simulate_schmidt_circuit(1.0, 0.0, 3)
        assert trace.fidelity > 1 - 1e-10
        assert trace.advantage == pytest.approx(0.0, abs=1e-10)

    def test_four_qubits(self):
        """|alpha|^2 = 1/4, n = 4: W^C = 4 - h(1/4)."""
        trace = simulate_schmidt_circuit(0.5, math.sqrt(0.75), 4)
        assert trace.quantum_work == pytest.approx(4.0, abs=1e-10)
        assert trace.classical_work == pytest.approx(4 - binary_entropy(0.25), abs=1e-10)

    def test_erasure_matches_memory(self):
        """The memory register holds the outcome statistics and costs S to erase."""
        trace = simulate_schmidt_circuit(0.5, math.sqrt(0.75), 3)
        assert np.real(np.diag(trace.memory.entries)) == pytest.approx([0.25, 0.75], abs=1e-12)
        assert trace.erasure_cost == pytest.approx(binary_entropy(0.25), abs=1e-10)

    def test_intermediate_norms(self):
        """Every intermediate state has unit norm."""
        trace = simulate_schmidt_circuit(0.6, 0.8j, 4)
        assert len(trace.states) == 4
        for state in trace.states:
            assert abs(np.linalg.norm(state.amplitudes) - 1) < 1e-12
        assert trace.fidelity > 1 - 1e-10

    def test_decohered_demon(self):
        """Dephasing the control before the circuit leaves only the classical work."""
        trace = simulate_schmidt_circuit(0.5, math.sqrt(0.75), 3)
        assert trace.decohered_work == pytest.approx(trace.classical_work, abs=1e-10)

    def test_unnormalized(self):
        """Amplitudes must be normalized."""
        with pytest.raises(ValidationError):
            simulate_schmidt_circuit(1.0, 1.0, 3)

    def test_needs_two_qubits(self):
        """One qubit has nothing to purify."""
        with pytest.raises(ValidationError):
            simulate_schmidt_circuit(1.0, 0.0, 1)
