"""Tests for state factories and the state-spec grammar."""
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from gqdemon.errors import StateSpecError, ValidationError
from gqdemon.qcore import partial_trace, spectrum, von_neumann_entropy
from gqdemon.states import (
    StateFamilySpec,
    make_classical,
    make_ghz,
    make_schmidt,
    make_w,
    make_w_ghz,
    make_werner_ghz,
    random_mixed,
    random_pure,
)


class TestPureFamilies:
    """Tests for GHZ, W and Schmidt states."""

    def test_ghz_amplitudes(self):
        """GHZ carries a minus sign on |111>."""
        expected = np.zeros(8)
        expected[0], expected[7] = 1 / math.sqrt(2), -1 / math.sqrt(2)
        assert_allclose(make_ghz(3).amplitudes, expected, atol=1e-15)

    def test_ghz_two_qubits(self):
        """GHZ_2 is the Bell state (|00> - |11>)/sqrt(2)."""
        assert_allclose(make_ghz(2).amplitudes, np.array([1, 0, 0, -1]) / math.sqrt(2), atol=1e-15)

    def test_ghz_invalid(self):
        """GHZ needs at least two qubits."""
        with pytest.raises(ValidationError):
            make_ghz(1)

    def test_w_amplitudes(self):
        """W has weight 1/sqrt(3) at indices 1, 2 and 4."""
        amplitudes = make_w().amplitudes
        assert np.flatnonzero(amplitudes).tolist() == [1, 2, 4]
        assert_allclose(amplitudes[[1, 2, 4]], 1 / math.sqrt(3), atol=1e-15)

    def test_schmidt_product(self):
        """alpha = 1 on two qubits is |00>."""
        assert_allclose(make_schmidt(2, 1.0).amplitudes, [1, 0, 0, 0])

    def test_schmidt_two_amplitudes(self):
        """Only |0...0> and |1...1> are populated."""
        assert np.count_nonzero(make_schmidt(4, 0.3).amplitudes) == 2

    def test_schmidt_marginals(self):
        """Every marginal has spectrum {|alpha|^2, |beta|^2}."""
        rho = make_schmidt(4, 0.5).to_density()
        for label in rho.labels:
            assert_allclose(spectrum(partial_trace(rho, label)).values, [0.75, 0.25], atol=1e-12)

    def test_schmidt_out_of_range(self):
        """|alpha| > 1 is rejected."""
        with pytest.raises(ValidationError):
            make_schmidt(3, 1.2)


class TestMixtures:
    """Tests for the Werner-GHZ and W-GHZ families."""

    def test_werner_endpoints(self):
        """lambda = 0 is I/8, lambda = 1 is the GHZ projector."""
        assert_allclose(make_werner_ghz(0.0).entries, np.eye(8) / 8, atol=1e-15)
        assert_allclose(make_werner_ghz(1.0).entries, make_ghz(3).to_density().entries, atol=1e-15)

    @pytest.mark.parametrize("lam", [0.0, 0.2, 0.5, 0.9])
    def test_werner_spectrum(self, lam):
        """Spectrum is (1 + 7 lambda)/8 once and (1 - lambda)/8 seven times."""
        values = sorted(spectrum(make_werner_ghz(lam)).values)
        expected = sorted([(1 + 7 * lam) / 8] + [(1 - lam) / 8] * 7)
        assert_allclose(values, expected, atol=1e-10)

    def test_w_ghz_endpoint(self):
        """lambda = 1 is the W projector."""
        assert_allclose(make_w_ghz(1.0).entries, make_w().to_density().entries, atol=1e-15)

    def test_lambda_out_of_range(self):
        """lambda outside [0, 1] is rejected."""
        with pytest.raises(ValidationError):
            make_w_ghz(1.5)
        with pytest.raises(ValidationError):
            make_werner_ghz(-0.1)


class TestClassicalAndRandom:
    """Tests for classical tables and random states."""

    def test_correlated_table(self):
        """(1/2, 0, 0, 1/2) is diagonal with those entries."""
        rho = make_classical([0.5, 0, 0, 0.5])
        assert_allclose(rho.entries, np.diag([0.5, 0, 0, 0.5]))

    def test_uniform_table(self):
        """A uniform table is maximally mixed."""
        assert von_neumann_entropy(make_classical([0.25] * 4)) == pytest.approx(2.0)

    def test_invalid_table(self):
        """Tables must be normalized and of power-of-two length."""
        with pytest.raises(ValidationError):
            make_classical([0.5, 0.4])
        with pytest.raises(ValidationError):
            make_classical([0.5, 0.25, 0.25])

    def test_random_pure_deterministic(self):
        """Equal seeds give bit-identical states."""
        assert np.array_equal(random_pure(3, 5).amplitudes, random_pure(3, 5).amplitudes)
        assert not np.array_equal(random_pure(3, 5).amplitudes, random_pure(3, 6).amplitudes)

    def test_rank_one_is_pure(self):
        """Rank one gives a pure state."""
        assert von_neumann_entropy(random_mixed(3, 1, seed=2)) == pytest.approx(0.0, abs=1e-10)

    def test_full_rank_entropy(self):
        """Full-rank random states are close to maximally mixed on average."""
        entropies = [von_neumann_entropy(random_mixed(3, 8, seed=s)) for s in range(20)]
        assert np.mean(entropies) > 2.0

    def test_invalid_rank(self):
        """Rank beyond 2^n is refused."""
        with pytest.raises(ValidationError):
            random_mixed(2, 5)


class TestStateFamilySpec:
    """Tests for parsing state specs."""

    def test_schmidt(self):
        """schmidt:n:|alpha|^2."""
        spec = StateFamilySpec.parse("schmidt:3:0.25")
        assert (spec.family, spec.n, spec.alpha_squared) == ("schmidt", 3, 0.25)
        marginal = partial_trace(spec.build(), "A")
        assert_allclose(np.real(np.diag(marginal.entries)), [0.25, 0.75], atol=1e-12)

    def test_underscores(self):
        """werner_ghz is accepted for werner-ghz."""
        assert StateFamilySpec.parse("werner_ghz:0.5").family == "werner-ghz"

    @pytest.mark.parametrize(
        "text", ["ghz:3", "w", "w-ghz:0.5", "classical:uniform:2", "random-mixed:2:3:7", "random-pure:3:1"]
    )
    def test_canonical_round_trip(self, text):
        """canonical() parses back to an equal spec."""
        spec = StateFamilySpec.parse(text)
        assert StateFamilySpec.parse(spec.canonical()) == spec

    def test_classical_table(self):
        """classical:p0,p1,... gives the table."""
        rho = StateFamilySpec.parse("classical:0.5,0,0,0.5").build()
        assert rho.n == 2

    @pytest.mark.parametrize(
        "text",
        [
            "nope:1",
            "schmidt:3",
            "ghz:x",
            "werner-ghz:1.5",
            "schmidt:3:0.2:1",
            "classical:0.5,0.5,0",
            "classical:1",
        ],
    )
    def test_malformed(self, text):
        """Malformed specs raise StateSpecError."""
        with pytest.raises(StateSpecError):
            StateFamilySpec.parse(text)

    def test_missing_lambda(self):
        """A mixture family without lambda cannot be built."""
        with pytest.raises(StateSpecError):
            StateFamilySpec.parse("w-ghz").build()

    def test_with_lambda(self):
        """with_lambda swaps the mixing parameter."""
        spec = StateFamilySpec.parse("w-ghz").with_lambda(1.0)
        assert_allclose(spec.build().entries, make_w().to_density().entries, atol=1e-15)
