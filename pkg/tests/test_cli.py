"""Tests for the gqdemon command line."""
import io
import json
import math

import numpy as np
import polars as pl
import pytest
from typer.testing import CliRunner

from gqdemon.cli import app, load_state
from gqdemon.correlations import werner_ghz_thermal_gqd
from gqdemon.errors import StateSpecError, ValidationError
from gqdemon.optimizer import CandidateGrid, minimize_thermal_qd


runner = CliRunner()
GRID = ["--theta-steps", "5", "--phi-steps", "8"]


def read_table(text):
    """Split `# key=value` header lines from the CSV body."""
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            meta[key] = value
        else:
            body.append(line)
    return meta, pl.read_csv(io.StringIO("\n".join(body)))


def write_matrix(path, matrix, n):
    rows = ["  ".join(f"{complex(x).real:+.12f}{complex(x).imag:+.12f}j" for x in row) for row in matrix]
    path.write_text(f"qubits={n}\n" + "\n".join(rows) + "\n")
    return path


class TestMeasure:
    """Tests for the measure command."""

    def test_ghz_gqd(self):
        """GHZ_3 has one bit of global discord."""
        result = runner.invoke(app, ["measure", "--state", "ghz:3", "--measure", "gqd", *GRID])
        assert result.exit_code == 0, result.output
        meta, table = read_table(result.output)
        assert table["value"][0] == pytest.approx(1.0, abs=1e-3)
        assert meta["version"] == "0.1.1"
        assert json.loads(meta["grid"])["theta_steps"] == 5

    def test_w_gqd(self):
        """The W state has log2(3) bits."""
        result = runner.invoke(app, ["measure", "--state", "w", *GRID])
        assert result.exit_code == 0, result.output
        _, table = read_table(result.output)
        assert table["value"][0] == pytest.approx(math.log2(3), abs=1e-3)

    def test_classical_zero(self):
        """A uniform classical state has no discord."""
        result = runner.invoke(app, ["measure", "--state", "classical:uniform:2", *GRID])
        assert result.exit_code == 0, result.output
        _, table = read_table(result.output)
        assert abs(table["value"][0]) < 1e-6

    def test_thermal_qd_with_apparatus(self):
        """--apparatus selects the measured subsystem."""
        result = runner.invoke(
            app,
            ["measure", "--state", "ghz:3", "--measure", "thermal_qd", "--apparatus", "B", *GRID],
        )
        assert result.exit_code == 0, result.output
        _, table = read_table(result.output)
        assert table["apparatus"][0] == "B"
        assert table["value"][0] == pytest.approx(1.0, abs=1e-6)

    def test_mid_json(self):
        """JSON output nests metadata alongside the row."""
        result = runner.invoke(
            app, ["measure", "--state", "w-ghz:0.0", "--measure", "mid", "--format", "json", *GRID]
        )
        assert result.exit_code == 0, result.output
        data = json.loads(result.output)
        assert data["metadata"]["basis_family"] == "product rank-one projective"
        assert data["value"] == pytest.approx(1.0, abs=1e-6)
        assert data["fallback"] == "A,B,C"

    def test_precision(self):
        """--precision controls the significant digits."""
        result = runner.invoke(
            app, ["measure", "--state", "schmidt:2:0.25", "--precision", "3", "--no-refine", *GRID]
        )
        assert result.exit_code == 0, result.output
        _, table = read_table(result.output)
        assert table["value"][0] == 0.811

    def test_grid_from_environment(self):
        """Grid sizes can come from the environment."""
        result = runner.invoke(
            app,
            ["measure", "--state", "ghz:2", "--format", "json"],
            env={"GQDEMON_THETA_STEPS": "4", "GQDEMON_PHI_STEPS": "4"},
        )
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["metadata"]["grid"]["theta_steps"] == 4

    def test_bad_state_exit_code(self):
        """Unparseable specs exit with code 2."""
        result = runner.invoke(app, ["measure", "--state", "bogus:1", *GRID])
        assert result.exit_code == 2
        assert "unknown state family" in result.output

    def test_classical_table_length_exit_code(self):
        """A classical table whose length is not a power of two is a usage error."""
        result = runner.invoke(app, ["measure", "--state", "classical:0.5,0.5,0", *GRID])
        assert result.exit_code == 2

    def test_needs_one_state_source(self):
        """Neither --state nor --state-file is a usage error."""
        result = runner.invoke(app, ["measure", *GRID])
        assert result.exit_code == 2

    def test_unknown_apparatus_exit_code(self):
        """A label outside the state is a validation failure."""
        result = runner.invoke(
            app, ["measure", "--state", "ghz:2", "--measure", "thermal_qd", "--apparatus", "Q", *GRID]
        )
        assert result.exit_code == 3

    def test_deterministic_output(self, tmp_path):
        """Identical invocations write byte-identical files."""
        outputs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            result = runner.invoke(
                app, ["measure", "--state", "random-mixed:2:2:4", "--out", str(out), *GRID]
            )
            assert result.exit_code == 0, result.output
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]


class TestProtocol:
    """Tests for the protocol command."""

    def test_schmidt_saturated(self):
        """Schmidt states saturate the bound."""
        result = runner.invoke(app, ["protocol", "--state", "schmidt:3:0.25", *GRID])
        assert result.exit_code == 0, result.output
        meta, table = read_table(result.output)
        assert meta["saturated"] == "true"
        assert float(meta["dw_total"]) == pytest.approx(0.811278, abs=1e-3)
        assert table["step"].to_list() == [1, 2, 3]

    def test_werner_json(self):
        """Werner-GHZ saturates; JSON carries the report."""
        result = runner.invoke(
            app, ["protocol", "--state", "werner-ghz:0.5", "--format", "json", "--precision", "9", *GRID]
        )
        assert result.exit_code == 0, result.output
        data = json.loads(result.output)
        assert data["saturated"] is True
        assert data["gqd_bound"] == pytest.approx(werner_ghz_thermal_gqd(0.5), abs=1e-6)
        assert len(data["steps"]) == 3

    def test_order(self):
        """--order sets the apparatus sequence."""
        result = runner.invoke(app, ["protocol", "--state", "ghz:3", "--order", "C,A,B", *GRID])
        assert result.exit_code == 0, result.output
        meta, table = read_table(result.output)
        assert table["apparatus"].to_list() == ["C", "A", "B"]
        assert meta["order"] == "C,A,B"

    def test_bad_order(self):
        """An order that is not a permutation fails validation."""
        result = runner.invoke(app, ["protocol", "--state", "ghz:3", "--order", "A,B", *GRID])
        assert result.exit_code == 3


class TestSweep:
    """Tests for the sweep command."""

    def test_werner_columns_and_closed_form(self):
        """Rows follow lambda; the gqd column matches the closed form."""
        result = runner.invoke(
            app,
            ["sweep", "--state", "werner-ghz", "--from", "0", "--to", "0.2", "--step", "0.1", *GRID],
        )
        assert result.exit_code == 0, result.output
        _, table = read_table(result.output)
        assert table.columns == ["lambda", "mid", "gqd", "dw_total"]
        assert table["lambda"].to_list() == [0.0, 0.1, 0.2]
        for lam, gqd in zip(table["lambda"], table["gqd"]):
            assert gqd == pytest.approx(werner_ghz_thermal_gqd(lam), abs=1e-3)

    def test_w_ghz_ordering(self):
        """mid >= gqd >= dw_total >= 0 on every row."""
        result = runner.invoke(
            app,
            ["sweep", "--state", "w-ghz", "--from", "0", "--to", "1", "--step", "0.5", "--parallel", "2", *GRID],
        )
        assert result.exit_code == 0, result.output
        _, table = read_table(result.output)
        assert table.height == 3
        for row in table.iter_rows(named=True):
            assert row["mid"] >= row["gqd"] - 1e-6
            assert row["gqd"] >= row["dw_total"] - 1e-6
            assert row["dw_total"] >= -1e-6
        assert table["gqd"][0] == pytest.approx(1.0, abs=1e-3)
        assert table["gqd"][-1] == pytest.approx(math.log2(3), abs=1e-3)

    def test_single_point(self):
        """A degenerate range gives one row."""
        result = runner.invoke(
            app, ["sweep", "--state", "w-ghz", "--from", "0", "--to", "0", "--step", "0.1", *GRID]
        )
        assert result.exit_code == 0, result.output
        _, table = read_table(result.output)
        assert table.height == 1

    def test_family_without_lambda(self):
        """Only mixture families can be swept."""
        result = runner.invoke(app, ["sweep", "--state", "ghz:3", *GRID])
        assert result.exit_code == 2

    def test_out_of_range(self):
        """lambda beyond 1 is a usage error."""
        result = runner.invoke(app, ["sweep", "--to", "1.5", *GRID])
        assert result.exit_code == 2


class TestStateFiles:
    """Tests for matrix files and the validate command."""

    def test_validate_maximally_mixed(self, tmp_path):
        """I/4 loads and reports two bits of entropy."""
        path = write_matrix(tmp_path / "mixed.txt", np.eye(4) / 4, 2)
        result = runner.invoke(app, ["validate", "--state-file", str(path)])
        assert result.exit_code == 0, result.output
        assert "entropy" in result.output
        assert "2 bits" in result.output

    def test_validate_bad_trace(self, tmp_path):
        """A trace of 0.9 fails with the trace invariant."""
        path = write_matrix(tmp_path / "bad.txt", np.diag([0.5, 0.4]), 1)
        result = runner.invoke(app, ["validate", "--state-file", str(path)])
        assert result.exit_code == 3
        assert "trace" in result.output

    @pytest.mark.parametrize("token", ["nan+0j", "inf+0j"])
    def test_validate_non_finite(self, tmp_path, token):
        """NaN or infinite entries fail validation with exit code 3."""
        path = tmp_path / "nan.txt"
        path.write_text(f"qubits=1\n{token} 0+0j\n0+0j 0.5+0j\n")
        result = runner.invoke(app, ["validate", "--state-file", str(path)])
        assert result.exit_code == 3
        assert "finite" in result.output

    def test_bell_file(self, tmp_path):
        """A Bell-state file has one bit of thermal discord."""
        psi = np.array([1, 0, 0, 1]) / math.sqrt(2)
        path = write_matrix(tmp_path / "bell.txt", np.outer(psi, psi), 2)
        rho = load_state(path)
        grid = CandidateGrid(theta_steps=5, phi_steps=8)
        assert minimize_thermal_qd(rho, "A", grid).value == pytest.approx(1.0, abs=1e-9)

    def test_measure_from_file(self, tmp_path):
        """--state-file feeds the measure command."""
        path = write_matrix(tmp_path / "mixed.txt", np.eye(4) / 4, 2)
        result = runner.invoke(app, ["measure", "--state-file", str(path), *GRID])
        assert result.exit_code == 0, result.output

    def test_parse_error_location(self, tmp_path):
        """Bad entries are reported with line and column."""
        path = tmp_path / "broken.txt"
        path.write_text("qubits=1\n1+0j x\n0 0\n")
        with pytest.raises(StateSpecError) as info:
            load_state(path)
        assert (info.value.line, info.value.column) == (2, 6)

    def test_bad_header(self, tmp_path):
        """The header must declare the qubit count."""
        path = tmp_path / "noheader.txt"
        path.write_text("1 0\n0 0\n")
        with pytest.raises(StateSpecError) as info:
            load_state(path)
        assert info.value.line == 1

    def test_wrong_row_count(self, tmp_path):
        """Missing rows are a parse error."""
        path = tmp_path / "short.txt"
        path.write_text("qubits=1\n1 0\n")
        with pytest.raises(StateSpecError):
            load_state(path)

    def test_parse_error_exit_code(self, tmp_path):
        """Parse errors exit with code 2."""
        path = tmp_path / "broken.txt"
        path.write_text("qubits=1\n1+0j x\n0 0\n")
        result = runner.invoke(app, ["validate", "--state-file", str(path)])
        assert result.exit_code == 2
        assert "line 2, column 6" in result.output

    def test_validation_error_type(self, tmp_path):
        """A non-positive matrix raises ValidationError from load_state."""
        path = write_matrix(tmp_path / "neg.txt", np.diag([1.2, -0.2]), 1)
        with pytest.raises(ValidationError):
            load_state(path)
