"""Definition files and the command-line interface: formats, exit codes, determinism."""

from __future__ import annotations

import json

import pytest

from kontact.cli import main
from kontact.errors import ParseError
from kontact.fileio import (
    load_kfunction_file,
    load_section_file,
    load_structure_file,
    resolve_structure,
)
from kontact.hydro import hydro_chart
from kontact.kcontact import verify_kcontact
from kontact.config import RunConfig

FAST = RunConfig(n_sample_points=16)


CANONICAL_11 = {
    "chart": {"coords": ["s", "q", "p"]},
    "forms": {
        "eta1": {"degree": 1, "coeffs": {"0": "1", "1": "-p"}},
    },
    "eta": ["eta1"],
}


@pytest.fixture
def structure_file(tmp_path):
    path = tmp_path / "structure.json"
    path.write_text(json.dumps(CANONICAL_11))
    return str(path)


class TestStructureFiles:
    def test_round_trip(self, structure_file):
        s, meta = load_structure_file(structure_file)
        assert s.k == 1 and s.dim == 3
        assert verify_kcontact(s, n_points=4, config=FAST).is_kcontact

    def test_constraints_and_ranges(self, tmp_path):
        spec = {
            "chart": {"coords": ["V", "w"], "constraints": ["V"],
                      "ranges": {"V": ["1/2", "2"]}},
            "forms": {"f": {"degree": 1, "coeffs": {"0": "1/V"}}},
            "eta": ["f"],
        }
        path = tmp_path / "c.json"
        path.write_text(json.dumps(spec))
        s, _ = load_structure_file(path)
        lo, hi = s.chart.ranges["V"]
        assert (lo, hi) == (0.5, 2)

    def test_malformed_expression(self, tmp_path):
        bad = dict(CANONICAL_11)
        bad["forms"] = {"eta1": {"degree": 1, "coeffs": {"0": "1 +"}}}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        with pytest.raises(ParseError):
            load_structure_file(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ParseError):
            load_structure_file(path)

    def test_undefined_eta_name(self, tmp_path):
        bad = dict(CANONICAL_11)
        bad["eta"] = ["nope"]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        with pytest.raises(ParseError):
            load_structure_file(path)

    def test_maps_section(self, tmp_path):
        spec = dict(CANONICAL_11)
        spec["maps"] = {"graph": {"source_coords": ["u"],
                                  "components": ["0", "u", "3"]}}
        path = tmp_path / "m.json"
        path.write_text(json.dumps(spec))
        _, meta = load_structure_file(path)
        assert "graph" in meta["maps"]
        assert meta["maps"]["graph"].source.dim == 1


class TestKFunctionFiles:
    def test_load(self, tmp_path):
        path = tmp_path / "kf.json"
        path.write_text(json.dumps(
            {"n": 2, "k": 2, "I": [1], "F": ["p_1_1 * q_2", "p_2_1 * q_2"]}))
        kf = load_kfunction_file(path)
        assert kf.n == 2 and kf.k == 2 and kf.I == (1,)

    def test_missing_key(self, tmp_path):
        path = tmp_path / "kf.json"
        path.write_text(json.dumps({"n": 2, "k": 2, "I": [1]}))
        with pytest.raises(ParseError):
            load_kfunction_file(path)


class TestSectionFiles:
    def test_defaults_to_zero(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text(json.dumps({"components": {"xi": "t_0"}}))
        chart = hydro_chart(2)
        psi = load_section_file(path, chart, 2)
        assert str(psi.bindings()["xi"]) == "t_0"
        assert str(psi.bindings()["V"]) == "0"

    def test_unknown_coordinate_rejected(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text(json.dumps({"components": {"nope": "1"}}))
        with pytest.raises(ParseError):
            load_section_file(path, hydro_chart(2), 2)


class TestBuiltins:
    def test_canonical(self):
        b = resolve_structure("canonical:2,3")
        assert b.structure.dim == 3 + 2 + 6
        assert b.polarization is not None

    def test_hydro(self):
        b = resolve_structure("hydro2")
        assert b.structure.dim == 2 * 2 + 4 * 2 + 2
        assert b.reeb is not None

    def test_thermo(self):
        assert resolve_structure("thermo").structure.k == 1

    def test_unknown(self):
        with pytest.raises(ParseError):
            resolve_structure("weird")


class TestCLI:
    def test_verify_structure_pass(self, capsys):
        code = main(["verify-structure", "--builtin", "canonical:1,1",
                     "--points", "4", "--samples", "16", "--no-timestamp"])
        out = capsys.readouterr().out
        assert code == 0
        assert "verdict: pass" in out

    def test_verify_structure_file(self, structure_file, capsys):
        code = main(["verify-structure", structure_file, "--points", "4",
                     "--samples", "16", "--no-timestamp"])
        assert code == 0

    def test_failing_structure_exits_one(self, tmp_path, capsys):
        bad = {
            "chart": {"coords": ["x", "y", "z"]},
            "forms": {"a": {"degree": 1, "coeffs": {"0": "1"}},
                      "b": {"degree": 1, "coeffs": {"0": "1"}}},
            "eta": ["a", "b"],
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        code = main(["verify-structure", str(path), "--points", "3",
                     "--samples", "16", "--no-timestamp"])
        assert code == 1

    def test_parse_error_exits_two(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{oops")
        assert main(["verify-structure", str(path)]) == 2

    def test_usage_error_exits_two(self):
        assert main(["verify-structure", "--builtin", "nonsense"]) == 2

    def test_reeb_command(self, capsys):
        code = main(["reeb", "--builtin", "thermo", "--samples", "16",
                     "--no-timestamp"])
        assert code == 0
        assert "reeb_commutation: pass" in capsys.readouterr().out

    def test_legendrian_command(self, tmp_path, capsys):
        path = tmp_path / "kf.json"
        path.write_text(json.dumps(
            {"n": 2, "k": 2, "I": [1], "F": ["p_1_1 * q_2", "p_2_1 * q_2"]}))
        code = main(["legendrian", str(path), "--samples", "16", "--no-timestamp"])
        assert code == 0

    def test_hddw_command_reports_expected_dim(self, tmp_path, capsys):
        out_path = tmp_path / "r.json"
        code = main(["hddw", "--builtin", "canonical:1,2", "--samples", "16",
                     "--no-timestamp", "--json", str(out_path)])
        assert code == 0
        report = json.loads(out_path.read_text())
        (check,) = [c for c in report["checks"] if c["name"] == "nullspace_dimension"]
        assert check["detail"]["expected"] == 6
        assert check["detail"]["observed"] == [6]

    def test_hddw_section(self, tmp_path):
        sect = tmp_path / "sect.json"
        # constant section on hydro2 solves the H=0 equations
        sect.write_text(json.dumps({"components": {"xi": "1/3", "V": "1"}}))
        code = main(["hddw", "--builtin", "hydro2", "--section", str(sect),
                     "--samples", "16", "--no-timestamp"])
        assert code == 0

    def test_hddw_hydro_section_reports_families(self, tmp_path):
        sect = tmp_path / "sect.json"
        sect.write_text(json.dumps({"components": {"xi": "t_0"}}))
        out = tmp_path / "r.json"
        code = main(["hddw", "--builtin", "hydro2", "--section", str(sect),
                     "--samples", "16", "--no-timestamp", "--json", str(out)])
        assert code == 1  # linear xi is not an equilibrium
        report = json.loads(out.read_text())
        (fam,) = [c for c in report["checks"] if c["name"] == "equilibrium_families"]
        families = fam["detail"]["families"]
        assert families["d_xi"]["pass"] is False
        assert families["div_N"]["pass"] is True

    def test_hddw_system_file(self, tmp_path):
        system = tmp_path / "system.json"
        system.write_text(json.dumps({"structure": "canonical:1,1",
                                      "H": "p_1_1"}))
        code = main(["hddw", "--system", str(system), "--samples", "16",
                     "--no-timestamp"])
        assert code == 0

    def test_hddw_flow_integration(self, tmp_path):
        from kontact.idealgas import equilibrium_state, isentropic_hamiltonian

        system = tmp_path / "system.json"
        system.write_text(json.dumps({"structure": "thermo",
                                      "H": str(isentropic_hamiltonian("3/2"))}))
        x0 = equilibrium_state("3/2")
        csv_path = tmp_path / "flow.csv"
        code = main(["hddw", "--system", str(system),
                     "--x0", json.dumps(x0), "--t-end", "0.1", "--dt", "0.02",
                     "--csv", str(csv_path), "--samples", "16", "--no-timestamp"])
        assert code == 0
        lines = csv_path.read_text().strip().split("\n")
        assert len(lines) == 7  # header + 6 states
        # V column follows V0 e^t
        import math

        header = lines[0].split(",")
        v_col = header.index("V")
        v_end = float(lines[-1].split(",")[v_col])
        assert v_end == pytest.approx(x0["V"] * math.exp(0.1), rel=1e-8)

    def test_hddw_missing_x0_coordinates(self, tmp_path):
        code = main(["hddw", "--builtin", "thermo", "--x0", "{}",
                     "--t-end", "0.1", "--no-timestamp"])
        assert code == 2

    def test_ideal_gas_csv(self, tmp_path):
        csv_path = tmp_path / "traj.csv"
        code = main(["ideal-gas", "--cv", "3/2", "--t-end", "0.1", "--dt", "0.01",
                     "--csv", str(csv_path), "--no-timestamp"])
        assert code == 0
        lines = csv_path.read_text().strip().split("\n")
        header = lines[0].split(",")
        assert header == list(resolve_structure("thermo").structure.chart.coords)
        assert len(lines) == 12  # header + 11 states

    def test_bjorken_command(self, tmp_path):
        out_path = tmp_path / "b.json"
        code = main(["bjorken", "--gamma", "1", "--I", "T^3", "--samples", "16",
                     "--no-timestamp", "--json", str(out_path)])
        assert code == 0
        report = json.loads(out_path.read_text())
        names = {c["name"] for c in report["checks"]}
        assert "entropy_production_after" in names

    def test_env_seed_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("KONTACT_SEED", "7")
        out_path = tmp_path / "r.json"
        code = main(["verify-structure", "--builtin", "canonical:1,1",
                     "--points", "3", "--samples", "16", "--no-timestamp",
                     "--json", str(out_path)])
        assert code == 0
        assert json.loads(out_path.read_text())["config"]["seed"] == 7

    def test_explicit_seed_beats_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("KONTACT_SEED", "7")
        out_path = tmp_path / "r.json"
        main(["verify-structure", "--builtin", "canonical:1,1", "--points", "3",
              "--samples", "16", "--seed", "11", "--no-timestamp",
              "--json", str(out_path)])
        assert json.loads(out_path.read_text())["config"]["seed"] == 11


class TestDeterminism:
    @pytest.mark.parametrize("argv", [
        ["verify-structure", "--builtin", "canonical:2,2", "--points", "4",
         "--samples", "16"],
        ["hddw", "--builtin", "canonical:1,2", "--samples", "16"],
        ["bjorken", "--gamma", "gamma", "--I", "T^3", "--samples", "16"],
    ])
    def test_byte_identical_reports(self, tmp_path, argv):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        assert main(argv + ["--seed", "42", "--no-timestamp", "--json", str(a)]) == 0
        assert main(argv + ["--seed", "42", "--no-timestamp", "--json", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
