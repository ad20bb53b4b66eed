import csv
import io
import json
import math
from pathlib import Path

import pytest

import benfold.cli as cli
from benfold.bounds import VacuousBoundError
from benfold.density import DensityError

GOLDEN = Path(__file__).parent / "data" / "table_b10.golden"


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# table
# ---------------------------------------------------------------------------


def test_table_matches_golden(capsys):
    code, out, err = run_cli(capsys, "table", "--base", "10")
    assert code == 0
    assert out == GOLDEN.read_text()


def test_table_custom_ns_and_digits(capsys):
    code, out, _ = run_cli(capsys, "table", "--n", "4", "--digits", "5")
    assert code == 0
    lines = out.splitlines()
    assert lines[1].split() == ["4", "0.07163", "0.07196", "0.08309"]


def test_table_csv_format(capsys):
    code, out, _ = run_cli(capsys, "table", "--n", "1,4", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "exact", "tv_bound", "fourier_bound"]
    assert len(rows) == 3
    assert float(rows[1][1]) == cli.table(10.0, (1,))[0].exact  # 17g round-trips
    assert "\r" not in out


def test_csv_and_json_carry_identical_values(capsys):
    code, csv_out, _ = run_cli(capsys, "table", "--format", "csv")
    assert code == 0
    code, json_out, _ = run_cli(capsys, "table", "--format", "json")
    assert code == 0
    payload = json.loads(json_out)
    assert payload["metadata"]["base"] == 10.0
    assert payload["metadata"]["tool_version"]
    assert set(payload["metadata"]["method_refs"]) == {"exact", "tv_bound", "fourier_bound"}
    csv_rows = list(csv.DictReader(io.StringIO(csv_out)))
    assert len(csv_rows) == len(payload["rows"]) == 11
    for crow, jrow in zip(csv_rows, payload["rows"]):
        assert int(crow["n"]) == jrow["n"]
        for col in ("exact", "tv_bound", "fourier_bound"):
            assert float(crow[col]) == jrow[col]


def test_table_base_e_row_against_oracle():
    import benfold as bf

    row = cli.table(math.e, (1,))[0]
    u = math.e - 1.0
    want = (u * math.log(u) - u + 1.0) / (math.e - 1.0)
    assert row.exact == pytest.approx(want, rel=1e-12)
    oracle = bf.delta_numeric(bf.uniform_log_density(math.e), 1)
    assert row.exact == pytest.approx(oracle.value, abs=1e-9)


def test_table_rejects_bad_base(capsys):
    code, _, err = run_cli(capsys, "table", "--base", "0.5")
    assert code == 2
    assert "b > 1" in err


def test_table_rejects_bad_n_list():
    with pytest.raises(SystemExit) as exc_info:
        cli.main(["table", "--n", "1,frog"])
    assert exc_info.value.code == 2


# ---------------------------------------------------------------------------
# bound
# ---------------------------------------------------------------------------


def test_bound_tv_scaled_output(capsys):
    code, out, _ = run_cli(
        capsys, "bound", "--density", "uniform-log b=10", "--method", "tv_scaled", "--n", "20"
    )
    assert code == 0
    assert out.startswith("tv_scaled  value=0.0287823  n=20")
    assert "unrounded: 0.028782313662425" in out
    assert "hypotheses:" in out


def test_bound_tv_quarter_uniform(capsys):
    code, out, _ = run_cli(
        capsys, "bound", "--density", "uniform 0 1", "--method", "tv_quarter"
    )
    assert code == 0
    assert "value=0.0000000" in out


def test_bound_fourier_closed(capsys):
    code, out, _ = run_cli(
        capsys, "bound", "--density", "uniform-log b=10", "--method", "fourier_closed",
        "--n", "2",
    )
    assert code == 0
    assert "value=0.1661748" in out
    assert "b=10" in out


def test_bound_parseval_via_cli(capsys):
    code, out, _ = run_cli(
        capsys, "bound", "--density", "exp-on-unit b=10", "--method", "fourier_parseval",
        "--n", "1", "--k-max", "500",
    )
    assert code == 0
    value = float(out.splitlines()[1].split()[-1])
    assert 0.31 < value < 0.3323495


def test_bound_convex_eighth_cli(capsys):
    code, out, _ = run_cli(
        capsys, "bound", "--density", "uniform-log b=10", "--method", "convex_eighth"
    )
    assert code == 0
    assert "value=0.2878231" in out
    assert "certified" in out


def test_bound_fourier_needs_log_uniform_density(capsys):
    code, _, err = run_cli(
        capsys, "bound", "--density", "uniform 0 1", "--method", "fourier_closed"
    )
    assert code == 2
    assert "log-uniform" in err


def test_bound_unknown_density_kind(capsys):
    code, _, err = run_cli(
        capsys, "bound", "--density", "nonsense 1 2", "--method", "tv_quarter"
    )
    assert code == 2


def test_vacuous_bound_exits_3(capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise VacuousBoundError("variation is infinite")

    monkeypatch.setattr(cli, "run_bound", boom)
    code, _, err = run_cli(
        capsys, "bound", "--density", "uniform 0 1", "--method", "tv_quarter"
    )
    assert code == 3
    assert "numerical failure" in err


# ---------------------------------------------------------------------------
# exact
# ---------------------------------------------------------------------------


def test_exact_subcommand(capsys):
    code, out, _ = run_cli(capsys, "exact", "--base", "10", "--exponent", "3")
    assert code == 0
    assert out.startswith("exact_uniform  value=0.0951662")
    assert "t0=" in out


def test_exact_rejects_bad_exponent(capsys):
    code, _, err = run_cli(capsys, "exact", "--base", "10", "--exponent", "-1")
    assert code == 2


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------


def test_oracle_quad_uniform_log(capsys):
    code, out, _ = run_cli(
        capsys, "oracle", "--density", "uniform-log b=10", "--n", "1"
    )
    assert code == 0
    assert "quadrature_L1  value=0.2688434" in out


def test_oracle_quad_uniform_is_zero(capsys):
    code, out, _ = run_cli(capsys, "oracle", "--density", "uniform 0 1", "--n", "7")
    assert code == 0
    assert "value=0.0000000" in out


def test_oracle_quad_large_n(capsys):
    code, out, _ = run_cli(
        capsys, "oracle", "--density", "uniform-log b=10", "--n", "1000"
    )
    assert code == 0
    assert "value=0.0002878" in out


def test_oracle_mc_engine(capsys):
    code, out, _ = run_cli(
        capsys, "oracle", "--density", "uniform-log b=10", "--n", "1",
        "--engine", "mc", "--samples", "200000", "--bins", "100", "--seed", "5",
    )
    assert code == 0
    assert out.startswith("monte_carlo  value=0.2")
    assert "seed=5" in out


def test_oracle_unattainable_tolerance_exits_3(capsys):
    code, _, err = run_cli(
        capsys, "oracle", "--density", "uniform-log b=10", "--n", "1", "--tol", "1e-300"
    )
    assert code == 3
    assert "numerical failure" in err


# ---------------------------------------------------------------------------
# density mini-language and piecewise files
# ---------------------------------------------------------------------------


def test_parse_density_kinds():
    f, info = cli.parse_density("uniform 0 2")
    assert info["kind"] == "uniform"
    assert f(1.0) == pytest.approx(0.5)
    f, info = cli.parse_density("uniform-log b=10")
    assert info["b"] == 10.0
    f2, _ = cli.parse_density("exp-on-unit b=10")
    assert f2(0.5) == pytest.approx(f(0.5))
    f, _ = cli.parse_density("triangular 0 1 2")
    assert f(1.0) == pytest.approx(1.0)


def test_parse_density_errors():
    for bad in ("", "uniform 0", "uniform-log", "uniform-log b", "piecewise",
                "wedge 0 1", "uniform 1 0"):
        with pytest.raises(DensityError):
            cli.parse_density(bad)


def test_piecewise_file_roundtrip(tmp_path, capsys):
    lnb = math.log(10.0)
    spec = [
        {
            "lo": 0.0,
            "hi": 1.0,
            "kind": "exp",
            "params": {"amp": lnb / 9.0, "rate": lnb},
            "monotonicity": "increasing",
            "convexity": "convex",
        }
    ]
    path = tmp_path / "density.json"
    path.write_text(json.dumps(spec))
    f = cli.load_piecewise_file(str(path))
    assert f.segments[0].monotonicity == "increasing"
    code, out, _ = run_cli(
        capsys, "bound", "--density", f"piecewise {path}", "--method", "tv_quarter"
    )
    assert code == 0
    assert "value=0.5756463" in out


def test_piecewise_file_defaults_flags(tmp_path):
    spec = [{"lo": 0.0, "hi": 2.0, "kind": "const", "params": {"value": 0.5}}]
    path = tmp_path / "flat.json"
    path.write_text(json.dumps(spec))
    f = cli.load_piecewise_file(str(path))
    assert f.segments[0].monotonicity == "constant"


def test_piecewise_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([{"lo": 0, "hi": 1, "kind": "spline", "params": {}}]))
    code, _, err = run_cli(
        capsys, "bound", "--density", f"piecewise {bad}", "--method", "tv_quarter"
    )
    assert code == 2
    missing = tmp_path / "nope.json"
    code, _, err = run_cli(
        capsys, "bound", "--density", f"piecewise {missing}", "--method", "tv_quarter"
    )
    assert code == 2
    not_normalized = tmp_path / "heavy.json"
    not_normalized.write_text(
        json.dumps([{"lo": 0, "hi": 1, "kind": "const", "params": {"value": 3.0}}])
    )
    code, _, err = run_cli(
        capsys, "bound", "--density", f"piecewise {not_normalized}", "--method", "tv_quarter"
    )
    assert code == 2
    assert "mass" in err


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc_info:
        cli.main(["no-such-command"])
    assert exc_info.value.code == 2
