import io
import json

import pytest

from polyszego.cli import EXIT_INVALID, EXIT_NUMERIC, EXIT_OK, main, parse_int_list, run, run_config


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_int_list():
    assert parse_int_list("1..4") == [1, 2, 3, 4]
    assert parse_int_list("8..256*2") == [8, 16, 32, 64, 128, 256]
    assert parse_int_list("1,3,5") == [1, 3, 5]


def test_moments_lebesgue(capsys):
    code, out, _ = run_cli(["moments", "--measure", "lebesgue", "--n", "4"], capsys)
    assert code == EXIT_OK
    rows = out.strip().splitlines()[1:]
    assert [float(r.split(",")[1]) for r in rows] == [1, 0, 0, 0, 0]


def test_sumrule_flags(capsys):
    code, out, _ = run_cli(["sumrule", "--alphas", "0.5", "--roots", "1"], capsys)
    assert code == EXIT_OK
    lhs, rhs, diff, _ = out.strip().splitlines()[1].split(",")
    assert abs(float(lhs) + 1.5753641) < 1e-7 and abs(float(rhs) + 1.5753641) < 1e-7
    assert float(diff) <= 1e-8


def test_extremal_constant(capsys):
    code, out, _ = run_cli(["extremal", "--measure", "bs:0.5", "--n", "1..8"], capsys)
    assert code == EXIT_OK
    vals = [float(r.split(",")[1]) for r in out.strip().splitlines()[1:]]
    assert len(vals) == 8 and all(abs(v - 0.75) < 1e-15 for v in vals)


def test_bad_root_exit_2(capsys):
    code, _, err = run_cli(["sumrule", "--alphas", "0.5", "--roots", "1.2"], capsys)
    assert code == EXIT_INVALID and "roots" in err


def test_unknown_key_exit_2(tmp_path):
    cfg = {"experiment": "moments", "measure": "lebesgue", "n": 3, "colour": "red"}
    err = io.StringIO()
    assert run_config(cfg, io.StringIO(), err) == EXIT_INVALID
    assert "colour" in err.getvalue()


def test_unreadable_config(tmp_path):
    assert run(tmp_path / "missing.json", io.StringIO(), io.StringIO()) == EXIT_INVALID


def test_numeric_failure_exit_3(tmp_path):
    # a one-level refinement budget cannot resolve the essential singularity
    cfg = {"experiment": "moments", "n": 4, "measure": "psexp:1,1",
           "quadrature": {"max_refinement_depth": 1, "base_panels": 2},
           "output": {"csv": str(tmp_path / "inv.csv")}}
    code = run_config(cfg, io.StringIO(), io.StringIO())
    assert code == EXIT_NUMERIC
    assert (tmp_path / "inv.csv").read_text().startswith("# FAILED")
    side = json.loads((tmp_path / "inv.json").read_text())
    assert side["status"] == "failed"


def test_config_file_outputs_are_deterministic(tmp_path):
    cfg = {"experiment": "asym_l2", "measure": "lebesgue", "weight": [[1, 0]], "n_list": "1..3",
           "grid_size": 1024}
    texts = []
    for k in range(2):
        out = tmp_path / f"run{k}.csv"
        path = tmp_path / f"cfg{k}.json"
        path.write_text(json.dumps(dict(cfg, output={"csv": str(out)})))
        assert run(path, io.StringIO(), io.StringIO()) == EXIT_OK
        texts.append(out.read_text())
        side = json.loads(out.with_suffix(".json").read_text())
        assert side["status"] == "ok" and side["config"]["n_list"] == [1, 2, 3]
        assert side["config"]["quadrature"]["precision_bits"] == 128
    assert texts[0] == texts[1]
    assert all(float(r.split(",")[1]) <= 1e-8 for r in texts[0].splitlines()[1:])


def test_precision_env(monkeypatch, capsys):
    monkeypatch.setenv("POLYSZEGO_PRECISION_BITS", "96")
    code, out, _ = run_cli(["moments", "--measure", "bs:0.5", "--n", "1", "--dump-config"], capsys)
    assert code == EXIT_OK
    cfg = json.loads(out)
    assert cfg["experiment"] == "moments"


def test_unknown_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["moments", "--measure", "lebesgue", "--n", "2", "--bogus"])
    assert info.value.code == 2
