"""Command-line behavior: output formats, exit codes, file handling."""

import json

import pytest

from smdim import cli
from smdim.core import make_stream
from smdim.instances import make_builtin, serialize_instance, serialize_stream
from smdim.verify import CaseResult


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestDim:
    def test_plain_single_gamma(self, capsys):
        code, out, err = run_cli(
            capsys, "dim", "--builtin", "multiclass", "--dimension", "smdim",
            "--gamma", "1/4",
        )
        assert (code, out, err) == (0, "1\n", "")

    def test_plain_multiple_gammas_one_per_line(self, capsys):
        code, out, _ = run_cli(
            capsys, "dim", "--builtin", "multiclass", "--dimension", "smdim",
            "--gamma", "1/4,1/2,2",
        )
        assert code == 0
        assert out == "1\n1\n0\n"

    def test_gamma_zero_means_strict(self, capsys):
        code, out, _ = run_cli(
            capsys, "dim", "--builtin", "multiclass", "--dimension", "smdim",
            "--gamma", "0",
        )
        assert (code, out) == (0, "1\n")

    def test_json_output_is_stable(self, capsys):
        argv = (
            "dim", "--builtin", "multiclass", "--dimension", "smdim",
            "--gamma", "1/4,0", "--format", "json",
        )
        _, first, _ = run_cli(capsys, *argv)
        _, second, _ = run_cli(capsys, *argv)
        assert first == second
        doc = json.loads(first)
        assert doc["dimension"] == "smdim"
        assert doc["results"] == [
            {"gamma": "1/4", "strict": False, "value": 1},
            {"gamma": "0", "strict": True, "value": 1},
        ]

    def test_csv_output_uses_crlf(self, capsys):
        code, out, _ = run_cli(
            capsys, "dim", "--builtin", "multiclass", "--dimension", "smdim",
            "--gamma", "1/4", "--format", "csv",
        )
        assert code == 0
        assert out == "gamma,strict,value\r\n1/4,false,1\r\n"

    def test_ldim_and_ldimk(self, capsys):
        code, out, _ = run_cli(
            capsys, "dim", "--builtin", "multiclass", "--dimension", "ldim"
        )
        assert (code, out) == (0, "1\n")
        code, out, _ = run_cli(
            capsys, "dim", "--builtin", "list", "--dimension", "ldimk", "--k", "2",
            "--format", "json",
        )
        assert code == 0
        assert json.loads(out) == {"dimension": "ldimk", "k": 2, "value": 1}

    def test_seqfat_on_regression_grid(self, capsys):
        code, out, _ = run_cli(
            capsys, "dim", "--builtin", "regression", "--dimension", "seqfat",
            "--gamma", "1/2,1,2",
        )
        assert (code, out) == (0, "1\n1\n0\n")

    def test_msdim(self, capsys):
        code, out, _ = run_cli(
            capsys, "dim", "--builtin", "setvalued", "--dimension", "msdim",
            "--gamma", "1/2",
        )
        assert (code, out) == (0, "1\n")

    def test_instance_file_equals_builtin(self, capsys, tmp_path):
        problem, cls = make_builtin("multiclass:binary-constants")
        path = tmp_path / "instance.json"
        path.write_text(serialize_instance(problem, cls), encoding="utf-8")
        code, out, _ = run_cli(
            capsys, "dim", "--instance", str(path), "--dimension", "smdim",
            "--gamma", "1/4",
        )
        assert (code, out) == (0, "1\n")

    def test_out_file_matches_stdout(self, capsys, tmp_path):
        argv = (
            "dim", "--builtin", "multiclass", "--dimension", "smdim",
            "--gamma", "1/4", "--format", "json",
        )
        _, stdout_text, _ = run_cli(capsys, *argv)
        target = tmp_path / "dim.json"
        code, out, _ = run_cli(capsys, *argv, "--out", str(target))
        assert code == 0 and out == ""
        assert target.read_text(encoding="utf-8") == stdout_text


class TestDimErrors:
    def test_missing_gamma(self, capsys):
        code, _, err = run_cli(
            capsys, "dim", "--builtin", "multiclass", "--dimension", "smdim"
        )
        assert code == 2
        assert err.startswith("error:") and "--gamma" in err

    def test_unknown_builtin(self, capsys):
        code, _, err = run_cli(
            capsys, "dim", "--builtin", "nonesuch", "--dimension", "smdim",
            "--gamma", "1/4",
        )
        assert code == 2 and "unknown builtin" in err

    def test_unparseable_gamma(self, capsys):
        code, _, err = run_cli(
            capsys, "dim", "--builtin", "multiclass", "--dimension", "smdim",
            "--gamma", "fast",
        )
        assert code == 2 and err.startswith("error:")

    def test_seqfat_rejects_strict(self, capsys):
        code, _, err = run_cli(
            capsys, "dim", "--builtin", "regression", "--dimension", "seqfat",
            "--gamma", "0",
        )
        assert code == 2 and "seqfat needs gamma > 0" in err

    def test_missing_instance_file(self, capsys):
        code, _, err = run_cli(
            capsys, "dim", "--instance", "/nonexistent/path.json",
            "--dimension", "smdim", "--gamma", "1/4",
        )
        assert code == 2 and err.startswith("error:")

    def test_argparse_usage_errors_exit_2(self, capsys):
        with pytest.raises(SystemExit) as info:
            cli.main(["dim", "--builtin", "multiclass"])  # no --dimension
        assert info.value.code == 2
        with pytest.raises(SystemExit) as info:
            cli.main([
                "dim", "--builtin", "multiclass", "--instance", "x.json",
                "--dimension", "smdim", "--gamma", "1/4",
            ])
        assert info.value.code == 2


def write_stream(tmp_path, examples, name="stream.json"):
    path = tmp_path / name
    path.write_text(serialize_stream(make_stream(examples)), encoding="utf-8")
    return str(path)


class TestLearn:
    def test_mrsoa_realizable_stream(self, capsys, tmp_path):
        stream = write_stream(tmp_path, [(0, 1), (0, 1), (0, 1)])
        code, out, _ = run_cli(
            capsys, "learn", "--builtin", "multiclass", "--learner", "mrsoa",
            "--gamma", "1/4", "--stream", stream,
        )
        assert code == 0
        assert "rounds: 3\n" in out
        assert "cumulative expected loss: 1/2\n" in out
        assert "regret: 1/2\n" in out

    def test_unrealizable_stream_exits_2(self, capsys, tmp_path):
        stream = write_stream(tmp_path, [(0, 0, "0"), (0, 1, "0")])
        code, _, err = run_cli(
            capsys, "learn", "--builtin", "multiclass", "--learner", "mrsoa",
            "--gamma", "1/4", "--stream", stream,
        )
        assert code == 2
        assert "round 2: stream not eps_t-realizable" in err

    def test_csv_transcript(self, capsys, tmp_path):
        stream = write_stream(tmp_path, [(0, 1), (0, 0)])
        code, out, _ = run_cli(
            capsys, "learn", "--builtin", "multiclass", "--learner", "ftl",
            "--stream", stream, "--format", "csv",
        )
        assert code == 0
        lines = out.split("\r\n")
        assert lines[0] == "round,instance,label,eps,mixture,expected_loss"
        assert lines[1] == "1,x0,1,,1;0,1"
        assert lines[2] == "2,x0,0,,0;1,1"

    def test_agnostic_json_report(self, capsys, tmp_path):
        stream = write_stream(tmp_path, [(0, 1), (0, 0), (0, 1), (0, 1)])
        code, out, _ = run_cli(
            capsys, "learn", "--builtin", "multiclass", "--learner", "agnostic",
            "--gamma", "1/4", "--stream", stream, "--format", "json",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["mode"] == "exact"
        assert len(doc["rounds"]) == 4
        assert doc["hindsight_loss"] == "1"

    def test_monte_carlo_line(self, capsys, tmp_path):
        stream = write_stream(tmp_path, [(0, 1)] * 3)
        code, out, _ = run_cli(
            capsys, "learn", "--builtin", "multiclass", "--learner", "mrsoa",
            "--gamma", "1/4", "--stream", stream, "--mode", "monte-carlo",
            "--seed", "9", "--trials", "100",
        )
        assert code == 0
        assert "100 trials, seed 9" in out


class TestAdversary:
    def test_mrsoa_meets_guarantee_line(self, capsys):
        code, out, _ = run_cli(
            capsys, "adversary", "--builtin", "multiclass", "--learner", "mrsoa",
            "--gamma", "1/4",
        )
        assert code == 0
        assert "dimension: 1\n" in out
        assert "guaranteed regret: >= 1/4\n" in out
        assert "regret: 1/2\n" in out

    def test_rounds_beyond_certificate_rejected(self, capsys):
        code, _, err = run_cli(
            capsys, "adversary", "--builtin", "multiclass", "--learner", "uniform",
            "--gamma", "1/4", "-T", "5",
        )
        assert code == 2 and "at most 1 rounds" in err

    def test_uniform_csv_transcript(self, capsys):
        code, out, _ = run_cli(
            capsys, "adversary", "--builtin", "hilbert", "--learner", "uniform",
            "--gamma", "1/2", "--format", "csv",
        )
        assert code == 0
        assert out.startswith("round,instance,label,eps,mixture,expected_loss\r\n")


class TestVerify:
    def test_plain_run_passes(self, capsys):
        code, out, err = run_cli(capsys, "verify", "--prop", "ldim", "--cases", "4")
        assert (code, err) == (0, "")
        assert out.endswith("4/4 cases passed\n")
        assert out.count("case ") == 4
        assert "FAIL" not in out

    def test_numeric_alias_and_json(self, capsys):
        code, out, _ = run_cli(
            capsys, "verify", "--prop", "6.4", "--cases", "3", "--format", "json"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["prop"] == "msdim"
        assert doc["failures"] == 0
        assert len(doc["cases"]) == 3

    def test_unknown_prop_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "verify", "--prop", "7.9")
        assert code == 2 and err.startswith("error:")

    def test_failures_exit_3(self, capsys, monkeypatch):
        def forced(prop, seed=0, cases=20):
            return [CaseResult(0, prop, False, "forced counterexample")]

        monkeypatch.setattr(cli, "run_verification", forced)
        code, out, err = run_cli(capsys, "verify", "--prop", "ldim", "--cases", "1")
        assert code == 3
        assert "case 0: FAIL - forced counterexample" in out
        assert "0/1 cases passed" in out
        assert "1 verification case(s) failed" in err


class TestSqrtLower:
    def test_three_rounds_exact_value(self, capsys):
        code, out, _ = run_cli(
            capsys, "sqrt-lower", "--builtin", "multiclass", "-T", "3"
        )
        assert code == 0
        assert "eta=1\n" in out
        assert "expected regret over all sign streams: 3/4\n" in out
        assert "khinchine term eta*E|S|/2: 3/4\n" in out
        assert "satisfied: True\n" in out

    def test_zero_rounds(self, capsys):
        code, out, _ = run_cli(
            capsys, "sqrt-lower", "--builtin", "multiclass", "-T", "0"
        )
        assert code == 0
        assert "expected regret over all sign streams: 0\n" in out
        assert "satisfied: True\n" in out

    def test_json_document(self, capsys):
        code, out, _ = run_cli(
            capsys, "sqrt-lower", "--builtin", "multiclass", "-T", "2",
            "--format", "json",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["witness"] == {
            "x": 0, "h_minus": 0, "h_plus": 1, "y_minus": 0, "y_plus": 1, "eta": "1",
        }
        assert doc["satisfied"] is True

    def test_witnessless_instance_rejected(self, capsys, tmp_path):
        # single-hypothesis class: no two-point pattern exists
        doc = {
            "instances": ["x0"],
            "labels": [0, 1],
            "predictions": [0, 1],
            "loss": [["0", "1"], ["1", "0"]],
            "bound_c": "1",
            "hypotheses": [[0]],
        }
        path = tmp_path / "one.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        code, _, err = run_cli(
            capsys, "sqrt-lower", "--instance", str(path), "-T", "2"
        )
        assert code == 2 and "no two-point sign witness" in err
