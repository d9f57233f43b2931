import json

import pytest

from matchlab import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExitCodes:
    def test_count_prints_and_succeeds(self, capsys):
        code, out, _ = run(capsys, "count", "--shape", "4,4")
        assert code == 0
        assert out.strip() == "24"

    def test_strata_perfect_m(self, capsys):
        code, out, _ = run(capsys, "strata", "--shape", "2,2,2", "--perfect-m")
        assert code == 0
        assert out.strip() == "[4, 3, 0, 1]"

    def test_domain_error_is_exit_1(self, capsys):
        code, _, err = run(capsys, "count", "--shape", "3,3,3")
        assert code == 1
        assert "odd vertex count" in err

    def test_usage_error_is_exit_2(self, capsys):
        assert cli.main(["count", "--no-such-flag"]) == 2
        assert cli.main(["definitely-not-a-command"]) == 2

    def test_missing_matching_choice(self, capsys):
        code, _, err = run(capsys, "strata", "--shape", "2,2")
        assert code == 1
        assert "--perfect-m" in err


class TestParsing:
    def test_parse_profile(self):
        p = cli.parse_profile("0:1:2,1:2:1")
        assert p.items() == ((0, 1, 2), (1, 2, 1))

    def test_parse_profile_rejects_garbage(self, capsys):
        code, _, err = run(capsys, "strata", "--shape", "2,2", "--profile", "nope")
        assert code == 1

    def test_parse_lambda(self):
        from fractions import Fraction

        assert cli.parse_lambda("3/4") == Fraction(3, 4)
        assert cli.parse_lambda("2") == Fraction(2)


class TestArtifacts:
    def test_identical_config_identical_bytes(self, tmp_path, capsys):
        out = tmp_path / "a"
        args = [
            "strata", "--shape", "2,2,2,2", "--perfect-m",
            "--out", str(out), "--format", "json,csv",
        ]
        assert cli.main(args) == 0
        first = (out.with_suffix(".json").read_bytes(), out.with_suffix(".csv").read_bytes())
        assert cli.main(args) == 0
        second = (out.with_suffix(".json").read_bytes(), out.with_suffix(".csv").read_bytes())
        assert first == second
        capsys.readouterr()

    def test_json_and_csv_are_cross_consistent(self, tmp_path, capsys):
        out = tmp_path / "r"
        assert cli.main(
            ["ratios", "--shape", "2,2,2", "--perfect-m", "--out", str(out), "--format", "json,csv"]
        ) == 0
        payload = json.loads(out.with_suffix(".json").read_text())
        lines = out.with_suffix(".csv").read_text().splitlines()
        assert lines[0].startswith("# ")  # config echoed as a JSON header
        header, first_row = lines[1].split(","), lines[2].split(",")
        assert header[0] == "k"
        row0 = payload["result"]["rows"][0]
        assert first_row[1] == row0["actual"][0] and first_row[2] == row0["actual"][1]
        capsys.readouterr()

    def test_artifacts_embed_config_and_version(self, tmp_path, capsys):
        out = tmp_path / "c.json"
        assert cli.main(["count", "--shape", "2,2", "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["engine"]["name"] == "matchlab"
        assert payload["engine"]["version"]
        assert payload["config"]["shape"] == "2,2"
        capsys.readouterr()

    def test_worker_count_does_not_change_output(self, tmp_path, capsys):
        outs = []
        for w in ("1", "3"):
            out = tmp_path / f"w{w}"
            assert cli.main(
                ["strata", "--shape", "2,2,1,1", "--perfect-m",
                 "--force-generic", "--workers", w, "--out", str(out)]
            ) == 0
            outs.append(json.loads(out.with_suffix(".json").read_text())["result"])
        assert outs[0] == outs[1]
        capsys.readouterr()

    def test_unknown_format_rejected(self, capsys):
        code, _, err = run(
            capsys, "count", "--shape", "2,2", "--out", "/tmp/x", "--format", "yaml"
        )
        assert code == 1

    def test_sample_csv_log(self, tmp_path, capsys):
        out = tmp_path / "s"
        assert cli.main(
            ["sample", "--shape", "2,2,2", "--perfect-m", "--samples", "20",
             "--seed", "1", "--out", str(out), "--format", "csv"]
        ) == 0
        lines = out.with_suffix(".csv").read_text().splitlines()
        cfg = json.loads(lines[0][2:])
        assert cfg["config"]["seed"] == 1
        assert lines[1].split(",")[:2] == ["sample_index", "overlap"]
        assert len(lines) == 2 + 20
        capsys.readouterr()


class TestSubcommands:
    def test_tv(self, capsys):
        code, out, _ = run(capsys, "tv", "--shape", "2,2,2", "--perfect-m")
        assert code == 0
        assert "tv=0.140145" in out

    def test_converge(self, capsys):
        code, out, _ = run(capsys, "converge", "--shapes", "2,2;2,2,2")
        assert code == 0
        assert len(out.strip().splitlines()) == 2

    def test_audit_switch(self, capsys):
        code, out, _ = run(
            capsys, "audit-switch", "--shape", "2,2,2", "--perfect-m", "--k", "1"
        )
        assert code == 0
        assert "balanced=True" in out

    def test_audit_edge_on_graph_file(self, tmp_path, capsys):
        from matchlab import GeneralGraph

        path = tmp_path / "g.json"
        path.write_text(json.dumps(GeneralGraph.complete(6).to_json_obj()))
        code, out, _ = run(capsys, "audit-edge", "--graph", str(path), "--edge", "0,1")
        assert code == 0
        assert "Pr=1/5" in out

    def test_audit_concentration(self, capsys):
        code, out, _ = run(
            capsys, "audit-concentration", "--shape", "4,4,4,4", "--perfect-m",
            "--samples", "10", "--seed", "2", "--census", "block",
        )
        assert code == 0
        assert "fraction_within=1.0000" in out

    def test_census_cells(self, capsys):
        code, out, _ = run(capsys, "census-cells", "--shape", "6,6,6,6")
        assert code == 0
        assert "bounded=True" in out

    def test_check_bound_explicit_and_random(self, capsys):
        code, out, _ = run(capsys, "check-bound", "--x", "3,3", "--y", "5,1")
        assert code == 0 and "failures=0" in out
        code, out, _ = run(capsys, "check-bound", "--random", "100", "--seed", "3")
        assert code == 0 and "checked=100" in out

    def test_oracle_subcommand(self, capsys):
        code, out, _ = run(capsys, "oracle", "--shape", "2,2,2", "--perfect-m")
        assert code == 0
        assert "strata=[4, 3, 0, 1]" in out

    def test_oracle_without_matching(self, capsys):
        code, out, _ = run(capsys, "oracle", "--shape", "2,2")
        assert code == 0
        assert "total=2" in out


class TestWorkersEnv:
    def test_env_fallback(self, monkeypatch):
        from matchlab._parallel import default_workers

        monkeypatch.setenv("MATCHLAB_WORKERS", "5")
        assert default_workers() == 5
        monkeypatch.setenv("MATCHLAB_WORKERS", "junk")
        assert default_workers() == 1
        monkeypatch.delenv("MATCHLAB_WORKERS")
        assert default_workers() == 1
