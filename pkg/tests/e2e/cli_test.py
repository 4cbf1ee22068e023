import orjson
import pytest

from ranklab.entrypoints.cli import cli


# invariants


def test_invariants_without_c(runner):
    result = runner.invoke(cli, ["invariants", "--p", "5", "--l", "2"])
    assert result.exit_code == 0
    assert orjson.loads(result.stdout) == {"p": 5, "ell": 2, "m": 1, "a": 2}


def test_invariants_with_c(runner):
    result = runner.invoke(cli, ["invariants", "--p", "3", "--l", "2"])
    assert orjson.loads(result.stdout)["c"] == 3


def test_invariants_excluded_pair(runner):
    result = runner.invoke(cli, ["invariants", "--p", "2", "--l", "2"])
    assert result.exit_code == 2


# build


def test_build_is_byte_identical(runner, tmp_path):
    args = ["build", "xgroup", "--l", "2", "--a", "2", "--r", "1"]
    first = runner.invoke(cli, args)
    second = runner.invoke(cli, args)
    assert first.exit_code == 0
    assert first.stdout == second.stdout
    document = orjson.loads(first.stdout)
    assert document["degree"] == 8
    assert len(document["generators"]) == 3

    out = tmp_path / "x.json"
    written = runner.invoke(cli, [*args, "--out", str(out)])
    assert written.exit_code == 0
    assert out.read_text() == first.stdout


def test_build_sylow_sym(runner):
    result = runner.invoke(cli, ["build", "sylow-sym", "--n", "4", "--l", "2"])
    assert orjson.loads(result.stdout)["degree"] == 4


@pytest.mark.parametrize(
    "args",
    [
        ["build", "semidihedral", "--c", "2"],
        ["build", "nope", "--n", "2"],
        ["build", "cyclic", "--n", "2,3"],
        ["build", "cyclic", "--n"],
    ],
)
def test_build_errors(runner, args):
    assert runner.invoke(cli, args).exit_code == 2


# rank


@pytest.fixture
def ygroup_file(runner, tmp_path):
    path = tmp_path / "y.json"
    runner.invoke(cli, ["build", "ygroup", "--c", "3", "--r", "0", "--out", str(path)])
    return path


def test_rank_match_and_cached_rerun(runner, cache_dir, ygroup_file):
    first = runner.invoke(cli, ["rank", str(ygroup_file)])
    assert first.exit_code == 0
    report = orjson.loads(first.stdout)
    assert (report["status"], report["formula_value"], report["brute_value"]) == ("Match", 2, 2)
    assert "wall_time" not in report
    assert any(cache_dir.rglob("*.json"))

    second = runner.invoke(cli, ["rank", str(ygroup_file)])
    assert second.stdout == first.stdout
    timed = orjson.loads(runner.invoke(cli, ["rank", str(ygroup_file), "--timings"]).stdout)
    assert timed["cached"] is True


def test_rank_without_cache(runner, cache_dir, ygroup_file):
    result = runner.invoke(cli, ["rank", str(ygroup_file), "--no-cache"])
    assert result.exit_code == 0
    assert not cache_dir.exists() or not any(cache_dir.rglob("*.json"))


def test_rank_formula_needs_descriptor(runner, cache_dir, tmp_path):
    path = tmp_path / "plain.json"
    path.write_bytes(b'{"degree":3,"generators":[[1,2,0]],"name":null}\n')
    assert runner.invoke(cli, ["rank", str(path), "--method", "formula"]).exit_code == 2
    brute = runner.invoke(cli, ["rank", str(path), "--method", "brute"])
    assert brute.exit_code == 0
    assert orjson.loads(brute.stdout)["brute_value"] == 1


def test_rank_budget_gives_lower_bound(runner, cache_dir, tmp_path):
    path = tmp_path / "x.json"
    runner.invoke(cli, ["build", "xgroup", "--l", "2", "--a", "2", "--r", "1", "--out", str(path)])
    result = runner.invoke(cli, ["rank", str(path), "--budget", "1"])
    assert result.exit_code == 0
    assert '"LowerBoundOnly"' in result.output


def test_rank_missing_file(runner, cache_dir, tmp_path):
    assert runner.invoke(cli, ["rank", str(tmp_path / "missing.json")]).exit_code == 2


@pytest.mark.slow
def test_rank_of_y_three_one(runner, cache_dir, tmp_path):
    path = tmp_path / "y31.json"
    runner.invoke(cli, ["build", "ygroup", "--c", "3", "--r", "1", "--out", str(path)])
    report = orjson.loads(runner.invoke(cli, ["rank", str(path)]).stdout)
    assert (report["status"], report["formula_value"], report["brute_value"]) == ("Match", 4, 4)


# verify


@pytest.mark.parametrize(
    "args",
    [
        ["verify", "xgroups", "--l", "2", "--amax", "2", "--rmax", "1"],
        ["verify", "lemma-monomial", "--l", "3", "--n", "3", "--k", "2", "--trials", "200", "--seed", "7"],
        ["verify", "gl", "--p", "5", "--d", "2", "--l", "2"],
    ],
)
def test_verify_suites_pass(runner, cache_dir, args):
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    assert "PASS" in result.output


def test_verify_structured_output_is_deterministic(runner, cache_dir):
    args = ["verify", "gl", "--p", "5", "--d", "2", "--l", "2", "--format", "structured"]
    first = runner.invoke(cli, args)
    second = runner.invoke(cli, args)
    assert first.stdout == second.stdout
    document = orjson.loads(first.stdout)
    assert document["passed"] is True
    assert [row["target"] for row in document["rows"]] == ["gl-sylow(d=2,ell=2,p=5)"]


def test_verify_unknown_suite_and_flag(runner, cache_dir):
    assert runner.invoke(cli, ["verify", "nope"]).exit_code == 2
    assert runner.invoke(cli, ["verify", "xgroups", "--zmax", "1"]).exit_code == 2


# table


def test_table_csv(runner):
    result = runner.invoke(cli, ["table", "--p", "3,5", "--l", "2", "--d", "1-3"])
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert lines[0] == "p,ell,d,value,case"
    assert len(lines) == 7
    assert "5,2,3,4,three-halves" in lines
    assert lines[1:4] == ["3,2,1,1,d", "3,2,2,2,d", "3,2,3,3,d"]


def test_table_structured(runner):
    result = runner.invoke(cli, ["table", "--p", "7", "--l", "3", "--d", "2", "--format", "structured"])
    assert orjson.loads(result.stdout) == [{"p": 7, "ell": 3, "d": 2, "value": 2, "case": "d"}]


@pytest.mark.parametrize("d", ["3-1", "x", "1-"])
def test_table_rejects_malformed_ranges(runner, d):
    assert runner.invoke(cli, ["table", "--d", d]).exit_code == 2
