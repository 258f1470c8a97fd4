"""End-to-end command-line behaviour: exit codes, payloads, reproducibility."""

import json

import numpy as np
import pytest

import majlab
from majlab.cli import main
from majlab.dynamics import OpinionVector, stabilise
from majlab.probe import estimate_probability, fixed_point_q
from majlab.stability import is_strongly_t_stable
from majlab.trees import RootedTree, build_perfect_tree, load_tree, save_tree
from majlab.artifacts import save_opinions
from majlab.worstcase import worst_case_tau

HOST_EDGES = [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (4, 6), (4, 7)]


@pytest.fixture(autouse=True)
def clean_seed_env(monkeypatch):
    monkeypatch.delenv("MAJLAB_SEED", raising=False)


@pytest.fixture
def tree_file(tmp_path):
    path = tmp_path / "tree.txt"
    save_tree(build_perfect_tree(2, 2), path)
    return path


def run_json(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "-o", str(out)])
    assert code == 0
    return json.loads(out.read_text(encoding="utf-8"))


def test_gen_writes_perfect_tree(tmp_path, capsys):
    out = tmp_path / "gen.txt"
    assert main(["gen", "--k", "2", "--h", "2", "-o", str(out)]) == 0
    assert load_tree(out) == build_perfect_tree(2, 2)
    text = out.read_text(encoding="utf-8")
    assert text.startswith(f"# majlab {majlab.__version__}")
    # without -o the tree goes to stdout
    assert main(["gen", "--k", "2", "--h", "1"]) == 0
    assert "tree n=4 root=0" in capsys.readouterr().out


def test_simulate_round_trip(tmp_path, tree_file):
    tree = load_tree(tree_file)
    xi0 = OpinionVector.from_string("+-++-+-++-")
    init = tmp_path / "xi.txt"
    save_opinions(init, xi0)
    trace = tmp_path / "trace.txt"
    payload = run_json(
        ["simulate", "--tree", str(tree_file), "--init", str(init), "--trace", str(trace)],
        tmp_path,
    )
    res = stabilise(tree, xi0, keep_history=True)
    result = payload["result"]
    assert payload["command"] == "simulate"
    assert result["tau"] == res.tau
    assert result["steps_executed"] == res.tau + 2
    assert result["init"] == xi0.to_string()
    assert result["stable_even"] == res.stable_even.to_string()
    assert result["first_flip"] == [int(x) for x in res.first_flip]
    lines = trace.read_text(encoding="utf-8").splitlines()
    assert len(lines) == res.steps_executed + 1
    assert lines[0] == xi0.to_string()
    for s, state in zip(lines, res.history):
        assert OpinionVector.from_string(s).to_signs().tolist() == state.tolist()


def test_simulate_seed_resolution(tmp_path, tree_file, monkeypatch):
    payload = run_json(["simulate", "--tree", str(tree_file)], tmp_path)
    assert payload["seed"] == 0
    want = OpinionVector.random(10, np.random.default_rng(0)).to_string()
    assert payload["result"]["init"] == want

    monkeypatch.setenv("MAJLAB_SEED", "7")
    payload = run_json(["simulate", "--tree", str(tree_file)], tmp_path)
    assert payload["seed"] == 7
    payload = run_json(["simulate", "--tree", str(tree_file), "--seed", "9"], tmp_path)
    assert payload["seed"] == 9

    monkeypatch.setenv("MAJLAB_SEED", "pony")
    assert main(["simulate", "--tree", str(tree_file)]) == 1


def test_worst_case_and_brute_force_cli(tmp_path, tree_file):
    tree = load_tree(tree_file)
    report = worst_case_tau(tree)
    payload = run_json(["worst-case", "--tree", str(tree_file)], tmp_path)
    result = payload["result"]
    assert result["tau"] == report.tau
    assert result["path"] == [int(v) for v in report.argmax.vertices]
    assert result["witness"] == report.witness.to_string()
    assert result["per_vertex_bound"] == {
        str(v): b for v, b in report.per_vertex_bound.items()
    }
    brute = run_json(["brute-force", "--tree", str(tree_file)], tmp_path)
    assert brute["result"]["tau"] == report.tau


def test_stability_cli(tmp_path):
    path = tmp_path / "host.txt"
    save_tree(RootedTree.from_edges(HOST_EDGES), path)
    payload = run_json(
        ["stability", "--tree", str(path), "--kind", "strong", "--vertex", "1",
         "--t", "1", "--seed", "4"],
        tmp_path,
    )
    result = payload["result"]
    xi0 = OpinionVector.from_string(result["init"])
    verdict = is_strongly_t_stable(RootedTree.from_edges(HOST_EDGES), xi0, 1, 1)
    assert result["verdict"] == verdict.verdict
    assert result["method"] == verdict.method
    assert result["kind"] == "strong" and result["vertex"] == 1

    # every kind's success payload must serialize (verdicts are plain bools)
    for kind, t_args in [("weak", ["--t", "2"]), ("le_t", ["--t", "2"]),
                         ("one_close", [])]:
        payload = run_json(
            ["stability", "--tree", str(path), "--kind", kind, "--vertex", "1",
             *t_args, "--seed", "4"],
            tmp_path,
        )
        assert payload["result"]["kind"] == kind
        assert payload["result"]["verdict"] in (True, False)

    assert main(["stability", "--tree", str(path), "--kind", "one_close",
                 "--vertex", "1", "--t", "2"]) == 1
    assert main(["stability", "--tree", str(path), "--kind", "weak",
                 "--vertex", "1"]) == 1


def test_stability_error_codes_on_stderr(tmp_path, capsys):
    path = tmp_path / "host.txt"
    save_tree(RootedTree.from_edges(HOST_EDGES), path)
    assert main(["stability", "--tree", str(path), "--kind", "weak",
                 "--vertex", "1"]) == 1
    err = capsys.readouterr().err
    assert err.startswith("BAD_TIME:")
    assert len(err.strip().splitlines()) == 1


def test_prob_cli(tmp_path, capsys):
    payload = run_json(
        ["prob", "--target", "weak", "--height", "2", "--t", "0"], tmp_path
    )
    est = estimate_probability("weak", 2, 0)
    assert payload["result"]["value"] == est.value == 15 / 16
    assert payload["result"]["method"] == "exact"
    assert payload["result"]["unresolved"] is None

    assert main(["prob", "--target", "weak", "--height", "2", "--t", "0",
                 "--xi", "+"]) == 1
    assert capsys.readouterr().err.startswith("ERROR:")


def test_mc_tau_cli_is_worker_invariant(tmp_path):
    def run(workers, seed, tag):
        out = tmp_path / f"mc{tag}.json"
        csv = tmp_path / f"mc{tag}.csv"
        code = main(["mc-tau", "--k", "2", "--h", "3", "--trials", "30",
                     "--seed", str(seed), "--workers", str(workers),
                     "--csv", str(csv), "-o", str(out)])
        assert code == 0
        payload = json.loads(out.read_text(encoding="utf-8"))
        del payload["generated_at"]
        rows = [
            line for line in csv.read_text(encoding="utf-8").splitlines()
            if not line.startswith("# generated_at")
        ]
        return payload, rows

    base = run(1, 42, "a")
    sharded = run(3, 42, "b")
    reseeded = run(1, 43, "c")
    assert base == sharded
    assert base[0]["result"]["taus"] != reseeded[0]["result"]["taus"]
    assert base[1][2] == "trial,seed,tau"
    assert len(base[1]) == 30 + 3  # 2 retained comments + header + rows


def test_fixed_point_cli(tmp_path):
    payload = run_json(["fixed-point"], tmp_path)
    res = fixed_point_q()
    assert payload["result"]["q"] == res.q
    assert payload["result"]["iterations"] == res.iterations
    assert payload["seed"] is None


def test_check_claims_cli(tmp_path, capsys):
    out = tmp_path / "claims.json"
    code = main(["check-claims", "--suites", "fixed_point_bracket,tau_within_budget",
                 "--instances", "20", "--seed", "2", "-o", str(out)])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "fixed_point_bracket: pass" in stdout
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert [r["name"] for r in payload["result"]] == [
        "fixed_point_bracket", "tau_within_budget",
    ]
    assert all(r["passed"] for r in payload["result"])

    assert main(["check-claims", "--suites", "nope"]) == 1
    assert capsys.readouterr().err.startswith("ERROR:")


def test_domain_error_exits(tmp_path, tree_file, capsys):
    assert main(["simulate", "--tree", str(tmp_path / "missing.txt")]) == 1
    assert capsys.readouterr().err.startswith("IO_ERROR:")

    short = tmp_path / "short.txt"
    short.write_text("+-+\n", encoding="utf-8")
    assert main(["simulate", "--tree", str(tree_file), "--init", str(short)]) == 1
    err = capsys.readouterr().err
    assert err.startswith("INIT_LENGTH_MISMATCH:")

    assert main(["gen", "--k", "3", "--h", "2"]) == 1
    assert capsys.readouterr().err.startswith("DEGREE_PARITY:")


def test_usage_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert f"majlab {majlab.__version__}" in capsys.readouterr().out
