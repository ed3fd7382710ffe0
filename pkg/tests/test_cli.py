import json

import pytest

from finmod.cli import main

CORPUS = "corpus"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_depth_verb(capsys):
    code, out, _ = run(
        capsys,
        "depth",
        "--structure",
        f"{CORPUS}/ord4.json",
        "--formula",
        f"{CORPUS}/quadratic_depth.fol",
    )
    assert code == 0 and out.strip() == "10"


def test_depth_inflationary(capsys):
    code, out, _ = run(
        capsys,
        "depth",
        "--inflationary",
        "--structure",
        f"{CORPUS}/ord5.json",
        "--formula",
        f"{CORPUS}/linear_inflationary.fol",
    )
    assert code == 0 and out.strip() == "5"


def test_game_verb(capsys):
    code, out, _ = run(
        capsys,
        "game",
        "--ef",
        "-m",
        "3",
        "--left",
        f"{CORPUS}/chain2.json",
        "--right",
        f"{CORPUS}/chain3.json",
    )
    assert code == 0 and out.strip() == "Spoiler"


def test_pebble_verb_json(capsys):
    code, out, _ = run(
        capsys,
        "pebble",
        "-s",
        "3",
        "-m",
        "3",
        "--left",
        f"{CORPUS}/chain2.json",
        "--right",
        f"{CORPUS}/chain3.json",
        "--format",
        "json",
    )
    assert code == 0
    assert json.loads(out) == {"winner": "Spoiler"}


def test_encode_verb(capsys):
    code, out, _ = run(capsys, "encode", "--structure", f"{CORPUS}/g3.json")
    assert code == 0 and out.strip() == "0100010000010"


def test_stages_json_round_trips(capsys):
    code, out, _ = run(
        capsys,
        "stages",
        "--structure",
        f"{CORPUS}/ord3.json",
        "--formula",
        f"{CORPUS}/quadratic_depth.fol",
        "--format",
        "json",
    )
    assert code == 0
    data = json.loads(out)
    assert data["verdict"] == {"fixedPointAt": 6}


def test_sim_verb(capsys):
    code, out, _ = run(
        capsys,
        "sim",
        "--structure",
        f"{CORPUS}/ord4.json",
        "--formula",
        f"{CORPUS}/staggered_counters.fol",
        "--format",
        "json",
    )
    assert code == 0
    assert json.loads(out)["iterations"] == 6


def test_nested_verb(capsys):
    code, out, _ = run(
        capsys,
        "nested",
        "--structure",
        f"{CORPUS}/ord3.json",
        "--outer",
        f"{CORPUS}/counter_x.fol",
        "--inner",
        f"{CORPUS}/counter_y.fol",
        "--format",
        "json",
    )
    assert code == 0
    assert "innerDepths" in json.loads(out)


def test_ranker_verb(capsys):
    code, out, _ = run(
        capsys, "ranker", "--word", "1111111111", "--ranker", ">1" * 10
    )
    assert code == 0 and out.strip() == "10"
    code, out, _ = run(capsys, "ranker", "--word", "111111111", "--ranker", ">1" * 10)
    assert code == 0 and out.strip() == "undefined"


def test_counts_verbs(capsys):
    code, out, _ = run(capsys, "counts", "--expr", "A x. E y. (A(x) <-> B(y))")
    assert code == 0 and "connectives: 2" in out
    code, out, _ = run(capsys, "counts", "--recurrence", "2,1,2")
    assert code == 0 and out.strip() == "8"


def test_unfold_verb(capsys):
    code, out, _ = run(
        capsys,
        "unfold",
        "--formula",
        f"{CORPUS}/reachability.fol",
        "-n",
        "2",
        "--format",
        "json",
    )
    assert code == 0
    assert json.loads(out)["connectives"] == 8


def test_qb_iterate(capsys):
    code, out, _ = run(
        capsys,
        "qb",
        "--formula",
        f"{CORPUS}/reachability.fol",
        "--iterate",
        "2",
        "--structure",
        f"{CORPUS}/ord3.json",
        "--format",
        "json",
    )
    # ord structures carry no E relation, so this is a domain error
    assert code == 1


def test_rank_verb(capsys):
    code, out, _ = run(
        capsys, "rank", "--structure", f"{CORPUS}/chain3.json", "-s", "2"
    )
    assert code == 0 and out.strip().isdigit()


def test_survey_verb(capsys):
    code, out, _ = run(
        capsys, "survey", "--preset", "cycles", "-s", "2", "--sizes", "3..5",
        "--format", "csv",
    )
    assert code == 0
    assert len(out.strip().splitlines()) == 3


def test_interp_verb(capsys):
    code, out, _ = run(
        capsys,
        "interp",
        "--interp",
        f"{CORPUS}/pairing_interp.json",
        "--structure",
        f"{CORPUS}/path3.json",
        "--format",
        "json",
    )
    assert code == 0
    assert json.loads(out)["size"] == 9


def test_run_and_compile_verbs(capsys):
    code, out, _ = run(
        capsys,
        "run",
        "--machine",
        f"{CORPUS}/machine_first_bit.json",
        "--structure",
        f"{CORPUS}/bit_on_first.json",
    )
    assert code == 0 and out.strip() == "accept"
    code, out, _ = run(
        capsys,
        "compile",
        "--machine",
        f"{CORPUS}/machine_first_bit.json",
        "--structure",
        f"{CORPUS}/bit_on_first.json",
        "--format",
        "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["counts"]["skeletonConnectives"] == 4 * 8 * 1


def test_eval_verb(capsys):
    code, out, _ = run(
        capsys,
        "eval",
        "--structure",
        f"{CORPUS}/path3.json",
        "--expr",
        "[lfp R(x, y): E(x, y) | (E z. (R(x, z) & E(z, y)))](u, v)",
        "--assign",
        '{"u": 0, "v": 2}',
    )
    assert code == 0 and out.strip() == "true"


def test_domain_error_exit_code(capsys):
    code, _, err = run(
        capsys, "encode", "--structure", f"{CORPUS}/does_not_exist.json"
    )
    assert code == 1 and "error:" in err


def test_missing_required_flag_is_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        main(["game", "--left", "a.json", "--right", "b.json"])  # no -m
    assert excinfo.value.code == 2


def test_unknown_verb_usage_exit():
    with pytest.raises(SystemExit) as excinfo:
        main(["frobnicate"])
    assert excinfo.value.code == 2


def test_json_outputs_are_deterministic(capsys):
    args = [
        "stages",
        "--structure",
        f"{CORPUS}/ord3.json",
        "--formula",
        f"{CORPUS}/quadratic_depth.fol",
        "--format",
        "json",
    ]
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
