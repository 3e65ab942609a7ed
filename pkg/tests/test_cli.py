"""Tests for the command-line front end."""

from __future__ import annotations

import json
import pathlib

import pytest

from hindsight.cli import main

DATA = pathlib.Path(__file__).parent / "data"
DOOR = str(DATA / "smarthome.hpx")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- solve --------------------------------------------------------------------


def test_solve_door_prints_the_conditional_plan_tree(capsys):
    code, out, err = run(capsys, "solve", DOOR, "--max-steps", "4",
                         "--max-branches", "1")
    assert code == 0
    assert "0: open_door" in out
    assert "1: sense_open" in out
    assert "if open:" in out
    assert "2: drive" in out
    assert "plan found: 3 occurrences" in out
    assert err == ""


def test_solve_door_atom_format_is_the_pinned_atom_set(capsys):
    code, out, err = run(capsys, "solve", DOOR, "--max-steps", "4",
                         "--max-branches", "1", "--format", "atoms")
    assert code == 0
    assert out.splitlines() == [
        "nextBr(1,0,1)",
        "occ(drive,2,0)",
        "occ(open_door,0,0)",
        "occ(sense_open,1,0)",
        "sRes(-open,1,1)",
        "sRes(open,1,0)",
    ]
    assert "plan found" in err  # summary moves to the diagnostic stream


def test_solve_door_json_lines_ends_with_a_run_report(capsys):
    code, out, _ = run(capsys, "solve", DOOR, "--max-steps", "4",
                       "--max-branches", "1", "--format", "json-lines",
                       "--oracle-check")
    assert code == 0
    records = [json.loads(line) for line in out.splitlines()]
    *plan_rows, report = records
    assert [r["action"] for r in plan_rows] == [
        "open_door", "sense_open", "drive"
    ]
    assert plan_rows[1]["sensed"] == "open"
    assert report["plan_found"] is True
    assert report["occurrences"] == 3
    assert report["domain"] == DOOR
    assert report["mode"] == "sequential"
    assert report["max_steps"] == 4 and report["max_branches"] == 1
    assert report["oracle"].startswith("ok (")
    counts = report["atom_counts"]
    assert counts == sorted(counts)  # monotone nondecreasing, surfaced
    assert report["wall_seconds"] >= 0


def test_solve_reports_oracle_result_in_the_summary(capsys):
    code, out, _ = run(capsys, "solve", DOOR, "--max-steps", "4",
                       "--max-branches", "1", "--oracle-check")
    assert code == 0
    assert "oracle check: ok (" in out


def test_solve_too_small_budget_exits_one(capsys):
    code, out, err = run(capsys, "solve", DOOR, "--max-steps", "1")
    assert code == 1
    assert "no plan within steps=1" in err
    assert out == ""


def test_solve_no_plan_json_lines_still_emits_the_report(capsys):
    code, out, _ = run(capsys, "solve", DOOR, "--max-steps", "1",
                       "--format", "json-lines")
    assert code == 1
    report = json.loads(out.splitlines()[-1])
    assert report["plan_found"] is False
    assert report["occurrences"] is None


def test_solve_missing_file_exits_two(capsys):
    code, _, err = run(capsys, "solve", "no_such_file.hpx")
    assert code == 2
    assert "error:" in err


def test_solve_parse_error_is_span_tagged(capsys, tmp_path):
    bad = tmp_path / "broken.hpx"
    bad.write_text("(:fluents x")
    code, _, err = run(capsys, "solve", str(bad))
    assert code == 2
    assert "1:1" in err


def test_solve_rejects_a_zero_step_budget(capsys):
    code, _, err = run(capsys, "solve", DOOR, "--max-steps", "0")
    assert code == 2
    assert "step budget" in err


def test_solve_optimal_reports_the_minimum(capsys):
    code, out, _ = run(capsys, "bench", "bomb", "--n", "2", "--max-steps", "3",
                       "--optimal")
    assert code == 0
    assert "plan found: 2 occurrences" in out


def test_solve_emit_asp_writes_the_program(capsys, tmp_path):
    target = tmp_path / "door.lp"
    code, _, _ = run(capsys, "solve", DOOR, "--max-steps", "4",
                     "--max-branches", "1", "--emit-asp", str(target))
    assert code == 0
    assert target.read_text() == (DATA / "smarthome_program.lp").read_text()


def test_solve_trace_writes_knowledge_atoms(capsys, tmp_path):
    target = tmp_path / "door.trace"
    code, _, _ = run(capsys, "solve", DOOR, "--max-steps", "4",
                     "--max-branches", "1", "--trace", str(target))
    assert code == 0
    lines = target.read_text().splitlines()
    assert "knows(in_liv,3,3,0)" in lines
    assert "occ(open_door,0,0)" in lines
    assert lines == sorted(lines)


def test_solve_with_parallel_root_matches_serial_output(capsys):
    _, serial, _ = run(capsys, "solve", DOOR, "--max-steps", "4",
                       "--max-branches", "1", "--format", "atoms")
    _, parallel, _ = run(capsys, "solve", DOOR, "--max-steps", "4",
                         "--max-branches", "1", "--format", "atoms",
                         "--jobs", "2")
    assert parallel == serial


# -- bench --------------------------------------------------------------------


def test_bench_defaults_to_the_recommended_bounds(capsys):
    code, out, _ = run(capsys, "bench", "sickness", "--n", "2",
                       "--format", "json-lines")
    assert code == 0
    report = json.loads(out.splitlines()[-1])
    assert report["domain"] == "sickness(2)"
    assert (report["max_steps"], report["max_branches"]) == (3, 1)
    assert report["plan_found"] is True


def test_bench_rejects_an_undersized_instance(capsys):
    code, _, err = run(capsys, "bench", "rings", "--n", "1")
    assert code == 2
    assert "at least 2" in err


def test_bench_concurrent_mode_packs_independent_actions(capsys):
    code, out, _ = run(capsys, "bench", "bomb", "--n", "2", "--max-steps", "2",
                       "--concurrent")
    assert code == 0
    assert "dunk_1 + dunk_2" in out


def test_bench_optimize_emits_static_relations_as_holds(capsys, tmp_path):
    target = tmp_path / "rings.lp"
    code, _, _ = run(capsys, "bench", "rings", "--n", "2", "--optimize",
                     "--emit-asp", str(target))
    assert code == 0
    text = target.read_text()
    assert "holds(adj_1_2)." in text
    assert ":- occ(move_1_2,T,BR), not holds(adj_1_2)." in text
    assert "fluent(adj_1_2)." not in text


def test_bench_oracle_check_passes_on_every_family(capsys):
    for family, n in (("bomb", "2"), ("rings", "2"), ("sickness", "2")):
        code, out, _ = run(capsys, "bench", family, "--n", n, "--oracle-check",
                           "--format", "json-lines")
        assert code == 0
        report = json.loads(out.splitlines()[-1])
        assert report["oracle"].startswith("ok (")


# -- validate -----------------------------------------------------------------


def test_validate_accepts_the_door_domain(capsys):
    code, out, _ = run(capsys, "validate", DOOR)
    assert code == 0
    assert out.startswith("ok: 3 fluents, 3 actions")


def test_validate_reports_structural_violations(capsys, tmp_path):
    bad = tmp_path / "mixed.hpx"
    bad.write_text("(:fluents a b) (:action x :effect a :observe b) (:goal weak a)")
    code, _, err = run(capsys, "validate", str(bad))
    assert code == 2
    assert "mixed sensing/physical action 'x'" in err


def test_validate_parse_error_exits_two(capsys, tmp_path):
    bad = tmp_path / "broken.hpx"
    bad.write_text(")")
    code, _, err = run(capsys, "validate", str(bad))
    assert code == 2
    assert "error:" in err


# -- argument handling --------------------------------------------------------


def test_unknown_subcommand_is_a_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["conquer"])
    assert exc.value.code == 2


def test_missing_bench_size_is_a_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["bench", "bomb"])
    assert exc.value.code == 2
