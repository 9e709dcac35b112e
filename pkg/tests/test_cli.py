import json
import subprocess
import sys

import pytest

from ccsgames.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_translate_shows_the_gathered_choice(capsys):
    code, out, _ = run(capsys, "translate", "[1] a1.0 + a1.tick.0")
    assert code == 0
    assert "⊕[⟨in1↦⊕[" in out


def test_translate_json(capsys):
    code, out, _ = run(capsys, "translate", "--json", "[0] tick.0")
    data = json.loads(out)
    assert code == 0 and data["process"] == "[0] tick.0"


def test_weak_bisim_example(capsys):
    code, out, _ = run(capsys, "bisim", "--weak", "--depth", "5",
                       "--left-ccs", "[1] new a. (a2.0 | 'a2.0)", "--right-ccs", "[1] 0")
    assert code == 0 and "verdict: pass" in out


def test_weak_bisim_against_strategies(capsys):
    code, _, _ = run(capsys, "bisim", "--weak", "--left-ccs", "[1] a1.0 | 'a1.0",
                     "--right-strategy", "[1] a1.0 | 'a1.0")
    assert code == 0


def test_strong_check(capsys):
    code, out, _ = run(capsys, "bisim", "--strong", "--depth", "3", "--left-ccs", "[1] a1.0 | 'a1.0")
    assert code == 0


def test_fairtest_example_fails_with_a_witness(capsys):
    code, out, _ = run(capsys, "fairtest", "--standard", "--gen-depth", "2", "--json",
                       "--left", "[1] a1.0", "--right", "[1] 0")
    data = json.loads(out)
    assert code == 1 and data["witness"]["test"] == "'a1.tick.0"
    # the witness replays as a one-test family
    code, out, _ = run(capsys, "fairtest", "--standard", "--json", "--test", data["witness"]["test"],
                       "--left", "[1] a1.0", "--right", "[1] 0")
    assert code == 1 and json.loads(out)["witness"] == data["witness"]


def test_semantic_fairtest_names_the_test(capsys):
    code, out, _ = run(capsys, "fairtest", "--semantic", "--gen-depth", "2", "--json",
                       "--left", "[1] a1.0", "--right", "[1] 0")
    assert code == 1 and json.loads(out)["witness"]["test_text"] == "'a1.tick.0"


def test_fairtest_pass(capsys):
    code, _, _ = run(capsys, "fairtest", "--standard", "--gen-depth", "1",
                     "--left", "[2] a1.0 | a2.0", "--right", "[2] a2.0 | a1.0")
    assert code == 0


def test_inconclusive_exit_code(capsys):
    code, out, _ = run(capsys, "fairtest", "--standard", "--state-cap", "50", "--test", "0",
                       "--left", "[0] new a. rec X. ('a1.X | a1.0)", "--right", "[0] 0")
    assert code == 2 and "inconclusive" in out


def test_lts_over_every_base(capsys, tmp_path):
    for source, base in [("ccs", "A"), ("strategies", "F"), ("strategies", "L"),
                         ("strategies", "A"), ("terms", "F"), ("terms", "L"), ("terms", "A")]:
        dot = tmp_path / f"{source}{base}.dot"
        code, out, _ = run(capsys, "lts", "--json", "--source", source, "--base", base,
                           "--dot", str(dot), "[1] a1.0 | 'a1.0")
        data = json.loads(out)
        assert code == 0 and data["complete"] and data["states"] >= 3
        assert dot.read_text().startswith("digraph")


@pytest.mark.parametrize("argv, flag", [
    (["lts", "--source", "ccs", "--base", "F", "[0] 0"], "--base"),
    (["bisim", "--weak", "--left-ccs", "[1] 0"], "--right-ccs"),
    (["fairtest", "--standard", "--left", "[1] 0", "--right", "[2] 0"], "--right"),
    (["fairtest", "--standard", "--left", "[1] a2.0", "--right", "[1] 0"], "--left"),
    (["translate", "[1] a1.0", "--depth", "-1"], "--depth"),
    (["accept", "--only", "9"], "--only"),
    (["bisim", "--strong", "--weak", "--left-ccs", "[0] 0"], "--weak"),
    (["frobnicate"], "frobnicate"),
])
def test_usage_errors_name_the_flag(capsys, argv, flag):
    code, _, err = run(capsys, *argv)
    assert code == 3 and flag in err


def test_accept_subset_with_report(capsys, tmp_path):
    code, out, _ = run(capsys, "accept", "--only", "1,5", "--report", str(tmp_path))
    assert code == 0 and out.count("[PASS]") == 2
    rows = (tmp_path / "acceptance.csv").read_text().splitlines()
    assert rows[0].startswith("number,name,passed") and len(rows) == 3
    assert (tmp_path / "acceptance.png").read_bytes()[:4] == b"\x89PNG"


def test_json_output_is_byte_identical_across_runs():
    argv = [sys.executable, "-m", "ccsgames.cli", "lts", "--json", "--source", "strategies",
            "--base", "L", "[1] new a. (a2.a1.0 | 'a2.0)"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a


def test_jobs_do_not_change_the_output(capsys):
    argv = ["fairtest", "--standard", "--json", "--left", "[1] a1.0 + tick.0", "--right", "[1] a1.0"]
    _, one, _ = run(capsys, *argv)
    _, many, _ = run(capsys, *argv, "--jobs", "3")
    assert one == many
