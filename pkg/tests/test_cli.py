import io
import json
import subprocess
import sys

import pytest

from maxorders.bundle import bundled_names
from maxorders.cli import run_command

EX4 = "examples/example4-main"


def run(*argv):
    buf = io.StringIO()
    code = run_command(list(argv), buf)
    text = buf.getvalue()
    return code, (json.loads(text) if not text.startswith("command:") else text)


def stable(report):
    report = dict(report)
    report.pop("timings")
    return json.dumps(report, sort_keys=True)


def test_normalize_shares_normal_form():
    c1, r1 = run("normalize", EX4, "x1 x1 x2")
    c2, r2 = run("normalize", EX4, "x1 x3 x4")
    assert c1 == c2 == 0
    assert r1["result"]["normal_form"] == r2["result"]["normal_form"]
    assert r1["command"] == ["normalize", EX4, "x1 x1 x2"]
    assert r1["version"]
    assert "seconds" in r1["timings"]


def test_report_fields():
    code, r = run("report", "theorem33", EX4)
    assert code == 0
    assert r["status"] == "Verified"
    assert r["result"]["verdict"] == "prime Noetherian maximal order"
    assert set(r["result"]["conditions"]) == {
        "base_normal", "acc", "delta_plus", "dihedral_free", "invariance", "s_maximal",
    }


def test_group_delta_plus_refuted():
    code, r = run("group", "delta-plus", "examples/nonprime-quotient")
    assert code == 1
    assert r["result"]["witness"] == {"coset": "x3x1", "vector": [-1]}


@pytest.mark.parametrize(
    "argv, code",
    [
        (("complete", EX4), 0),
        (("enumerate", EX4, "--length", "3"), 0),
        (("affine", "member", EX4, "1", "0", "0", "0"), 0),
        (("affine", "member", EX4, "-1", "0", "0", "0"), 1),
        (("affine", "member", EX4, "3", "3", "3", "3", "--max-nodes", "2"), 2),
        (("affine", "minimal-primes", EX4), 0),
        (("affine", "check-normal", EX4), 0),
        (("affine", "spectrum", EX4), 0),
        (("group", "dihedral-free", EX4), 0),
        (("group", "validate", EX4), 0),
        (("crossed", "validate", EX4), 0),
        (("crossed", "orbits", EX4), 0),
        (("crossed", "minimal-primes", EX4), 0),
        (("crossed", "rep-verify", EX4), 0),
        (("crossed", "maximality", "examples/itype-2gen"), 0),
        (("report", "theorem33", "examples/nonprime-quotient", "--radius", "2"), 1),
        (("affine", "member", EX4, "1", "0"), 3),
        (("crossed", "rep-verify", "examples/itype-2gen"), 3),
        (("report", "theorem33", EX4, "--bogus"), 3),
        (("frobnicate",), 3),
        (("replay", "no-such-bundle"), 3),
        (("complete", "missing-file.txt"), 3),
    ],
)
def test_exit_codes(argv, code):
    got, r = run(*argv)
    assert got == code, r
    assert r["status"] in ("Verified", "Refuted", "Unknown", "InputError")


@pytest.mark.parametrize("name", bundled_names())
def test_replays(name):
    code, r = run("replay", name)
    assert code == 0, r["result"]["diff"]
    assert r["result"]["ok"] and r["result"]["diff"] == {}


def test_incomplete_completion_is_unknown(tmp_path):
    p = tmp_path / "p.txt"
    p.write_text(
        "generators: x1 x2 x3 x4\nrelations:\n"
        "  x1 x4 = x2 x3\n  x1 x3 = x2 x4\n  x3 x1 = x4 x2\n"
        "  x3 x2 = x4 x1\n  x1 x2 = x3 x4\n  x2 x1 = x4 x3\n"
    )
    code, r = run("complete", str(p), "--max-rules", "20", "--max-len", "6")
    assert code == 2
    assert r["result"]["confluent"] is False


def test_malformed_file_reports_location(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("generators: x y\nrelations:\n  x y = y q\n")
    code, r = run("complete", str(p))
    assert code == 3
    assert "line 3, column 11" in r["result"]["message"]


def test_malformed_group_file(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("group H rank 1\nquotient: e t\ntable: e*e=e e*t=t t*e=t t*t=q\n")
    code, r = run("group", "validate", str(p))
    assert code == 3
    assert "line 3" in r["result"]["message"]


def test_plain_files(tmp_path):
    a = tmp_path / "b.txt"
    a.write_text("affine B rank 2\ngen p: 2 0\ngen q: 0 1\ngen r: 1 1\n")
    code, r = run("affine", "check-normal", str(a))
    assert code == 1
    assert r["result"]["witness"] == [1, 0]
    g = tmp_path / "h.txt"
    g.write_text("group H rank 1\nquotient: e t\ntable: e*e=e e*t=t t*e=t t*t=e\ncocycle t t: 2\n")
    assert run("group", "delta-plus", str(g))[0] == 1
    assert run("group", "dihedral-free", str(g))[0] == 0


@pytest.mark.parametrize(
    "argv",
    [
        ("crossed", "orbits", EX4),
        ("affine", "spectrum", EX4),
        ("report", "theorem33", "examples/itype-3gen"),
        ("enumerate", EX4, "--length", "4", "--words"),
    ],
)
def test_reports_are_deterministic(argv):
    a = run(*argv)[1]
    b = run(*argv)[1]
    assert stable(a) == stable(b)


def test_pretty():
    code, text = run("group", "delta-plus", "examples/nonprime-quotient", "--pretty")
    assert code == 1
    assert "status: \"Refuted\"" in text
    assert "coset: \"x3x1\"" in text


def test_console_script():
    out = subprocess.run(
        [sys.executable, "-m", "maxorders.cli", "normalize", EX4, "x1 x1 x2"],
        capture_output=True, text=True, check=False,
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["result"]["normal_form"]
