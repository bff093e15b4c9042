import json
import subprocess
import sys

import pytest

from minabc.cli import main
from minabc.graph import encode_graph6, path_graph
from minabc.search import brute_force_min


def call(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:  # argparse help/usage paths
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def test_search_single(capsys):
    code, out, _ = call(capsys, "search", "--n", "2")
    assert code == 0
    assert "0.0000000" in out.splitlines()[1]


def test_search_both_table(capsys):
    code, out, _ = call(capsys, "search", "--from", "4", "--to", "12", "--method", "both")
    assert code == 0
    rows = out.splitlines()[1:]
    assert len(rows) == 9 and all("brute+greedy-seq" in r for r in rows)
    assert rows[0].split()[2] == "2.1213203"


def test_search_json_and_csv(capsys, tmp_path):
    target = tmp_path / "out.csv"
    code, out, _ = call(capsys, "search", "--n", "7", "--json")
    data = json.loads(out)
    assert code == 0 and data["disagreements"] == [] and "wall_time" not in data["records"][0]
    code, _, _ = call(capsys, "search", "--n", "7", "--csv", str(target))
    assert target.read_text().startswith("n,abc,tree_g6,method")


def test_search_store_and_tamper(capsys, tmp_path):
    store = tmp_path / "s.jsonl"
    assert call(capsys, "search", "--from", "4", "--to", "8", "--method", "both", "--store", str(store))[0] == 0
    first = store.read_bytes()
    assert call(capsys, "search", "--from", "4", "--to", "8", "--method", "both", "--store", str(store))[0] == 0
    assert store.read_bytes() == first
    lines = first.decode().splitlines()
    rec = json.loads(lines[0])
    rec["abc"] += 0.5
    store.write_text("\n".join([json.dumps(rec)] + lines[1:]) + "\n")
    code, _, err = call(capsys, "verify", "--from", "4", "--to", "8", "--store", str(store))
    assert code == 2 and "MISMATCH" in err
    store.write_text("garbage\n")
    assert call(capsys, "verify", "--n", "5", "--store", str(store))[0] == 2


@pytest.mark.parametrize("argv", [
    ("search",),
    ("search", "--n", "5", "--from", "4"),
    ("search", "--from", "9", "--to", "4"),
    ("search", "--n", "5", "--filters", "bogus"),
    ("search", "--n", "1000000", "--method", "brute"),
    ("search", "--n", "5", "--workers", "0"),
    ("nosuchcommand",),
    ("search", "--bogus-flag"),
    ("bounds", "eval"),
    ("bounds", "eval", "nosuch"),
    ("bounds", "eval", "change-90", "du"),
    ("bounds", "eval", "change-90", "du=2"),
    ("bounds", "thresholds", "change-90", "zz"),
    ("analyze", "not-a-graph6-@@@"),
])
def test_input_errors_exit_1(capsys, argv):
    code, _, err = call(capsys, *argv)
    assert code == 1, err


def test_order_too_large_message(capsys):
    _, _, err = call(capsys, "search", "--n", "1000000", "--method", "brute")
    assert "OrderTooLarge" in err


def test_unknown_expression_message(capsys):
    _, _, err = call(capsys, "bounds", "eval", "nosuch")
    assert "UnknownExpression: nosuch" in err


def test_bounds_commands(capsys, tmp_path):
    code, out, _ = call(capsys, "bounds", "list")
    assert code == 0 and "change-20-20" in out
    code, out, _ = call(capsys, "bounds", "eval", "change-90", "du=7")
    assert code == 0 and out.strip() == "-0.0145446"
    code, out, _ = call(capsys, "bounds", "eval", "change-20-20", "du=14", "dw=inf", "--json")
    assert json.loads(out)["value"] == pytest.approx(-0.0000943005, abs=1e-9)
    code, out, _ = call(capsys, "bounds", "thresholds")
    assert code == 0 and out.count("ok") == 4
    code, out, _ = call(capsys, "bounds", "thresholds", "change-20", "du", "k1=3")
    assert code == 0 and "du=" in out


def test_bounds_golden_exit_reflects_rows(capsys, tmp_path):
    target = tmp_path / "golden.csv"
    code, out, err = call(capsys, "bounds", "golden", "--csv", str(target))
    failed = out.count("FAIL")
    assert code == (2 if failed else 0)
    assert "golden suite time" in err
    assert target.read_text().count("\n") == out.count("expected") + 1
    code, _, _ = call(capsys, "bounds", "golden", "--tol-golden", "1")
    assert code == 0


def test_analyze(capsys, tmp_path):
    g6 = brute_force_min(10).tree_g6
    code, out, _ = call(capsys, "analyze", g6)
    data = json.loads(out)
    assert code == 0 and data["all_asserted_pass"] and data["graph6"] == g6
    p5 = encode_graph6(path_graph(5)).decode()
    data = json.loads(call(capsys, "analyze", p5)[1])
    assert data["profile"]["b_counts"] == {}
    f = tmp_path / "trees.g6"
    f.write_text(f"{g6}\n{p5}\n")
    code, out, _ = call(capsys, "analyze", str(f))
    assert code == 0 and len(out.splitlines()) == 2
    code, out, _ = call(capsys, "analyze", p5, "--dot")
    assert out.startswith("graph T {")


def test_verify_passes(capsys, tmp_path):
    store = tmp_path / "v.jsonl"
    code, out, err = call(capsys, "verify", "--from", "4", "--to", "12", "--method", "both",
                          "--store", str(store), "--transform-samples", "2", "--seed", "3")
    assert code == 0, err
    assert "pass*" in out and len(out.splitlines()) == 2 + 2 * 9


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "minabc.cli", "bounds", "eval", "change-110", "du=5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "-0.0058215"
