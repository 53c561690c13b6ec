from pathlib import Path

import pytest

from spectralqc.cli import main
from spectralqc.experiment import load_manifest

FIGS = Path(__file__).resolve().parents[1] / "figs"


def test_grover_command(tmp_path, capsys):
    assert main(["grover", "--target", "10", "--out", str(tmp_path)]) == 0
    assert "grover 10: decoded: 10, expected: 10, PASS" in capsys.readouterr().out


def test_run_manifest(tmp_path, capsys):
    manifest = tmp_path / "grover.manifest"
    manifest.write_text("molecule: fig4\nalgorithm: grover\ncases: ['10']\n")
    assert main(["run", str(manifest), "--out", str(tmp_path / "out")]) == 0
    assert "decoded: 10, expected: 10, PASS" in capsys.readouterr().out


def test_missing_molecule_exit(tmp_path, capsys):
    manifest = tmp_path / "bad.manifest"
    manifest.write_text("molecule: missing_mol.yaml\nalgorithm: grover\ncases: ['10']\n")
    assert main(["run", str(manifest)]) == 2
    assert "missing_mol.yaml" in capsys.readouterr().err


def test_missing_manifest_exit(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.manifest")]) == 2
    assert "nope.manifest" in capsys.readouterr().err


def test_failing_case_exit(tmp_path, capsys):
    manifest = tmp_path / "wrong.manifest"
    manifest.write_text("molecule: fig4\nexpect: ['11']\n")
    assert main(["run", str(manifest), "--out", str(tmp_path / "o")]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and "missing line 11" in out


def test_prepare_command(tmp_path, capsys):
    assert main(["prepare", "--molecule", "fig8", "--method", "pops", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "|0000>  +0.500000" in out and "|1000>  -0.500000" in out
    assert "lines: 000" in out
    assert (tmp_path / "spectrum.tsv").is_file()


def test_compile_command(tmp_path, capsys):
    target = tmp_path / "u01.pulse"
    assert main(["compile", "--gate", "U01", "--out", str(target)]) == 0
    err = capsys.readouterr().err
    assert "fidelity (zeeman-only): 1.000000000000" in err
    assert target.read_text().startswith("# program: U01\n")


def test_compile_circuit_file(tmp_path, capsys):
    circuit = tmp_path / "bv.circuit"
    circuit.write_text("H 1 2 3\nZpi 1 3\nH 1 2 3\n")
    assert main(["compile", "--molecule", "fig8", "--circuit", str(circuit)]) == 0
    assert "pulse targets=1,2,3" in capsys.readouterr().out


def test_decode_command(tmp_path, capsys):
    assert main(["count", "--oracle", "f11", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    assert main(["decode", str(tmp_path / "spectrum.tsv"), "--out", str(tmp_path / "p.tsv")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 1 and out[0].startswith("10\t")


@pytest.mark.parametrize("argv, expect", [
    (["bv", "--string", "101"], "bv 101: decoded: 101, expected: 101, PASS"),
    (["bv", "--string", "01", "--dim", "2"], "bv 01: decoded: 01, expected: 01, PASS"),
    (["hogg", "--formula", "V3&~V2&V1"], "hogg V3&~V2&V1: decoded: 101, expected: 101, PASS"),
    (["count", "--oracle", "f01", "--mode", "zeeman-only"], "PASS"),
])
def test_algorithm_commands(argv, expect, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path)]) == 0
    assert expect in capsys.readouterr().out


def test_all_tables(tmp_path, capsys):
    assert main(["run", "--all-tables", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "34/34 cases passed" in out
    rows = (tmp_path / "battery.tsv").read_text().splitlines()
    assert len(rows) == 35 and all("\tPASS\t" in r for r in rows[1:])


def test_figure_manifests_load():
    names = sorted(p.stem for p in FIGS.glob("*.manifest"))
    assert {"fig4b", "fig5a", "fig5b", "fig8b", "fig9b", "fig10", "fig11"} <= set(names)
    for p in FIGS.glob("*.manifest"):
        load_manifest(p)
    assert load_manifest(FIGS / "fig9b.manifest").acquisition == {"n_t1": 24}


def test_bad_gate_is_error(capsys):
    assert main(["compile", "--gate", "U2"]) == 2
    assert "unknown gate" in capsys.readouterr().err
