import numpy as np
import pytest

from spectralqc.acquisition import Peak
from spectralqc.algorithms import ExpectedReadout
from spectralqc.experiment import (ManifestError, compare_report, load_manifest, manifest_from_dict,
                                   run_battery, run_experiment)


def readout(*lines):
    return ExpectedReadout(tuple((s, 1.0) for s in lines))


def peak(lab, f=1.0, mag=1.0, status="assigned"):
    return Peak((lab,), (f,), mag, mag, status)


def test_identical_sets_pass():
    r = compare_report([peak("10")], readout("10"))
    assert r.passed and r.summary() == "decoded: 10, expected: 10, PASS"


def test_missing_line_named():
    r = compare_report([peak("00")], readout("00", "11"))
    assert not r.passed and "missing line 11" in r.summary()


def test_spurious_peak_named():
    r = compare_report([peak("00"), peak("-", 0.4321, 0.3, "artifact")], readout("00"))
    assert not r.passed and "spurious peak at 0.4321 Hz" in r.summary()


def test_intensity_disagreement():
    r = compare_report({"00": 0.7, "11": 0.3}, readout("00", "11"), tolerance=0.01)
    assert not r.passed and "intensity of 00" in r.summary()
    assert compare_report({"00": 0.5, "11": 0.5}, readout("00", "11")).passed


def test_manifest_validation():
    with pytest.raises(ManifestError, match="molecule"):
        manifest_from_dict({"algorithm": "grover", "cases": ["00"]})
    with pytest.raises(ManifestError, match="unknown manifest keys"):
        manifest_from_dict({"molecule": "fig4", "colour": "red"})
    with pytest.raises(ManifestError, match="needs 'cases'"):
        manifest_from_dict({"molecule": "fig4", "algorithm": "grover"})
    with pytest.raises(ManifestError, match="dimension"):
        manifest_from_dict({"molecule": "fig4", "dimension": 3})
    assert manifest_from_dict({"molecule": "fig4", "dimension": "2D"}).dimension == 2


def test_missing_molecule_file(tmp_path):
    path = tmp_path / "bad.manifest"
    path.write_text("molecule: nowhere/mol.yaml\nalgorithm: grover\ncases: ['10']\n")
    with pytest.raises(FileNotFoundError, match="nowhere/mol.yaml"):
        load_manifest(path)


def test_program_manifest(tmp_path):
    (tmp_path / "zz.pulse").write_text("pulse targets=1,2 angle=pi/2 phase=-y\n"
                                       "pulse targets=1,2 angle=pi phase=x\n"
                                       "pulse targets=1,2 angle=pi/2 phase=y\n")
    (tmp_path / "m.manifest").write_text("molecule: fig4\nprogram: zz.pulse\nmode: zeeman-only\n")
    (res,) = run_experiment(load_manifest(tmp_path / "m.manifest"), tmp_path / "out")
    assert res.report.passed and res.report.decoded == ("00",)


def test_circuit_manifest(tmp_path):
    (tmp_path / "g.circuit").write_text("H 1 2\nU11\nH 1 2\nU00\nH 1 2\n")
    (tmp_path / "m.manifest").write_text("molecule: fig4\ncircuit: g.circuit\nexpect: ['11']\n")
    (res,) = run_experiment(load_manifest(tmp_path / "m.manifest"), tmp_path / "out")
    assert res.report.summary() == "decoded: 11, expected: 11, PASS"


def test_artifacts_written(tmp_path):
    m = manifest_from_dict({"molecule": "fig4", "algorithm": "grover", "cases": ["10"]}, name="g")
    (res,) = run_experiment(m, tmp_path)
    assert res.report.passed
    for key in ("program", "state", "spectrum", "peaks", "summary"):
        assert res.files[key].is_file()
    summary = res.files["summary"].read_text()
    assert "grover 10: decoded: 10, expected: 10, PASS" in summary
    assert summary.startswith("# input_hash: ")
    assert np.allclose(res.populations, res.ideal_populations, atol=5e-3)


@pytest.mark.parametrize("dimension", [1, 2])
def test_byte_identical_outputs(tmp_path, dimension):
    doc = {"molecule": "fig4", "algorithm": "count", "cases": ["f01"], "dimension": dimension}
    runs = [run_experiment(manifest_from_dict(doc), tmp_path / name)[0] for name in ("a", "b")]
    for key in runs[0].files:
        assert runs[0].files[key].read_bytes() == runs[1].files[key].read_bytes()


def test_hash_tracks_inputs(tmp_path):
    base = {"molecule": "fig4", "algorithm": "grover", "cases": ["10"]}
    a = run_experiment(manifest_from_dict(base), tmp_path / "a")[0]
    b = run_experiment(manifest_from_dict(dict(base, threshold=0.2)), tmp_path / "b")[0]
    head = lambda r: r.files["summary"].read_text().splitlines()[0]
    assert head(a) != head(b)


@pytest.mark.parametrize("dimension", [1, 2])
def test_zeeman_only_battery_intensities(tmp_path, dimension):
    results = run_battery(tmp_path, "zeeman-only", dimension)
    failed = [f"{r.title}: {r.report.summary()}" for r in results if not r.report.passed]
    assert len(results) == 34 and not failed
