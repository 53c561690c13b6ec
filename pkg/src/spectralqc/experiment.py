"""Declarative experiments: manifest files, runs, artifact files and reports."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import acquisition as acq
from . import algorithms
from .algorithms import ExpectedReadout
from .compiler import compile_circuit, program_symbols
from .engine import MODES, run_program
from .prep import prepare, work_populations
from .program import PulseProgram, parse_program
from .spins import label, load_molecule, resolve_molecule

INTENSITY_TOL = {"zeeman-only": 1e-6, "full": 1e-2}


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class Manifest:
    molecule: str
    algorithm: str | None = None
    cases: tuple[str, ...] = ()
    program: str | None = None
    circuit: str | None = None
    preparations: tuple[str, ...] = ("pops",)
    mode: str = "full"
    dimension: int = 1
    acquisition: dict = field(default_factory=dict)
    threshold: float = acq.DEFAULT_THRESHOLD
    tolerance: float | None = None
    expect: tuple[str, ...] | None = None
    out: str | None = None
    name: str = "experiment"
    base: Path = Path(".")

    def path(self, ref: str) -> Path:
        p = Path(ref)
        return p if p.is_absolute() else self.base / p

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k not in ("base", "out")}
        d["cases"] = list(self.cases)
        d["preparations"] = list(self.preparations)
        d["expect"] = None if self.expect is None else list(self.expect)
        return d


def _as_tuple(value) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, (list, tuple)):
        return tuple(str(v) for v in value)
    return (str(value),)


def manifest_from_dict(doc: dict, base: Path = Path("."), name: str = "experiment") -> Manifest:
    known = {"molecule", "algorithm", "cases", "case", "program", "circuit", "prepare", "mode",
             "dimension", "acquisition", "threshold", "tolerance", "expect", "out", "name"}
    unknown = set(doc) - known
    if unknown:
        raise ManifestError(f"unknown manifest keys: {sorted(unknown)}")
    if "molecule" not in doc:
        raise ManifestError("manifest needs a 'molecule' entry")
    dim = str(doc.get("dimension", 1)).lower().rstrip("d")
    if dim not in ("1", "2"):
        raise ManifestError(f"dimension must be 1 or 2, got {doc['dimension']!r}")
    mode = doc.get("mode", "full")
    if mode not in MODES:
        raise ManifestError(f"mode must be one of {MODES}, got {mode!r}")
    algorithm = doc.get("algorithm")
    if algorithm not in (None, "none") and algorithm not in algorithms.BUILDERS:
        raise ManifestError(f"unknown algorithm {algorithm!r}")
    cases = _as_tuple(doc.get("cases", doc.get("case")))
    if algorithm not in (None, "none") and not cases:
        raise ManifestError(f"algorithm {algorithm!r} needs 'cases'")
    if sum(k in doc for k in ("program", "circuit")) + (algorithm not in (None, "none")) > 1:
        raise ManifestError("give at most one of algorithm, program, circuit")
    return Manifest(
        molecule=str(doc["molecule"]),
        algorithm=None if algorithm == "none" else algorithm,
        cases=cases,
        program=doc.get("program"),
        circuit=doc.get("circuit"),
        preparations=_as_tuple(doc.get("prepare", "pops")),
        mode=mode,
        dimension=int(dim),
        acquisition=dict(doc.get("acquisition") or {}),
        threshold=float(doc.get("threshold", acq.DEFAULT_THRESHOLD)),
        tolerance=None if doc.get("tolerance") is None else float(doc["tolerance"]),
        expect=None if doc.get("expect") is None else _as_tuple(doc["expect"]),
        out=doc.get("out"),
        name=str(doc.get("name", name)),
        base=base,
    )


def load_manifest(path) -> Manifest:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest not found: {path}")
    doc = yaml.safe_load(path.read_text()) or {}
    m = manifest_from_dict(doc, path.parent, path.stem)
    resolve_molecule(m.molecule, m.base)
    for ref in (m.program, m.circuit):
        if ref is not None and not m.path(ref).is_file():
            raise FileNotFoundError(f"file referenced by manifest not found: {m.path(ref)}")
    return m


# --- comparison ---------------------------------------------------------------

@dataclass(frozen=True)
class Report:
    passed: bool
    decoded: tuple[str, ...]
    expected: tuple[str, ...]
    problems: tuple[str, ...] = ()

    def summary(self) -> str:
        line = (f"decoded: {' '.join(self.decoded) or '(none)'}, "
                f"expected: {' '.join(self.expected)}, {'PASS' if self.passed else 'FAIL'}")
        return line + "".join(f"\n  {p}" for p in self.problems)


def compare_report(decoded, expected: ExpectedReadout, tolerance: float = 1e-6) -> Report:
    """Label-set equality plus intensity agreement.

    ``decoded`` is a peak list or a ``{label: weight}`` map.
    """
    problems = []
    if isinstance(decoded, dict):
        weights = acq.normalized_intensities(
            [acq.Peak((k,), (0.0,), v, v) for k, v in decoded.items()])
        artifacts = []
    else:
        weights = acq.normalized_intensities(decoded)
        artifacts = [pk for pk in decoded if pk.status != "assigned"]
    got = tuple(sorted(weights))
    want = tuple(sorted(expected.lines))
    if not got:
        problems.append("no lines decoded")
    for lab in sorted(set(want) - set(got)):
        problems.append(f"missing line {lab}")
    for lab in sorted(set(got) - set(want)):
        problems.append(f"unexpected line {lab}")
    for pk in artifacts:
        freqs = ", ".join(f"{f:.4f}" for f in pk.freqs)
        problems.append(f"spurious peak at {freqs} Hz (magnitude {pk.magnitude:.4g})")
    if set(got) == set(want):
        for lab, w in expected.intensities:
            if abs(weights[lab] - w) > tolerance:
                problems.append(f"intensity of {lab}: {weights[lab]:.6f} vs expected {w:.6f}")
    return Report(not problems, got, want, tuple(problems))


# --- running ------------------------------------------------------------------

@dataclass
class CaseResult:
    title: str
    report: Report
    files: dict[str, Path]
    populations: np.ndarray | None = None
    ideal_populations: np.ndarray | None = None


def input_hash(manifest: Manifest, molecule_text: str, program_text: str) -> str:
    blob = json.dumps({"manifest": manifest.as_dict(), "molecule": molecule_text,
                       "program": program_text}, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def state_report(state, sys) -> str:
    n = sys.n_qubits
    lines = [f"method: {state.method}"]
    for name, _, weight in state.components:
        lines.append(f"component: {name} (weight {weight:+g})")
    lines.append("nonzero deviation populations:")
    diag = np.real(np.diagonal(state.rho))
    for b, v in enumerate(diag):
        if abs(v) > 1e-12:
            lines.append(f"  |{label(b, n)}>  {v:+.6f}")
    off = state.rho - np.diag(np.diagonal(state.rho))
    lines.append(f"max off-diagonal magnitude: {np.max(np.abs(off)):.3e}")
    return "\n".join(lines) + "\n"


def _case_slug(text: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in text).strip("_") or "case"


def _work_items(m: Manifest, sys):
    """(title, program, expected, ideal populations, preparation) per case."""
    if m.algorithm:
        for case in m.cases:
            alg = algorithms.build(m.algorithm, case, sys)
            ideal = np.abs(alg.ideal_state) ** 2
            for prep_method in m.preparations:
                title = alg.title if len(m.preparations) == 1 else f"{alg.title} [{prep_method}]"
                yield title, alg.program, alg.expected, ideal, prep_method
        return
    if m.program:
        program = parse_program(m.path(m.program).read_text(), program_symbols(sys))
    elif m.circuit:
        program = compile_circuit(m.path(m.circuit).read_text(), sys).program
    else:
        program = PulseProgram.identity("identity")
    for prep_method in m.preparations:
        state = prepare(sys, prep_method)
        pops = work_populations(run_program(state.rho, program, sys, m.mode))
        if m.expect is not None:
            expected = ExpectedReadout(tuple((s, 1.0) for s in m.expect))
        else:
            expected = ExpectedReadout(tuple((label(i, sys.n_work), abs(v))
                                             for i, v in enumerate(pops) if abs(v) > 1e-9))
        yield f"{program.label or 'program'} [{prep_method}]", program, expected, None, prep_method


def run_experiment(m: Manifest, out: Path | None = None, mode: str | None = None,
                   threshold: float | None = None) -> list[CaseResult]:
    """Run every case of ``m`` and write its artifacts under ``out``."""
    mode = mode or m.mode
    threshold = threshold if threshold is not None else m.threshold
    tol = m.tolerance if m.tolerance is not None else INTENSITY_TOL[mode]
    mol_path = resolve_molecule(m.molecule, m.base)
    sys = load_molecule(mol_path)
    mol_text = Path(mol_path).read_text()
    out = Path(out or m.out or Path("out") / m.name)
    items = list(_work_items(m, sys))
    results = []
    for title, program, expected, ideal, prep_method in items:
        case_dir = out / _case_slug(title) if len(items) > 1 else out
        case_dir.mkdir(parents=True, exist_ok=True)
        state = prepare(sys, prep_method)
        digest = input_hash(m, mol_text, program.to_text())
        meta = {"molecule": mol_path.name, "case": title, "mode": mode, "input_hash": digest}
        files = {"program": case_dir / "program.pulse", "state": case_dir / "state.txt"}
        files["program"].write_text(program.to_text())
        pops = work_populations(run_program(state.rho, program, sys, mode))
        report_text = state_report(state, sys) + "work populations after computation:\n"
        report_text += "".join(f"  {label(i, sys.n_work)}  {v:+.9f}\n" for i, v in enumerate(pops))
        files["state"].write_text(report_text)
        params = dict(m.acquisition)
        if m.dimension == 2:
            p = acq.AcquisitionParams(**{**acq.AcquisitionParams.default_2d().as_dict(), **params})
            spec = acq.acquire_2d(state, program, sys, p, mode, threshold)
        else:
            p = acq.AcquisitionParams(**{**acq.AcquisitionParams.default_1d().as_dict(), **params})
            spec = acq.acquire_1d(state, sys, p, program, mode, threshold)
        files["spectrum"] = acq.write_spectrum(case_dir / "spectrum.tsv", spec, meta)
        files["peaks"] = acq.write_peaks(case_dir / "peaks.tsv", spec.peaks, m.dimension, meta)
        report = compare_report(spec.peaks, expected, tol)
        if m.dimension == 2:
            inputs = {pk.labels[0] for pk in spec.peaks if pk.status == "assigned"}
            if inputs - {"0" * sys.n_work} and prep_method == "pops":
                report = Report(False, report.decoded, report.expected,
                                report.problems + (f"unexpected input lines {sorted(inputs)}",))
        files["summary"] = case_dir / "summary.txt"
        files["summary"].write_text(f"# input_hash: {digest}\n{title}: {report.summary()}\n")
        results.append(CaseResult(title, report, files, pops, ideal))
    return results


# --- battery --------------------------------------------------------------------

BATTERY = (
    ("grover", "fig4", algorithms.CASES["grover"]),
    ("count", "fig4", algorithms.CASES["count"]),
    ("bv", "fig4", algorithms.CASES["bv2"]),
    ("bv", "fig8", algorithms.CASES["bv3"]),
    ("hogg", "fig8", algorithms.CASES["hogg"]),
)


def battery_manifests(mode: str = "full", dimension: int = 1, threshold: float = acq.DEFAULT_THRESHOLD):
    for alg, mol, cases in BATTERY:
        name = f"{alg}_{mol}"
        yield Manifest(molecule=mol, algorithm=alg, cases=tuple(cases), mode=mode,
                       dimension=dimension, threshold=threshold, name=name)


def run_battery(out: Path, mode: str = "full", dimension: int = 1,
                threshold: float = acq.DEFAULT_THRESHOLD) -> list[CaseResult]:
    results = []
    for m in battery_manifests(mode, dimension, threshold):
        results += run_experiment(m, Path(out) / m.name, mode, threshold)
    rows = ["case\tresult\tdecoded\texpected"]
    rows += [f"{r.title}\t{'PASS' if r.report.passed else 'FAIL'}\t{' '.join(r.report.decoded)}"
             f"\t{' '.join(r.report.expected)}" for r in results]
    Path(out).mkdir(parents=True, exist_ok=True)
    (Path(out) / "battery.tsv").write_text("\n".join(rows) + "\n")
    return results
