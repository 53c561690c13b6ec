"""Command-line entry point: ``spectralqc <command> ...``."""
from __future__ import annotations

import argparse
import sys as _sys
from pathlib import Path

from . import acquisition as acq
from . import experiment as ex
from .compiler import compile_circuit, gate_fidelity
from .engine import MODES
from .prep import METHODS, prepare
from .spins import MOLECULE_DIR_ENV, load_molecule, transition_table

EXIT_FAIL = 1
EXIT_ERROR = 2


def _common(p: argparse.ArgumentParser, mode_default: str | None = "full"):
    p.add_argument("--mode", choices=MODES, default=mode_default,
                   help="full Hamiltonian or couplings suppressed in jump-and-return delays")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--threshold", type=float, default=None,
                   help=f"peak threshold relative to the tallest peak (default {acq.DEFAULT_THRESHOLD})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectralqc",
        description="Spectral readout of quantum algorithms on simulated NMR spin systems.",
        epilog=f"Molecule names are looked up in ${MOLECULE_DIR_ENV} before the bundled files "
               "(fig4, fig8).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="prepare an initial state and record its spectrum")
    p.add_argument("--molecule", default="fig4")
    p.add_argument("--method", choices=sorted(METHODS), default="pops")
    _common(p)

    p = sub.add_parser("compile", help="compile a gate circuit to a pulse program")
    p.add_argument("--molecule", default="fig4")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--circuit", type=Path, help="circuit file, one gate per line")
    src.add_argument("--gate", action="append", help="gate line, e.g. 'U01' (repeatable)")
    p.add_argument("--out", type=Path, help="program file to write (default: stdout)")

    p = sub.add_parser("run", help="run experiment manifests")
    p.add_argument("manifests", nargs="*", type=Path)
    p.add_argument("--all-tables", action="store_true",
                   help="run every Grover, counting, BV and SAT case")
    p.add_argument("--dim", type=int, choices=(1, 2), default=None)
    _common(p, mode_default=None)

    p = sub.add_parser("battery", help="every Grover, counting, BV and SAT case")
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)
    _common(p)

    p = sub.add_parser("decode", help="decode peaks of a spectrum file")
    p.add_argument("spectrum", type=Path)
    p.add_argument("--molecule", default="fig4")
    p.add_argument("--threshold", type=float, default=acq.DEFAULT_THRESHOLD)
    p.add_argument("--out", type=Path, help="peak file to write (default: stdout)")

    for name, flag, default_mol in (("grover", "--target", "fig4"), ("count", "--oracle", "fig4"),
                                    ("bv", "--string", None), ("hogg", "--formula", "fig8")):
        p = sub.add_parser(name, help=f"run one {name} instance")
        p.add_argument(flag, required=True, dest="case")
        p.add_argument("--molecule", default=default_mol)
        p.add_argument("--dim", type=int, choices=(1, 2), default=1)
        _common(p)
    return parser


def _print_results(results) -> int:
    ok = True
    for r in results:
        print(f"{r.title}: {r.report.summary()}")
        ok &= r.report.passed
    return 0 if ok else EXIT_FAIL


def cmd_prepare(args) -> int:
    sys = load_molecule(args.molecule)
    state = prepare(sys, args.method)
    out = args.out or Path("out") / f"prepare_{args.method}"
    out.mkdir(parents=True, exist_ok=True)
    spec = acq.acquire_1d(state, sys, threshold=args.threshold or acq.DEFAULT_THRESHOLD)
    meta = {"molecule": args.molecule, "method": args.method}
    (out / "state.txt").write_text(ex.state_report(state, sys))
    acq.write_spectrum(out / "spectrum.tsv", spec, meta)
    acq.write_peaks(out / "peaks.tsv", spec.peaks, 1, meta)
    print(ex.state_report(state, sys), end="")
    print("lines: " + " ".join(pk.label for pk in spec.peaks if pk.status == "assigned"))
    print(f"wrote {out}")
    return 0


def cmd_compile(args) -> int:
    sys = load_molecule(args.molecule)
    text = args.circuit.read_text() if args.circuit else "\n".join(args.gate)
    gate = compile_circuit(text, sys)
    program = gate.program.to_text()
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(program)
    else:
        print(program, end="")
    for mode in MODES:
        print(f"# fidelity ({mode}): {gate_fidelity(gate, sys, mode):.12f}", file=_sys.stderr)
    return 0


def cmd_run(args) -> int:
    if args.all_tables:
        return cmd_battery(argparse.Namespace(out=args.out, mode=args.mode or "full",
                                              threshold=args.threshold, dim=args.dim or 1))
    if not args.manifests:
        raise ex.ManifestError("give manifest files or --all-tables")
    results = []
    for path in args.manifests:
        m = ex.load_manifest(path)
        if args.dim:
            m = ex.Manifest(**{**m.__dict__, "dimension": args.dim})
        out = args.out / m.name if args.out and len(args.manifests) > 1 else args.out
        results += ex.run_experiment(m, out, args.mode, args.threshold)
    return _print_results(results)


def cmd_battery(args) -> int:
    out = args.out or Path("out") / "battery"
    threshold = args.threshold or acq.DEFAULT_THRESHOLD
    results = ex.run_battery(out, args.mode, args.dim, threshold)
    code = _print_results(results)
    passed = sum(r.report.passed for r in results)
    print(f"{passed}/{len(results)} cases passed; table in {out / 'battery.tsv'}")
    return code


def cmd_decode(args) -> int:
    sys = load_molecule(args.molecule)
    spec = acq.read_spectrum(args.spectrum, transition_table(sys))
    peaks = acq.decode_peaks(spec, threshold=args.threshold)
    dim = 2 if isinstance(spec, acq.Spectrum2D) else 1
    if args.out:
        acq.write_peaks(args.out, peaks, dim)
    for pk in peaks:
        freqs = " ".join(f"{f:.4f}" for f in pk.freqs)
        print(f"{'->'.join(pk.labels)}\t{freqs} Hz\t{pk.magnitude:.6g}\t{pk.status}")
    return 0


def cmd_algorithm(args) -> int:
    molecule = args.molecule or ("fig4" if len(args.case) == 2 else "fig8")
    m = ex.Manifest(molecule=molecule, algorithm=args.command, cases=(args.case,),
                    mode=args.mode, dimension=args.dim, name=f"{args.command}_{args.case}")
    out = args.out or Path("out") / ex._case_slug(m.name)
    return _print_results(ex.run_experiment(m, out, args.mode, args.threshold))


COMMANDS = {"prepare": cmd_prepare, "compile": cmd_compile, "run": cmd_run,
            "battery": cmd_battery, "decode": cmd_decode,
            "grover": cmd_algorithm, "count": cmd_algorithm, "bv": cmd_algorithm,
            "hogg": cmd_algorithm}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError, TypeError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"spectralqc: error: {msg}", file=_sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    _sys.exit(main())
