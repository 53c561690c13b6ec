"""Observer-qubit signal synthesis, Fourier processing and peak decoding.

The observer signal after a ``(pi/2)^0_y`` read pulse is
``s(t) = sum_s rho'[(1,s),(0,s)] exp(2 pi i f_s t) exp(-pi LW t)``, one term
per work label ``s``, where ``f_s`` is that label's transition frequency.
Coherences between different work labels never reach the detector.

2D data are amplitude (cosine) modulated in ``t1``. To keep the positive and
negative ``omega_1`` images apart, the observer evolves with an extra
frequency offset during ``t1`` only (the effect of incrementing the read
pulse phase with ``t1``), so every input line sits at a positive ``omega_1``
and only the ``omega_1 >= 0`` half is decoded.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.ndimage import maximum_filter
from scipy.signal import find_peaks

from .engine import apply_delay, apply_gradient, apply_hard_pulse, run_program
from .prep import PreparedState
from .spins import SpinSystem, TransitionTable, energies, transition_table

FORMAT_VERSION = 1
DEFAULT_THRESHOLD = 0.1


class AcquisitionError(ValueError):
    pass


@dataclass(frozen=True)
class AcquisitionParams:
    """Sampling and processing settings.

    ``dwell``/``dwell_t1`` of None mean: spectral width
    ``4 * (max |f| + 2 * linewidth)`` over the observer lines.
    ``observer_shift`` (``t1`` only) of None picks ``max |f| + 2 * linewidth``.
    """

    n_t2: int = 4096
    zero_fill_t2: int = 8192
    dwell: float | None = None
    n_t1: int = 0
    zero_fill_t1: int = 0
    dwell_t1: float | None = None
    linewidth: float | None = None
    observer_shift: float | None = None

    def __post_init__(self):
        if self.n_t2 < 2:
            raise AcquisitionError("need at least two t2 points")
        if self.zero_fill_t2 < self.n_t2:
            raise AcquisitionError(f"zero_fill_t2 {self.zero_fill_t2} < n_t2 {self.n_t2}")
        if self.n_t1 and self.zero_fill_t1 < self.n_t1:
            raise AcquisitionError(f"zero_fill_t1 {self.zero_fill_t1} < n_t1 {self.n_t1}")
        for name in ("dwell", "dwell_t1", "linewidth"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise AcquisitionError(f"{name} must be positive, got {v}")

    @classmethod
    def default_1d(cls) -> "AcquisitionParams":
        return cls()

    @classmethod
    def default_2d(cls) -> "AcquisitionParams":
        return cls(n_t2=256, zero_fill_t2=1024, n_t1=16, zero_fill_t1=256)

    @property
    def is_2d(self) -> bool:
        return self.n_t1 > 0

    def resolve(self, sys: SpinSystem, table: TransitionTable) -> "AcquisitionParams":
        """Fill defaults for ``sys`` and check the spectral widths cover ``table``."""
        lw = self.linewidth if self.linewidth is not None else sys.linewidth
        fmax = float(np.max(np.abs(table.frequencies)))
        out = replace(self, linewidth=lw, dwell=self.dwell or 1.0 / (4 * (fmax + 2 * lw)))
        if out.is_2d:
            shift = self.observer_shift
            if shift is None:
                shift = fmax + 2 * lw
            f1max = float(np.max(np.abs(table.frequencies + shift)))
            out = replace(out, observer_shift=shift,
                          dwell_t1=self.dwell_t1 or 1.0 / (4 * (f1max + 2 * lw)))
            if f1max >= 0.5 / out.dwell_t1:
                raise AcquisitionError(f"t1 spectral width {1 / out.dwell_t1:.3f} Hz too small "
                                       f"for lines up to {f1max:.3f} Hz")
        if fmax >= 0.5 / out.dwell:
            raise AcquisitionError(f"spectral width {1 / out.dwell:.3f} Hz does not cover "
                                   f"lines up to {fmax:.3f} Hz")
        return out

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


# --- signal -------------------------------------------------------------------

def observer_amplitudes(rho: np.ndarray) -> np.ndarray:
    """Detected complex amplitude per work label after a ``(pi/2)^0_y`` pulse."""
    r = apply_hard_pulse(rho, [0], math.pi / 2, "y")
    d = r.shape[0] // 2
    return np.array([r[d + s, s] for s in range(d)])


def _freqs(sys: SpinSystem) -> np.ndarray:
    e = energies(sys) / (2 * np.pi)
    d = sys.dim // 2
    return e[:d] - e[d:]


def observer_fid(rho: np.ndarray, sys: SpinSystem, times: np.ndarray, linewidth: float):
    """``s(t)`` for a state just before the read pulse; free evolution under the
    full Hamiltonian of ``sys`` with exponential decay at ``linewidth``."""
    a = observer_amplitudes(rho)
    f = _freqs(sys)
    t = np.asarray(times, dtype=float)
    return np.exp(np.outer(t, 2j * np.pi * f) - np.pi * linewidth * t[:, None]) @ a


def detected_signal(rho: np.ndarray, sys: SpinSystem, t: float) -> complex:
    """Reference value of ``Tr(rho(t) I+^0)`` by explicit evolution (no decay)."""
    r = apply_hard_pulse(rho, [0], math.pi / 2, "y")
    r = apply_delay(r, t, energies(sys))
    d = r.shape[0] // 2
    return complex(np.trace(r[d:, :d]))


def _components(state):
    if isinstance(state, PreparedState):
        return state.components
    return (("state", np.asarray(state), 1.0),)


# --- spectra ------------------------------------------------------------------

@dataclass(frozen=True)
class Peak:
    labels: tuple[str, ...]       # (label,) in 1D, (input, output) in 2D; "-" if unassigned
    freqs: tuple[float, ...]
    magnitude: float              # apodization-corrected peak height
    intensity: float | None = None  # |amplitude| from demodulation at the table lines
    status: str = "assigned"

    @property
    def label(self) -> str:
        return self.labels[-1]


@dataclass
class Spectrum1D:
    freqs: np.ndarray
    data: np.ndarray
    table: TransitionTable
    dwell: float
    n_acquired: int
    linewidth: float
    gain: float
    fid: np.ndarray | None = None
    amplitudes: dict | None = None
    peaks: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.data)

    @property
    def tolerance(self) -> float:
        return max(self.linewidth, 1 / (self.n_acquired * self.dwell)) / 2

    def parseval_error(self) -> float:
        x = np.zeros(len(self.data), dtype=complex)
        x[: len(self.fid)] = self.fid
        e_t = float(np.sum(np.abs(x) ** 2))
        e_f = float(np.sum(np.abs(self.data) ** 2)) / len(self.data)
        return abs(e_t - e_f) / e_t if e_t else 0.0


@dataclass
class Spectrum2D:
    f1: np.ndarray
    f2: np.ndarray
    data: np.ndarray              # rows: omega_1, columns: omega_2
    table: TransitionTable        # omega_2 lines; omega_1 lines sit ``shift`` higher
    dwell_t1: float
    dwell: float
    n_t1: int
    n_t2: int
    linewidth: float
    gain: float
    shift: float
    fid: np.ndarray | None = None
    amplitudes: dict | None = None
    peaks: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.data)

    @property
    def tolerance(self) -> tuple[float, float]:
        return (max(self.linewidth, 1 / (self.n_t1 * self.dwell_t1)) / 2,
                max(self.linewidth, 1 / (self.n_t2 * self.dwell)) / 2)

    def parseval_error(self) -> float:
        x = np.zeros(self.data.shape, dtype=complex)
        x[: self.fid.shape[0], : self.fid.shape[1]] = self.fid * t1_window(self.n_t1)[:, None]
        e_t = float(np.sum(np.abs(x) ** 2))
        e_f = float(np.sum(np.abs(self.data) ** 2)) / self.data.size
        return abs(e_t - e_f) / e_t if e_t else 0.0


def spectrum_axis(n: int, dwell: float) -> np.ndarray:
    return np.fft.fftshift(np.fft.fftfreq(n, dwell))


def fft_1d(fid: np.ndarray, zero_fill: int) -> np.ndarray:
    return np.fft.fftshift(np.fft.fft(fid, zero_fill))


def t1_window(n: int) -> np.ndarray:
    """Cosine-squared bell with the first increment halved, which removes the
    zero-frequency offset of a one-sided cosine transform."""
    w = np.cos(np.pi * np.arange(n) / (2 * n)) ** 2
    w[0] *= 0.5
    return w


def shifted_table(table: TransitionTable, shift: float) -> TransitionTable:
    return TransitionTable(tuple((lab, f + shift) for lab, f in table.entries))


def _decay_gain(n: int, dwell: float, linewidth: float) -> float:
    return float(np.sum(np.exp(-np.pi * linewidth * dwell * np.arange(n))))


def demodulate(fid: np.ndarray, freqs, dwell: float, linewidth: float) -> np.ndarray:
    """Least-squares amplitudes of damped exponentials at known ``freqs``."""
    t = dwell * np.arange(len(fid))
    basis = np.exp(np.outer(t, 2j * np.pi * np.asarray(freqs)) - np.pi * linewidth * t[:, None])
    coef, *_ = np.linalg.lstsq(basis, fid, rcond=None)
    return coef


def spectrum_from_fid(fid, dwell: float, zero_fill: int | None = None, linewidth: float = 0.0,
                      table: TransitionTable | None = None) -> Spectrum1D:
    fid = np.asarray(fid, dtype=complex)
    n = zero_fill or len(fid)
    table = table or TransitionTable(())
    return Spectrum1D(spectrum_axis(n, dwell), fft_1d(fid, n), table, dwell, len(fid),
                      linewidth, _decay_gain(len(fid), dwell, linewidth), fid)


def acquire_1d(state, sys: SpinSystem, params: AcquisitionParams | None = None,
               program=None, mode: str = "full", threshold: float = DEFAULT_THRESHOLD) -> Spectrum1D:
    """Run ``program`` (if any) on every component of ``state``, read out the
    observer and Fourier transform the summed signal."""
    table = transition_table(sys)
    p = (params or AcquisitionParams.default_1d()).resolve(sys, table)
    times = p.dwell * np.arange(p.n_t2)
    fid = np.zeros(p.n_t2, dtype=complex)
    for _, rho, weight in _components(state):
        if program is not None:
            rho = run_program(rho, program, sys, mode)
        fid += weight * observer_fid(rho, sys, times, p.linewidth)
    spec = spectrum_from_fid(fid, p.dwell, p.zero_fill_t2, p.linewidth, table)
    coef = demodulate(fid, table.frequencies, p.dwell, p.linewidth)
    spec.amplitudes = dict(zip(table.labels, coef))
    spec.meta = {"params": p.as_dict(), "mode": mode}
    if not np.any(np.abs(fid) > 1e-12):
        warnings.warn("state carries no observer polarization; spectrum is empty", stacklevel=2)
    spec.peaks = decode_peaks(spec, table, threshold)
    return spec


def acquire_2d(state, program, sys: SpinSystem, params: AcquisitionParams | None = None,
               mode: str = "full", threshold: float = DEFAULT_THRESHOLD) -> Spectrum2D:
    """Two-dimensional correlation of input (omega_1) and output (omega_2) lines.

    Per increment: read pulse, ``t1`` evolution, ``(pi/2)^0_-y``, gradient,
    computation, read pulse and ``t2`` acquisition.
    """
    p = params or AcquisitionParams.default_2d()
    if not p.is_2d:
        raise AcquisitionError("2D acquisition needs n_t1 > 0")
    table = transition_table(sys)
    p = p.resolve(sys, table)
    shift = p.observer_shift
    h1 = energies(sys.with_offset(0, sys.offsets[0] + shift))
    times = p.dwell * np.arange(p.n_t2)
    fid = np.zeros((p.n_t1, p.n_t2), dtype=complex)
    for _, rho0, weight in _components(state):
        start = apply_hard_pulse(rho0, [0], math.pi / 2, "y")
        for k in range(p.n_t1):
            r = apply_delay(start, k * p.dwell_t1, h1)
            r = apply_gradient(apply_hard_pulse(r, [0], math.pi / 2, "-y"))
            if program is not None and len(program):
                r = run_program(r, program, sys, mode)
            fid[k] += weight * observer_fid(r, sys, times, p.linewidth)
    w = t1_window(p.n_t1)
    data = np.fft.fft(fid, p.zero_fill_t2, axis=1)
    data = np.fft.fft(data * w[:, None], p.zero_fill_t1, axis=0)
    data = np.fft.fftshift(data)
    # A cosine splits its weight between +f and -f.
    gain = 0.5 * float(np.sum(w)) * _decay_gain(p.n_t2, p.dwell, p.linewidth)
    spec = Spectrum2D(spectrum_axis(p.zero_fill_t1, p.dwell_t1), spectrum_axis(p.zero_fill_t2, p.dwell),
                      data, table, p.dwell_t1, p.dwell, p.n_t1, p.n_t2, p.linewidth, gain, shift, fid)
    spec.amplitudes = demodulate_2d(fid, table, p)
    spec.meta = {"params": p.as_dict(), "mode": mode}
    if not np.any(np.abs(fid) > 1e-12):
        warnings.warn("state carries no observer polarization; spectrum is empty", stacklevel=2)
    spec.peaks = decode_peaks(spec, table, threshold)
    return spec


def demodulate_2d(fid: np.ndarray, table: TransitionTable, p: AcquisitionParams) -> dict:
    """Amplitudes of ``cos(2 pi f_in t1) exp(2 pi i f_out t2 - pi LW t2)`` terms."""
    f = table.frequencies
    t1 = p.dwell_t1 * np.arange(p.n_t1)
    t2 = p.dwell * np.arange(p.n_t2)
    c1 = np.cos(2 * np.pi * np.outer(t1, f + p.observer_shift))
    e2 = np.exp(np.outer(t2, 2j * np.pi * f) - np.pi * p.linewidth * t2[:, None])
    basis = np.einsum("ai,bj->abij", c1, e2).reshape(fid.size, -1)
    coef, *_ = np.linalg.lstsq(basis, fid.reshape(-1), rcond=None)
    coef = coef.reshape(len(f), len(f))
    labels = table.labels
    return {(labels[i], labels[j]): coef[i, j] for i in range(len(f)) for j in range(len(f))}


# --- decoding -----------------------------------------------------------------

def decode_peaks(spectrum, table: TransitionTable | None = None,
                 threshold: float = DEFAULT_THRESHOLD) -> list[Peak]:
    """Local maxima above ``threshold`` times the tallest, each assigned to the
    nearest table line; maxima with no line in tolerance are artifacts."""
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    table = table if table is not None else spectrum.table
    if isinstance(spectrum, Spectrum2D):
        return _decode_2d(spectrum, table, threshold)
    return _decode_1d(spectrum, table, threshold)


def _decode_1d(spec: Spectrum1D, table: TransitionTable, threshold: float) -> list[Peak]:
    mag = spec.magnitude
    top = float(mag.max()) if mag.size else 0.0
    if top <= 1e-12 * max(spec.gain, 1.0):
        return []
    idx, _ = find_peaks(np.concatenate(([0.0], mag, [0.0])), height=threshold * top)
    peaks = []
    for i in idx - 1:
        f = float(spec.freqs[i])
        lab, dist = table.nearest(f) if len(table) else ("-", math.inf)
        ok = dist <= spec.tolerance
        amp = spec.amplitudes.get(lab) if (ok and spec.amplitudes) else None
        peaks.append(Peak((lab if ok else "-",), (f,), float(mag[i]) / spec.gain,
                          None if amp is None else float(abs(amp)),
                          "assigned" if ok else "artifact"))
    return peaks


def _decode_2d(spec: Spectrum2D, table: TransitionTable, threshold: float) -> list[Peak]:
    mag = spec.magnitude
    half = spec.f1 >= 0
    m = np.where(half[:, None], mag, 0.0)
    top = float(m.max())
    if top <= 1e-12 * max(spec.gain, 1.0):
        return []
    local = (m == maximum_filter(m, size=3, mode="constant")) & (m > threshold * top)
    tol1, tol2 = spec.tolerance
    table1 = shifted_table(table, spec.shift)
    peaks = []
    for i, j in zip(*np.nonzero(local)):
        f1, f2 = float(spec.f1[i]), float(spec.f2[j])
        lab1, d1 = table1.nearest(f1)
        lab2, d2 = table.nearest(f2)
        ok = d1 <= tol1 and d2 <= tol2
        amp = spec.amplitudes.get((lab1, lab2)) if (ok and spec.amplitudes) else None
        peaks.append(Peak((lab1, lab2) if ok else ("-", "-"), (f1, f2), float(m[i, j]) / spec.gain,
                          None if amp is None else float(abs(amp)),
                          "assigned" if ok else "artifact"))
    peaks.sort(key=lambda pk: pk.freqs)
    return peaks


def normalized_intensities(peaks: list[Peak]) -> dict[str, float]:
    """Assigned output lines with weights summing to 1 (demodulated when known)."""
    out = {}
    for pk in peaks:
        if pk.status == "assigned":
            v = pk.intensity if pk.intensity is not None else pk.magnitude
            out[pk.label] = out.get(pk.label, 0.0) + v
    total = sum(out.values())
    return {k: v / total for k, v in sorted(out.items())} if total else {}


# --- files --------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def _header(kind: str, spectrum, meta: dict | None) -> list[str]:
    lines = [f"# spectralqc {kind} v{FORMAT_VERSION}"]
    items = {"dimension": 2 if isinstance(spectrum, Spectrum2D) else 1,
             "intensity": "magnitude of complex FFT (no phase correction)"}
    if isinstance(spectrum, Spectrum2D):
        items.update(dwell_t1_s=_fmt(spectrum.dwell_t1), dwell_s=_fmt(spectrum.dwell),
                     n_t1=spectrum.n_t1, n_t2=spectrum.n_t2, n_f1=len(spectrum.f1),
                     n_f2=len(spectrum.f2), observer_shift_hz=_fmt(spectrum.shift))
    else:
        items.update(dwell_s=_fmt(spectrum.dwell), n_acquired=spectrum.n_acquired,
                     n_points=len(spectrum.freqs))
    items.update(linewidth_hz=_fmt(spectrum.linewidth), apodization_gain=_fmt(spectrum.gain))
    items.update(meta or {})
    return lines + [f"# {k}: {v}" for k, v in items.items()]


def write_spectrum(path, spectrum, meta: dict | None = None) -> Path:
    """Tab-separated spectrum. 2D files hold the ``omega_1 >= 0`` half."""
    path = Path(path)
    out = _header("spectrum", spectrum, meta)
    if isinstance(spectrum, Spectrum2D):
        out.append("f1_hz\tf2_hz\treal\timag\tmagnitude")
        rows = np.nonzero(spectrum.f1 >= 0)[0]
        for i in rows:
            f1 = _fmt(spectrum.f1[i])
            for j, z in enumerate(spectrum.data[i]):
                out.append(f"{f1}\t{_fmt(spectrum.f2[j])}\t{_fmt(z.real)}\t{_fmt(z.imag)}\t{_fmt(abs(z))}")
    else:
        out.append("freq_hz\treal\timag\tmagnitude")
        for f, z in zip(spectrum.freqs, spectrum.data):
            out.append(f"{_fmt(f)}\t{_fmt(z.real)}\t{_fmt(z.imag)}\t{_fmt(abs(z))}")
    path.write_text("\n".join(out) + "\n")
    return path


def _read_header(lines) -> tuple[dict, int]:
    meta = {}
    k = 0
    while k < len(lines) and lines[k].startswith("#"):
        body = lines[k][1:].strip()
        if ":" in body:
            key, value = body.split(":", 1)
            meta[key.strip()] = value.strip()
        else:
            meta["format"] = body
        k += 1
    return meta, k


def read_spectrum(path, table: TransitionTable | None = None):
    """Load a spectrum file; ``table`` is attached for later decoding."""
    path = Path(path)
    lines = path.read_text().splitlines()
    meta, k = _read_header(lines)
    if not meta.get("format", "").startswith("spectralqc spectrum"):
        raise AcquisitionError(f"{path} is not a spectrum file")
    body = np.loadtxt(lines[k + 1:], delimiter="\t", ndmin=2)
    table = table or TransitionTable(())
    lw = float(meta["linewidth_hz"])
    gain = float(meta["apodization_gain"])
    if meta["dimension"] == "2":
        n_f2 = int(meta["n_f2"])
        f1 = body[::n_f2, 0]
        f2 = body[:n_f2, 1]
        data = (body[:, 2] + 1j * body[:, 3]).reshape(len(f1), n_f2)
        return Spectrum2D(f1, f2, data, table, float(meta["dwell_t1_s"]), float(meta["dwell_s"]),
                          int(meta["n_t1"]), int(meta["n_t2"]), lw, gain,
                          float(meta["observer_shift_hz"]), meta=meta)
    return Spectrum1D(body[:, 0], body[:, 1] + 1j * body[:, 2], table, float(meta["dwell_s"]),
                      int(meta["n_acquired"]), lw, gain, meta=meta)


def write_peaks(path, peaks: list[Peak], dimension: int = 1, meta: dict | None = None) -> Path:
    path = Path(path)
    out = [f"# spectralqc peaks v{FORMAT_VERSION}", f"# dimension: {dimension}"]
    out += [f"# {k}: {v}" for k, v in (meta or {}).items()]
    if dimension == 2:
        out.append("input\toutput\tf1_hz\tf2_hz\tmagnitude\tintensity\tstatus")
    else:
        out.append("label\tfreq_hz\tmagnitude\tintensity\tstatus")
    for pk in peaks:
        inten = "nan" if pk.intensity is None else _fmt(pk.intensity)
        cols = list(pk.labels) + [_fmt(f) for f in pk.freqs] + [_fmt(pk.magnitude), inten, pk.status]
        out.append("\t".join(cols))
    path.write_text("\n".join(out) + "\n")
    return path


def read_peaks(path) -> list[Peak]:
    lines = Path(path).read_text().splitlines()
    meta, k = _read_header(lines)
    dim = int(meta.get("dimension", 1))
    peaks = []
    for line in lines[k + 1:]:
        cols = line.split("\t")
        labels, freqs = tuple(cols[:dim]), tuple(float(c) for c in cols[dim:2 * dim])
        mag, inten, status = float(cols[2 * dim]), cols[2 * dim + 1], cols[2 * dim + 2]
        peaks.append(Peak(labels, freqs, mag, None if inten == "nan" else float(inten), status))
    return peaks
