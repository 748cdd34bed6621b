"""Text file formats: probe characterizations, waveform records, session
documents and measurement logs.

All numbers are written with ``repr`` so a write/read cycle is lossless.
Complex values in session documents are written as ``re, im``.
"""
from __future__ import annotations

import bisect
import configparser
import csv
import io
import math
import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .calibration import CalibrationSet
from .dsp import Waveform
from .errors import LockedError, OutOfBandError, ParseError
from .monitor import BaselineRecord, OperatingPoint
from .simulator import (
    FixedImpedance,
    MotorWindingModel,
    NoiseModel,
    PpcModel,
    TableImpedance,
    default_interference,
    format_rlc,
    parse_rlc,
)
from .twoport import TerminationConfig, TwoPortAbcd, from_polar, to_polar

PROBE_COLUMNS = ["freq_hz", "a_re", "a_im", "b_re", "b_im", "c_re", "c_im", "d_re", "d_im"]
WAVEFORM_HEADER = "sample_rate_hz"


def parse_real(text: str) -> float:
    value = float(text.strip())
    if not math.isfinite(value):
        raise ValueError(f"not a finite number: {text!r}")
    return value


def parse_complex(text: str) -> complex:
    """Accepts ``re, im``, ``magnitude@angle_deg`` or a bare real number."""
    text = text.strip()
    if "@" in text:
        mag, ang = text.split("@", 1)
        return from_polar(parse_real(mag), parse_real(ang))
    if "," in text:
        re_, im_ = text.split(",", 1)
        return complex(parse_real(re_), parse_real(im_))
    return complex(parse_real(text))


def format_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real!r}, {z.imag!r}"


# ------------------------------------------------------------------ probes


@dataclass(frozen=True)
class ProbeFile:
    probe_id: str
    rows: tuple  # (freq_hz, TwoPortAbcd) pairs

    def __post_init__(self):
        if not self.rows:
            raise ValueError("probe file needs at least one row")
        freqs = [f for f, _ in self.rows]
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise ValueError("probe frequencies must be strictly increasing")

    @property
    def frequencies(self) -> list[float]:
        return [f for f, _ in self.rows]


def format_probe_file(p: ProbeFile) -> str:
    out = [f"# probe_id = {p.probe_id}", ",".join(PROBE_COLUMNS)]
    for f, m in p.rows:
        vals = [f]
        for z in (m.a, m.b, m.c, m.d):
            vals += [z.real, z.imag]
        out.append(",".join(repr(float(v)) for v in vals))
    return "\n".join(out) + "\n"


def write_probe_file(p: ProbeFile, path) -> None:
    Path(path).write_text(format_probe_file(p), encoding="utf-8")


def parse_probe_text(text: str, source="<probe>") -> ProbeFile:
    probe_id = Path(str(source)).stem
    header_seen = False
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("probe_id") and "=" in body:
                probe_id = body.split("=", 1)[1].strip()
            continue
        cells = [c.strip() for c in line.split(",")]
        if not header_seen:
            if cells != PROBE_COLUMNS:
                raise ParseError(
                    f"header must be {','.join(PROBE_COLUMNS)}", source, lineno
                )
            header_seen = True
            continue
        if len(cells) != len(PROBE_COLUMNS):
            raise ParseError(
                f"expected {len(PROBE_COLUMNS)} columns, got {len(cells)}", source, lineno
            )
        try:
            v = [parse_real(c) for c in cells]
        except ValueError as exc:
            raise ParseError(str(exc), source, lineno) from None
        if rows and v[0] <= rows[-1][0]:
            raise ParseError(
                f"frequency {v[0]} not above previous {rows[-1][0]} (non-monotone)",
                source,
                lineno,
            )
        m = TwoPortAbcd(complex(v[1], v[2]), complex(v[3], v[4]), complex(v[5], v[6]), complex(v[7], v[8]))
        rows.append((v[0], m))
    if not header_seen:
        raise ParseError("empty probe file", source)
    if not rows:
        raise ParseError("probe file has no data rows", source)
    return ProbeFile(probe_id, tuple(rows))


def parse_probe_file(path) -> ProbeFile:
    return parse_probe_text(Path(path).read_text(encoding="utf-8"), path)


def probe_abcd_at(p: ProbeFile, f: float) -> TwoPortAbcd:
    """Characterized matrix at ``f``; entries interpolated linearly between rows."""
    freqs = p.frequencies
    if not freqs[0] <= f <= freqs[-1]:
        raise OutOfBandError(
            f"{f} Hz outside probe {p.probe_id!r} range [{freqs[0]}, {freqs[-1]}] Hz"
        )
    i = bisect.bisect_left(freqs, f)
    if freqs[i] == f:
        return p.rows[i][1]
    (f0, m0), (f1, m1) = p.rows[i - 1], p.rows[i]
    t = (f - f0) / (f1 - f0)
    return TwoPortAbcd.from_array(m0.as_array() * (1 - t) + m1.as_array() * t)


def tabulate_probe(probe_id: str, model, frequencies: Sequence[float]) -> ProbeFile:
    """ProbeFile sampled from ``model(f) -> TwoPortAbcd``."""
    return ProbeFile(probe_id, tuple((float(f), model(f)) for f in frequencies))


# --------------------------------------------------------------- waveforms


def write_waveform(w: Waveform, path) -> None:
    buf = io.StringIO()
    buf.write(f"{WAVEFORM_HEADER},{float(w.sample_rate)!r}\n")
    buf.write("\n".join(repr(float(x)) for x in w.samples))
    buf.write("\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_waveform(path) -> Waveform:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError("empty waveform file", path)
    head = [c.strip() for c in lines[0].split(",")]
    if len(head) != 2 or head[0] != WAVEFORM_HEADER:
        raise ParseError(f"first line must be '{WAVEFORM_HEADER},<rate>'", path, 1)
    try:
        rate = parse_real(head[1])
    except ValueError as exc:
        raise ParseError(str(exc), path, 1) from None
    samples = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            samples.append(parse_real(line))
        except ValueError as exc:
            raise ParseError(str(exc), path, lineno) from None
    try:
        return Waveform(rate, np.array(samples))
    except ValueError as exc:
        raise ParseError(str(exc), path) from None


# -------------------------------------------------------- session document


@dataclass
class SessionDocument:
    calibration: Optional[CalibrationSet] = None
    baseline: Optional[BaselineRecord] = None
    sut: object = None
    noise: Optional[NoiseModel] = None
    termination: Optional[TerminationConfig] = None
    ppc: Optional[PpcModel] = None


_SECTION_KEYS = {
    "calibration": ({"f_sig_hz", "r_short", "r_load"}, {"r_open", "z_load"}),
    "baseline": ({"impedance", "f_sig_hz"}, {"label", "captured_at"}),
    "noise": (set(), {"white_noise_rms", "tones", "vfd_hz"}),
    "termination": (set(), {"z_c1", "z_c2"}),
    "ppc": (set(), {"m0", "d", "d0", "r_p"}),
}
_SUT_KEYS = {
    "motor": ({"r_s", "l_s", "c_p", "r_p"}, {"fault_fraction"}),
    "rlc": ({"network"}, set()),
    "fixed": ({"impedance"}, {"label"}),
    "table": ({"points"}, set()),
}


def _check_keys(section, keys, required, optional, path):
    unknown = set(keys) - required - optional
    if unknown:
        raise ParseError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}", path)
    missing = required - set(keys)
    if missing:
        raise ParseError(f"missing key(s) in [{section}]: {', '.join(sorted(missing))}", path)


def _parse_tones(text: str, vfd_hz: float):
    text = text.strip()
    if not text:
        return ()
    if text == "default":
        return default_interference(vfd_hz)
    tones = []
    for item in text.split(";"):
        f, amp, ph = (parse_real(x) for x in item.split(":"))
        tones.append((f, amp, ph))
    return tuple(tones)


def _format_tones(tones) -> str:
    return "; ".join(f"{f!r}:{a!r}:{p!r}" for f, a, p in tones)


def parse_session_text(text: str, source="<session>") -> SessionDocument:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text, source=str(source))
    except configparser.Error as exc:
        raise ParseError(str(exc).splitlines()[0], source) from None
    doc = SessionDocument()
    for name in cp.sections():
        s = dict(cp[name])
        try:
            if name == "sut":
                kind = s.pop("kind", None)
                if kind not in _SUT_KEYS:
                    raise ParseError(f"[sut] kind must be one of {sorted(_SUT_KEYS)}", source)
                _check_keys(f"sut:{kind}", s, *_SUT_KEYS[kind], source)
                doc.sut = _parse_sut(kind, s)
                continue
            if name not in _SECTION_KEYS:
                raise ParseError(f"unknown section [{name}]", source)
            _check_keys(name, s, *_SECTION_KEYS[name], source)
            if name == "calibration":
                doc.calibration = CalibrationSet(
                    f_sig=parse_real(s["f_sig_hz"]),
                    r_short=parse_complex(s["r_short"]),
                    r_load=parse_complex(s["r_load"]),
                    r_open=parse_complex(s["r_open"]) if "r_open" in s else None,
                    z_load=parse_complex(s["z_load"]) if "z_load" in s else 50.0,
                )
            elif name == "baseline":
                captured = s.get("captured_at")
                doc.baseline = BaselineRecord(
                    parse_complex(s["impedance"]),
                    parse_real(s["f_sig_hz"]),
                    s.get("label", "healthy"),
                    datetime.fromisoformat(captured) if captured else None,
                )
            elif name == "noise":
                vfd = parse_real(s["vfd_hz"]) if "vfd_hz" in s else 20.0
                doc.noise = NoiseModel(
                    parse_real(s.get("white_noise_rms", "0")),
                    _parse_tones(s.get("tones", ""), vfd),
                )
            elif name == "termination":
                doc.termination = TerminationConfig(
                    parse_complex(s.get("z_c1", "1e6")), parse_complex(s.get("z_c2", "50"))
                )
            elif name == "ppc":
                doc.ppc = PpcModel(**{k: parse_real(v) for k, v in s.items()})
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(f"[{name}] {exc}", source) from None
    return doc


def _parse_sut(kind, s):
    if kind == "motor":
        return MotorWindingModel(
            parse_real(s["r_s"]),
            parse_real(s["l_s"]),
            parse_real(s["c_p"]),
            parse_real(s["r_p"]),
            parse_real(s.get("fault_fraction", "0")),
        )
    if kind == "rlc":
        return parse_rlc(s["network"])
    if kind == "fixed":
        return FixedImpedance(parse_complex(s["impedance"]), s.get("label", ""))
    freqs, zs = [], []
    for item in s["points"].split(";"):
        f, re_, im_ = (parse_real(x) for x in item.split(":"))
        freqs.append(f)
        zs.append(complex(re_, im_))
    return TableImpedance(tuple(freqs), tuple(zs))


def _format_sut(sut) -> list[str]:
    if isinstance(sut, MotorWindingModel):
        return [
            "kind = motor",
            f"r_s = {sut.r_s!r}",
            f"l_s = {sut.l_s!r}",
            f"c_p = {sut.c_p!r}",
            f"r_p = {sut.r_p!r}",
            f"fault_fraction = {sut.fault_fraction!r}",
        ]
    if isinstance(sut, FixedImpedance):
        lines = ["kind = fixed", f"impedance = {format_complex(sut.impedance)}"]
        if sut.label:
            lines.append(f"label = {sut.label}")
        return lines
    if isinstance(sut, TableImpedance):
        pts = "; ".join(
            f"{f!r}:{z.real!r}:{z.imag!r}" for f, z in zip(sut.frequencies, sut.impedances)
        )
        return ["kind = table", f"points = {pts}"]
    return ["kind = rlc", f"network = {format_rlc(sut)}"]


def format_session(doc: SessionDocument) -> str:
    parts = []
    if doc.calibration is not None:
        c = doc.calibration
        lines = [f"f_sig_hz = {c.f_sig!r}"]
        if c.r_open is not None:
            lines.append(f"r_open = {format_complex(c.r_open)}")
        lines += [
            f"r_short = {format_complex(c.r_short)}",
            f"r_load = {format_complex(c.r_load)}",
            f"z_load = {format_complex(c.z_load)}",
        ]
        parts.append(("calibration", lines))
    if doc.baseline is not None:
        b = doc.baseline
        lines = [
            f"impedance = {format_complex(b.impedance)}",
            f"f_sig_hz = {b.f_sig!r}",
            f"label = {b.label}",
        ]
        if b.captured_at is not None:
            lines.append(f"captured_at = {b.captured_at.isoformat()}")
        parts.append(("baseline", lines))
    if doc.sut is not None:
        parts.append(("sut", _format_sut(doc.sut)))
    if doc.noise is not None:
        parts.append(
            (
                "noise",
                [
                    f"white_noise_rms = {doc.noise.white_noise_rms!r}",
                    f"tones = {_format_tones(doc.noise.interference_tones)}",
                ],
            )
        )
    if doc.termination is not None:
        t = doc.termination
        parts.append(
            ("termination", [f"z_c1 = {format_complex(t.z_c1)}", f"z_c2 = {format_complex(t.z_c2)}"])
        )
    if doc.ppc is not None:
        p = doc.ppc
        parts.append(("ppc", [f"m0 = {p.m0!r}", f"d = {p.d!r}", f"d0 = {p.d0!r}", f"r_p = {p.r_p!r}"]))
    return "\n".join(f"[{name}]\n" + "\n".join(lines) + "\n" for name, lines in parts)


def read_session(path) -> SessionDocument:
    return parse_session_text(Path(path).read_text(encoding="utf-8"), path)


@contextmanager
def session_lock(path):
    """Exclusive advisory lock; a second concurrent writer fails instead of
    silently overwriting."""
    lock = Path(str(path) + ".lock")
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise LockedError(f"{path} is locked by another writer ({lock})") from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


def write_session(doc: SessionDocument, path) -> None:
    path = Path(path)
    with session_lock(path):
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(format_session(doc), encoding="utf-8")
        os.replace(tmp, path)


def update_session(path, **sections) -> SessionDocument:
    """Read ``path`` (if present), replace the given sections, write back."""
    path = Path(path)
    with session_lock(path):
        doc = read_session(path) if path.exists() else SessionDocument()
        for name, value in sections.items():
            setattr(doc, name, value)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(format_session(doc), encoding="utf-8")
        os.replace(tmp, path)
    return doc


# --------------------------------------------------------- measurement log

LOG_COLUMNS = ["label", "magnitude_ohm", "angle_deg", "rpm", "vfd_hz", "load"]


@dataclass(frozen=True)
class LogEntry:
    label: str
    impedance: complex
    operating_point: OperatingPoint = field(default_factory=OperatingPoint)


def read_measurement_log(path) -> list[LogEntry]:
    """CSV with at least ``label,magnitude_ohm,angle_deg``; extra columns are ignored."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError("empty measurement log", path)
        need = {"label", "magnitude_ohm", "angle_deg"}
        if not need <= set(reader.fieldnames):
            raise ParseError(f"log header must include {sorted(need)}", path, 1)
        entries = []
        for lineno, row in enumerate(reader, start=2):
            try:
                z = from_polar(parse_real(row["magnitude_ohm"]), parse_real(row["angle_deg"]))
                op = OperatingPoint(
                    parse_real(row["rpm"]) if row.get("rpm") else None,
                    parse_real(row["vfd_hz"]) if row.get("vfd_hz") else None,
                    row.get("load") or None,
                )
            except (ValueError, TypeError) as exc:
                raise ParseError(str(exc), path, lineno) from None
            entries.append(LogEntry(row["label"], z, op))
    return entries


def append_measurement_log(path, label: str, impedance: complex) -> None:
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    mag, ang = to_polar(impedance)
    with session_lock(path), open(path, "a", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if new:
            w.writerow(LOG_COLUMNS)
        w.writerow([label, repr(mag), repr(ang), "", "", ""])
