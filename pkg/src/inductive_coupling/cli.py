"""Command-line front end.

Exit codes: 0 success (or HEALTHY), 2 stator fault suspected (``monitor``
only), 1 usage, parse or numerical error.
"""
from __future__ import annotations

import argparse
import io
import sys
from dataclasses import dataclass
from pathlib import Path

from . import calibration as cal_mod
from .calibration import CalibrationSet
from .dsp import complex_ratio, goertzel_single_bin, scan_injection_frequency
from .fileio import (
    SessionDocument,
    append_measurement_log,
    parse_complex,
    parse_probe_file,
    probe_abcd_at,
    read_measurement_log,
    read_session,
    read_waveform,
    update_session,
    write_waveform,
)
from .monitor import DEFAULT_THRESHOLD_PCT, BaselineRecord, OperatingPoint, sweep_report
from .simulator import (
    F_SIG,
    NoiseModel,
    ppc_impedance,
    simulate_ratio,
    sut_impedance,
    synthesize_waveforms,
)
from .twoport import TerminationConfig, extract_impedance_direct, to_polar

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAULT = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class CommandResult:
    exit_code: int
    stdout: str
    stderr: str


def format_impedance(z: complex) -> str:
    mag, ang = to_polar(z)
    if mag == 0:
        ang = 0.0
    # "+ 0.0" turns a rounded -0.0 into 0.0
    return f"{round(mag, 4) + 0.0:.4f} ohm, {round(ang, 4) + 0.0:.4f} deg"


def _ratio_from_args(value, waves, freq):
    if value is not None:
        return parse_complex(value)
    if freq is None:
        raise UsageError("--freq is required with waveform input")
    w1, w2 = read_waveform(waves[0]), read_waveform(waves[1])
    return complex_ratio(w1, w2, freq)


def _session(path) -> SessionDocument:
    if path is None:
        return SessionDocument()
    if not Path(path).exists():
        raise FileNotFoundError(f"session document not found: {path}")
    return read_session(path)


# ---------------------------------------------------------------- commands


def cmd_calibrate(args, out):
    ratios = {}
    for name in ("open", "short", "load"):
        value = getattr(args, name)
        waves = getattr(args, f"{name}_wave")
        if value is None and waves is None:
            if name == "open":
                continue
            raise UsageError(f"--{name} or --{name}-wave is required")
        ratios[name] = _ratio_from_args(value, waves, args.freq)
    if args.freq is None:
        raise UsageError("--freq is required")
    cal = CalibrationSet(
        f_sig=args.freq,
        r_short=ratios["short"],
        r_load=ratios["load"],
        r_open=ratios.get("open"),
        z_load=parse_complex(args.z_load),
    )
    update_session(args.session, calibration=cal)
    coeffs = cal_mod.solve_osl(cal) if cal.has_open else cal_mod.solve_two_point(cal)
    kind = "open/short/load" if cal.has_open else "short/load (coupling neglected)"
    print(f"calibration: {kind} at {cal.f_sig!r} Hz -> {args.session}", file=out)
    print(f"k = {coeffs.k.real:.6e} {coeffs.k.imag:+.6e}j ohm", file=out)
    print(f"b = {coeffs.b.real:.6e} {coeffs.b.imag:+.6e}j ohm", file=out)
    if coeffs.z_ppc is not None:
        print(f"z_ppc = {format_impedance(coeffs.z_ppc)}", file=out)
    return EXIT_OK


def cmd_extract(args, out):
    doc = _session(args.session)
    method = args.method
    if method == "auto":
        method = "direct" if doc.calibration is None and args.iip else "calibrated"
    if method == "direct":
        if not (args.iip and args.rip and args.freq):
            raise UsageError("direct extraction needs --iip, --rip and --freq")
        ratio = _ratio_from_args(args.ratio, args.wave, args.freq)
        iip = probe_abcd_at(parse_probe_file(args.iip), args.freq)
        rip = probe_abcd_at(parse_probe_file(args.rip), args.freq)
        z = extract_impedance_direct(ratio, iip, rip, doc.termination or TerminationConfig())
    else:
        cal = doc.calibration
        if cal is None:
            raise UsageError("session has no [calibration] section")
        ratio = _ratio_from_args(args.ratio, args.wave, args.freq or cal.f_sig)
        if method == "osl":
            z = cal_mod.extract_impedance_osl(ratio, cal)
        elif method == "two-point":
            z = cal_mod.extract_impedance_two_point(ratio, cal)
        else:
            z = cal_mod.extract_impedance(ratio, cal)
    print(format_impedance(z), file=out)
    if args.log:
        append_measurement_log(args.log, args.label, z)
    if args.as_baseline:
        if args.session is None:
            raise UsageError("--as-baseline needs --session")
        f_sig = args.freq or (doc.calibration.f_sig if doc.calibration else F_SIG)
        update_session(args.session, baseline=BaselineRecord(z, f_sig, args.label))
    return EXIT_OK


def cmd_simulate(args, out):
    doc = _session(args.session)
    f = args.freq
    term = doc.termination or TerminationConfig()
    iip = probe_abcd_at(parse_probe_file(args.iip), f)
    rip = probe_abcd_at(parse_probe_file(args.rip), f)
    z_ppc = ppc_impedance(doc.ppc, f) if doc.ppc is not None else None
    if args.standard == "open":
        if z_ppc is None:
            raise UsageError("open standard needs a [ppc] section (ratio is unbounded otherwise)")
        ratio = simulate_ratio(z_ppc, iip, rip, term)
    elif args.standard == "short":
        ratio = simulate_ratio(0.0, iip, rip, term, z_ppc)
    elif args.standard == "load":
        ratio = simulate_ratio(parse_complex(args.z_load), iip, rip, term, z_ppc)
    else:
        if doc.sut is None:
            raise UsageError("session has no [sut] section (or pass --standard)")
        ratio = simulate_ratio(sut_impedance(doc.sut, f), iip, rip, term, z_ppc)
    if args.wave_out:
        noise = doc.noise if (doc.noise is not None and not args.no_noise) else NoiseModel()
        w1, w2 = synthesize_waveforms(
            ratio, f, noise, args.sample_rate, args.duration, args.seed
        )
        write_waveform(w1, args.wave_out[0])
        write_waveform(w2, args.wave_out[1])
        print(f"wrote {args.wave_out[0]}, {args.wave_out[1]} ({len(w1)} samples)", file=out)
    print(f"ratio = {ratio.real!r}, {ratio.imag!r}", file=out)
    return EXIT_OK


def cmd_monitor(args, out):
    doc = _session(args.session)
    if args.baseline is not None:
        baseline = BaselineRecord(parse_complex(args.baseline), args.freq or F_SIG, "cli")
    elif doc.baseline is not None:
        baseline = doc.baseline
    else:
        raise UsageError("no baseline: pass --baseline or a session with [baseline]")
    labels, series = [], []
    for path in args.log or []:
        for entry in read_measurement_log(path):
            labels.append(entry.label)
            series.append((entry.operating_point, entry.impedance))
    for i, text in enumerate(args.measure or [], start=1):
        label, _, value = text.rpartition("=")
        labels.append(label or f"measure{i}")
        series.append((OperatingPoint(), parse_complex(value)))
    if not series:
        raise UsageError("no measurements: pass --log and/or --measure")
    verdicts = sweep_report(baseline, series, args.threshold)
    print(
        f"baseline {format_impedance(baseline.impedance)} at {baseline.f_sig!r} Hz; "
        f"threshold {args.threshold:.3f}%",
        file=out,
    )
    width = max(len("label"), *(len(x) for x in labels))
    print(
        f"{'#':>3}  {'label':<{width}}  {'|Z| ohm':>12}  {'angle deg':>10}  "
        f"{'change':>9}  {'complex-diff (diag.)':>20}  verdict",
        file=out,
    )
    for i, (label, v) in enumerate(zip(labels, verdicts), start=1):
        mag, ang = to_polar(v.measured)
        print(
            f"{i:>3}  {label:<{width}}  {mag:>12.4f}  {ang:>10.4f}  "
            f"{v.relative_change_pct:>8.3f}%  {v.complex_change_pct:>19.3f}%  "
            f"{v.classification.value}",
            file=out,
        )
    n_fault = sum(v.is_fault for v in verdicts)
    print(f"summary: {len(verdicts)} measurement(s), {n_fault} STATOR_FAULT_SUSPECTED", file=out)
    return EXIT_FAULT if n_fault else EXIT_OK


def cmd_scan_freq(args, out):
    bg = read_waveform(args.background)
    best = scan_injection_frequency(bg, args.candidates)
    for f in args.candidates:
        p = abs(goertzel_single_bin(bg, f).phasor)
        mark = "  <- selected" if f == best else ""
        print(f"{f:>14.3f} Hz  background {p:.6e} V{mark}", file=out)
    print(f"selected {best!r} Hz", file=out)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="icimp", description="In-circuit impedance via inductive coupling.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("calibrate", help="solve calibration from jig standards")
    c.add_argument("--session", required=True)
    c.add_argument("--freq", type=float)
    for name in ("open", "short", "load"):
        c.add_argument(f"--{name}", help="ratio as 're,im' or 'mag@deg'")
        c.add_argument(f"--{name}-wave", nargs=2, metavar=("C1", "C2"))
    c.add_argument("--z-load", default="50")
    c.set_defaults(func=cmd_calibrate)

    e = sub.add_parser("extract", help="impedance from a measured ratio")
    e.add_argument("--session")
    src = e.add_mutually_exclusive_group(required=True)
    src.add_argument("--ratio")
    src.add_argument("--wave", nargs=2, metavar=("C1", "C2"))
    e.add_argument("--freq", type=float)
    e.add_argument("--method", choices=["auto", "osl", "two-point", "direct"], default="auto")
    e.add_argument("--iip")
    e.add_argument("--rip")
    e.add_argument("--log", help="append the result to this measurement log")
    e.add_argument("--label", default="measurement")
    e.add_argument("--as-baseline", action="store_true", help="store result as [baseline]")
    e.set_defaults(func=cmd_extract)

    s = sub.add_parser("simulate", help="forward-simulate the measurement chain")
    s.add_argument("--session")
    s.add_argument("--iip", required=True)
    s.add_argument("--rip", required=True)
    s.add_argument("--freq", type=float, default=F_SIG)
    s.add_argument("--standard", choices=["open", "short", "load"])
    s.add_argument("--z-load", default="50")
    s.add_argument("--wave-out", nargs=2, metavar=("C1", "C2"))
    s.add_argument("--sample-rate", type=float, default=2e6)
    s.add_argument("--duration", type=float, default=0.01)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--no-noise", action="store_true")
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("monitor", help="classify measurements against a baseline")
    m.add_argument("--session")
    m.add_argument("--baseline")
    m.add_argument("--freq", type=float)
    m.add_argument("--log", action="append")
    m.add_argument("--measure", action="append", help="[label=]value")
    m.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD_PCT)
    m.set_defaults(func=cmd_monitor)

    f = sub.add_parser("scan-freq", help="pick the quietest injection frequency")
    f.add_argument("--background", required=True)
    f.add_argument("--candidates", type=float, nargs="+", required=True)
    f.set_defaults(func=cmd_scan_freq)
    return p


def run_command(argv) -> CommandResult:
    out, err = io.StringIO(), io.StringIO()
    try:
        args = build_parser().parse_args(list(argv))
        code = args.func(args, out)
    except SystemExit as exc:  # --help
        code = int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=err)
        code = EXIT_ERROR
    except (ValueError, OSError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=err)
        code = EXIT_ERROR
    return CommandResult(code, out.getvalue(), err.getvalue())


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    result = run_command(argv)
    sys.stdout.write(result.stdout)
    sys.stderr.write(result.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
