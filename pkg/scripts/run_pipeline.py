"""End-to-end run through the CLI: simulate the calibration jig and the fitted
motor (healthy and with shorted turns) as noisy waveforms, calibrate, extract,
then monitor.

    python scripts/run_pipeline.py [work_dir]
"""
import subprocess
import sys
import tempfile
from pathlib import Path

from inductive_coupling.cli import run_command
from inductive_coupling.fileio import SessionDocument, tabulate_probe, write_probe_file, write_session
from inductive_coupling.simulator import F_SIG, NoiseModel, load_motor_fit, synthesize_probe_abcd

IIP = (2.0, 1.5e-3, 2e-7, 0.4)
RIP = (0.5, 8e-4, 5e-7, 1.1)


def run(*argv):
    res = run_command([str(a) for a in argv])
    sys.stdout.write(res.stdout)
    sys.stderr.write(res.stderr)
    if res.exit_code == 1:
        raise SystemExit(f"command failed: {' '.join(map(str, argv))}")
    return res


def pipeline(work: Path, seed: int = 7):
    work.mkdir(parents=True, exist_ok=True)
    freqs = [80e3, F_SIG, 100e3]
    for name, params in (("iip", IIP), ("rip", RIP)):
        write_probe_file(
            tabulate_probe(name, lambda f: synthesize_probe_abcd(*params, f), freqs), work / f"{name}.csv"
        )
    fit = load_motor_fit()
    noise = NoiseModel.default()
    for tag, eta in (("healthy", 0.0), ("faulted", fit.eta_star)):
        write_session(
            SessionDocument(sut=fit.model.with_fault(eta), noise=noise), work / f"{tag}_sut.ini"
        )
    write_session(SessionDocument(noise=noise), work / "jig.ini")
    probes = ["--iip", work / "iip.csv", "--rip", work / "rip.csv", "--freq", F_SIG]
    for i, std in enumerate(("short", "load")):
        run("simulate", "--session", work / "jig.ini", *probes, "--standard", std,
            "--wave-out", work / f"{std}_c1.csv", work / f"{std}_c2.csv", "--seed", seed + i)
    session = work / "session.ini"
    session.unlink(missing_ok=True)
    run("calibrate", "--session", session, "--freq", F_SIG,
        "--short-wave", work / "short_c1.csv", work / "short_c2.csv",
        "--load-wave", work / "load_c1.csv", work / "load_c2.csv")
    log = work / "log.csv"
    log.unlink(missing_ok=True)
    for i, tag in enumerate(("healthy", "faulted")):
        run("simulate", "--session", work / f"{tag}_sut.ini", *probes,
            "--wave-out", work / f"{tag}_c1.csv", work / f"{tag}_c2.csv", "--seed", seed + 10 + i)
        run("extract", "--session", session, "--wave", work / f"{tag}_c1.csv", work / f"{tag}_c2.csv",
            "--log", log, "--label", tag)
    return run("monitor", "--baseline", "6750@-67.9", "--log", log)


if __name__ == "__main__":
    work = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="icimp-"))
    sys.exit(pipeline(work).exit_code)
