"""Refit the lumped winding model and rewrite the committed fixture."""
from pathlib import Path

import inductive_coupling
from inductive_coupling.simulator import F_SIG, fit_motor_parameters, motor_fit_text, motor_impedance
from inductive_coupling.twoport import to_polar

fit = fit_motor_parameters()
path = Path(inductive_coupling.__file__).parent / "data" / "motor_fit.ini"
path.write_text(motor_fit_text(fit), encoding="utf-8")
print(path.read_text())
for eta in (0.0, fit.eta_star):
    mag, ang = to_polar(motor_impedance(fit.model.with_fault(eta), F_SIG))
    print(f"eta = {eta:.6g}: |Z| = {mag:.3f} ohm, angle = {ang:.3f} deg")
