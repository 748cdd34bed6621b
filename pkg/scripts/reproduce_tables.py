"""Relative change of the nine published motor readings against the 6750 ohm
reference, printed next to the published column."""
from inductive_coupling.monitor import BaselineRecord, classify
from inductive_coupling.simulator import F_SIG, measured_motor_table
from inductive_coupling.twoport import from_polar

base = BaselineRecord(from_polar(6750, -67.9), F_SIG)
print(f"{'table':>5}  {'condition':<26} {'|Z|':>9} {'published':>10} {'computed':>9}  verdict")
for row in measured_motor_table():
    v = classify(base, from_polar(row["magnitude"], row["angle_deg"]))
    print(
        f"{row['table']:>5}  {row['label']:<26} {row['magnitude']:>9.2f} "
        f"{row['reported_pct']:>9.3f}% {v.relative_change_pct:>8.3f}%  {v.classification.value}"
    )
