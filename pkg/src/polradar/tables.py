"""CSV schemas emitted by the experiment harness.

Column names are a contract consumed by the plotting component; change them
and downstream tooling breaks loudly (by design).
"""

import csv
from pathlib import Path

import numpy as np

PD_CURVE_COLUMNS = ("mode", "snr_db", "pd", "ci_lo", "ci_hi")
DPHI_CURVE_COLUMNS = ("mode", "snr_db", "dphi_rad")
STAT_IMAGE_COLUMNS = ("ix", "iy", "x_m", "y_m", "lambda")
THRESHOLDS_COLUMNS = ("mode", "snr_db", "threshold")
# sidecar for statistic-image dipole overlays (true and estimated lines)
IMAGE_TARGETS_COLUMNS = (
    "x_m",
    "y_m",
    "e_true_x",
    "e_true_y",
    "e_true_z",
    "e_est_x",
    "e_est_y",
    "e_est_z",
)

FILES = {
    "pd_curve.csv": PD_CURVE_COLUMNS,
    "dphi_curve.csv": DPHI_CURVE_COLUMNS,
    "stat_image.csv": STAT_IMAGE_COLUMNS,
    "thresholds.csv": THRESHOLDS_COLUMNS,
    "image_targets.csv": IMAGE_TARGETS_COLUMNS,
}


def _format(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))  # shortest exact round-trip form
    return str(value)


def write_csv(path, columns, rows):
    """Write dict rows under the given column contract."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format(row[col]) for col in columns])
    return path


def read_csv(path):
    with Path(path).open(newline="") as f:
        return list(csv.DictReader(f))


def write_image_targets(path, annotations):
    rows = []
    for ann in annotations:
        e_t, e_e = ann["e_true"], ann["e_est"]
        rows.append(
            {
                "x_m": float(ann["x2"][0]),
                "y_m": float(ann["x2"][1]),
                "e_true_x": float(e_t[0]),
                "e_true_y": float(e_t[1]),
                "e_true_z": float(e_t[2]),
                "e_est_x": float(e_e[0]),
                "e_est_y": float(e_e[1]),
                "e_est_z": float(e_e[2]),
            }
        )
    return write_csv(path, IMAGE_TARGETS_COLUMNS, rows)
