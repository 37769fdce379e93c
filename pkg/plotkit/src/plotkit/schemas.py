"""CSV schemas plotkit consumes.

These column lists mirror the experiment harness's documented output
contract. They are restated here on purpose: plotting reads files, not the
producer's code, and any drift between the two must fail loudly.
"""

import csv
from pathlib import Path

PD_CURVE = ("mode", "snr_db", "pd", "ci_lo", "ci_hi")
DPHI_CURVE = ("mode", "snr_db", "dphi_rad")
STAT_IMAGE = ("ix", "iy", "x_m", "y_m", "lambda")
IMAGE_TARGETS = (
    "x_m",
    "y_m",
    "e_true_x",
    "e_true_y",
    "e_true_z",
    "e_est_x",
    "e_est_y",
    "e_est_z",
)

BY_KIND = {
    "pd_curve": PD_CURVE,
    "dphi_curve": DPHI_CURVE,
    "stat_image": STAT_IMAGE,
}


class SchemaError(ValueError):
    """A CSV does not match its documented schema."""


def load_rows(path, columns):
    """Read dict rows, insisting on the exact expected column set."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input CSV not found: {path}")
    with path.open(newline="") as f:
        reader = csv.DictReader(f)
        header = tuple(reader.fieldnames or ())
        missing = [c for c in columns if c not in header]
        extra = [c for c in header if c not in columns]
        if missing or extra:
            parts = []
            if missing:
                parts.append(f"missing columns: {', '.join(missing)}")
            if extra:
                parts.append(f"unexpected columns: {', '.join(extra)}")
            raise SchemaError(f"{path.name} does not match the {columns} schema; " + "; ".join(parts))
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path.name} has no data rows")
    return rows
