"""CSV and ``key = value`` config files."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .function_space import DefectProfile, SampledPath, surrogate_span


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_path_csv(path: SampledPath, filename, header_prefix: str = "v") -> None:
    """Header ``t,v0,...,v{d-1}``; full-precision times and values."""
    with open(filename, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"{header_prefix}{i}" for i in range(path.dim)])
        for t, row in zip(path.times, path.values):
            w.writerow([_fmt(t)] + [_fmt(v) for v in row])


def read_path_csv(filename) -> SampledPath:
    """Inverse of :func:`write_path_csv` for paths continuous at integers."""
    with open(filename, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3 or not rows[0] or rows[0][0] != "t":
        raise ValueError(f"{filename}: expected header 't,v0,...' and at least two rows")
    data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=np.float64)
    t = data[:, 0]
    m = int(round(1.0 / (t[1] - t[0])))
    if not np.allclose(t, np.arange(t.size) / m, rtol=0, atol=1e-12):
        raise ValueError(f"{filename}: times are not a uniform grid with step 1/m")
    return SampledPath(1.0 / m, data[:, 1:])


def write_profile_csv(profile: DefectProfile, filename) -> None:
    with open(filename, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["T", "defect"])
        for T, v in zip(profile.T, profile.values):
            w.writerow([_fmt(T), _fmt(v)])


def read_profile_csv(filename, omega: float, p=None) -> DefectProfile:
    """``p=None`` reads a sup profile, otherwise a Stepanov one."""
    data = np.loadtxt(filename, delimiter=",", skiprows=1, ndmin=2)
    return DefectProfile(omega, p, data[:, 0], data[:, 1], span=surrogate_span(omega, p))


def write_residuals_csv(residuals, filename) -> None:
    with open(filename, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "residual"])
        for k, r in enumerate(residuals, start=1):
            w.writerow([k, _fmt(r)])


def write_snapshot_csv(x, u, filename) -> None:
    with open(filename, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "u"])
        for a, b in zip(x, u):
            w.writerow([_fmt(a), _fmt(b)])


def read_kv_file(filename) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Keys are normalised to lower case with ``-`` replaced by ``_``.
    """
    out = {}
    for lineno, raw in enumerate(Path(filename).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{filename}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ValueError(f"{filename}:{lineno}: empty key")
        out[key.lower().replace("-", "_")] = value
    return out
