"""File formats: density-matrix JSON, angle CSV, grid CSV/JSON and table CSVs.

CSV files may start with ``#`` comment lines (provenance and metadata); readers
skip them. Floats are written with 17 significant digits.
"""
import csv
import io as _io
import json

import numpy as np

from .coherent import OmegaAngles
from .errors import InvalidStateError
from .linalg import validate_density_matrix
from .phase_space import PhaseSpaceGrid, SliceSpec, SWParams


def fmt(x):
    return format(float(x), ".17g")


def density_to_dict(rho):
    rho = np.asarray(rho, dtype=np.complex128)
    return {
        "dim": int(rho.shape[0]),
        "re": [float(v) for v in rho.real.ravel()],
        "im": [float(v) for v in rho.imag.ravel()],
    }


def density_from_dict(d):
    try:
        n = int(d["dim"])
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidStateError(f"malformed density-matrix record: {exc}") from exc
    if re.size != n * n or im.size != n * n:
        raise InvalidStateError(f"expected {n * n} entries for dim {n}")
    return validate_density_matrix((re + 1j * im).reshape(n, n))


def write_density(path, rho):
    with open(path, "w") as f:
        json.dump(density_to_dict(rho), f, indent=1)
        f.write("\n")


def read_density(path):
    with open(path) as f:
        return density_from_dict(json.load(f))


def _comments(lines):
    return "".join(f"# {line}\n" for line in lines)


def _data_lines(text):
    return [line for line in text.splitlines() if line and not line.startswith("#")]


def angle_header(dim):
    m = dim - 1
    return [f"theta_{j}" for j in range(1, m + 1)] + [f"phi_{j}" for j in range(1, m + 1)]


def angles_to_csv(theta, phi, comments=()):
    theta = np.atleast_2d(theta)
    phi = np.atleast_2d(phi)
    buf = _io.StringIO()
    buf.write(_comments(comments))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(angle_header(theta.shape[1] + 1))
    for t, p in zip(theta, phi):
        w.writerow([fmt(v) for v in np.concatenate([t, p])])
    return buf.getvalue()


def angles_from_csv(text):
    rows = list(csv.reader(_data_lines(text)))
    header, body = rows[0], rows[1:]
    m = len(header) // 2
    if header != angle_header(m + 1):
        raise ValueError(f"unexpected angle header {header}")
    data = np.array(body, dtype=float).reshape(-1, 2 * m)
    return [OmegaAngles(r[:m], r[m:]) for r in data]


def grid_to_csv(grid, comments=()):
    buf = _io.StringIO()
    meta = [
        f"dim={grid.params.dim}",
        f"s={fmt(grid.params.s)}",
        f"slice={json.dumps(grid.slice.to_dict(), sort_keys=True)}",
        f"minimum={fmt(grid.minimum)}",
    ]
    buf.write(_comments(list(comments) + meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([*grid.slice.axes, "W"])
    for i, a in enumerate(grid.axis0):
        for j, b in enumerate(grid.axis1):
            w.writerow([fmt(a), fmt(b), fmt(grid.values[i, j])])
    return buf.getvalue()


def grid_to_dict(grid):
    return {
        "params": {"dim": grid.params.dim, "s": grid.params.s},
        "slice": grid.slice.to_dict(),
        "axis0": grid.axis0.tolist(),
        "axis1": grid.axis1.tolist(),
        "shape": list(grid.values.shape),
        "values": grid.values.ravel().tolist(),
    }


def grid_from_dict(d):
    params = SWParams(d["params"]["dim"], d["params"]["s"])
    values = np.asarray(d["values"], dtype=float).reshape(d["shape"])
    return PhaseSpaceGrid(params, SliceSpec.from_dict(d["slice"]),
                          np.asarray(d["axis0"]), np.asarray(d["axis1"]), values)


def classification_to_csv(records, comments=()):
    buf = _io.StringIO()
    buf.write(_comments(comments))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "s", "s_min", "s_max", "n_c", "single_shot"])
    for r in records:
        w.writerow([r.dim, fmt(r.s), fmt(r.s_min), fmt(r.s_max), r.n_c, int(r.single_shot_paper)])
    return buf.getvalue()


def protocol_rows_to_csv(rows, comments=()):
    buf = _io.StringIO()
    buf.write(_comments(comments))
    w = csv.writer(buf, lineterminator="\n")
    dim = rows[0].omega.dim if rows else 2
    w.writerow([*angle_header(dim), "exact", "swap_test", "delta", "empirical", "shots",
                "success_probability"])
    for r in rows:
        emp = "" if r.empirical is None else fmt(r.empirical)
        w.writerow([*(fmt(v) for v in r.omega.as_row()), fmt(r.exact), fmt(r.swap),
                    fmt(r.delta), emp, r.shots, fmt(r.success_probability)])
    return buf.getvalue()


def read_table(text):
    """Parse any of the CSV outputs into a list of dicts of strings."""
    return list(csv.DictReader(_data_lines(text)))
