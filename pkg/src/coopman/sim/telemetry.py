"""Flattening and CSV output for recorded simulation columns.

Column naming is stable so downstream tooling can rely on it: a scalar
series keeps its name, a per-axis series ``name`` of width d becomes
``name_0 .. name_{d-1}``, and a per-agent block of shape (steps, N, d)
becomes ``name_a{n}_{k}`` with 1-based agent numbers.  Values are written
with ``%.17g`` so float64 round-trips exactly, with LF line endings on
every platform.
"""

import numpy as np


def flatten_columns(time, columns):
    """(headers, matrix) view of the recorded series, time first."""
    time = np.asarray(time, dtype=float)
    headers = ["t"]
    cols = [time]
    for name, arr in columns.items():
        arr = np.asarray(arr, dtype=float)
        if arr.shape[0] != time.shape[0]:
            raise ValueError("column %r has %d rows, expected %d"
                             % (name, arr.shape[0], time.shape[0]))
        if arr.ndim == 1:
            headers.append(name)
            cols.append(arr)
        elif arr.ndim == 2:
            for k in range(arr.shape[1]):
                headers.append("%s_%d" % (name, k))
                cols.append(arr[:, k])
        elif arr.ndim == 3:
            for n in range(arr.shape[1]):
                for k in range(arr.shape[2]):
                    headers.append("%s_a%d_%d" % (name, n + 1, k))
                    cols.append(arr[:, n, k])
        else:
            raise ValueError("column %r has unsupported rank %d"
                             % (name, arr.ndim))
    if time.shape[0]:
        return headers, np.column_stack(cols)
    return headers, np.zeros((0, len(headers)))


def write_csv(path, time, columns):
    """Writes the run telemetry as a single CSV file."""
    headers, data = flatten_columns(time, columns)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(headers) + "\n")
        np.savetxt(fh, data, fmt="%.17g", delimiter=",", newline="\n")
    return headers
