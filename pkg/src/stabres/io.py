"""Atomic CSV/JSON writers with fixed numeric formatting."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
import tempfile


def fmt(x) -> str:
    """Six significant digits; scientific notation below 1e-3 in magnitude."""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return str(x)
    if x != 0 and abs(x) < 1e-3:
        return f"{x:.5e}"
    return f"{x:.6g}"


def round_sig(x):
    """Float rounded the way :func:`fmt` prints it (for JSON payloads)."""
    return float(fmt(x))


def _atomic_write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows, comments=()):
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows, comments=()):
    _atomic_write(path, csv_text(header, rows, comments))


def write_json(path, payload):
    _atomic_write(path, json.dumps(payload, indent=2) + "\n")


def read_csv(path):
    """Header and float rows of a file written by :func:`write_csv`."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, [[float(v) for v in row] for row in reader]
