"""Deterministic CSV/JSON emission with atomic writes, and the run manifest."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile

from .scheme import PointSet


def csv_text(header: list, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def pointset_csv(P: PointSet) -> str:
    header = ["m", "n"] if P.kind == "quadratic" else ["a", "k"]
    return csv_text(header, P.rows())


def read_pointset_rows(path: str) -> list[tuple[int, int]]:
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        next(r)
        return [(int(a), int(b)) for a, b in r]


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_outputs(out_dir: str, files: dict[str, str]) -> dict[str, str]:
    """Write every file only after all contents exist; returns name -> sha256."""
    sums = {}
    for name in sorted(files):
        write_atomic(os.path.join(out_dir, name), files[name])
        sums[name] = sha256_text(files[name])
    return sums


def update_manifest(out_dir: str, command: str, entry: dict, top: dict) -> None:
    path = os.path.join(out_dir, "manifest.json")
    data = {}
    if os.path.exists(path):
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, ValueError):
            data = {}
    data.update(top)
    data.setdefault("runs", {})[command] = entry
    write_atomic(path, json_text(data))
