"""Cube files, band images and quality reports.

Cube file layout
----------------
A UTF-8 text header of ``key: value`` lines, terminated by a line reading
``end``, followed immediately by the raw payload::

    MDWTNN-CUBE 1
    dims: 145 145 224
    dtype: f64
    byteorder: little
    order: frontal-slice-major/column-major
    bands: 400nm,410nm,...        (optional)
    meta: {"json": "object"}      (optional, one line)
    end
    <n1*n2*n3 little-endian f32/f64 values>

The payload holds ``x.ravel(order="F")``.  Header keys map directly onto an
ENVI header: ``dims`` -> ``samples/lines/bands`` (``n2/n1/n3``), ``dtype``
-> ``data type`` 4/5, ``byteorder`` -> ``byte order = 0`` and the element
order is ENVI's ``bsq`` interleave with the two spatial axes transposed.
"""

import csv
import json
import os
import tempfile
from io import StringIO
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .tensor_core import ELEMENT_ORDER, as_cube

__all__ = [
    "CubeFormatError",
    "HeaderError",
    "TruncatedPayloadError",
    "DimensionOverflowError",
    "CubeFile",
    "save_cube",
    "load_cube",
    "read_cube_file",
    "export_band",
    "load_band_image",
    "REPORT_COLUMNS",
    "write_report",
    "read_report_csv",
    "atomic_write",
]

MAGIC = "MDWTNN-CUBE 1"
DTYPES = {"f32": np.dtype("<f4"), "f64": np.dtype("<f8")}
MAX_PAYLOAD_BYTES = 2**40
MAX_HEADER_BYTES = 1 << 20


class CubeFormatError(ValueError):
    code = "E_FORMAT"


class HeaderError(CubeFormatError):
    code = "E_HEADER"


class TruncatedPayloadError(CubeFormatError):
    code = "E_TRUNCATED"

    def __init__(self, expected, actual):
        super().__init__(f"payload is {actual} bytes, expected {expected}")
        self.expected = expected
        self.actual = actual


class DimensionOverflowError(CubeFormatError):
    code = "E_OVERFLOW"


@dataclass
class CubeFile:
    data: np.ndarray
    dtype: str = "f64"
    bands: Optional[list] = None
    meta: dict = field(default_factory=dict)


def atomic_write(path, data: bytes):
    """Write ``data`` to a temporary file beside ``path`` and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _header(shape, dtype, bands, meta):
    lines = [
        MAGIC,
        "dims: %d %d %d" % shape,
        f"dtype: {dtype}",
        "byteorder: little",
        f"order: {ELEMENT_ORDER}",
    ]
    if bands is not None:
        bands = [str(b) for b in bands]
        if len(bands) != shape[2]:
            raise ValueError(f"{len(bands)} band labels for {shape[2]} bands")
        if any("," in b or "\n" in b for b in bands):
            raise ValueError("band labels must not contain commas or newlines")
        lines.append("bands: " + ",".join(bands))
    if meta:
        lines.append("meta: " + json.dumps(meta, sort_keys=True, separators=(",", ":")))
    lines.append("end")
    return ("\n".join(lines) + "\n").encode("utf-8")


def save_cube(x, path, dtype="f64", bands=None, meta=None):
    """Write a cube file atomically."""
    x = as_cube(x)
    if dtype not in DTYPES:
        raise ValueError(f"dtype must be one of {sorted(DTYPES)}")
    payload = np.asarray(x, dtype=DTYPES[dtype]).ravel(order="F").tobytes()
    atomic_write(path, _header(x.shape, dtype, bands, meta) + payload)


def _parse_header(raw):
    lines = raw.split("\n")
    if lines[0] != MAGIC:
        raise HeaderError(f"not a cube file (first line {lines[0][:40]!r})")
    fields = {}
    for line in lines[1:]:
        if not line:
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise HeaderError(f"malformed header line {line!r}")
        fields[key.strip()] = value.strip()
    for key in ("dims", "dtype", "byteorder", "order"):
        if key not in fields:
            raise HeaderError(f"header is missing {key!r}")
    try:
        dims = tuple(int(v) for v in fields["dims"].split())
    except ValueError:
        raise HeaderError(f"bad dims {fields['dims']!r}") from None
    if len(dims) != 3 or min(dims) < 1:
        raise HeaderError(f"dims must be three positive integers, got {fields['dims']!r}")
    if fields["dtype"] not in DTYPES:
        raise HeaderError(f"unsupported dtype {fields['dtype']!r}")
    if fields["byteorder"] != "little":
        raise HeaderError(f"unsupported byte order {fields['byteorder']!r}")
    if fields["order"] != ELEMENT_ORDER:
        raise HeaderError(f"unsupported element order {fields['order']!r}")
    bands = fields["bands"].split(",") if "bands" in fields else None
    if bands is not None and len(bands) != dims[2]:
        raise HeaderError(f"{len(bands)} band labels for {dims[2]} bands")
    try:
        meta = json.loads(fields["meta"]) if "meta" in fields else {}
    except json.JSONDecodeError as exc:
        raise HeaderError(f"meta is not valid JSON: {exc}") from None
    return dims, fields["dtype"], bands, meta


def read_cube_file(path):
    """Read a cube file, returning data widened to float64 plus header fields."""
    with open(path, "rb") as fh:
        blob = fh.read()
    end = blob.find(b"\nend\n", 0, MAX_HEADER_BYTES)
    if end < 0:
        raise HeaderError("header terminator 'end' not found")
    try:
        raw = blob[:end].decode("utf-8")
    except UnicodeDecodeError:
        raise HeaderError("header is not valid UTF-8") from None
    dims, dtype, bands, meta = _parse_header(raw)
    width = DTYPES[dtype].itemsize
    n = dims[0] * dims[1] * dims[2]
    expected = n * width
    if expected > MAX_PAYLOAD_BYTES:
        raise DimensionOverflowError(f"dims {dims} need {expected} bytes, limit is {MAX_PAYLOAD_BYTES}")
    payload = blob[end + len(b"\nend\n"):]
    if len(payload) != expected:
        raise TruncatedPayloadError(expected, len(payload))
    data = np.frombuffer(payload, dtype=DTYPES[dtype]).astype(np.float64)
    return CubeFile(data.reshape(dims, order="F"), dtype, bands, meta)


def load_cube(path):
    return read_cube_file(path).data


def export_band(x, k, path):
    """Write band ``k`` (1-based) as a 16-bit PGM with min-max scaling.

    The scaling goes to ``<path>.txt``; :func:`load_band_image` inverts it.
    A constant band maps to all zeros and is marked degenerate.
    """
    x = as_cube(x)
    n3 = x.shape[2]
    if not 1 <= k <= n3:
        raise IndexError(f"band {k} out of range 1..{n3}")
    band = x[:, :, k - 1]
    lo, hi = float(band.min()), float(band.max())
    degenerate = not hi > lo
    if degenerate:
        q = np.zeros(band.shape, dtype=">u2")
    else:
        q = np.rint((band - lo) / (hi - lo) * 65535).astype(">u2")
    rows, cols = band.shape
    atomic_write(path, f"P5\n{cols} {rows}\n65535\n".encode("ascii") + q.tobytes())
    scale = 0.0 if degenerate else (hi - lo) / 65535
    side = (f"band: {k}\nmin: {lo!r}\nmax: {hi!r}\nscale: {scale!r}\n"
            f"degenerate: {str(degenerate).lower()}\n")
    atomic_write(str(path) + ".txt", side.encode("ascii"))


def load_band_image(path):
    """Read a PGM written by :func:`export_band` and undo its scaling."""
    with open(path, "rb") as fh:
        blob = fh.read()
    parts = blob.split(b"\n", 3)
    if parts[0] != b"P5" or parts[2] != b"65535":
        raise ValueError("expected a 16-bit binary PGM")
    cols, rows = (int(v) for v in parts[1].split())
    q = np.frombuffer(parts[3], dtype=">u2").reshape(rows, cols).astype(np.float64)
    side = {}
    for line in Path(str(path) + ".txt").read_text().splitlines():
        key, _, value = line.partition(":")
        side[key.strip()] = value.strip()
    return float(side["min"]) + q * float(side["scale"])


#: per-band rows carry psnr/ssim; the final "mean" row carries the summary
REPORT_COLUMNS = ("band", "psnr", "ssim", "sam", "time")


def write_report(report, prefix, config=None, log=None, wall_time=None):
    """Write ``<prefix>.csv`` and ``<prefix>.json``.

    CSV schema (``REPORT_COLUMNS``): one row per band ``k`` with its PSNR and
    SSIM, ``sam`` and ``time`` left empty; then a row with ``band == "mean"``
    holding MPSNR, MSSIM, MSAM (degrees) and the run time in seconds.  The
    JSON snapshot embeds ``config`` and the iteration ``log``.
    """
    prefix = str(prefix)
    t = report.wall_time if wall_time is None else wall_time
    rows = [REPORT_COLUMNS]
    for k, (p, s) in enumerate(zip(report.psnr_per_band, report.ssim_per_band), start=1):
        rows.append((k, repr(float(p)), repr(float(s)), "", ""))
    rows.append(("mean", repr(report.mpsnr), repr(report.mssim), repr(report.msam), repr(float(t))))
    buf = _csv_text(rows)
    atomic_write(prefix + ".csv", buf.encode("utf-8"))
    snapshot = {
        "config": config or {},
        "summary": {"mpsnr": report.mpsnr, "mssim": report.mssim, "msam": report.msam, "time": t},
        "psnr_per_band": [float(v) for v in report.psnr_per_band],
        "ssim_per_band": [float(v) for v in report.ssim_per_band],
        "iteration_log": log or [],
    }
    atomic_write(prefix + ".json", (json.dumps(snapshot, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    return prefix + ".csv", prefix + ".json"


def _csv_text(rows):
    out = StringIO()
    csv.writer(out, lineterminator="\n").writerows(rows)
    return out.getvalue()


def read_report_csv(path):
    """Parse a report CSV back into ``(psnr, ssim, summary)``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != REPORT_COLUMNS:
            raise ValueError(f"unexpected columns {header}")
        psnr, ssim, summary = [], [], None
        for row in reader:
            if len(row) != len(REPORT_COLUMNS):
                raise ValueError(f"row has {len(row)} fields: {row}")
            if row[0] == "mean":
                summary = {"mpsnr": float(row[1]), "mssim": float(row[2]),
                           "msam": float(row[3]), "time": float(row[4])}
            else:
                psnr.append(float(row[1]))
                ssim.append(float(row[2]))
    return np.array(psnr), np.array(ssim), summary
