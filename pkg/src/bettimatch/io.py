"""Image ingestion and deterministic result serialization.

Supported inputs: PGM (P2/P5, values normalized to [0,1]), CSV of reals,
and .npy arrays (float64/float32/uint8, kept at their raw values).  JSON
output is canonical: keys sorted, floats printed with 17 significant
digits so that re-parsing reproduces the exact same float64.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

from .errors import MalformedFile, NotTwoDimensional, UnsupportedFormat
from .grid import validate_image
from .persistence import Barcode, Interval

FORMATS = ("auto", "pgm", "csv", "npy")


# -- loading ---------------------------------------------------------------

def _pgm_tokens(data: bytes):
    """Header tokens of a PGM file; '#' starts a to-end-of-line comment."""
    i = 0
    n = len(data)
    while i < n:
        ch = data[i: i + 1]
        if ch.isspace():
            i += 1
            continue
        if ch == b"#":
            while i < n and data[i: i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j: j + 1].isspace() and data[j: j + 1] != b"#":
            j += 1
        yield data[i:j], j
        i = j


def _load_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = _pgm_tokens(data)
    try:
        magic, _ = next(tokens)
        if magic not in (b"P2", b"P5"):
            raise MalformedFile(f"not a PGM file: magic {magic!r}")
        (w_tok, _), (h_tok, _), (max_tok, end) = (next(tokens) for _ in range(3))
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except (StopIteration, ValueError) as exc:
        raise MalformedFile("truncated or non-numeric PGM header") from exc
    if width <= 0 or height <= 0 or not 0 < maxval <= 65535:
        raise MalformedFile(f"bad PGM dimensions {width}x{height} maxval {maxval}")
    count = width * height
    if magic == b"P2":
        vals = []
        for tok, _ in tokens:
            try:
                vals.append(int(tok))
            except ValueError as exc:
                raise MalformedFile(f"non-integer PGM sample {tok!r}") from exc
        if len(vals) != count:
            raise MalformedFile(f"expected {count} samples, found {len(vals)}")
        arr = np.array(vals, dtype=np.float64)
    else:
        raster = data[end + 1:]  # exactly one whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = count * dtype.itemsize
        if len(raster) < need:
            raise MalformedFile("PGM raster shorter than header promises")
        arr = np.frombuffer(raster[:need], dtype=dtype).astype(np.float64)
    if (arr > maxval).any() or (arr < 0).any():
        raise MalformedFile("PGM sample outside [0, maxval]")
    return (arr / maxval).reshape(height, width)


def _load_csv(path: str) -> np.ndarray:
    try:
        arr = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except (ValueError, OSError) as exc:
        raise MalformedFile(f"cannot parse CSV {path}: {exc}") from exc
    if arr.size == 0:
        raise MalformedFile(f"empty CSV {path}")
    return arr


def _load_npy(path: str) -> np.ndarray:
    try:
        arr = np.load(path, allow_pickle=False)
    except ValueError as exc:
        raise MalformedFile(f"cannot parse npy {path}: {exc}") from exc
    if arr.ndim != 2:
        raise NotTwoDimensional(f"{path}: expected a 2D array, got {arr.ndim}D")
    if arr.dtype not in (np.float64, np.float32, np.uint8):
        raise UnsupportedFormat(
            f"{path}: dtype {arr.dtype} not in float64/float32/uint8"
        )
    return np.ascontiguousarray(arr, dtype=np.float64)


def load_image(path: str, fmt: str = "auto") -> np.ndarray:
    """Read an image file into a validated float64 matrix."""
    if fmt not in FORMATS:
        raise UnsupportedFormat(f"format must be one of {FORMATS}")
    if fmt == "auto":
        ext = os.path.splitext(path)[1].lower()
        if ext == ".pgm":
            fmt = "pgm"
        elif ext == ".csv":
            fmt = "csv"
        elif ext == ".npy":
            fmt = "npy"
        else:
            with open(path, "rb") as fh:
                head = fh.read(6)
            if head.startswith(b"\x93NUMPY"):
                fmt = "npy"
            elif head[:2] in (b"P2", b"P5"):
                fmt = "pgm"
            else:
                raise UnsupportedFormat(
                    f"cannot determine format of {path}; pass pgm, csv or npy"
                )
    loader = {"pgm": _load_pgm, "csv": _load_csv, "npy": _load_npy}[fmt]
    return validate_image(loader(path))


def save_gradient(path: str, grad: np.ndarray) -> None:
    """Write a gradient as a float64 .npy array shaped like the prediction."""
    np.save(path, np.ascontiguousarray(grad, dtype=np.float64))


# -- canonical JSON --------------------------------------------------------

def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite float in JSON output")
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return format(x, ".17g")


def dumps_canonical(obj, indent: int = 0) -> str:
    """Deterministic JSON: sorted keys, 17-significant-digit floats."""
    pad = " " * indent
    nxt = indent + 2
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [dumps_canonical(v, nxt) for v in obj]
        return "[\n" + ",\n".join(" " * nxt + s for s in items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{json.dumps(str(k))}: {dumps_canonical(obj[k], nxt)}"
            for k in sorted(obj, key=str)
        ]
        return "{\n" + ",\n".join(" " * nxt + s for s in items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj)!r}")


# -- record schemas --------------------------------------------------------

def interval_record(iv: Interval) -> dict:
    return {
        "dim": iv.dim,
        "birth": iv.birth_value,
        "death": None if iv.essential else iv.death_value,
        "birth_index": iv.birth_index,
        "death_index": iv.death_index,
        "birth_pixel": list(iv.birth_pixel),
        "death_pixel": None if iv.death_pixel is None else list(iv.death_pixel),
        "birth_frame": iv.birth_frame,
        "death_frame": iv.death_frame,
        "essential": iv.essential,
    }


def barcode_record(bc: Barcode) -> dict:
    return {
        "dims": {
            "0": [interval_record(iv) for iv in bc.dim0],
            "1": [interval_record(iv) for iv in bc.dim1],
        },
        "essential": {
            "0": [interval_record(iv) for iv in bc.essential0],
            "1": [interval_record(iv) for iv in bc.essential1],
        },
    }


def options_record(filtration: str, construction: str, relative: bool,
                   frame_value=None) -> dict:
    rec = {
        "filtration": filtration,
        "construction": construction,
        "relative": relative,
    }
    if frame_value is not None:
        rec["frame_value"] = frame_value
    return rec
