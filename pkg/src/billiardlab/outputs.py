"""Deterministic artifact writers: CSV tables, PGM/PNG heatmaps, JSON manifests.

All writers are atomic (temp file in the target directory, then rename) so a
crashed run never leaves partial outputs.  Floats are printed with 17
significant digits, which round-trips IEEE doubles exactly; identical inputs
therefore produce bit-identical files.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile

import numpy as np

__all__ = [
    "format_float",
    "write_csv",
    "write_json",
    "write_pgm",
    "write_png",
    "heatmap_image",
    "write_heatmap",
]


def format_float(x):
    return f"{float(x):.17g}"


def _atomic_write(path, data: bytes):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows):
    """RFC-4180-style CSV ('.' decimal, 17 significant digits for floats)."""
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    _atomic_write(path, buf.getvalue().encode())


def write_json(path, obj):
    _atomic_write(path, (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode())


def heatmap_image(field, interior=None, overlay=None):
    """8-bit grayscale image of a nonnegative field (row-major, y downward).

    ``overlay`` marks pixels (e.g. a control-region mask) at full white.
    """
    f = np.asarray(field, dtype=float)
    vmax = float(f.max())
    img = np.zeros(f.shape, dtype=np.uint8)
    if vmax > 0:
        img = np.clip(np.rint(254.0 * f / vmax), 0, 254).astype(np.uint8)
    if interior is not None:
        img = np.where(interior, img, 0).astype(np.uint8)
    if overlay is not None:
        img = np.where(overlay & (img < 32), 255, img).astype(np.uint8)
    # field is indexed [ix, iy]; image rows run top-down in y
    return np.flipud(img.T)


def write_pgm(path, img):
    """Binary PGM (P5), 8-bit, dimensions in the header."""
    img = np.asarray(img, dtype=np.uint8)
    h, w = img.shape
    _atomic_write(path, f"P5\n{w} {h}\n255\n".encode() + img.tobytes())


def write_png(path, img):
    from PIL import Image
    import io

    buf = io.BytesIO()
    Image.fromarray(np.asarray(img, dtype=np.uint8), mode="L").save(buf, format="PNG")
    _atomic_write(path, buf.getvalue())


def write_heatmap(basepath, field, interior=None, overlay=None, formats=("pgm", "png")):
    img = heatmap_image(field, interior=interior, overlay=overlay)
    paths = []
    if "pgm" in formats:
        write_pgm(basepath + ".pgm", img)
        paths.append(basepath + ".pgm")
    if "png" in formats:
        write_png(basepath + ".png", img)
        paths.append(basepath + ".png")
    return paths
