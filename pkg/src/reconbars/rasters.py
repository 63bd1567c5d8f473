"""Raster I/O and the grayscale rendering conventions.

Formats handled:

* binary PGM (``P5``), maxval 255 or 65535 (16-bit samples big-endian,
  per the format);
* grayscale PNG, 8 or 16 bit, via Pillow (color inputs are converted
  by luma);
* ``.f32`` dumps: raw little-endian float32, row-major, with a JSON
  sidecar at ``<path>.json`` recording dims and provenance.  The dump
  is never clamped; clamping happens only at render time.

Rendering maps are exact by contract: intensity sends [0, 1] affinely
onto 0..255, and signed-error sends [-1, 1] onto 0..255 with zero at
128 (127.5 is not representable in 8 bits, so 50% gray quantizes up).
Both clamp out-of-range values and round halves up.
"""

from __future__ import annotations

import json
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image as PILImage, UnidentifiedImageError

from .errors import CorruptFileError, OverwriteRefusedError, UnsupportedFormatError
from .kspace import normalize_image


class RenderMode(str, Enum):
    INTENSITY = "intensity"
    SIGNED_ERROR = "signed-error"


def render(values: np.ndarray, mode: RenderMode) -> np.ndarray:
    """Render a real-valued map to an 8-bit grayscale raster.

    ``INTENSITY``: clamp to [0, 1], v -> round(255 v).
    ``SIGNED_ERROR``: clamp to [-1, 1], v -> round(127.5 (v + 1)),
    so -1 -> 0 (black), 0 -> 128 (50% gray), +1 -> 255 (white).
    Halves round up.
    """
    values = np.asarray(values, dtype=np.float64)
    mode = RenderMode(mode)
    if mode is RenderMode.INTENSITY:
        scaled = np.clip(values, 0.0, 1.0) * 255.0
    else:
        scaled = (np.clip(values, -1.0, 1.0) + 1.0) * 127.5
    return np.minimum(np.floor(scaled + 0.5), 255.0).astype(np.uint8)


def _check_clobber(path: Path, force: bool):
    if path.exists() and not force:
        raise OverwriteRefusedError(f"{path} exists; pass force=True to overwrite")


def save_pgm(raster: np.ndarray, path, *, force: bool = False):
    """Write an 8-bit (maxval 255) or 16-bit (maxval 65535) binary PGM."""
    path = Path(path)
    _check_clobber(path, force)
    raster = np.asarray(raster)
    if raster.ndim != 2:
        raise UnsupportedFormatError(f"PGM needs a 2-D raster, got shape {raster.shape}")
    if raster.dtype == np.uint8:
        maxval, payload = 255, raster.tobytes(order="C")
    elif raster.dtype == np.uint16:
        maxval, payload = 65535, raster.astype(">u2").tobytes(order="C")
    else:
        raise UnsupportedFormatError(f"PGM rasters must be uint8 or uint16, got {raster.dtype}")
    header = f"P5\n{raster.shape[1]} {raster.shape[0]}\n{maxval}\n".encode("ascii")
    path.write_bytes(header + payload)


def _parse_pgm(data: bytes, path: Path) -> np.ndarray:
    # Header: magic, width, height, maxval as whitespace-separated
    # tokens, '#' comments allowed, then one whitespace byte and the
    # raster.
    if data[:2] != b"P5":
        raise UnsupportedFormatError(f"{path}: not a binary PGM")
    pos = 2
    tokens = []
    while len(tokens) < 3:
        if pos >= len(data):
            raise CorruptFileError(f"{path}: truncated PGM header")
        c = data[pos : pos + 1]
        if c == b"#":
            pos = data.find(b"\n", pos)
            if pos == -1:
                raise CorruptFileError(f"{path}: unterminated PGM comment")
            pos += 1
        elif c.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end : end + 1].isspace():
                end += 1
            tokens.append(data[pos:end])
            pos = end
    pos += 1  # single whitespace after maxval
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise CorruptFileError(f"{path}: malformed PGM header") from exc
    if maxval <= 0 or maxval > 65535:
        raise UnsupportedFormatError(f"{path}: unsupported PGM maxval {maxval}")
    dtype = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
    expected = width * height * dtype.itemsize
    payload = data[pos : pos + expected]
    if len(payload) != expected:
        raise CorruptFileError(
            f"{path}: PGM payload has {len(payload)} bytes, expected {expected}"
        )
    return np.frombuffer(payload, dtype=dtype).reshape(height, width).astype(np.float64)


def _load_png(path: Path) -> np.ndarray:
    try:
        with PILImage.open(path) as img:
            img.load()
            if img.mode in ("I", "I;16", "I;16B", "I;16L"):
                return np.asarray(img, dtype=np.float64)
            if img.mode != "L":
                img = img.convert("L")  # color collapses to luma
            return np.asarray(img, dtype=np.float64)
    except UnidentifiedImageError as exc:
        raise CorruptFileError(f"{path}: cannot decode PNG") from exc
    except OSError as exc:
        raise CorruptFileError(f"{path}: cannot decode PNG ({exc})") from exc


def load_image(path) -> np.ndarray:
    """Load a grayscale image and normalize it to [0, 1].

    Accepts binary PGM (8/16-bit) and PNG (8/16-bit grayscale; color is
    converted by luma).  The full stored dynamic range feeds the
    normalization; a file whose pixels are all equal comes back as
    zeros.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such image: {path}")
    data = path.read_bytes()
    if data[:2] == b"P5":
        pixels = _parse_pgm(data, path)
    elif data[:8] == b"\x89PNG\r\n\x1a\n":
        pixels = _load_png(path)
    else:
        raise UnsupportedFormatError(
            f"{path}: unrecognized format (need binary PGM or PNG)"
        )
    return normalize_image(pixels)


def save_image(raster: np.ndarray, path, *, force: bool = False):
    """Write an 8/16-bit raster as PGM or PNG, chosen by extension."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        save_pgm(raster, path, force=force)
    elif path.suffix.lower() == ".png":
        _check_clobber(path, force)
        raster = np.asarray(raster)
        if raster.dtype not in (np.uint8, np.uint16):
            raise UnsupportedFormatError(
                f"PNG rasters must be uint8 or uint16, got {raster.dtype}"
            )
        PILImage.fromarray(raster).save(path)  # dtype picks L vs I;16
    else:
        raise UnsupportedFormatError(f"{path}: cannot infer format from extension")


def sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def save_map(
    values: np.ndarray,
    path,
    with_sidecar: bool = True,
    *,
    meta: dict | None = None,
    force: bool = False,
) -> Path:
    """Dump a real-valued map as raw little-endian float32, row-major.

    The JSON sidecar lands at ``<path>.json`` and records the dims plus
    any caller-supplied provenance (seeds, estimator parameters, ...).
    Existing files are refused unless ``force`` is set.
    """
    path = Path(path)
    _check_clobber(path, force)
    values = np.asarray(values)
    if values.ndim != 2:
        raise UnsupportedFormatError(f"map dumps are 2-D, got shape {values.shape}")
    path.write_bytes(values.astype("<f4").tobytes(order="C"))
    if with_sidecar:
        side = sidecar_path(path)
        _check_clobber(side, force)
        doc = {
            "dims": [int(values.shape[0]), int(values.shape[1])],
            "dtype": "float32",
            "byte_order": "little",
            "layout": "row-major",
        }
        if meta:
            doc.update(meta)
        side.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def load_map(path) -> tuple[np.ndarray, dict]:
    """Read a ``.f32`` dump back, bit for bit, using its sidecar's dims."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such map: {path}")
    side = sidecar_path(path)
    if not side.exists():
        raise CorruptFileError(f"{path}: missing sidecar {side}")
    meta = json.loads(side.read_text())
    rows, cols = (int(v) for v in meta["dims"])
    payload = path.read_bytes()
    expected = rows * cols * 4
    if len(payload) != expected:
        raise CorruptFileError(
            f"{path}: payload has {len(payload)} bytes, sidecar dims imply {expected}"
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(rows, cols)
    return values.copy(), meta
