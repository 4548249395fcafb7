"""Image and text file formats used by the pipeline."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .spatial import GridSpec, ObjectField


class FormatError(ValueError):
    """A file does not follow the expected layout."""


def _p2_tokens(text: str) -> list[str]:
    tokens = []
    for line in text.splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    return tokens


def parse_p2(text: str) -> tuple[np.ndarray, int]:
    """Parse an ASCII graymap; returns (integer array, maxval)."""
    tokens = _p2_tokens(text)
    if not tokens or tokens[0] != "P2":
        raise FormatError("missing P2 magic number")
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
        data = [int(t) for t in tokens[4:]]
    except ValueError as exc:
        raise FormatError(f"malformed P2 header or data: {exc}") from None
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise FormatError(f"bad P2 header: {width}x{height}, maxval {maxval}")
    if len(data) != width * height:
        raise FormatError(f"expected {width * height} samples, found {len(data)}")
    arr = np.array(data, dtype=np.int64).reshape(height, width)
    if arr.min() < 0 or arr.max() > maxval:
        raise FormatError("sample outside [0, maxval]")
    return arr, maxval


def read_p2(path: str | Path) -> tuple[np.ndarray, int]:
    return parse_p2(Path(path).read_text())


def format_p2(values: np.ndarray, maxval: int = 255, comment: str | None = None) -> str:
    values = np.asarray(values)
    if values.ndim != 2:
        raise ValueError("graymap must be 2-D")
    height, width = values.shape
    lines = ["P2"]
    if comment:
        lines.append(f"# {comment}")
    lines.append(f"{width} {height}")
    lines.append(str(maxval))
    for row in values.astype(np.int64):
        lines.append(" ".join(str(v) for v in row))
    return "\n".join(lines) + "\n"


def write_p2(path: str | Path, values: np.ndarray, maxval: int = 255) -> None:
    Path(path).write_text(format_p2(values, maxval))


def quantize(image: np.ndarray, maxval: int = 255) -> tuple[np.ndarray, float]:
    """Integer levels and the float value of one level (0 for an all-zero image)."""
    image = np.asarray(image, dtype=float)
    if np.any(image < 0):
        raise ValueError("graymaps hold nonnegative values")
    peak = float(image.max()) if image.size else 0.0
    scale = peak / maxval if peak > 0 else 0.0
    levels = np.zeros(image.shape, dtype=np.int64) if scale == 0 else np.rint(image / scale).astype(np.int64)
    return levels, scale


def save_gray(path: str | Path, image: np.ndarray, maxval: int = 65535) -> None:
    """P2 graymap plus ``<path>.scale`` holding the float value of one gray level."""
    levels, scale = quantize(image, maxval)
    write_p2(path, levels, maxval)
    write_keyvalue(Path(str(path) + ".scale"), {"scale": scale, "maxval": maxval})


def load_gray(path: str | Path) -> np.ndarray:
    levels, maxval = read_p2(path)
    sidecar = Path(str(path) + ".scale")
    scale = float(read_keyvalue(sidecar)["scale"]) if sidecar.exists() else 1.0 / maxval
    return levels * scale


def write_csv_array(path: str | Path, values: np.ndarray) -> None:
    """Float image dump with a header row c0, c1, ..."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"c{j}" for j in range(values.shape[1])])
        for row in values:
            w.writerow([repr(float(v)) for v in row])


def read_csv_array(path: str | Path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise FormatError("CSV holds no data rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows[1:]):
        raise FormatError("non-rectangular CSV data")
    return np.array([[float(v) for v in r] for r in rows[1:]])


def write_csv_rows(path: str | Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def write_complex_csv(path: str | Path, values: np.ndarray) -> None:
    """Complex image as CSV: each row alternates re, im per column."""
    values = np.asarray(values, dtype=complex)
    header = [f"{part}{j}" for j in range(values.shape[1]) for part in ("re", "im")]
    rows = [[x for z in row for x in (float(z.real), float(z.imag))] for row in values]
    write_csv_rows(path, header, rows)


def read_complex_csv(path: str | Path) -> np.ndarray:
    data = read_csv_array(path)
    if data.shape[1] % 2:
        raise FormatError("complex CSV needs an even number of columns")
    return data[:, 0::2] + 1j * data[:, 1::2]


def resample_nearest(values: np.ndarray, n: int) -> np.ndarray:
    """Stretch an image onto an n x n grid by nearest-neighbor lookup."""
    h, w = values.shape
    rows = np.minimum((np.arange(n) + 0.5) * h / n, h - 1).astype(int)
    cols = np.minimum((np.arange(n) + 0.5) * w / n, w - 1).astype(int)
    return values[np.ix_(rows, cols)]


def load_object(path: str | Path, grid: GridSpec) -> ObjectField:
    """Object transmission from a P2 graymap (real, [0,1]) or a complex CSV.

    The image is stretched over the grid's full field of view.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if path.suffix.lower() == ".csv":
        values = read_complex_csv(path)
        if np.any(np.abs(values) > 1 + 1e-12):
            raise FormatError("complex transmission magnitude exceeds 1")
    else:
        levels, maxval = read_p2(path)
        values = levels / maxval
    return ObjectField(grid, resample_nearest(values, grid.n))


def save_object(path: str | Path, obj: ObjectField, maxval: int = 255) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        write_complex_csv(path, obj.values)
    else:
        mags = np.abs(obj.values)
        write_p2(path, np.rint(np.clip(mags, 0, 1) * maxval).astype(np.int64), maxval)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def format_keyvalue(pairs: dict) -> str:
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in pairs.items())


def write_keyvalue(path: str | Path, pairs: dict) -> None:
    Path(path).write_text(format_keyvalue(pairs))


def parse_keyvalue(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise FormatError(f"line {lineno}: empty key")
        if key in out:
            raise FormatError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_keyvalue(path: str | Path) -> dict[str, str]:
    return parse_keyvalue(Path(path).read_text())

