"""Squared-modulus surfaces of nine analytic functions and a minimum-modulus spot check.

A real function can have a strict local minimum with a nonzero value; once the
same formula is read as an analytic function of a complex variable, that point
turns into a saddle of ``|f|^2``. The spot check samples a small disk around a
real-axis minimizer and reports whether some nearby complex point is lower.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError

DEFAULT_RANGE = (-3.0, 3.0)
DEFAULT_RESOLUTION = 201
LOG_MIN_RE = 0.05
ESCAPE_MARGIN = 1e-12
MIN_VALUE = 1e-6


def _sigmoid(z):
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty_like(z)
    pos = z.real >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _tanh(z):
    # the complex routine wobbles by an ulp near saturation; the real one is monotone
    z = np.asarray(z, dtype=np.complex128)
    out = np.tanh(z)
    axis = z.imag == 0
    out[axis] = np.tanh(z.real[axis])
    return out


def _log(z):
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z.real <= LOG_MIN_RE - 1e-15):
        raise DomainError(f"log is sampled only where Re z > {LOG_MIN_RE}")
    return np.log(z)


@dataclass(frozen=True)
class GalleryFunction:
    id: str
    expression: str
    evaluator: Callable
    min_re: Optional[float] = None  # sampled domain is Re z >= min_re
    real_coefficients: bool = True

    def __call__(self, z):
        return self.evaluator(np.asarray(z, dtype=np.complex128))


FUNCTIONS: dict[str, GalleryFunction] = {
    f.id: f
    for f in [
        GalleryFunction("x_sin_x", "x*sin(x)", lambda z: z * np.sin(z)),
        GalleryFunction("cubic", "x^3-2x+3", lambda z: z**3 - 2 * z + 3),
        GalleryFunction("cos_plus_2", "cos(x)+2", lambda z: np.cos(z) + 2),
        GalleryFunction("quartic", "-x^2(x-1)(x+2)+1", lambda z: -(z**2) * (z - 1) * (z + 2) + 1),
        GalleryFunction("square_plus_2", "x^2+2", lambda z: z**2 + 2),
        GalleryFunction("tanh_squared", "tanh(x)^2", lambda z: _tanh(z) ** 2),
        GalleryFunction("x_exp", "2x*exp(x)+1", lambda z: 2 * z * np.exp(z) + 1),
        GalleryFunction("x_log", "3x*log(x)+1", lambda z: 3 * z * _log(z) + 1, min_re=LOG_MIN_RE),
        GalleryFunction("x_sigmoid", "9x*sigmoid(x)+3", lambda z: 9 * z * _sigmoid(z) + 3),
    ]
}


def get_function(fid: str) -> GalleryFunction:
    """Look up a function by id or by its expression string."""
    if fid in FUNCTIONS:
        return FUNCTIONS[fid]
    for f in FUNCTIONS.values():
        if f.expression == fid:
            return f
    raise KeyError(f"unknown gallery function {fid!r}; choose from {sorted(FUNCTIONS)}")


def default_re_range(fn: GalleryFunction) -> tuple[float, float]:
    lo, hi = DEFAULT_RANGE
    return (max(lo, fn.min_re), hi) if fn.min_re is not None else (lo, hi)


@dataclass(frozen=True)
class SurfaceGrid:
    re_axis: np.ndarray
    im_axis: np.ndarray
    values: np.ndarray  # values[i, j] = |f(re_axis[j] + i im_axis[i])|^2

    def __post_init__(self):
        re_axis = np.asarray(self.re_axis, dtype=float).reshape(-1)
        im_axis = np.asarray(self.im_axis, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=float).reshape(im_axis.size, re_axis.size)
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("grid values must be finite and nonnegative")
        object.__setattr__(self, "re_axis", re_axis)
        object.__setattr__(self, "im_axis", im_axis)
        object.__setattr__(self, "values", values)

    def __eq__(self, other):
        if not isinstance(other, SurfaceGrid):
            return NotImplemented
        return all(
            a.shape == b.shape and np.array_equal(a, b)
            for a, b in [(self.re_axis, other.re_axis), (self.im_axis, other.im_axis), (self.values, other.values)]
        )


def _mod2(fn: GalleryFunction, z: np.ndarray) -> np.ndarray:
    if fn.min_re is not None and np.any(z.real < fn.min_re - 1e-15):
        raise DomainError(f"{fn.id} is sampled only where Re z >= {fn.min_re}")
    with np.errstate(all="ignore"):
        w = fn(z)
    out = w.real**2 + w.imag**2
    if not np.all(np.isfinite(out)):
        raise DomainError(f"{fn.id} produced non-finite values")
    return out


def sample_surface(
    fn: GalleryFunction,
    re_range: tuple[float, float],
    im_range: tuple[float, float],
    resolution: int = DEFAULT_RESOLUTION,
) -> SurfaceGrid:
    """Evaluate ``|f|^2`` on a ``resolution x resolution`` grid.

    Raises:
        DomainError: if the window leaves the function's domain or a value is not finite.
    """
    for lo, hi in (re_range, im_range):
        if not lo < hi:
            raise ValueError(f"empty range [{lo}, {hi}]")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    re_axis = np.linspace(*re_range, resolution)
    im_axis = np.linspace(*im_range, resolution)
    Z = re_axis[None, :] + 1j * im_axis[:, None]
    return SurfaceGrid(re_axis, im_axis, _mod2(fn, Z))


def sample_real(fn: GalleryFunction, re_range: tuple[float, float], resolution: int = DEFAULT_RESOLUTION) -> SurfaceGrid:
    """The restriction of ``|f|^2`` to the real axis, as a one-row grid."""
    if not re_range[0] < re_range[1]:
        raise ValueError(f"empty range {re_range}")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    re_axis = np.linspace(*re_range, resolution)
    return SurfaceGrid(re_axis, np.zeros(1), _mod2(fn, re_axis.astype(np.complex128))[None, :])


def real_minima(
    fn: GalleryFunction,
    re_range: Optional[tuple[float, float]] = None,
    points: int = 2001,
    min_value: float = MIN_VALUE,
) -> list[tuple[float, float]]:
    """Strict interior local minimizers of ``|f(x)|^2`` on a real interval with value > ``min_value``.

    Candidates come from a uniform grid and are refined by a bounded scalar search.
    Returns ``(x, value)`` pairs.
    """
    lo, hi = re_range or default_re_range(fn)
    xs = np.linspace(lo, hi, points)
    g = _mod2(fn, xs.astype(np.complex128))
    found = []
    for i in range(1, points - 1):
        if g[i] < g[i - 1] and g[i] < g[i + 1]:
            res = minimize_scalar(
                lambda t: float(_mod2(fn, np.array([t], dtype=np.complex128))[0]),
                bounds=(xs[i - 1], xs[i + 1]),
                method="bounded",
                options={"xatol": 1e-12},
            )
            if res.fun > min_value:
                found.append((float(res.x), float(res.fun)))
    return found


@dataclass(frozen=True)
class SpotCheck:
    center: complex
    center_value: float
    min_on_disk: float
    argmin: complex
    escapes: bool


def mmp_spot_check(fn: GalleryFunction, z0: complex, radius: float = 0.1, samples: int = 10_000) -> SpotCheck:
    """Sample ``|f|^2`` on the closed disk of ``radius`` around ``z0`` on a sunflower lattice.

    ``escapes`` is true when some sample lies more than 1e-12 below the center value.

    Raises:
        DomainError: if ``f(z0) = 0`` or the disk leaves the domain.
    """
    if radius <= 0 or samples < 1:
        raise ValueError("radius must be positive and samples at least 1")
    z0 = complex(z0)
    center = float(_mod2(fn, np.array([z0]))[0])
    if center == 0.0:
        raise DomainError(f"{fn.id} vanishes at {z0}; the spot check needs f(z0) != 0")
    j = np.arange(samples)
    golden = np.pi * (3.0 - np.sqrt(5.0))
    z = z0 + radius * np.sqrt((j + 0.5) / samples) * np.exp(1j * golden * j)
    vals = _mod2(fn, z)
    idx = int(np.argmin(vals))
    low = float(vals[idx])
    return SpotCheck(z0, center, low, complex(z[idx]), bool(low < center - ESCAPE_MARGIN))


# -------------------------------------------------------------------------- output


def _fmt(x: float) -> str:
    return "%.17g" % x


def grid_to_csv(grid: SurfaceGrid) -> str:
    lines = ["re,im,mod2"]
    for i, im in enumerate(grid.im_axis):
        for j, re in enumerate(grid.re_axis):
            lines.append(f"{_fmt(re)},{_fmt(im)},{_fmt(grid.values[i, j])}")
    return "\n".join(lines) + "\n"


def grid_to_json(grid: SurfaceGrid) -> str:
    def arr(a):
        return "[" + ",".join(_fmt(x) for x in a) + "]"

    rows = ",".join(arr(r) for r in grid.values)
    return f'{{"re_axis":{arr(grid.re_axis)},"im_axis":{arr(grid.im_axis)},"values":[{rows}]}}\n'


def grid_from_json(text: str) -> SurfaceGrid:
    obj = json.loads(text)
    return SurfaceGrid(np.array(obj["re_axis"]), np.array(obj["im_axis"]), np.array(obj["values"]))


def emit_grid(grid: SurfaceGrid, fmt: str, path: Union[str, Path, io.TextIOBase]) -> None:
    """Write a grid as CSV (``re,im,mod2`` rows, imaginary index outer) or JSON.

    Numbers use 17 significant digits, so output bytes are fixed by the grid.
    ``OSError`` from the file system propagates.
    """
    if fmt == "csv":
        text = grid_to_csv(grid)
    elif fmt == "json":
        text = grid_to_json(grid)
    else:
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    if hasattr(path, "write"):
        path.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def gallery_minima_report(
    radius: float = 0.1, samples: int = 10_000, extra: Optional[dict[str, list[float]]] = None
) -> list[dict]:
    """Spot-check every detected real-axis minimizer of every function.

    ``extra`` adds known minimizers outside the default window, keyed by function id.
    By default ``cos(x)+2`` is also checked at ``pi``.
    """
    extra = {"cos_plus_2": [float(np.pi)]} if extra is None else extra
    out = []
    for fn in FUNCTIONS.values():
        points = [x for x, _ in real_minima(fn)] + list(extra.get(fn.id, []))
        for x in points:
            chk = mmp_spot_check(fn, x, radius, samples)
            out.append({
                "function": fn.id,
                "x": x,
                "center_value": chk.center_value,
                "min_on_disk": chk.min_on_disk,
                "escapes": chk.escapes,
            })
    return out
