"""Numerical Wirtinger calculus.

Central-difference Wirtinger derivatives serve as the independent oracle for
every analytic derivative in the package. With ``z = x + iy``::

    df/dz  = (df/dx - i df/dy) / 2
    df/dz* = (df/dx + i df/dy) / 2

For a real-valued ``f`` the two are conjugates of each other and the
second-order expansion reads ``f(z + h) = f(z) + 2 Re(df/dz . h) + q(h) + o(|h|^2)``
where ``q`` is the (real) quadratic term. That real form is the convention
shared by every module here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike

from .errors import NonFiniteValue
from .linalg_core import ComplexArray

FIRST_ORDER_STEP = 1e-6
SECOND_ORDER_STEP = 1e-4


@dataclass(frozen=True)
class WirtingerPair:
    """``d_z`` holds df/dz and ``d_zc`` holds df/dz*, both shaped like the input."""

    d_z: ComplexArray
    d_zc: ComplexArray


def _call(f: Callable, z: np.ndarray) -> complex:
    arg = complex(z) if z.ndim == 0 else z
    val = complex(f(arg))
    if not np.isfinite(val.real) or not np.isfinite(val.imag):
        raise NonFiniteValue(f"function returned non-finite value {val!r}")
    return val


def _partials(f: Callable, z: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Central differences of ``f`` along the real and imaginary axis of each entry."""
    dx = np.empty(z.shape, dtype=np.complex128)
    dy = np.empty(z.shape, dtype=np.complex128)
    flat_dx = dx.reshape(-1)
    flat_dy = dy.reshape(-1)
    base = z.reshape(-1)

    def shifted(j: int, step: complex) -> np.ndarray:
        out = base.copy()
        out[j] += step
        return out.reshape(z.shape)

    for j in range(z.size):
        flat_dx[j] = (_call(f, shifted(j, h)) - _call(f, shifted(j, -h))) / (2 * h)
        flat_dy[j] = (_call(f, shifted(j, 1j * h)) - _call(f, shifted(j, -1j * h))) / (2 * h)
    return dx, dy


def fd_wirtinger(f: Callable, z: ArrayLike, h: float = FIRST_ORDER_STEP) -> WirtingerPair:
    """Wirtinger and conjugate-Wirtinger derivatives of ``f`` at ``z`` by central differences.

    Args:
        f: maps an array shaped like ``z`` (or a complex scalar) to a complex scalar.
        z: evaluation point, any shape.
        h: difference step.

    Raises:
        NonFiniteValue: if any evaluation of ``f`` is not finite.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    z = np.asarray(z, dtype=np.complex128)
    dx, dy = _partials(f, z, h)
    return WirtingerPair(d_z=0.5 * (dx - 1j * dy), d_zc=0.5 * (dx + 1j * dy))


@dataclass(frozen=True)
class CauchyRiemannReport:
    satisfies_cre: bool
    satisfies_ccrc: bool
    cre_residual: float
    ccrc_residual: float


def check_cre(f: Callable, z: complex, h: float = SECOND_ORDER_STEP) -> CauchyRiemannReport:
    """Test the Cauchy-Riemann and conjugate Cauchy-Riemann conditions at ``z``.

    A condition holds when its residual is below ``100 h^2``.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    dx, dy = _partials(f, np.asarray(z, dtype=np.complex128), h)
    ux, vx = float(dx.real), float(dx.imag)
    uy, vy = float(dy.real), float(dy.imag)
    cre = abs(ux - vy) + abs(uy + vx)
    ccrc = abs(ux + vy) + abs(uy - vx)
    bound = 100 * h * h
    return CauchyRiemannReport(cre < bound, ccrc < bound, cre, ccrc)


def taylor2_check(
    f: Callable,
    z: ArrayLike,
    grad: WirtingerPair,
    quad_form: Callable,
    radius: float,
    trials: int,
    seed: int = 0,
) -> float:
    """Max relative second-order Taylor remainder over random directions.

    For ``trials`` directions ``h`` with ``||h|| = radius`` this returns the largest
    ``|f(z+h) - f(z) - 2 Re(sum(grad.d_z * h)) - quad_form(h)| / radius^2``. The
    caller checks that it tends to zero as ``radius`` shrinks.
    """
    if radius <= 0 or trials < 1:
        raise ValueError("radius must be positive and trials at least 1")
    z = np.asarray(z, dtype=np.complex128)
    rng = np.random.default_rng(seed)
    f0 = _call(f, z).real
    worst = 0.0
    for _ in range(trials):
        h = rng.standard_normal(z.shape) + 1j * rng.standard_normal(z.shape)
        h *= radius / np.linalg.norm(h)
        fh = _call(f, z + h).real
        lin = 2.0 * float(np.sum(grad.d_z * h).real)
        quad = float(np.real(quad_form(h)))
        if not np.isfinite(quad):
            raise NonFiniteValue("quadratic term is not finite")
        worst = max(worst, abs(fh - f0 - lin - quad) / radius**2)
    return worst


def _poly_family(rng: np.random.Generator) -> tuple[Callable, Callable]:
    c = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    e = rng.standard_normal(4) + 1j * rng.standard_normal(4)

    def f(z):
        return c[0] + c[1] * z + c[2] * z * z + c[3] * np.conj(z)

    def g(z):
        return e[0] * np.conj(z) + e[1] * z * np.conj(z) + e[2] * z**3 + e[3]

    return f, g


def check_calculus_rules(seed: int, h: float = 1e-5, points: int = 5) -> dict[str, float]:
    """Check linearity, product and chain rules of Wirtinger calculus on random polynomials.

    Returns the max absolute violation of each rule over both derivative slots.
    """
    rng = np.random.default_rng(seed)
    f, g = _poly_family(rng)
    families = [(f, g), (f, np.exp), (np.exp, lambda z: z * z), (lambda z: z * z, np.conj)]
    report = {"linearity": 0.0, "product": 0.0, "chain": 0.0}
    for _ in range(points):
        z = complex(rng.standard_normal(), rng.standard_normal()) * 0.7
        alpha, beta = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        for ff, gg in families:
            df, dg = fd_wirtinger(ff, z, h), fd_wirtinger(gg, z, h)
            fz, gz = complex(ff(z)), complex(gg(z))

            lin = fd_wirtinger(lambda w: alpha * ff(w) + beta * gg(w), z, h)
            v = max(
                abs(lin.d_z - (alpha * df.d_z + beta * dg.d_z)),
                abs(lin.d_zc - (alpha * df.d_zc + beta * dg.d_zc)),
            )
            report["linearity"] = max(report["linearity"], float(v))

            prod = fd_wirtinger(lambda w: ff(w) * gg(w), z, h)
            v = max(
                abs(prod.d_z - (df.d_z * gz + dg.d_z * fz)),
                abs(prod.d_zc - (df.d_zc * gz + dg.d_zc * fz)),
            )
            report["product"] = max(report["product"], float(v))

            # the outer derivatives are evaluated at g(z)
            comp = fd_wirtinger(lambda w: ff(gg(w)), z, h)
            outer = fd_wirtinger(ff, gz, h)
            # d(g^C)/dz = conj(dg/dz*), d(g^C)/dz* = conj(dg/dz)
            rhs_z = outer.d_z * dg.d_z + outer.d_zc * np.conj(dg.d_zc)
            rhs_zc = outer.d_z * dg.d_zc + outer.d_zc * np.conj(dg.d_z)
            v = max(abs(comp.d_z - rhs_z), abs(comp.d_zc - rhs_zc))
            report["chain"] = max(report["chain"], float(v))
    return report
