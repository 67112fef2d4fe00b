"""Exact survival amplitude by the convergent double Mittag-Leffler series.

G(t) = sum_{n,k} (-1)^n C(n,k) z_alpha^k z0^(n-k) t^(3n - alpha k)
       * [ E^{n+1}_{2, 3n-alpha k+1}(-z1 t^2) - a^2 t^2 E^{n+1}_{2, 3n-alpha k+3}(-z1 t^2) ]

and its z1 = 0 specialization (critical coupling), a plain power series with
Gamma-ratio coefficients.  The series converges for every t, but in fixed
precision the alternating shells grow before they decay, so evaluation is
only trusted inside an empirically determined time window (converged_domain).

All internal computation is done in units with a = 1 (t -> a t, constants
rescaled by their powers of a), which keeps the shell magnitudes comparable
across configurations.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import SeriesError
from .reservoir import ReservoirParams
from .sample import GSample
from .specfun import MLParams, mittag_leffler, reciprocal_gamma

_EPS = np.finfo(float).eps

#: shells contributing below tol/10 this many times in a row end the sum
_QUIET_SHELLS = 3
_MAX_SHELLS = 220


def _rescaled(params: ReservoirParams):
    """Constants in a = 1 units: (z0^, z_alpha^, z1^, t-scale a)."""
    a, al = params.a, params.alpha
    return (
        params.z0 / a**3,
        params.z_alpha / a ** (3.0 - al),
        params.z1 / a**2,
        a,
    )


def g_series(t: float, params: ReservoirParams, tol: float = 1e-10) -> GSample:
    """Evaluate the double series at t >= 0 to absolute tolerance tol.

    Raises SeriesError on term-budget exhaustion or when the cancellation
    guard trips (largest intermediate shell exceeding sum/tol), which is the
    expected outcome beyond the empirical convergence window -- callers
    should route such times to another method.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    if t == 0.0:
        return GSample(t=0.0, value=1.0 + 0.0j, error_bound=0.0, method="series")

    z0h, zah, z1h, a = _rescaled(params)
    th = a * t
    alpha = params.alpha
    w = -z1h * th * th

    total = 0.0 + 0.0j
    err = 0.0
    peak_shell = 0.0
    quiet = 0
    for n in range(_MAX_SHELLS):
        shell = 0.0 + 0.0j
        shell_err = 0.0
        for k in range(n + 1):
            beta = 3.0 * n - alpha * k
            c = (-1.0) ** n * math.comb(n, k) * zah**k * z0h ** (n - k) * th**beta
            if c == 0.0:
                continue
            # each inner evaluation only needs to be accurate relative to the
            # coefficient it is multiplied with
            ml_tol = min(1e-16, tol * 1e-2 / max(1.0, abs(c)))
            e1 = mittag_leffler(MLParams(2.0, beta + 1.0, n + 1.0), w, tol=ml_tol)
            e2 = mittag_leffler(MLParams(2.0, beta + 3.0, n + 1.0), w, tol=ml_tol)
            shell += c * (e1.value - th * th * e2.value)
            shell_err += abs(c) * (e1.error_bound + th * th * e2.error_bound)
        if not (math.isfinite(shell.real) and math.isfinite(shell.imag)):
            raise SeriesError(f"shell overflow at t={t:g} (n={n})")
        total += shell
        err += shell_err
        peak_shell = max(peak_shell, abs(shell))
        if peak_shell * _EPS * 8.0 > tol:
            raise SeriesError(
                f"loss of significance at t={t:g}: rounding floor of peak shell "
                f"{peak_shell:.3g} exceeds tolerance {tol:.3g}"
            )
        if abs(shell) < tol / 10.0:
            quiet += 1
            if quiet >= _QUIET_SHELLS:
                break
        else:
            quiet = 0
    else:
        raise SeriesError(f"shell budget exhausted at t={t:g}")

    err += peak_shell * _EPS * 8.0 + abs(shell) * _QUIET_SHELLS
    if err > tol:
        raise SeriesError(f"achieved bound {err:.3g} above tolerance {tol:.3g} at t={t:g}")
    return GSample(t=t, value=total, error_bound=err, method="series")


def g_star_series(t: float, params: ReservoirParams, tol: float = 1e-10) -> GSample:
    """Critical-coupling power series (valid only when z1 vanishes).

    G*(t) = sum (-1)^n C(n,k) z_alpha^k z0^(n-k) t^(3n-alpha k)
            / Gamma(3n - alpha k + 1)
            * {1 - a^2 t^2 / ((3n - alpha k + 1)(3n - alpha k + 2))}
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    z0h, zah, z1h, a = _rescaled(params)
    if abs(z1h) > 1e-12:
        raise SeriesError(
            f"critical-coupling series requires z1 = 0; got rescaled z1 = {z1h:.3g} "
            f"(coupling A != A*)"
        )
    if t == 0.0:
        return GSample(t=0.0, value=1.0 + 0.0j, error_bound=0.0, method="star_series")

    th = a * t
    alpha = params.alpha
    total = 0.0 + 0.0j
    peak_shell = 0.0
    quiet = 0
    last = 0.0
    for n in range(_MAX_SHELLS):
        shell = 0.0 + 0.0j
        for k in range(n + 1):
            beta = 3.0 * n - alpha * k
            c = (-1.0) ** n * math.comb(n, k) * zah**k * z0h ** (n - k) * th**beta
            bracket = 1.0 - th * th / ((beta + 1.0) * (beta + 2.0))
            shell += c * complex(reciprocal_gamma(beta + 1.0)) * bracket
        if not (math.isfinite(shell.real) and math.isfinite(shell.imag)):
            raise SeriesError(f"shell overflow at t={t:g} (n={n})")
        total += shell
        last = abs(shell)
        peak_shell = max(peak_shell, last)
        if peak_shell * _EPS * 8.0 > tol:
            raise SeriesError(
                f"loss of significance at t={t:g}: rounding floor of peak shell "
                f"{peak_shell:.3g} exceeds tolerance {tol:.3g}"
            )
        if last < tol / 10.0:
            quiet += 1
            if quiet >= _QUIET_SHELLS:
                break
        else:
            quiet = 0
    else:
        raise SeriesError(f"shell budget exhausted at t={t:g}")
    err = peak_shell * _EPS * 8.0 + last * _QUIET_SHELLS
    return GSample(t=t, value=total, error_bound=err, method="star_series")


@lru_cache(maxsize=64)
def converged_domain(params: ReservoirParams, tol: float = 1e-8) -> float:
    """Largest probe time at which the double series meets tol and agrees
    with the Laplace-inversion oracle to 10 tol.

    Probes a fixed logarithmic grid (in a = 1 units) and returns the last
    point before the first failure; 0.0 when even the smallest probe fails.
    The window shrinks as tol tightens, so acceptance in tol is monotone.
    """
    from .oracles import laplace_invert  # local import keeps oracles one-way independent

    a = params.a
    probes = np.geomspace(0.05, 64.0, 44) / a
    t_ok = 0.0
    for t in probes:
        try:
            s = g_series(float(t), params, tol=tol)
        except SeriesError:
            break
        ref = laplace_invert(params, float(t), tol=min(1e-9, tol))
        if abs(s.value - ref.value) > 10.0 * tol:
            break
        t_ok = float(t)
    return t_ok
