"""Long-time inverse-power-law structure of the decaying part of G.

The branch-cut (continuum) component of the amplitude decays as

    G_cut(t) ~ -D t^(-1-alpha),   D = -a^2 z_alpha / (z0^2 Gamma(-alpha))
             = i alpha a^(2(1-alpha)) e^(-i pi alpha/2) tan(pi alpha/2) / (pi A Gamma(1-alpha)),

with higher corrections obtained by term-by-term inversion of the small-u
expansion of the transform.  Every monomial of the triple sum (n, k, j)
carries inverse power 1 + alpha(n-k) + k + 2j or that plus 2; monomials are
grouped into shells by total inverse power, ascending.

These formulas describe the continuum part only; the full amplitude also
contains the undamped bound-state oscillation (see oracles.bound_state), so
|G| itself does not follow the power law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .reservoir import ReservoirConfig, ReservoirParams
from .sample import GSample
from .specfun import reciprocal_gamma

__all__ = [
    "AsymptoticExpansion", "d_alpha", "g_asymptotic", "timescale_tau",
    "tail_exponent_prediction", "asymptotic_expansion",
]

_BUCKET_DECIMALS = 9


@dataclass(frozen=True)
class AsymptoticExpansion:
    """Leading term and correction monomials of the continuum tail.

    leading_coeff multiplies t**leading_power; correction_terms hold
    (coefficient, power) pairs with strictly more negative powers, sorted.
    """

    leading_coeff: complex
    leading_power: float
    correction_terms: tuple[tuple[complex, float], ...]


def d_alpha(params: ReservoirParams) -> complex:
    """Tail coefficient D of the continuum decay -D t^(-1-alpha)."""
    a, alpha = params.a, params.alpha
    return alpha * a * a * params.z_alpha / (
        params.z0**2 * math.gamma(1.0 - alpha)
    )


def timescale_tau(params: ReservoirParams) -> float:
    """Crossover time beyond which the continuum follows its power law:
    max{1, |3/z0|^(1/3), |3 z_alpha/z0|^(1/alpha), 3|z1/z0|}."""
    return params.tau


def tail_exponent_prediction(cfg: ReservoirConfig) -> tuple[float, float]:
    """(population power, coherence power) of the continuum-driven decay:
    the decaying parts of rho11 and |rho10| fall as t^(-2-2alpha), t^(-1-alpha)."""
    return (-2.0 - 2.0 * cfg.alpha, -1.0 - cfg.alpha)


def _monomials(params: ReservoirParams, n_max: int):
    """All tail monomials (power, coefficient) from the triple sum, n <= n_max.

    Term (n,k,j) is the multinomial piece of z0^(-n-1) (z_alpha u^alpha
    + z1 u + u^3)^n with n-k powers of z_alpha, k-j of z1 and j of u^3:
    coefficient (-1)^n n! z0^(-n-1) z_alpha^(n-k) z1^(k-j)
    / (j! (n-k)! (k-j)!) multiplying u^(alpha(n-k)+k+2j) (u^2 - a^2); its two
    inversion monomials are t^(-3-s)/Gamma(-s-2) and -a^2 t^(-1-s)/Gamma(-s).
    Monomials whose reciprocal Gamma vanishes (s integer) drop out exactly.
    """
    z0, za, z1 = params.z0, params.z_alpha, params.z1
    a2 = params.a**2
    alpha = params.alpha
    buckets: dict[float, complex] = {}
    for n in range(1, n_max + 1):
        for k in range(n + 1):
            for j in range(k + 1):
                s = alpha * (n - k) + k + 2.0 * j
                base = ((-1.0) ** n * math.factorial(n) * z0 ** (-n - 1)
                        * za ** (n - k) * (z1 ** (k - j) if k != j else 1.0)
                        / (math.factorial(j) * math.factorial(n - k) * math.factorial(k - j)))
                rg_lo = reciprocal_gamma(-s)
                rg_hi = reciprocal_gamma(-s - 2.0)
                if rg_lo != 0.0:
                    p = round(1.0 + s, _BUCKET_DECIMALS)
                    buckets[p] = buckets.get(p, 0.0) - base * a2 * rg_lo
                if rg_hi != 0.0:
                    p = round(3.0 + s, _BUCKET_DECIMALS)
                    buckets[p] = buckets.get(p, 0.0) + base * rg_hi
    return sorted(buckets.items())


def _shells(params: ReservoirParams, n_shells: int):
    """First 2 + n_shells complete shells (a bucket at power p receives
    contributions from n up to (p-1)/alpha, so enumeration depth is grown
    until the kept buckets are saturated)."""
    n_max = 24
    while True:
        mono = _monomials(params, n_max)
        kept = mono[: n_shells + 2]
        deepest = (kept[-1][0] - 1.0) / params.alpha
        if deepest <= n_max or n_max >= 64:
            return kept
        n_max = int(math.ceil(deepest)) + 2


def asymptotic_expansion(params: ReservoirParams, n_shells: int = 6) -> AsymptoticExpansion:
    """First 1 + n_shells monomial shells of the continuum tail."""
    if n_shells < 0:
        raise ValueError("n_shells must be >= 0")
    kept = _shells(params, n_shells)[: n_shells + 1]
    lead_p, lead_c = kept[0]
    return AsymptoticExpansion(
        leading_coeff=lead_c,
        leading_power=-lead_p,
        correction_terms=tuple((c, -p) for p, c in kept[1:]),
    )


def g_asymptotic(t: float, params: ReservoirParams, n_shells: int = 0) -> GSample:
    """Continuum tail evaluated from its inverse-power shells at t > 0.

    Intended for t >> tau (not enforced).  The error field is the magnitude
    of the first omitted shell -- a heuristic, not a bound: the expansion is
    asymptotic, and the full amplitude additionally carries the bound-state
    oscillation.
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    shells = _shells(params, n_shells)
    kept = shells[: n_shells + 1]
    value = sum(c * t ** (-p) for p, c in kept)
    p_next, c_next = shells[n_shells + 1] if len(shells) > n_shells + 1 else kept[-1]
    err = abs(c_next) * t ** (-p_next)
    return GSample(t=t, value=value, error_bound=float(err), method="asymptotic")
