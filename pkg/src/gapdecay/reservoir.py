"""Band-edge reservoir: spectral density family and every derived constant.

The reservoir couples the qubit (transition frequency omega0) to a bosonic
continuum whose spectral density vanishes below omega0 (photonic band gap
with the edge pinned at the transition), rises like (omega-omega0)^alpha at
the edge and falls off like omega^(alpha-2) far above it.

All frequency integrals are done in the shifted variable x = omega - omega0,
so omega0 never enters a quadrature (it only ever contributes the trivial
phase of the coherence).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from pathlib import Path

import mpmath as mp
import numpy as np
from scipy.integrate import quad

from .errors import ConfigError, QuadratureError

#: default absolute tolerance for reservoir quadratures: two orders below the
#: tightest cross-method acceptance gate.
DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class ReservoirConfig:
    """User-facing physical parameters of the band-edge reservoir.

    A: coupling amplitude (> 0); a: width of the high-frequency roll-off
    (> 0, frequency units); alpha: band-edge exponent, strictly inside (0, 1)
    (both endpoints hit trigonometric singularities in the derived constants);
    omega0: qubit transition frequency (> 0).
    """

    A: float
    a: float
    alpha: float
    omega0: float

    def __post_init__(self):
        for name in ("A", "a", "alpha", "omega0"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ConfigError(f"{name} must be a finite real number, got {v!r}")
        if self.A <= 0:
            raise ConfigError(f"coupling amplitude A must be > 0, got {self.A}")
        if self.a <= 0:
            raise ConfigError(f"width a must be > 0, got {self.a}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(
                f"band-edge exponent alpha must lie strictly in (0, 1), got {self.alpha}"
            )
        if self.omega0 <= 0:
            raise ConfigError(f"omega0 must be > 0, got {self.omega0}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ReservoirParams:
    """Constants derived from a ReservoirConfig.

    z0 is purely imaginary with positive imaginary part, z1 real, z_alpha
    complex; A_star is the coupling at which z1 vanishes; tau the crossover
    time scale beyond which the decaying part of the amplitude follows its
    inverse-power law; (Omega_alpha, M_alpha) locate the spectral-density peak.
    The source scalars (A, a, alpha, omega0) are carried along since the
    evaluators need them together with the derived constants.
    """

    z0: complex
    z_alpha: complex
    z1: float
    A_star: float
    tau: float
    Omega_alpha: float
    M_alpha: float
    A: float
    a: float
    alpha: float
    omega0: float

    def to_json_dict(self) -> dict:
        d = {}
        for k, v in asdict(self).items():
            if isinstance(v, complex):
                d[k] = {"re": v.real, "im": v.imag}
            else:
                d[k] = v
        return d


def critical_coupling(a: float, alpha: float) -> float:
    """Coupling A* at which the linear constant z1 vanishes."""
    return a ** (3.0 - alpha) * math.cos(math.pi * alpha / 2.0) / math.pi


def derive_params(cfg: ReservoirConfig) -> ReservoirParams:
    """Derive every constant the evaluators consume.

    z1 = pi A a^(alpha-1) sec(pi alpha/2) - a^2
    z_alpha = -2i pi A e^(-i pi alpha/2) csc(pi alpha)
    z0 = i pi A a^alpha csc(pi alpha/2)
    tau = max{1, |3/z0|^(1/3), |3 z_alpha/z0|^(1/alpha), 3|z1/z0|}
    """
    A, a, alpha = cfg.A, cfg.a, cfg.alpha
    half = math.pi * alpha / 2.0
    z1 = math.pi * A * a ** (alpha - 1.0) / math.cos(half) - a * a
    z_alpha = -2j * math.pi * A * complex(math.cos(half), -math.sin(half)) / math.sin(math.pi * alpha)
    z0 = 1j * math.pi * A * a**alpha / math.sin(half)
    tau = max(
        1.0,
        abs(3.0 / z0) ** (1.0 / 3.0),
        abs(3.0 * z_alpha / z0) ** (1.0 / alpha),
        3.0 * abs(z1 / z0),
    )
    return ReservoirParams(
        z0=z0,
        z_alpha=z_alpha,
        z1=z1,
        A_star=critical_coupling(a, alpha),
        tau=tau,
        Omega_alpha=cfg.omega0 + a * math.sqrt(alpha * (2.0 - alpha)),
        M_alpha=A * alpha ** (alpha / 2.0) * a ** (alpha - 2.0) * (2.0 - alpha) ** (1.0 - alpha / 2.0),
        A=A,
        a=a,
        alpha=alpha,
        omega0=cfg.omega0,
    )


def spectral_density(omega, cfg: ReservoirConfig):
    """J(omega) = 2A (omega-omega0)^alpha / (a^2 + (omega-omega0)^2), zero at and below the edge."""
    w = np.asarray(omega, dtype=float)
    x = w - cfg.omega0
    out = np.zeros_like(x)
    pos = x > 0.0
    xp = x[pos]
    out[pos] = 2.0 * cfg.A * xp**cfg.alpha / (cfg.a**2 + xp**2)
    if np.isscalar(omega) or np.ndim(omega) == 0:
        return float(out)
    return out


def _lam(x, A, a, alpha):
    return 2.0 * A * x**alpha / (a * a + x * x)


def correlation_function(tau_arg: float, cfg: ReservoirConfig, tol: float = DEFAULT_TOL) -> complex:
    """Two-point reservoir correlation f(tau) = int_0^inf J(omega) e^{-i(omega-omega0) tau} domega.

    Semi-infinite oscillatory quadrature: a short head segment below the
    spectral peak is mapped through x = w^2 (which removes the x^alpha edge
    kink), the rest is handled by oscillatory-weighted rules on the finite
    midsection and on the algebraic tail.
    """
    if tau_arg < 0:
        raise ValueError("tau_arg must be >= 0")
    A, a, alpha = cfg.A, cfg.a, cfg.alpha
    lam = lambda x: _lam(x, A, a, alpha)

    x_peak = a * math.sqrt(alpha * (2.0 - alpha))
    if tau_arg == 0.0:
        val, err = quad(lam, 0.0, np.inf, epsabs=tol, epsrel=0.0, limit=400)
        if err > 50 * tol:
            raise QuadratureError(f"correlation quadrature error {err:.2e} above target {tol:.2e}")
        return complex(val, 0.0)

    # head: at most ~one oscillation, kink healed by the w^2 map
    x_head = min(x_peak, math.pi / tau_arg)
    w_head = math.sqrt(x_head)
    parts = []
    for trig in (np.cos, np.sin):
        v, e = quad(
            lambda w: 2.0 * w * lam(w * w) * trig(w * w * tau_arg),
            0.0, w_head, epsabs=tol / 4, epsrel=0.0, limit=400,
        )
        parts.append((v, e))
    # midsection and tail, oscillatory-weighted
    x_mid = max(4.0 * a, 2.0 * x_peak, x_head * 2.0)
    for weight in ("cos", "sin"):
        v1, e1 = quad(lam, x_head, x_mid, weight=weight, wvar=tau_arg,
                      epsabs=tol / 4, epsrel=0.0, limit=400)
        v2, e2 = quad(lam, x_mid, np.inf, weight=weight, wvar=tau_arg,
                      epsabs=tol / 4, epsrel=0.0, limit=400, limlst=200)
        parts.append((v1 + v2, e1 + e2))
    (c_h, ce_h), (s_h, se_h), (c_t, ce_t), (s_t, se_t) = parts
    err = ce_h + se_h + ce_t + se_t
    if err > 50 * tol:
        raise QuadratureError(
            f"correlation quadrature error {err:.2e} above target {tol:.2e} at tau={tau_arg:g}"
        )
    return complex(c_h + c_t, -(s_h + s_t))


def correlation_grid(cfg: ReservoirConfig, taus: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """f(tau) on a batch of times: same integral as correlation_function,
    evaluated by shared Gauss-Legendre panels plus an incomplete-gamma tail.

    Much faster than looping correlation_function when thousands of kernel
    values are needed (the Volterra oracle); cross-validated against it in
    the test suite at random times.
    """
    taus = np.asarray(taus, dtype=float)
    if taus.ndim != 1 or np.any(taus < 0):
        raise ValueError("taus must be a 1-D array of nonnegative times")
    A, a, alpha = cfg.A, cfg.a, cfg.alpha
    tau_max = float(taus.max()) if taus.size else 0.0

    X = 40.0 * a + 20.0
    # panel width well below one oscillation period of e^{-i x tau_max}
    n_pan = int(max(1200, math.ceil(X * max(tau_max, 1.0) / 2.0)))
    n_pan = min(n_pan, 40000)
    x0 = X / n_pan
    graded = np.linspace(0.0, 1.0, 49) ** 2 * x0  # squeeze panels onto the edge kink
    edges = np.concatenate([graded, np.linspace(x0, X, n_pan + 1)[1:]])
    xg, wg = np.polynomial.legendre.leggauss(10)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    wts = (half[:, None] * wg[None, :]).ravel()
    lam_w = _lam(nodes, A, a, alpha) * wts

    out = np.zeros(taus.shape, dtype=complex)
    block = max(1, int(4e6 // nodes.size) or 1)
    for i in range(0, taus.size, block):
        tt = taus[i : i + block]
        out[i : i + block] = (lam_w[None, :] * np.exp(-1j * np.outer(tt, nodes))).sum(axis=1)

    # tail beyond X: expand 1/(a^2+x^2) in a^2/x^2; term j is an upper
    # incomplete gamma of order s_j = alpha-1-2j at argument iX tau
    n_terms = max(4, int(math.ceil(math.log(tol) / math.log((a * a) / (X * X)))) + 1)
    s_orders = alpha - 1.0 - 2.0 * np.arange(n_terms)
    signs = (-(a * a)) ** np.arange(n_terms)

    small = (taus * X < 45.0) & (taus > 0.0)
    large = taus * X >= 45.0
    zero = taus == 0.0
    if np.any(zero):
        out[zero] += 2.0 * A * float(np.sum(-signs * X**s_orders / s_orders))
    if np.any(small):
        with mp.workdps(30):
            idx = np.nonzero(small)[0]
            for i in idx:
                t = taus[i]
                zz = 1j * X * t
                acc = mp.mpc(0)
                for j in range(n_terms):
                    s = s_orders[j]
                    acc += signs[j] * (1j * t) ** (-s) * mp.gammainc(s, zz)
                out[i] += 2.0 * A * complex(acc)
    if np.any(large):
        # (i tau)^{-s} Gamma(s, iX tau) = -i X^{s-1} e^{-iX tau} / tau
        #                                 * sum_k prod_{m<=k} (s-m)/(iX tau)
        tt = taus[large]
        iz = 1j * X * tt
        acc = np.zeros(tt.shape, dtype=complex)
        for j in range(n_terms):
            s = s_orders[j]
            csum = np.ones(tt.shape, dtype=complex)
            ck = np.ones(tt.shape, dtype=complex)
            for k in range(1, 40):
                ck = ck * (s - k) / iz
                csum += ck
                if np.max(np.abs(ck)) < 1e-17:
                    break
            acc += signs[j] * (-1j) * X ** (s - 1.0) / tt * csum
        out[large] += 2.0 * A * np.exp(-iz) * acc
    return out


@dataclass(frozen=True)
class SummabilityReport:
    """Outcome of validating a spectral density: nonnegativity on a dense
    grid, finiteness of the total weight, and the weight itself."""

    nonnegative: bool
    summable: bool
    integral: float
    closed_form: float  # z1 + a^2, the analytic total weight

    @property
    def ok(self) -> bool:
        return self.nonnegative and self.summable


def validate_spectral_density(cfg: ReservoirConfig, tol: float = DEFAULT_TOL) -> SummabilityReport:
    """Confirm J >= 0 everywhere and that its total weight is finite.

    Cannot fail for alpha in (0,1); kept as a guard for future densities.
    """
    params = derive_params(cfg)
    grid = cfg.omega0 + np.concatenate([
        -np.geomspace(1e-6, 10 * cfg.a, 200)[::-1],
        [0.0],
        np.geomspace(1e-9, 1e4 * cfg.a, 2000),
    ])
    j = spectral_density(grid, cfg)
    nonneg = bool(np.all(j >= 0.0))
    val, err = quad(lambda x: _lam(x, cfg.A, cfg.a, cfg.alpha), 0.0, np.inf,
                    epsabs=tol, epsrel=0.0, limit=400)
    summable = math.isfinite(val) and err < 1e-6 * max(1.0, abs(val))
    return SummabilityReport(
        nonnegative=nonneg,
        summable=summable,
        integral=float(val),
        closed_form=params.z1 + cfg.a**2,
    )


# --- config file I/O -------------------------------------------------------

_KEYS = ("A", "a", "alpha", "omega0")


def config_from_mapping(d: dict) -> ReservoirConfig:
    missing = [k for k in _KEYS if k not in d]
    if missing:
        raise ConfigError(f"missing reservoir keys: {', '.join(missing)}")
    try:
        vals = {k: float(d[k]) for k in _KEYS}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"non-numeric reservoir value: {exc}") from exc
    return ReservoirConfig(**vals)


def load_config(path: str | Path) -> ReservoirConfig:
    """Read a reservoir config from JSON or from flat key = value lines."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return config_from_mapping(json.loads(text))
    d = {}
    for ln in text.splitlines():
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        if "=" not in ln:
            raise ConfigError(f"cannot parse config line: {ln!r}")
        k, v = ln.split("=", 1)
        d[k.strip()] = v.strip()
    return config_from_mapping(d)
