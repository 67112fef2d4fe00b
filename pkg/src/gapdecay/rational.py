"""Rational band-edge exponents alpha = p/q: root data of the transform
denominator and the exact modulation-of-exponentials evaluation.

Substituting z = u^(1/q) (on the physical branch, z = e^{i pi/(2q)}(-iu)^{1/q})
turns the transform denominator into the degree-3q polynomial

    Q(z) = z^(3q) + z1 z^q + z_alpha z^p + z0,

whose roots zeta_l (multiplicities m_l, sum m_l = 3q) carry the whole
dynamics.  With the partial fractions of (z^(2q) - a^2)/Q(z) the amplitude is

    G(t) = sum_l sum_{j=1}^{m_l} c_{l,j} t^(j/q - 1) E^j_{1/q, j/q}(zeta_l t^(1/q)),

a modulation of exponential relaxations: roots with arg zeta_l = pi/(2q)
exponentiate to the undamped bound-state line, all others to decaying
channels.  c_{l,j} are the standard partial-fraction coefficients; the
residue table b_{l,k} is kept in the source normalization
c_{l,j} = b_{l,k} (m_l - k)!, j = m_l - k + 1.

The alternative (eta, xi) double-integral representation of the same
partial-fraction data is provided for completeness; it converges only when
every root has a negative real part, which the bound-state root never has,
so for physical configurations it reports inapplicability instead of a value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp
import numpy as np
from scipy.integrate import quad

from .errors import ConfigError, RepresentationError, RootError
from .reservoir import ReservoirParams
from .sample import GSample

__all__ = [
    "RationalOrder", "RootSet", "ResidueTable", "build_q_polynomial",
    "find_roots", "residue_coefficients", "partial_fraction_coefficients",
    "g_rational", "modulation_density", "exponential_representation_report",
    "g_rational_integral",
]


@dataclass(frozen=True)
class RationalOrder:
    """Band-edge exponent p/q in lowest terms, 0 < p < q."""

    p: int
    q: int

    def __post_init__(self):
        if not (isinstance(self.p, int) and isinstance(self.q, int)):
            raise ConfigError("p and q must be integers")
        if not 0 < self.p < self.q:
            raise ConfigError(f"need 0 < p < q, got p={self.p}, q={self.q}")
        if math.gcd(self.p, self.q) != 1:
            raise ConfigError(f"p={self.p}, q={self.q} are not coprime")

    @property
    def alpha(self) -> float:
        return self.p / self.q

    @classmethod
    def from_alpha(cls, alpha: float, max_q: int = 64) -> "RationalOrder":
        fr = Fraction(alpha).limit_denominator(max_q)
        if abs(float(fr) - alpha) > 1e-12:
            raise ConfigError(
                f"alpha={alpha!r} is not rational with denominator <= {max_q}"
            )
        return cls(p=fr.numerator, q=fr.denominator)


@dataclass(frozen=True)
class RootSet:
    """Clustered roots of Q with multiplicities and their residual norms."""

    roots: tuple[tuple[complex, int], ...]
    degree: int
    residual: float  # max scaled |Q^(i)(zeta)| over all roots and orders i < m

    def __post_init__(self):
        if sum(m for _, m in self.roots) != self.degree:
            raise RootError(
                f"multiplicities sum to {sum(m for _, m in self.roots)}, "
                f"expected degree {self.degree}"
            )

    def to_json_dict(self) -> dict:
        return {
            "degree": self.degree,
            "residual": self.residual,
            "roots": [
                {"re": z.real, "im": z.imag, "multiplicity": m} for z, m in self.roots
            ],
        }


def build_q_polynomial(order: RationalOrder, params: ReservoirParams) -> np.ndarray:
    """Monic coefficient vector (descending powers) of Q(z)."""
    if abs(order.alpha - params.alpha) > 1e-12:
        raise ConfigError(
            f"order p/q={order.p}/{order.q} does not match params alpha={params.alpha}"
        )
    q3 = 3 * order.q
    c = np.zeros(q3 + 1, dtype=complex)
    c[0] = 1.0
    c[q3 - order.q] += params.z1
    c[q3 - order.p] += params.z_alpha
    c[q3] += params.z0
    return c


def _poly_residual_scale(coeffs: np.ndarray, z: complex) -> float:
    """Backward-error scale sum |c_i| |z|^(deg-i) for the residual gate."""
    deg = len(coeffs) - 1
    az = abs(z)
    return float(sum(abs(c) * az ** (deg - i) for i, c in enumerate(coeffs)))


def find_roots(coeffs: np.ndarray, cluster_tol: float = 1e-7,
               residual_tol: float = 1e-10) -> RootSet:
    """Roots of a monic polynomial with multiplicity clustering.

    Companion-matrix eigenvalues, Newton-polished; roots closer than
    cluster_tol (relative to the largest root magnitude) merge into a
    multiple root at the cluster mean, which is then re-polished on the
    (m-1)-th derivative.  Residuals of Q and its derivatives up to order
    m-1, scaled by the coefficient magnitudes, must pass residual_tol.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    if len(coeffs) < 2:
        raise ValueError("degree must be >= 1")
    if coeffs[0] != 1.0:
        raise ValueError("polynomial must be monic")
    deg = len(coeffs) - 1
    raw = np.roots(coeffs)
    poly = np.poly1d(coeffs)
    dpoly = poly.deriv()
    for _ in range(4):
        num = poly(raw)
        den = dpoly(raw)
        step = np.where(np.abs(den) > 0, num / np.where(den == 0, 1, den), 0)
        nxt = raw - step
        improve = np.abs(poly(nxt)) <= np.abs(num)
        raw = np.where(improve, nxt, raw)

    scale = max(1.0, float(np.max(np.abs(raw))))
    clusters: list[list[complex]] = []
    for r in sorted(raw, key=lambda z: (z.real, z.imag)):
        for cl in clusters:
            if abs(r - cl[0]) < cluster_tol * scale:
                cl.append(r)
                break
        else:
            clusters.append([r])

    out = []
    worst = 0.0
    for cl in clusters:
        m = len(cl)
        center = complex(np.mean(cl))
        if m > 1:
            # a multiple root is a simple root of the (m-1)-th derivative
            dm = poly
            for _ in range(m - 1):
                dm = dm.deriv()
            dm1 = dm.deriv()
            for _ in range(40):
                val = dm(center)
                dval = dm1(center)
                if dval == 0:
                    break
                step = val / dval
                center -= step
                if abs(step) < 1e-15 * max(1.0, abs(center)):
                    break
        pk = poly
        for i in range(m):
            res = abs(pk(center)) / max(_poly_residual_scale(pk.coeffs, center), 1e-300)
            worst = max(worst, res)
            pk = pk.deriv()
        out.append((center, m))

    if worst > residual_tol:
        raise RootError(
            f"root residual {worst:.3e} above tolerance {residual_tol:.1e} after polishing"
        )
    return RootSet(roots=tuple(out), degree=deg, residual=worst)


@dataclass(frozen=True)
class ResidueTable:
    """b_{l,k} residue data of (z^(2q) - a^2)/Q(z).

    entries[(l, k)] with l indexing root_set.roots and k = 1..m_l, in the
    source normalization b_{l,k} = phi_l^(k-1)(zeta_l)/((m_l-k)! (k-1)!)
    where phi_l = (z^(2q) - a^2) (z - zeta_l)^(m_l)/Q(z).  condition grows
    as clustered roots approach each other; ill_conditioned flags when the
    derivative computation cannot be trusted.
    """

    entries: dict
    condition: float
    ill_conditioned: bool


def _taylor_coeffs_at(root_set: RootSet, l: int, n_terms: int, numer_coeffs: np.ndarray):
    """Taylor coefficients of phi_l(z) = N(z)/C_l(z) at zeta_l.

    N from an exact polynomial shift; 1/C_l by truncated series of the
    shifted cofactor product of the other clusters.
    """
    zeta, m_l = root_set.roots[l]
    # N(zeta + e) coefficients in e
    npoly = np.poly1d(numer_coeffs)
    n_shift = np.zeros(n_terms, dtype=complex)
    pk = npoly
    fact = 1.0
    for i in range(n_terms):
        n_shift[i] = pk(zeta) / fact
        pk = pk.deriv()
        fact *= i + 1
        if pk.order == 0 and pk.coeffs[0] == 0:
            break
    # C_l(zeta + e) = prod_{j != l} (zeta - zeta_j + e)^(m_j), truncated
    c_shift = np.zeros(n_terms, dtype=complex)
    c_shift[0] = 1.0
    for j, (zj, mj) in enumerate(root_set.roots):
        if j == l:
            continue
        d = zeta - zj
        for _ in range(mj):
            nxt = np.zeros_like(c_shift)
            nxt[0] = c_shift[0] * d
            nxt[1:] = c_shift[1:] * d + c_shift[:-1]
            c_shift = nxt
    # series reciprocal and product
    inv = np.zeros_like(c_shift)
    inv[0] = 1.0 / c_shift[0]
    for i in range(1, n_terms):
        inv[i] = -inv[0] * np.dot(c_shift[1 : i + 1], inv[i - 1 :: -1][: i])
    phi = np.zeros_like(c_shift)
    for i in range(n_terms):
        phi[i] = np.dot(n_shift[: i + 1], inv[i :: -1][: i + 1])
    return phi


def residue_coefficients(root_set: RootSet, order: RationalOrder,
                         params: ReservoirParams) -> ResidueTable:
    """b_{l,k} table for every root and k = 1..m_l."""
    q = order.q
    a = params.a
    numer = np.zeros(2 * q + 1, dtype=complex)
    numer[0] = 1.0
    numer[2 * q] = -a * a
    entries = {}
    sep = min(
        (abs(z1 - z2) for i, (z1, _) in enumerate(root_set.roots)
         for (z2, _) in root_set.roots[i + 1 :]),
        default=np.inf,
    )
    mmax = max(m for _, m in root_set.roots)
    condition = (1.0 / sep) ** mmax if np.isfinite(sep) and sep > 0 else np.inf
    for l, (zeta, m_l) in enumerate(root_set.roots):
        if m_l == 1 and abs(np.polyval(numer, zeta)) <= 1e-9 * _poly_residual_scale(numer, zeta):
            # removable point of the transform (z^q = +-a): Q shares this
            # root with the numerator, so its residue is exactly zero --
            # rounding residue would otherwise be amplified by the
            # exponentially growing relaxation channel
            entries[(l, 1)] = 0.0 + 0.0j
            continue
        phi = _taylor_coeffs_at(root_set, l, m_l, numer)
        for k in range(1, m_l + 1):
            # phi^(k-1)/(k-1)! is the series coefficient phi[k-1]
            entries[(l, k)] = complex(phi[k - 1]) / math.factorial(m_l - k)
    return ResidueTable(
        entries=entries,
        condition=float(condition),
        ill_conditioned=bool(condition > 1e8),
    )


def partial_fraction_coefficients(table: ResidueTable, root_set: RootSet) -> dict:
    """Standard coefficients c_{l,j} of (z - zeta_l)^(-j):
    c_{l,j} = b_{l,k} (m_l - k)! with j = m_l - k + 1."""
    out = {}
    for (l, k), b in table.entries.items():
        m_l = root_set.roots[l][1]
        j = m_l - k + 1
        out[(l, j)] = b * math.factorial(m_l - k)
    return out


# --------------------------------------------------------------------------
# time-domain evaluation
# --------------------------------------------------------------------------

def _prabhakar_mp(rho: float, beta: float, gamma_: int, w: complex, dps: int):
    """E^gamma_{rho,beta}(w) by mpmath series at dps working digits.

    Returns (value, achieved-error estimate) as mpmath numbers.
    """
    with mp.workdps(dps):
        wm = mp.mpc(w)
        term = 1 / mp.gamma(beta)
        tot = term
        peak = abs(term)
        budget = int(8 * (2 + abs(wm)) ** (1.0 / rho)) + 400
        floor = mp.mpf(10) ** (-(dps - 4))
        n = 0
        while n < budget:
            term = term * wm * (gamma_ + n) / (n + 1) * mp.gamma(rho * n + beta) / mp.gamma(rho * (n + 1) + beta)
            tot += term
            peak = max(peak, abs(term))
            n += 1
            if n > 10 and abs(term) < floor * max(1, abs(tot)):
                break
        err = abs(term) + peak * mp.mpf(10) ** (-dps + 2)
        return tot, err


def g_rational(t: float, order: RationalOrder, root_set: RootSet,
               table: ResidueTable, params: ReservoirParams) -> GSample:
    """Exact amplitude at t > 0 from the root/residue data.

    Precision is escalated with the largest |zeta_l| t^(1/q) so that the
    internally cancelling Mittag-Leffler series keep ~12 significant digits
    in the result.
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    if table.ill_conditioned:
        raise RootError("residue table flagged ill-conditioned; refusing to evaluate")
    q = order.q
    coeffs = {lj: c for lj, c in partial_fraction_coefficients(table, root_set).items()
              if c != 0.0}
    t_root = t ** (1.0 / q)
    wmax = max(abs(root_set.roots[l][0]) * t_root for (l, _) in coeffs)
    lost = 0.5 * wmax**q  # series terms peak near e^{|w|^q} before cancelling
    dps = int(25 + lost)
    total = mp.mpc(0)
    err = mp.mpf(0)
    with mp.workdps(dps):
        for (l, j), c in sorted(coeffs.items()):
            zeta = root_set.roots[l][0]
            w = complex(zeta) * t_root
            val, e = _prabhakar_mp(1.0 / q, j / q, j, w, dps)
            scale = abs(mp.mpc(c)) * mp.mpf(t) ** (j / q - 1.0)
            total += mp.mpc(c) * mp.mpf(t) ** (j / q - 1.0) * val
            err += scale * e
        value = complex(total)
        bound = float(err) + abs(value) * 1e-13
    return GSample(t=t, value=value, error_bound=bound, method="rational")


# --------------------------------------------------------------------------
# the (eta, xi) double-integral representation
# --------------------------------------------------------------------------

def modulation_density(order: RationalOrder, root_set: RootSet, table: ResidueTable):
    """Phi(eta, xi) such that G(t) = int int Phi e^{-xi t} deta dxi where the
    representation applies: sum over roots of (b_{l,k}/pi) eta^(m_l-k)
    sin(eta xi^(1/q) sin(pi/q)) exp(eta (zeta_l - cos(pi/q) xi^(1/q)))."""
    q = order.q
    s, c = math.sin(math.pi / q), math.cos(math.pi / q)

    def phi(eta: float, xi: float) -> complex:
        xq = xi ** (1.0 / q)
        acc = 0.0 + 0.0j
        for (l, k), b in table.entries.items():
            zeta, m_l = root_set.roots[l]
            term = (b / math.pi) * eta ** (m_l - k) * math.sin(eta * xq * s)
            acc += term * np.exp(eta * (zeta - c * xq))
        return complex(acc)

    return phi


@dataclass(frozen=True)
class RepresentationReport:
    """Applicability of the exponential-modulation double integral."""

    applicable: bool
    max_real_part: float
    offending_roots: tuple[complex, ...]


def exponential_representation_report(root_set: RootSet) -> RepresentationReport:
    """The eta-integral converges for every xi >= 0 only if all roots have
    negative real parts; the bound-state root never does."""
    offending = tuple(z for z, _ in root_set.roots if z.real >= 0.0)
    max_re = max(z.real for z, _ in root_set.roots)
    return RepresentationReport(
        applicable=len(offending) == 0,
        max_real_part=float(max_re),
        offending_roots=offending,
    )


def g_rational_integral(t: float, order: RationalOrder, root_set: RootSet,
                        table: ResidueTable, tol: float = 1e-8) -> GSample:
    """Evaluate the double-integral representation at t > 0.

    Raises RepresentationError when a root has nonnegative real part (the
    inner integral diverges there; this is reported, never truncated).
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    rep = exponential_representation_report(root_set)
    if not rep.applicable:
        raise RepresentationError(
            "exponential-modulation integral diverges: roots with Re >= 0: "
            + ", ".join(f"{z:.6g}" for z in rep.offending_roots)
        )
    q = order.q
    phi = modulation_density(order, root_set, table)
    margin = -rep.max_real_part

    def inner(xi: float, part) -> float:
        decay = margin + math.cos(math.pi / q) * xi ** (1.0 / q)
        h_max = 40.0 / decay
        v, _ = quad(lambda eta: part(phi(eta, xi)), 0.0, h_max, epsabs=tol / 10, limit=200)
        return v

    xi_max = 40.0 / t + 10.0 * margin**q
    vals = []
    err = 0.0
    for part in (lambda z: z.real, lambda z: z.imag):
        v, e = quad(lambda xi: inner(xi, part) * math.exp(-xi * t), 0.0, xi_max,
                    epsabs=tol, limit=200)
        vals.append(v)
        err += e
    return GSample(t=t, value=complex(vals[0], vals[1]), error_bound=float(err + tol),
                   method="rational")
