"""Complex special functions used throughout the package.

All evaluation is scalar complex arithmetic.  Gamma-type functions use
argument shifting followed by the Stirling series with Bernoulli-number
corrections; the principal branch is used everywhere, so the recurrence
``exp(log_gamma(z+1)) = z * exp(log_gamma(z))`` holds exactly up to
roundoff and complex powers satisfy ``c**(w+1) = c * c**w``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import NonConvergence, OutOfRange, PoleProximity, ZeroBase

TOL_POLE = 1e-12
LN_2PI = math.log(2.0 * math.pi)

# Bernoulli terms B_{2k} / (2k (2k-1)) of the Stirling series.
_STIRLING_COEF = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
_STIRLING_RE = 18.0


def _as_complex(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise OutOfRange(f"non-finite argument {z!r}")
    return z


def _check_pole(z: complex, tol_pole: float) -> None:
    # poles of Gamma sit at 0, -1, -2, ...
    if z.real > 0.5 or abs(z.imag) > tol_pole:
        return
    m = round(z.real)
    if m <= 0 and abs(z - m) < tol_pole:
        raise PoleProximity(f"argument {z} within {tol_pole} of pole at {m}")


def stirling_remainder(z: complex) -> complex:
    """Bernoulli tail of the Stirling series; requires Re z >= ~18."""
    out = 0.0 + 0.0j
    zpow = z
    z2 = z * z
    for c in _STIRLING_COEF:
        out += c / zpow
        zpow *= z2
    return out


def _stirling_lngamma(z: complex) -> complex:
    return (z - 0.5) * cmath.log(z) - z + 0.5 * LN_2PI + stirling_remainder(z)


def log_gamma(z, tol_pole: float = TOL_POLE) -> complex:
    """Principal branch of ln Gamma(z) by shift-and-Stirling."""
    z = _as_complex(z)
    _check_pole(z, tol_pole)
    shift = int(max(0.0, math.ceil(_STIRLING_RE - z.real)))
    if shift == 0:
        return _stirling_lngamma(z)
    acc = 0.0 + 0.0j
    for k in range(shift):
        acc += cmath.log(z + k)
    return _stirling_lngamma(z + shift) - acc


def digamma(z, tol_pole: float = TOL_POLE) -> complex:
    """psi(z) = d/dz ln Gamma(z)."""
    z = _as_complex(z)
    _check_pole(z, tol_pole)
    shift = int(max(0.0, math.ceil(_STIRLING_RE - z.real)))
    acc = 0.0 + 0.0j
    for k in range(shift):
        acc += 1.0 / (z + k)
    w = z + shift
    # psi(w) = ln w - 1/(2w) - sum B_{2k} / (2k w^{2k})
    out = cmath.log(w) - 0.5 / w
    w2 = w * w
    wpow = w2
    for k, b2k in enumerate((1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6), start=1):
        out -= b2k / (2 * k * wpow)
        wpow *= w2
    return out - acc


def polygamma1(z, tol_pole: float = TOL_POLE) -> complex:
    """psi'(z), the first derivative of digamma."""
    z = _as_complex(z)
    _check_pole(z, tol_pole)
    shift = int(max(0.0, math.ceil(_STIRLING_RE - z.real)))
    acc = 0.0 + 0.0j
    for k in range(shift):
        acc += 1.0 / (z + k) ** 2
    w = z + shift
    # psi'(w) = 1/w + 1/(2w^2) + sum B_{2k} / w^{2k+1}
    out = 1.0 / w + 0.5 / (w * w)
    w2 = w * w
    wpow = w * w2
    for b2k in (1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6):
        out += b2k / wpow
        wpow *= w2
    return out + acc


def log_gamma_ratio(x: complex, w: complex) -> complex:
    """Stable ln Gamma(x+w) - ln Gamma(x) for x deep in the Stirling region.

    Written so no term of size x*ln(x) is ever formed; valid when both x
    and x+w have real part >= ~18 and |w| is small against |x|.
    """
    # (x+w-1/2) log(x+w) - (x-1/2) log x - w
    #   = (x-1/2) log1p(w/x) + w log(x+w) - w  + Bernoulli-tail difference
    lp = cmath.log(1.0 + w / x)
    out = (x - 0.5) * lp + w * cmath.log(x + w) - w
    return out + stirling_remainder(x + w) - stirling_remainder(x)


def log_gamma_vec(z):
    """Vectorized principal ln Gamma over a complex array (no pole checks)."""
    import numpy as np

    z = np.asarray(z, dtype=complex)
    shift = np.maximum(0, np.ceil(_STIRLING_RE - z.real)).astype(int)
    acc = np.zeros_like(z)
    kmax = int(shift.max()) if shift.size else 0
    for k in range(kmax):
        mask = shift > k
        acc[mask] += np.log(z[mask] + k)
    w = z + shift
    out = (w - 0.5) * np.log(w) - w + 0.5 * LN_2PI
    wp = w.copy()
    w2 = w * w
    for c in _STIRLING_COEF:
        out += c / wp
        wp *= w2
    return out - acc


def principal_power(base, exponent) -> complex:
    """base**exponent via the principal logarithm; entire in the exponent."""
    base = _as_complex(base)
    exponent = _as_complex(exponent)
    if base == 0:
        raise ZeroBase("zero base in principal_power")
    return cmath.exp(exponent * cmath.log(base))


@dataclass(frozen=True)
class AngleReduction:
    """Half-period reductions of an angle in [0, 2pi).

    ``theta_plus`` lies in [0, pi), ``theta_minus`` in [-pi/2, pi/2).
    ``sinc_is_one`` records the convention sin(theta_plus)/theta_plus = 1
    at the degenerate values.
    """

    theta: float
    theta_plus: float
    theta_minus: float
    sinc_is_one: bool


def angle_reduce(theta: float) -> AngleReduction:
    """Reduce theta in [0, 2pi) to its +/- half-period representatives."""
    if not (0.0 <= theta < 2.0 * math.pi):
        raise OutOfRange(f"theta={theta} outside [0, 2*pi)")
    theta_plus = theta if theta < math.pi else theta - math.pi
    if theta < math.pi / 2:
        theta_minus = theta
    elif theta < 3 * math.pi / 2:
        theta_minus = theta - math.pi
    else:
        theta_minus = theta - 2 * math.pi
    degenerate = theta_plus == 0.0 or theta_plus == math.pi
    return AngleReduction(theta, theta_plus, theta_minus, degenerate)


def sinc_plus(reduction: AngleReduction) -> float:
    """sin(theta_plus)/theta_plus with the value 1 at theta_plus in {0, pi}."""
    if reduction.sinc_is_one:
        return 1.0
    return math.sin(reduction.theta_plus) / reduction.theta_plus


def mittag_leffler3(alpha: float, beta, gamma, x, tol: float = 1e-12,
                    max_terms: int = 100_000) -> complex:
    """Three-parameter Mittag-Leffler function by its power series.

    E^gamma_{alpha,beta}(x) = sum_k (gamma)_k x^k / (k! Gamma(alpha k + beta)),
    with adaptive truncation once terms decay below ``tol`` relative to the
    partial sum.
    """
    if alpha <= 0:
        raise OutOfRange(f"alpha={alpha} must be positive")
    beta = _as_complex(beta)
    gamma = _as_complex(gamma)
    x = _as_complex(x)

    def recip_gamma(w: complex) -> complex:
        # zero at the poles of Gamma
        try:
            return cmath.exp(-log_gamma(w))
        except PoleProximity:
            return 0.0 + 0.0j

    if x == 0:
        return recip_gamma(beta)

    total = 0.0 + 0.0j
    poch_over_fact = 1.0 + 0.0j    # (gamma)_k / k!
    logx = cmath.log(x)
    small_streak = 0
    for k in range(max_terms):
        term = poch_over_fact * cmath.exp(k * logx) * recip_gamma(alpha * k + beta)
        total += term
        if k > int(abs(x)) + 2:
            if abs(term) < tol * max(abs(total), 1e-300):
                small_streak += 1
                if small_streak >= 4:
                    return total
            else:
                small_streak = 0
        poch_over_fact *= (gamma + k) / (k + 1.0)
    raise NonConvergence(
        f"Mittag-Leffler series did not settle in {max_terms} terms")
