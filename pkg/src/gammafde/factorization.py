"""Zero tables and canonical infinite-product factorizations of the
trigonometric coefficient catalog: shifted sin/cos/tan, the two-frequency
combinations  sin(z - t1) +/- q2 sin(q1 z - t2), tangent combinations, and
their quotients; plus conversion of a factorized coefficient into the
Omega form consumed by the homogeneous builder.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import specfun
from .coefficient import (FiniteFactorSpec, OmegaSpec, PowerLawGenerator,
                          SequenceFamily, ValidationReport,
                          family_from_power_laws, validate_hypotheses,
                          EquationParams)
from .errors import (BracketFailure, ExcludedAngle, InsufficientZeros,
                     InvalidSpec, KernelInvalid, SummabilityFailure,
                     UnknownClass)
from .homogeneous import PeriodicPlugin, CONSTANT_PLUGIN, log_sin_pi
from .particular import CONSTANT_KERNEL, KernelSpec, sin_power_kernel

TWO_PI = 2.0 * math.pi


# --------------------------------------------------------------------------
# trig coefficient specs
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SPlusMinusSpec:
    """sin(z - theta1) +/- q2 sin(q1 z - theta2) with q1 = p/(2q)."""

    sign: int
    theta1: float
    theta2: float
    p: int
    q: int
    q2: float

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InvalidSpec("sign must be +1 or -1")
        if not (self.p > 2 * self.q > 1):
            raise InvalidSpec(f"need p > 2q > 1, got p={self.p}, q={self.q}")
        if math.gcd(self.p, self.q) != 1:
            raise InvalidSpec("q/p must be an irreducible fraction")
        if self.q2 <= 0 or self.q2 == 1.0:
            raise InvalidSpec("q2 must be positive and different from 1")
        if not (0.0 <= self.theta1 < TWO_PI and 0.0 <= self.theta2 < TWO_PI):
            raise InvalidSpec("angles must lie in [0, 2*pi)")

    @property
    def q1(self) -> float:
        return self.p / (2.0 * self.q)

    @property
    def period(self) -> float:
        return 4.0 * math.pi * self.q

    def value(self, z):
        z = np.asarray(z)
        return np.sin(z - self.theta1) \
            + self.sign * self.q2 * np.sin(self.q1 * z - self.theta2)

    def derivative(self, z, order: int = 1):
        z = np.asarray(z)
        s, c = (np.sin, np.cos)
        ph1, ph2 = z - self.theta1, self.q1 * z - self.theta2
        k = self.sign * self.q2 * self.q1 ** order
        if order % 4 == 1:
            return c(ph1) + k * c(ph2)
        if order % 4 == 2:
            return -s(ph1) - k * s(ph2)
        if order % 4 == 3:
            return -c(ph1) - k * c(ph2)
        return s(ph1) + k * s(ph2)


@dataclass(frozen=True)
class TanComboSpec:
    """tan(omega1 z - theta1) +/- q3 tan(omega2 z - theta2)."""

    sign: int
    omega1: float
    omega2: float
    theta1: float
    theta2: float
    q3: float
    p: int | None = None
    q: int | None = None

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InvalidSpec("sign must be +1 or -1")
        if not (0.0 < self.omega1 <= self.omega2):
            raise InvalidSpec("need 0 < omega1 <= omega2")
        if self.q3 <= 0:
            raise InvalidSpec("q3 must be positive")
        if self.q3 == 1.0 and self.omega1 == self.omega2 \
                and self.theta1 == self.theta2 and self.sign == -1:
            raise InvalidSpec("identically zero combination")

    def value(self, z):
        z = np.asarray(z)
        return np.tan(self.omega1 * z - self.theta1) \
            + self.sign * self.q3 * np.tan(self.omega2 * z - self.theta2)


# --------------------------------------------------------------------------
# zero tables
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroEntry:
    location: float
    multiplicity: int
    residual: float
    bracket_lo: float
    bracket_hi: float


@dataclass(frozen=True)
class ZeroTable:
    period: float
    entries: tuple
    count: int               # zeros counted with multiplicity
    lattice_rule: str        # 'translate' | 'odd'

    def locations(self) -> list:
        return [e.location for e in self.entries]

    def rows(self):
        for k, e in enumerate(self.entries):
            yield (k, e.location, e.multiplicity, e.residual,
                   e.bracket_lo, e.bracket_hi)


def seed_intervals(spec: SPlusMinusSpec) -> list:
    """Bracket seeds from the interval structure of the zero localization:
    every zero lies in one of the arcsin-bands around theta1 + k*pi (q2 < 1)
    or in the half-bands around (pi k + theta2)/q1 (q2 > 1)."""
    out = []
    T = spec.period
    if spec.q2 > 1.0:
        half = math.pi / (2.0 * spec.q1)
        k = 0
        while True:
            c = (math.pi * k + spec.theta2) / spec.q1
            if c - half > T:
                break
            out.append((c - half, c + half))
            k += 1
    else:
        band = math.asin(min(1.0, spec.q2))
        k = -1
        while True:
            for centre in (spec.theta1 + TWO_PI * k,
                           spec.theta1 + math.pi + TWO_PI * k):
                out.append((centre - band, centre + band))
            if spec.theta1 + TWO_PI * k - band > T:
                break
            k += 1
    return out


def _refine_bisect(fn, lo: float, hi: float, tol: float = 1e-14) -> float:
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise BracketFailure(f"no sign change in [{lo}, {hi}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        if fmid == 0.0 or hi - lo < tol * max(1.0, abs(mid)):
            return mid
        if flo * fmid < 0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def _classify_multiplicity(spec: SPlusMinusSpec, root: float) -> int:
    scale = 1.0 + spec.q2
    d1 = abs(spec.derivative(root, 1)) / scale
    if d1 > 1e-6:
        return 1
    d2 = abs(spec.derivative(root, 2)) / scale
    d3 = abs(spec.derivative(root, 3)) / scale
    if d2 < 1e-6 and d3 > 1e-3:
        return 3
    raise BracketFailure(
        f"ambiguous multiplicity at {root}: |f'|={d1:.2e}, |f''|={d2:.2e}, "
        f"|f'''|={d3:.2e}")


def find_zeros(spec: SPlusMinusSpec, grid: int | None = None,
               tol: float = 1e-10) -> ZeroTable:
    """Locate all real zeros in one fundamental period, with multiplicities.

    Brackets are seeded from the interval localization of the zeros plus a
    uniform scan; each bracket is refined by bisection.  Multiplicity (1 or
    3) is classified by derivative magnitudes.  A zero at the origin is
    detected by the closed-form test sin(theta1) +/- q2 sin(theta2) = 0.
    """
    T = spec.period
    n_grid = grid or max(20_000, 6000 * spec.p)
    fn = lambda x: float(spec.value(x))

    # scan on a grid shifted half a cell so candidate zeros at 0 and at the
    # seed-interval edges sit inside cells
    xs = np.linspace(-0.5 * T / n_grid, T - 0.5 * T / n_grid, n_grid + 1)
    vals = spec.value(xs)
    roots: list[float] = []
    sign_change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    brackets = [(float(xs[i]), float(xs[i + 1])) for i in sign_change]
    for lo, hi in seed_intervals(spec):
        lo, hi = max(lo, xs[0]), min(hi, xs[-1])
        if hi <= lo:
            continue
        sub = np.linspace(lo, hi, 64)
        sv = spec.value(sub)
        for i in np.nonzero(np.sign(sv[:-1]) * np.sign(sv[1:]) < 0)[0]:
            brackets.append((float(sub[i]), float(sub[i + 1])))

    records = []
    for lo, hi in brackets:
        root = _refine_bisect(fn, lo, hi)
        records.append((root, lo, hi))

    origin_test = math.sin(spec.theta1) + spec.sign * spec.q2 * math.sin(spec.theta2)
    if abs(origin_test) < tol and not any(abs(r) < 1e-8 for r, *_ in records):
        records.append((0.0, -1e-9, 1e-9))

    records.sort()
    merged = []
    for root, lo, hi in records:
        root = root % T if abs(root) > 1e-12 else root
        if root < -1e-12 or root >= T - 1e-12:
            root = 0.0
        if merged and abs(root - merged[-1][0]) < 1e-7:
            continue
        merged.append((root, lo, hi))

    entries = []
    total = 0
    scale = 1.0 + spec.q2
    for root, lo, hi in merged:
        mult = _classify_multiplicity(spec, root)
        res = abs(fn(root))
        if res > 1e-9 * scale:
            raise BracketFailure(f"zero at {root} has residual {res:.2e}")
        entries.append(ZeroEntry(root, mult, res, lo, hi))
        total += mult

    def on_boundary(t: float) -> bool:
        return t < 1e-14 or abs(t - math.pi) < 1e-14

    rule = "odd" if on_boundary(spec.theta1) and on_boundary(spec.theta2) \
        else "translate"
    if spec.q2 > 1.0 and total != 2 * spec.p:
        raise BracketFailure(
            f"expected {2 * spec.p} zeros for q2 > 1, found {total}")
    return ZeroTable(T, tuple(entries), total, rule)


# --------------------------------------------------------------------------
# product forms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteFactor:
    location: complex
    orientation: int         # +1: (a + z), -1: (a - z)
    mult: int                # negative = denominator
    normalized: bool = False


@dataclass(frozen=True)
class LatticeFamily:
    orientation: int         # +1: (a_n + z), -1: (a_n - z)
    generator: Callable      # n (array) -> positive locations
    mult: int                # negative = denominator
    label: str = ""


@dataclass(frozen=True)
class ProductForm:
    """Evaluable canonical product: constant * z^mu * exp(c z) * finite
    factors * normalized lattice factors."""

    prefactor: complex
    monomial_power: int = 0
    linear_coeff: complex = 0.0
    finite_factors: tuple = ()
    lattices: tuple = ()
    label: str = ""

    def evaluate(self, z, truncation: int = 10_000) -> complex:
        z = complex(z)
        val = complex(self.prefactor)
        if self.monomial_power:
            val *= z ** self.monomial_power
        if self.linear_coeff:
            val *= cmath.exp(self.linear_coeff * z)
        for f in self.finite_factors:
            piece = f.location + f.orientation * z
            if f.normalized:
                piece /= f.location
            val *= piece ** f.mult
        ns = np.arange(1, truncation + 1, dtype=float)
        for fam in self.lattices:
            a = np.asarray(fam.generator(ns), dtype=complex)
            factors = (a + fam.orientation * z) / a
            val *= complex(np.prod(factors ** fam.mult))
        return val

    def scaled_argument(self, s: float) -> "ProductForm":
        """The product form of  z -> self(s*z)  (zeros divided by s)."""
        if s <= 0:
            raise InvalidSpec("argument scale must be positive")
        fin = tuple(FiniteFactor(f.location / s, f.orientation, f.mult,
                                 f.normalized) for f in self.finite_factors)
        # unnormalized finite factors pick up the scale constant
        pref = complex(self.prefactor) * s ** self.monomial_power
        for f in self.finite_factors:
            if not f.normalized:
                pref *= s ** f.mult
        lat = tuple(LatticeFamily(fam.orientation,
                                  (lambda n, g=fam.generator, ss=s:
                                   np.asarray(g(n)) / ss),
                                  fam.mult, fam.label) for fam in self.lattices)
        return ProductForm(pref, self.monomial_power, self.linear_coeff * s,
                           fin, lat, f"{self.label}(scaled x{s})")

    def __mul__(self, other: "ProductForm") -> "ProductForm":
        return ProductForm(
            self.prefactor * other.prefactor,
            self.monomial_power + other.monomial_power,
            self.linear_coeff + other.linear_coeff,
            self.finite_factors + other.finite_factors,
            self.lattices + other.lattices,
            f"({self.label})*({other.label})")

    def inverse(self) -> "ProductForm":
        fin = tuple(FiniteFactor(f.location, f.orientation, -f.mult,
                                 f.normalized) for f in self.finite_factors)
        lat = tuple(LatticeFamily(f.orientation, f.generator, -f.mult, f.label)
                    for f in self.lattices)
        return ProductForm(1.0 / self.prefactor, -self.monomial_power,
                           -self.linear_coeff, fin, lat, f"1/({self.label})")

    def __truediv__(self, other: "ProductForm") -> "ProductForm":
        return self * other.inverse()


def _affine_lattice(step: float, offset: float, label: str,
                    orientation: int, mult: int = 1) -> LatticeFamily:
    gen = PowerLawGenerator(0.0, 1.0, step, offset)
    return LatticeFamily(orientation, lambda n: gen(n).real, mult, label)


def factorize_sin(q0: float, theta: float, sign: int = 1,
                  label: str | None = None) -> ProductForm:
    """Canonical product of sin(q0 z +/- theta)."""
    if q0 == 0:
        raise ExcludedAngle("q0 must be nonzero")
    if q0 < 0:
        # sin(-w) = -sin(w) == sin(w + pi): fold into the shift angle
        flipped = (math.pi + (theta if sign < 0 else -theta)) % TWO_PI
        pf = factorize_sin(-q0, flipped, +1, label)
        return ProductForm(pf.prefactor, pf.monomial_power, pf.linear_coeff,
                           pf.finite_factors, pf.lattices,
                           label or f"sin({q0}z{'+' if sign > 0 else '-'}{theta})")
    red = specfun.angle_reduce(theta)
    if abs(theta - math.pi / 2) < 1e-15 or abs(theta - 3 * math.pi / 2) < 1e-15:
        raise ExcludedAngle("theta = pi/2 and 3*pi/2 are excluded")
    const = (-1.0) ** math.floor(theta / math.pi) * q0 * specfun.sinc_plus(red)
    tp = red.theta_plus
    fin: tuple = ()
    mu = 0
    if tp == 0.0:
        mu = 1
    else:
        fin = (FiniteFactor(sign * tp / q0, +1, 1, normalized=False),)
    lat = (
        _affine_lattice(math.pi / q0, -sign * tp / q0, "sin-minus", -1),
        _affine_lattice(math.pi / q0, sign * tp / q0, "sin-plus", +1),
    )
    return ProductForm(const, mu, 0.0, fin, lat,
                       label or f"sin({q0}z{'+' if sign > 0 else '-'}{theta})")


def factorize_cos(q0: float, theta: float, sign: int = 1,
                  label: str | None = None) -> ProductForm:
    """Canonical product of cos(q0 z +/- theta)."""
    if q0 == 0:
        raise ExcludedAngle("q0 must be nonzero")
    if q0 < 0:
        # cos(-|q0| z +/- theta) = cos(|q0| z -/+ theta)
        return factorize_cos(-q0, theta, -sign, label)
    if abs(theta - math.pi / 2) < 1e-15 or abs(theta - 3 * math.pi / 2) < 1e-15:
        raise ExcludedAngle("theta = pi/2 and 3*pi/2 are excluded")
    red = specfun.angle_reduce(theta)
    tm = red.theta_minus
    const = (-1.0) ** math.floor(theta / math.pi + 0.5) * math.cos(tm)
    lat = (
        _affine_lattice(math.pi / q0, (-math.pi - sign * 2.0 * tm) / (2.0 * q0),
                        "cos-minus", -1),
        _affine_lattice(math.pi / q0, (-math.pi + sign * 2.0 * tm) / (2.0 * q0),
                        "cos-plus", +1),
    )
    return ProductForm(const, 0, 0.0, (), lat,
                       label or f"cos({q0}z{'+' if sign > 0 else '-'}{theta})")


def factorize_tan(q0: float, theta: float, sign: int = 1) -> ProductForm:
    """Canonical quotient product of tan(q0 z +/- theta)."""
    num = factorize_sin(q0, theta, sign)
    den = factorize_cos(q0, theta, sign)
    out = num / den
    return ProductForm(out.prefactor, out.monomial_power, out.linear_coeff,
                       out.finite_factors, out.lattices,
                       f"tan({q0}z{'+' if sign > 0 else '-'}{theta})")


def _reduce_s_angles(spec: SPlusMinusSpec):
    """Fold angles outside [0, pi] back via the reflection identities.
    Returns (reduced spec, constant multiplier)."""
    t1, t2, sg = spec.theta1, spec.theta2, spec.sign
    c = 1.0
    in1, in2 = t1 <= math.pi + 1e-15, t2 <= math.pi + 1e-15
    if in1 and in2:
        return spec, c
    if not in1 and not in2:
        t1, t2, c = t1 - math.pi, t2 - math.pi, -1.0
    elif in1:
        t2, sg = t2 - math.pi, -sg
    else:
        t1, sg, c = t1 - math.pi, -sg, -1.0
    return SPlusMinusSpec(sg, t1, t2, spec.p, spec.q, spec.q2), c


def factorize_s(spec: SPlusMinusSpec, table: ZeroTable | None = None) -> ProductForm:
    """Canonical product of the two-frequency sine combination.

    Angles in [0, pi] with both strictly interior use the translated zero
    lattice; boundary angle pairs reduce to the odd case with symmetric
    lattices.  The leading constant follows the closed forms: -(sin t1 +/-
    q2 sin t2) for a nonvanishing origin value, the cosine combination with
    the origin multiplicity otherwise.
    """
    spec, cmul = _reduce_s_angles(spec)
    t1, t2 = spec.theta1, spec.theta2
    interior = 1e-14 < t1 < math.pi - 1e-14 and 1e-14 < t2 < math.pi - 1e-14
    boundary = (t1 < 1e-14 or abs(t1 - math.pi) < 1e-14) and \
               (t2 < 1e-14 or abs(t2 - math.pi) < 1e-14)
    if not (interior or boundary):
        raise InvalidSpec(
            "supported angle pairs: both interior to (0, pi) or both in {0, pi}")

    if boundary:
        # fold {0, pi} combinations onto (0, 0)
        sg, c2 = spec.sign, 1.0
        if t1 >= math.pi - 1e-14 and t2 >= math.pi - 1e-14:
            c2 = -1.0
        elif t1 < 1e-14 and t2 >= math.pi - 1e-14:
            sg = -sg
        elif t1 >= math.pi - 1e-14 and t2 < 1e-14:
            sg, c2 = -sg, -1.0
        base = SPlusMinusSpec(sg, 0.0, 0.0, spec.p, spec.q, spec.q2)
        table = table or find_zeros(base)
        pf = _factorize_s_odd(base, table)
        return ProductForm(cmul * c2 * pf.prefactor, pf.monomial_power,
                           pf.linear_coeff, pf.finite_factors, pf.lattices,
                           f"S{'+' if spec.sign > 0 else '-'}({t1},{t2})")

    table = table or find_zeros(spec)
    T = spec.period
    origin = math.sin(t1) + spec.sign * spec.q2 * math.sin(t2)
    fin = []
    lat = []
    mu = 0
    for e in table.entries:
        if abs(e.location) < 1e-12:
            mu = e.multiplicity
        else:
            fin.append(FiniteFactor(e.location, -1, e.multiplicity,
                                    normalized=True))
        lat.append(_affine_lattice(T, e.location, f"z{e.location:.3f}+nT",
                                   -1, e.multiplicity))
        lat.append(_affine_lattice(T, -e.location, f"nT-z{e.location:.3f}",
                                   +1, e.multiplicity))
    if mu == 0:
        const = -origin
    else:
        # leading Taylor coefficient at the origin zero
        const = float(spec.derivative(0.0, mu)) / math.factorial(mu)
    return ProductForm(cmul * const, mu, 0.0, tuple(fin), tuple(lat),
                       f"S{'+' if spec.sign > 0 else '-'}({t1},{t2})")


def _factorize_s_odd(spec: SPlusMinusSpec, table: ZeroTable) -> ProductForm:
    """Odd case theta1 = theta2 = 0: symmetric zeros, even lattice pairs."""
    T = spec.period
    q1q2 = spec.q1 * spec.q2
    fin = []
    lat = []
    mu = 0
    for e in table.entries:
        if abs(e.location) < 1e-12:
            mu = e.multiplicity
        else:
            fin.append(FiniteFactor(e.location, -1, e.multiplicity, True))
            fin.append(FiniteFactor(e.location, +1, e.multiplicity, True))
        lat.append(_affine_lattice(T, e.location, "z+nT", -1, e.multiplicity))
        lat.append(_affine_lattice(T, e.location, "z+nT", +1, e.multiplicity))
    if mu not in (1, 3):
        raise InvalidSpec(f"unexpected origin multiplicity {mu}")
    const = float(spec.derivative(0.0, mu)) / math.factorial(mu)
    return ProductForm(const, mu, 0.0, tuple(fin), tuple(lat), "S-odd")


def factorize_tan_combo(spec: TanComboSpec) -> ProductForm:
    """Product form of  tan(w1 z - t1) +/- q3 tan(w2 z - t2)  via

        [ (1 +/- q3)/2 sin((w1+w2) z - (t1+t2))
          - (1 -/+ q3)/2 sin((w2-w1) z - (t2-t1)) ] / (cos(w1 z - t1) cos(w2 z - t2)).

    For q3 = 1 the numerator degenerates to a single shifted sine; otherwise
    it is a two-frequency combination in the scaled variable (w2 - w1) z.
    """
    w1, w2, t1, t2 = spec.omega1, spec.omega2, spec.theta1, spec.theta2
    cos1 = factorize_cos(w1, t1 % TWO_PI, -1)
    cos2 = factorize_cos(w2, t2 % TWO_PI, -1)
    c_plus = 0.5 * (1.0 + spec.sign * spec.q3)
    c_minus = 0.5 * (1.0 - spec.sign * spec.q3)
    if spec.q3 == 1.0:
        if spec.sign > 0:
            num = factorize_sin(w1 + w2, (t1 + t2) % TWO_PI, -1)
        else:
            if w2 == w1:
                raise InvalidSpec("tan(y)-tan(y) with equal shifts is zero")
            num = factorize_sin(w2 - w1, (t2 - t1) % TWO_PI, -1)
            num = ProductForm(-num.prefactor, num.monomial_power,
                              num.linear_coeff, num.finite_factors,
                              num.lattices, num.label)
        out = num / (cos1 * cos2)
        return ProductForm(out.prefactor, out.monomial_power, out.linear_coeff,
                           out.finite_factors, out.lattices,
                           f"tan-combo(q3=1,{'+' if spec.sign > 0 else '-'})")

    # two-frequency numerator: c_plus sin(Q y - (t1+t2)) - c_minus sin(y - (t2-t1))
    # with y = (w2 - w1) z and Q = (w1+w2)/(w2-w1) = p/(2q)
    if w2 <= w1:
        raise InvalidSpec("q3 != 1 requires omega2 > omega1")
    ratio = (w1 + w2) / (w2 - w1)
    if spec.p is not None and spec.q is not None:
        p_, q_ = spec.p, spec.q
        if abs(ratio - p_ / (2.0 * q_)) > 1e-9:
            raise InvalidSpec(
                f"(w1+w2)/(w2-w1) = {ratio} does not match p/(2q) = {p_}/{2 * q_}")
    else:
        frac = Fraction(ratio).limit_denominator(64)
        p_, q2_ = frac.numerator, frac.denominator
        if q2_ % 2 == 1:
            p_, q2_ = 2 * p_, 2 * q2_
        q_ = q2_ // 2
        if abs(ratio - p_ / (2.0 * q_)) > 1e-9 or math.gcd(p_, q_) != 1 \
                or not p_ > 2 * q_ > 1:
            raise InvalidSpec(
                "frequency ratio does not reduce to an admissible p/(2q)")
    r = c_plus / c_minus
    s_sign = -1 if r > 0 else 1
    s_spec = SPlusMinusSpec(s_sign, (t2 - t1) % TWO_PI, (t1 + t2) % TWO_PI,
                            p_, q_, abs(r))
    s_form = factorize_s(s_spec).scaled_argument(w2 - w1)
    num = ProductForm(-c_minus * s_form.prefactor, s_form.monomial_power,
                      s_form.linear_coeff, s_form.finite_factors,
                      s_form.lattices, s_form.label)
    out = num / (cos1 * cos2)
    return ProductForm(out.prefactor, out.monomial_power, out.linear_coeff,
                       out.finite_factors, out.lattices,
                       f"tan-combo(q3={spec.q3},{'+' if spec.sign > 0 else '-'})")


# --------------------------------------------------------------------------
# conversion to the Omega form
# --------------------------------------------------------------------------

@dataclass
class ConversionResult:
    omega: OmegaSpec
    delta0_star: complex
    b_star: complex
    notes: dict = field(default_factory=dict)
    report: ValidationReport | None = None


def to_omega(product: ProductForm, beta: float = 1.0,
             probe_depth: int = 400) -> ConversionResult:
    """Convert a factorized coefficient into the Omega coefficient form.

    Fundamental-period zeros become finite factors with their normalizing
    constants absorbed into delta0; lattice families become the infinite
    product's sequence rows (replicated per multiplicity); the residual
    linear exponent becomes the B coefficient.  The emitted spec is
    validated; a divergent reciprocal-square series raises
    ``SummabilityFailure``.
    """
    delta0 = complex(product.prefactor)
    d1, d2, d3, d4 = [], [], [], []
    mu1 = max(product.monomial_power, 0)
    mu2 = max(-product.monomial_power, 0)
    d2.extend([0.0] * mu1)
    d4.extend([0.0] * mu2)
    for f in product.finite_factors:
        if f.normalized:
            delta0 *= complex(f.location) ** (-f.mult)
        k, loc = abs(f.mult), complex(f.location)
        target = {(-1, True): d1, (1, True): d2, (-1, False): d3,
                  (1, False): d4}[(f.orientation, f.mult > 0)]
        target.extend([loc] * k)

    rows = {"h": [], "gamma": [], "zeta": [], "eta": []}
    for fam in product.lattices:
        if fam.mult > 0:
            kind = "h" if fam.orientation < 0 else "gamma"
        else:
            kind = "zeta" if fam.orientation < 0 else "eta"
        ns = np.arange(1, probe_depth + 1, dtype=float)
        vals = np.asarray(fam.generator(ns), dtype=float)
        if np.any(vals <= 0) or np.any(np.diff(vals) <= 0):
            raise SummabilityFailure(
                f"lattice {fam.label!r} is not positive increasing")
        slope = np.polyfit(np.log(ns[probe_depth // 2:]),
                           np.log(vals[probe_depth // 2:]), 1)[0]
        if slope <= 0.5:
            raise SummabilityFailure(
                f"lattice {fam.label!r} grows too slowly (exponent {slope:.2f})")
        rows[kind].extend([fam.generator] * abs(fam.mult))

    families = []
    for kind, gens in rows.items():
        if not gens:
            continue
        gens_t = tuple(gens)

        def gen(i, n, _g=gens_t):
            return _g[i](n)

        families.append(SequenceFamily(kind, len(gens_t), gen))

    finite = FiniteFactorSpec(delta0=delta0, a_coeff=0.0,
                              b_coeff=complex(product.linear_coeff),
                              d1=tuple(d1), d2=tuple(d2),
                              d3=tuple(d3), d4=tuple(d4))
    omega = OmegaSpec(finite, tuple(families), is_finite_product=not families)
    params = EquationParams(1.0, 0.0, 0.5, beta, 1.0)
    report = validate_hypotheses(omega, params, probe_depth=min(probe_depth, 200))
    notes = {"mu1": mu1, "mu2": mu2,
             "g_degree": 1 if product.linear_coeff else 0,
             "num_finite": len(d1) + len(d2),
             "den_finite": len(d3) + len(d4),
             "label": product.label}
    return ConversionResult(omega, delta0, complex(product.linear_coeff),
                            notes, report)


# --------------------------------------------------------------------------
# kernel / plug-in catalog
# --------------------------------------------------------------------------

def _sin_product_plugin(zeros_shift, label: str) -> PeriodicPlugin:
    """Product of  sin(pi(c - z + 1)) exp(i pi (c - z + 1))  over the shifts."""
    shifts = tuple(float(c) for c in zeros_shift)

    def log_eval(w: complex) -> complex:
        out = 0.0 + 0.0j
        for c in shifts:
            arg = c - w + 1.0
            out += log_sin_pi(arg) + 1j * math.pi * arg
        return out

    return PeriodicPlugin(lambda w: cmath.exp(log_eval(w)), label,
                          log_evaluator=log_eval)


def example_forcing_plugin() -> PeriodicPlugin:
    """The matched plug-in  exp(i pi w) sin(pi w)  for the sine forcing."""
    return PeriodicPlugin(
        lambda w: cmath.exp(1j * math.pi * w) * cmath.sin(math.pi * w),
        "e^{i pi w} sin(pi w)",
        log_evaluator=lambda w: 1j * math.pi * w + log_sin_pi(w))


def kernel_catalog(forcing_class: str, plugin_kind: str, d: float, d0: float,
                   zeros_star=None, zeros=None, kstar: int | None = None,
                   theta2: float | None = None, eps: float = 0.01):
    """Matched (kernel, plug-in) pairs for the catalog problem classes.

    ``forcing_class`` is 'bounded' (forcing bounded along the contour),
    'decaying' (forcing decays at the exponential catalog rate) or
    'example33' (the sine forcing with its matched plug-in).  The shift
    parameter must satisfy 0 < d - d0 < 1.  Kernels with sin powers carry
    a pole lattice; they decay but break the exact shift identity (see the
    particular-solution module docstring).
    """
    if not (0.0 < d - d0 < 1.0):
        raise KernelInvalid(f"need 0 < d - d0 < 1, got d={d}, d0={d0}")

    def plugin_for(kind: str) -> PeriodicPlugin:
        if kind == "P_I":
            return CONSTANT_PLUGIN
        if kind == "P_II":
            if not zeros_star:
                raise InsufficientZeros("P_II needs the starred zero table")
            return _sin_product_plugin(zeros_star[1:], "P_II")
        if kind == "P_III":
            if not zeros_star or not zeros:
                raise InsufficientZeros("P_III needs both zero tables")
            num = _sin_product_plugin(zeros_star[1:], "P_III-num")
            den_shifts = tuple(float(c) for c in zeros[1:])

            def log_eval(w: complex) -> complex:
                out = num.log_evaluator(w)
                for c in den_shifts:
                    arg = c - w + 1.0
                    out -= log_sin_pi(arg) + 1j * math.pi * (arg + w)
                out -= log_sin_pi(w)
                return out

            return PeriodicPlugin(lambda w: cmath.exp(log_eval(w)), "P_III",
                                  log_evaluator=log_eval)
        raise UnknownClass(f"unknown plug-in kind {plugin_kind!r}")

    if forcing_class == "example33":
        return sin_power_kernel(d, 6), example_forcing_plugin()
    if forcing_class == "decaying":
        if plugin_kind in ("P_I", "P_II"):
            return CONSTANT_KERNEL, plugin_for(plugin_kind)
        if plugin_kind == "P_III":
            return sin_power_kernel(d, 2), plugin_for(plugin_kind)
        raise UnknownClass(f"unknown plug-in kind {plugin_kind!r}")
    if forcing_class == "bounded":
        if plugin_kind == "P_I":
            return sin_power_kernel(d, 2), plugin_for(plugin_kind)
        if plugin_kind == "P_II":
            if kstar is None or theta2 is None:
                raise InsufficientZeros(
                    "bounded P_II selection needs kstar and theta2")
            margin = math.pi * (2.5 - 2.0 * kstar) - theta2 - eps
            power = 2 if margin > 0 else 2 * kstar
            return sin_power_kernel(d, power), plugin_for(plugin_kind)
        if plugin_kind == "P_III":
            return sin_power_kernel(d, 4), plugin_for(plugin_kind)
    raise UnknownClass(f"unknown forcing class {forcing_class!r}")
