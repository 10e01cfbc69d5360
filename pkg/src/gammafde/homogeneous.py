"""Explicit homogeneous solutions built from Gamma-function products.

The solution of  (a1 s + a2 s^nu) Y(z+beta) - Omega(z) Y(z) = 0  is

    Y(z) = exp(cubic(z)) * (base / (a1 s + a2 s^nu))**(z/beta - 1/2)
           * P(z/beta) * L(z),

where ``base = delta0 * beta**(M1+M2-M3-M4)``, ``P`` is an arbitrary
1-periodic analytic plug-in, and ``L`` is a finite Gamma ratio times a
regularized infinite Gamma-product whose n-th factor carries a closed-form
exponential correction.  Everything is evaluated in log space: individual
Gamma factors grow factorially, the assembled logs stay moderate.

Internally every solution is reduced to the unit-step variable y = z/beta
with positive, increasing sequence families; the beta < 0 branch is realized
by the family swap performed in ``coefficient.rescale_to_unit_step``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import specfun
from .coefficient import (EquationParams, OmegaSpec, SequenceFamily,
                          ValidationReport, evaluate_omega,
                          rescale_to_unit_step, validate_hypotheses)
from .errors import (IncompatibleParams, InvalidHypotheses, OutOfRange,
                     RegionViolation, SummabilityFailure)
from .util import chunked_map

LN_2PI = specfun.LN_2PI
_NEG_INF = complex(-math.inf, 0.0)


def log1p_c(w):
    """Complex log(1+w) accurate for small |w| (vectorized)."""
    w = np.asarray(w, dtype=complex)
    u = 1.0 + w
    lu = np.log(u)
    d = u - 1.0
    exact = d == 0.0
    # the rounded increment d carries the exact ratio log(u)/d; scale by w
    scale = np.divide(w, d, out=np.ones_like(w), where=~exact)
    return np.where(exact, w, lu * scale)


def _stirling_tail_vec(x, order: int | None = None):
    """Vectorized Bernoulli tail of the Stirling series (Re x >= ~18).

    The order is trimmed by the smallest modulus in x: far from the origin
    a few terms already sit below double precision.
    """
    x = np.asarray(x, dtype=complex)
    if order is None:
        m = float(np.min(np.abs(x))) if x.size else 1e9
        if m >= 4000.0:
            order = 2
        elif m >= 260.0:
            order = 3
        elif m >= 60.0:
            order = 5
        else:
            order = len(specfun._STIRLING_COEF)
    out = np.zeros_like(x)
    xp = x.copy()
    x2 = x * x
    for c in specfun._STIRLING_COEF[:order]:
        out += c / xp
        xp *= x2
    return out


def log_sin_pi(w) -> complex:
    """log(sin(pi*w)) assembled from the dominant exponential; never overflows."""
    w = complex(w)
    if w.imag > 1.0:
        # sin(pi w) = -exp(-i pi w) (1 - exp(2 i pi w)) / (2i)
        return -1j * math.pi * w + cmath.log(1.0 - cmath.exp(2j * math.pi * w)) \
            + cmath.log(0.5j)
    if w.imag < -1.0:
        return 1j * math.pi * w + cmath.log(1.0 - cmath.exp(-2j * math.pi * w)) \
            - cmath.log(2j)
    s = cmath.sin(math.pi * w)
    if s == 0:
        return _NEG_INF
    return cmath.log(s)


@dataclass(frozen=True)
class PeriodicPlugin:
    """Analytic multiplier with period 1 in the rescaled variable."""

    evaluator: Callable[[complex], complex]
    label: str = "plugin"
    log_evaluator: Callable[[complex], complex] | None = None

    def __call__(self, w) -> complex:
        return complex(self.evaluator(complex(w)))

    def log_value(self, w) -> complex:
        if self.log_evaluator is not None:
            return complex(self.log_evaluator(complex(w)))
        v = self(w)
        if v == 0:
            return _NEG_INF
        return cmath.log(v)


CONSTANT_PLUGIN = PeriodicPlugin(lambda w: 1.0 + 0.0j, "1",
                                 log_evaluator=lambda w: 0.0 + 0.0j)
ZERO_PLUGIN = PeriodicPlugin(lambda w: 0.0 + 0.0j, "0",
                             log_evaluator=lambda w: _NEG_INF)


def verify_periodicity(plugin: PeriodicPlugin, tol: float = 1e-10,
                       points: Sequence[complex] = (0.13, 0.77 + 0.4j,
                                                    -0.35 + 1.1j, 2.6 - 0.8j)) -> bool:
    if plugin.label == "0":
        return True
    for w in points:
        a, b = plugin(w), plugin(complex(w) + 1.0)
        if abs(a - b) > tol * max(1.0, abs(a)):
            return False
    return True


@dataclass
class RegionReport:
    admissible: bool
    violated_clauses: list = field(default_factory=list)


def check_region(spec: OmegaSpec, params: EquationParams, z,
                 d0: float | None = None, depth: int = 400,
                 tol_region: float = 1e-9,
                 include_zero_clauses: bool = False) -> RegionReport:
    """Scan the analyticity-region clauses at the point z.

    Pole clauses exclude ``Re(y + d2) = -m`` / ``Re(y - d3) = 1 + m`` and
    the analogous family lattice conditions; with ``d0`` given, the shifted
    clauses needed by the contour construction are scanned as well; with
    ``include_zero_clauses`` the no-zero conditions (mirror clauses on d4,
    d1, eta, h) are added.  Equality is detected within ``tol_region``.
    """
    if d0 is not None and not (0.0 <= d0 <= 1.0):
        raise OutOfRange(f"d0={d0} outside [0, 1]")
    cspec, _ = rescale_to_unit_step(spec, params)
    y = complex(z) / params.beta
    x = y.real
    bad: list = []

    def hit(value: float, clause: str, index) -> None:
        # violation when `value` is within tol of a nonnegative integer
        m = round(value)
        if m >= -0.5 and abs(value - m) < tol_region:
            bad.append((clause, index))

    def finite_clause(clause, deltas, to_lattice):
        for i, v in enumerate(deltas):
            hit(to_lattice(complex(v).real), clause, ("delta", i))

    def family_clause(clause, kind, to_lattice):
        fam = cspec.family(kind)
        if fam is None or fam.count == 0 or cspec.is_finite_product:
            return
        block = fam.block(depth)
        for i in range(fam.count):
            offs = block[i].real
            # lattice values move one way as n grows; only nearby n can hit
            for n in np.nonzero(np.abs(offs) < abs(x) + 3.0)[0]:
                hit(to_lattice(offs[n]), clause, (f"{kind}[{i}]", int(n) + 1))

    # poles: Re(y + d2) = -m  and  Re(y - d3) = 1 + m, m >= 0
    finite_clause("finite-pole-d2", cspec.finite.d2, lambda c: -(x + c))
    finite_clause("finite-pole-d3", cspec.finite.d3, lambda c: x - c - 1.0)
    family_clause("family-pole-gamma", "gamma", lambda c: -(x + c))
    family_clause("family-pole-zeta", "zeta", lambda c: x - c - 1.0)

    if include_zero_clauses:
        finite_clause("finite-zero-d4", cspec.finite.d4, lambda c: -(x + c))
        finite_clause("finite-zero-d1", cspec.finite.d1, lambda c: x - c - 1.0)
        family_clause("family-zero-eta", "eta", lambda c: -(x + c))
        family_clause("family-zero-h", "h", lambda c: x - c - 1.0)

    if d0 is not None:
        # Re(y + d4) = -m - 1 + d0  and  Re(y - d1) = d0 + m
        finite_clause("shifted-d4", cspec.finite.d4,
                      lambda c: -(x + c) - 1.0 + d0)
        finite_clause("shifted-d1", cspec.finite.d1, lambda c: x - c - d0)
        family_clause("shifted-eta", "eta", lambda c: -(x + c) - 1.0 + d0)
        family_clause("shifted-h", "h", lambda c: x - c - d0)

    return RegionReport(not bad, bad)


@dataclass(frozen=True)
class HomogeneousSolution:
    """Immutable evaluable handle for the closed-form homogeneous solution."""

    spec: OmegaSpec                 # original spec
    params: EquationParams          # original params
    plugin: PeriodicPlugin
    truncation: int
    sign_beta: int
    cspec: OmegaSpec = field(repr=False)        # canonical unit-step spec
    cparams: EquationParams = field(repr=False)
    _blocks: dict = field(repr=False)           # kind -> (count, N) arrays
    _rn: np.ndarray = field(repr=False)         # per-n exponential correction
    _powlog: np.ndarray = field(repr=False)     # per-n log of the power base
    _minre: np.ndarray = field(repr=False)      # per-n smallest Re over rows

    @property
    def beta(self) -> float:
        return self.params.beta

    def power_base(self) -> complex:
        f = self.cspec.finite
        return complex(f.delta0)

    # -- assembled logs ----------------------------------------------------

    def _log_cubic(self, y: complex) -> complex:
        f = self.cspec.finite
        a, b = f.a_coeff, f.b_coeff
        if a == 0 and b == 0:
            return 0.0 + 0.0j
        return a * y ** 3 / 3.0 + (b - a) * y ** 2 / 2.0 + (a - 3.0 * b) * y / 6.0

    def _log_finite(self, y: complex) -> complex:
        f = self.cspec.finite
        out = 0.0 + 0.0j
        for v in f.d2:
            out += specfun.log_gamma(complex(v) + y)
        for v in f.d3:
            out += specfun.log_gamma(complex(v) - y + 1.0)
        for v in f.d4:
            out -= specfun.log_gamma(complex(v) + y)
        for v in f.d1:
            out -= specfun.log_gamma(complex(v) - y + 1.0)
        return out

    def _log_product(self, y: complex) -> complex:
        """Log of the regularized infinite product, truncated."""
        if self.cspec.is_finite_product or self.truncation == 0:
            return 0.0 + 0.0j
        n_switch = int(np.searchsorted(
            self._minre, max(24.0, 3.0 * abs(y) + 12.0)))
        out = 0.0 + 0.0j
        # direct branch: small n, assembled from full log-Gammas
        for n in range(min(n_switch, self.truncation)):
            t = (y - 0.5) * self._powlog[n] + self._rn[n]
            for i in range(self._blocks["gamma"].shape[0]):
                t += specfun.log_gamma(self._blocks["gamma"][i, n] + y)
            for i in range(self._blocks["zeta"].shape[0]):
                t += specfun.log_gamma(self._blocks["zeta"][i, n] - y + 1.0)
            for i in range(self._blocks["eta"].shape[0]):
                t -= specfun.log_gamma(self._blocks["eta"][i, n] + y)
            for i in range(self._blocks["h"].shape[0]):
                t -= specfun.log_gamma(self._blocks["h"][i, n] - y + 1.0)
            out += t
        if n_switch >= self.truncation:
            return out
        # stable branch: Stirling main terms cancelled against the
        # regularizing exponents in closed form
        sl = slice(n_switch, self.truncation)

        def plus_rows(block):
            if block.shape[0] == 0:
                return 0.0
            a = block[:, sl]
            return np.sum((a + y - 0.5) * log1p_c(y / a) - y
                          + _stirling_tail_vec(a + y))

        def minus_rows(block):
            if block.shape[0] == 0:
                return 0.0
            b = block[:, sl]
            return np.sum((b - y + 0.5) * log1p_c((1.0 - y) / b) + y - 1.0
                          + _stirling_tail_vec(1.0 + b - y))

        out += plus_rows(self._blocks["gamma"]) + minus_rows(self._blocks["zeta"])
        out -= plus_rows(self._blocks["eta"]) + minus_rows(self._blocks["h"])
        return out

    def _log_core_many(self, ys: np.ndarray) -> np.ndarray:
        """Vectorized cubic + finite + product logs over an array of y."""
        f = self.cspec.finite
        a, b = f.a_coeff, f.b_coeff
        out = a * ys ** 3 / 3.0 + (b - a) * ys ** 2 / 2.0 + (a - 3.0 * b) * ys / 6.0
        for v in f.d2:
            out += specfun.log_gamma_vec(complex(v) + ys)
        for v in f.d3:
            out += specfun.log_gamma_vec(complex(v) - ys + 1.0)
        for v in f.d4:
            out -= specfun.log_gamma_vec(complex(v) + ys)
        for v in f.d1:
            out -= specfun.log_gamma_vec(complex(v) - ys + 1.0)
        if self.cspec.is_finite_product or self.truncation == 0:
            return out
        n_switch = int(np.searchsorted(
            self._minre, float(max(24.0, 3.0 * np.max(np.abs(ys)) + 12.0))))
        n_switch = min(n_switch, self.truncation)
        for n in range(n_switch):
            out += (ys - 0.5) * self._powlog[n] + self._rn[n]
            for i in range(self._blocks["gamma"].shape[0]):
                out += specfun.log_gamma_vec(self._blocks["gamma"][i, n] + ys)
            for i in range(self._blocks["zeta"].shape[0]):
                out += specfun.log_gamma_vec(self._blocks["zeta"][i, n] - ys + 1.0)
            for i in range(self._blocks["eta"].shape[0]):
                out -= specfun.log_gamma_vec(self._blocks["eta"][i, n] + ys)
            for i in range(self._blocks["h"].shape[0]):
                out -= specfun.log_gamma_vec(self._blocks["h"][i, n] - ys + 1.0)
        if n_switch >= self.truncation:
            return out
        sl = slice(n_switch, self.truncation)
        yc = ys[:, None]

        def plus_rows(block):
            acc = np.zeros(len(ys), dtype=complex)
            for i in range(block.shape[0]):
                a_ = block[i, sl][None, :]
                acc += np.sum((a_ + yc - 0.5) * log1p_c(yc / a_) - yc
                              + _stirling_tail_vec(a_ + yc), axis=1)
            return acc

        def minus_rows(block):
            acc = np.zeros(len(ys), dtype=complex)
            for i in range(block.shape[0]):
                b_ = block[i, sl][None, :]
                acc += np.sum((b_ - yc + 0.5) * log1p_c((1.0 - yc) / b_)
                              + yc - 1.0 + _stirling_tail_vec(1.0 + b_ - yc),
                              axis=1)
            return acc

        out += plus_rows(self._blocks["gamma"]) + minus_rows(self._blocks["zeta"])
        out -= plus_rows(self._blocks["eta"]) + minus_rows(self._blocks["h"])
        return out

    def log_evaluate_many(self, zs, sigma=None, with_plugin: bool = True,
                          with_power_base: bool = True,
                          with_sigma_power: bool = True,
                          chunk: int = 64) -> np.ndarray:
        """Vectorized ``log_evaluate`` over an array of points."""
        zs = np.asarray(zs, dtype=complex)
        ys = zs / self.params.beta
        pieces = [ys[lo:lo + chunk] for lo in range(0, len(ys), chunk)]
        out = np.concatenate(chunked_map(self._log_core_many, pieces)) \
            if pieces else np.empty(0, dtype=complex)
        power = 0.0 + 0.0j
        if with_power_base:
            power += cmath.log(self.power_base())
        if with_sigma_power:
            power -= cmath.log(self.params.symbol(sigma))
        out += (ys - 0.5) * power
        if with_plugin:
            out += np.array([self.plugin.log_value(y) for y in ys])
        return out

    def log_evaluate(self, z, sigma=None, with_plugin: bool = True,
                     with_power_base: bool = True,
                     with_sigma_power: bool = True, check: bool = False) -> complex:
        """Log of the solution; the power-base and sigma factors can be
        excluded for ratio work."""
        z = complex(z)
        if check:
            rep = check_region(self.spec, self.params, z)
            if not rep.admissible:
                raise RegionViolation(f"z={z}: {rep.violated_clauses[:4]}")
        y = z / self.params.beta
        out = self._log_cubic(y) + self._log_finite(y) + self._log_product(y)
        power = 0.0 + 0.0j
        if with_power_base:
            power += cmath.log(self.power_base())
        if with_sigma_power:
            power -= cmath.log(self.params.symbol(sigma))
        out += (y - 0.5) * power
        if with_plugin:
            out += self.plugin.log_value(y)
        return out

    def evaluate(self, z, sigma=None, check: bool = True) -> complex:
        z = complex(z)
        if check:
            rep = check_region(self.spec, self.params, z)
            if not rep.admissible:
                raise RegionViolation(f"z={z}: {rep.violated_clauses[:4]}")
        lv = self.log_evaluate(z, sigma, check=False)
        if lv.real == -math.inf:
            return 0.0 + 0.0j
        return cmath.exp(lv)


def build(spec: OmegaSpec, params: EquationParams,
          plugin: PeriodicPlugin = CONSTANT_PLUGIN,
          truncation: int = 10_000,
          validate: bool = True) -> HomogeneousSolution:
    """Construct the homogeneous-solution handle.

    Validates the hypotheses, rescales to the unit step internally and
    precomputes the family values, per-factor corrections and power logs
    up to ``truncation``.
    """
    if validate:
        rep = validate_hypotheses(spec, params, probe_depth=max(
            10, min(200, truncation)))
        if not rep.passed:
            raise InvalidHypotheses(
                "; ".join(c.detail or c.clause for c in rep.failures()))
        if not verify_periodicity(plugin):
            raise InvalidHypotheses(
                f"plugin {plugin.label!r} is not 1-periodic on the probe grid")
    cspec, cparams = rescale_to_unit_step(spec, params)
    n = truncation
    blocks = cspec.blocks(n) if not cspec.is_finite_product else \
        {k: np.zeros((0, n), dtype=complex) for k in ("h", "gamma", "zeta", "eta")}
    m_counts = {k: blocks[k].shape[0] for k in blocks}
    rn = np.zeros(n, dtype=complex)
    powlog = np.zeros(n, dtype=complex)
    if not cspec.is_finite_product:
        const = -0.5 * LN_2PI * (m_counts["gamma"] - m_counts["h"]
                                 + m_counts["zeta"] - m_counts["eta"])
        rn += const
        for i in range(m_counts["gamma"]):
            a = blocks["gamma"][i]
            rn -= a * (np.log(a) - 1.0)
            powlog -= np.log(a)
        for i in range(m_counts["zeta"]):
            a = blocks["zeta"][i]
            rn -= a * (np.log(a) - 1.0)
            powlog += np.log(a)
        for i in range(m_counts["h"]):
            a = blocks["h"][i]
            rn += a * (np.log(a) - 1.0)
            powlog -= np.log(a)
        for i in range(m_counts["eta"]):
            a = blocks["eta"][i]
            rn += a * (np.log(a) - 1.0)
            powlog += np.log(a)
        all_re = [blocks[k][i].real for k in blocks for i in range(m_counts[k])]
        minre = np.min(np.vstack(all_re), axis=0) if all_re else \
            np.full(n, np.inf)
        minre = np.minimum.accumulate(minre[::-1])[::-1]
    else:
        minre = np.full(n, np.inf)
    return HomogeneousSolution(
        spec=spec, params=params, plugin=plugin, truncation=truncation,
        sign_beta=1 if params.beta > 0 else -1,
        cspec=cspec, cparams=cparams, _blocks=blocks, _rn=rn,
        _powlog=powlog, _minre=minre)


def evaluate(sol: HomogeneousSolution, z, sigma=None) -> complex:
    return sol.evaluate(z, sigma)


def _relative_diff_from_logs(log_a: complex, log_b: complex) -> float:
    """|e^a - e^b| / (1 + |e^b|), overflow-safe."""
    ra, rb = log_a.real, log_b.real
    if rb == -math.inf and ra == -math.inf:
        return 0.0
    if rb > 500.0 or ra > 500.0:
        return abs(cmath.exp(log_a - log_b) - 1.0)
    ea, eb = cmath.exp(log_a), cmath.exp(log_b)
    return abs(ea - eb) / (1.0 + abs(eb))


def _log_omega_truncated(sol: HomogeneousSolution, z) -> complex:
    """Log of the coefficient truncated at the solution's own depth, so the
    residual telescopes exactly."""
    cspec = sol.cspec
    y = complex(z) / sol.params.beta
    f = cspec.finite
    out = cmath.log(complex(f.delta0)) + f.a_coeff * y * y + f.b_coeff * y
    for v in f.d1:
        out += cmath.log(complex(v) - y)
    for v in f.d2:
        out += cmath.log(complex(v) + y)
    for v in f.d3:
        out -= cmath.log(complex(v) - y)
    for v in f.d4:
        out -= cmath.log(complex(v) + y)
    if not cspec.is_finite_product:
        b = sol._blocks
        acc = np.zeros(sol.truncation, dtype=complex)
        for i in range(b["h"].shape[0]):
            acc += log1p_c(-y / b["h"][i])
        for i in range(b["gamma"].shape[0]):
            acc += log1p_c(y / b["gamma"][i])
        for i in range(b["zeta"].shape[0]):
            acc -= log1p_c(-y / b["zeta"][i])
        for i in range(b["eta"].shape[0]):
            acc -= log1p_c(y / b["eta"][i])
        out += complex(np.sum(acc))
    return out


def residual(sol: HomogeneousSolution, z, sigma=None) -> float:
    """Relative residual of the difference equation at (z, z+beta).

    The coefficient is truncated at the same depth as the solution's
    product so the Gamma factors telescope; what remains is roundoff.
    """
    z = complex(z)
    beta = sol.params.beta
    for point in (z, z + beta):
        rep = check_region(sol.spec, sol.params, point)
        if not rep.admissible:
            raise RegionViolation(f"z={point}: {rep.violated_clauses[:4]}")
    log_a = cmath.log(sol.params.symbol(sigma)) + sol.log_evaluate(z + beta, sigma)
    log_b = _log_omega_truncated(sol, z) + sol.log_evaluate(z, sigma)
    return _relative_diff_from_logs(log_a, log_b)


def asymptotic_ratio(sol: HomogeneousSolution, re_z: float,
                     im_grid: Sequence[float]) -> list[float]:
    """|Phi(z)| / (|z|^2 ln|z|) along a vertical grid.

    Phi is the log-difference between the Gamma-product block and the
    coefficient raised to (z/beta - 1/2); the coefficient log is branch
    tracked by nearest-branch continuation from the previous grid point.
    """
    if any(abs(t) < 10.0 for t in im_grid):
        raise OutOfRange("asymptotic grid requires |Im z| >= 10")
    out = []
    prev_logw = None
    for t in im_grid:
        z = complex(re_z, t)
        y = z / sol.params.beta
        log_l = sol._log_finite(y) + sol._log_product(y)
        logw = _log_omega_truncated(sol, z) \
            - cmath.log(complex(sol.cspec.finite.delta0)) \
            - sol.cspec.finite.a_coeff * y * y - sol.cspec.finite.b_coeff * y
        if prev_logw is not None:
            k = round((prev_logw.imag - logw.imag) / (2.0 * math.pi))
            logw += 2j * math.pi * k
        prev_logw = logw
        phi = log_l - (y - 0.5) * logw
        out.append(abs(phi) / (abs(z) ** 2 * math.log(abs(z))))
    return out


# --- appendix estimates -----------------------------------------------------


def _series_tail_factor(w):
    """sum_{j>=1} w^j / (j+3), vectorized; |w| < 1."""
    w = np.asarray(w, dtype=complex)
    out = np.zeros_like(w)
    small = np.abs(w) < 0.25
    if np.any(small):
        ws = w[small]
        acc = np.zeros_like(ws)
        wp = ws.copy()
        for j in range(1, 40):
            acc += wp / (j + 3)
            wp *= ws
        out[small] = acc
    big = ~small
    if np.any(big):
        wb = w[big]
        out[big] = (-np.log(1.0 - wb) - wb - wb ** 2 / 2.0 - wb ** 3 / 3.0) / wb ** 3
    return out


@dataclass
class BoundReport:
    n_start: int
    rows: list                     # (z, s1, s2, s3, s4)
    fitted: dict                   # bound name -> fitted constant
    breaches: list
    slack: float

    @property
    def passed(self) -> bool:
        return not self.breaches


def appendix_bounds(beta_seq, c_star: float, z_values,
                    tol: float = 1e-10, slack: float = 1.5,
                    max_terms: int = 2_000_000) -> BoundReport:
    """Evaluate the four truncation-bound sums and their growth envelopes.

    ``beta_seq`` is a positive strictly increasing sequence (a
    ``SequenceFamily`` with one row, or a plain callable of n).  The
    constants are fitted at the first z; envelope breaches (fitted bound
    times ``slack``) at the remaining z are reported.
    """
    if isinstance(beta_seq, SequenceFamily):
        fn = lambda n: np.asarray(beta_seq.generator(0, n)).real
    else:
        fn = lambda n: np.asarray(beta_seq(n), dtype=float)
    z_values = [complex(z) for z in z_values]
    if any(abs(z) < 2.0 for z in z_values):
        raise OutOfRange("appendix bounds need |z| >= 2")

    probe = fn(np.arange(1, 2001, dtype=float))
    if np.any(np.diff(probe) <= 0) or np.any(probe <= 0):
        raise SummabilityFailure("sequence must be positive and increasing")
    slope = np.polyfit(np.log(np.arange(1000, 2001, dtype=float)),
                       np.log(probe[999:2000]), 1)[0]
    if slope <= 0.5:
        raise SummabilityFailure(
            f"sum of reciprocal squares diverges (growth exponent {slope:.3f})")

    zmax = max(abs(z.real) for z in z_values)
    n0 = 1
    while fn(np.array([float(n0)]))[0] <= max(4 * zmax, 4 * zmax + 2 * abs(c_star) - 1e-12, 1.0):
        n0 += 1
        if n0 > 10_000_000:
            raise SummabilityFailure("could not satisfy the start-index bounds")

    def sums_at(z: complex):
        s = np.zeros(3)
        g_acc = np.zeros(4, dtype=complex)   # signed sums for the differences
        n = n0
        chunk = 20_000
        while n <= max_terms:
            ns = np.arange(n, min(n + chunk, max_terms + 1), dtype=float)
            b = fn(ns)
            bc = b + c_star
            wp, wm = z / (b + z), z / (b - z)
            wpc, wmc = z / (bc + z), z / (bc - z)
            t1 = np.abs(z / (b * (b + z))) + np.abs(z / (b * (b - z)))
            t2 = (np.abs(z / ((b + z + c_star) * (b + z)))
                  + np.abs(z / ((b - z + c_star) * (b - z)))
                  + np.abs(z / ((b - z + c_star) * (b + z))))
            gp = b * wp ** 3 * _series_tail_factor(wp)
            gm = b * wm ** 3 * _series_tail_factor(-wm)
            gpc = bc * wpc ** 3 * _series_tail_factor(wpc)
            gmc = bc * wmc ** 3 * _series_tail_factor(-wmc)
            inc = np.array([np.sum(t1), np.sum(t2), np.sum(np.abs(gp) + np.abs(gm))])
            s += inc
            g_acc += np.array([np.sum(gp), np.sum(gpc), np.sum(gm), np.sum(gmc)])
            n += chunk
            if np.all(inc < tol * np.maximum(s, 1.0)):
                break
        s4 = abs(g_acc[0] - g_acc[1]) + abs(g_acc[2] - g_acc[3])
        return float(s[0]), float(s[1]), float(s[2]), float(s4)

    rows = [(z, *sums_at(z)) for z in z_values]

    zr = abs(z_values[0])
    env = {
        "log": lambda az: 1.0 + math.log(az),
        "const": lambda az: 1.0,
        "sq-log": lambda az: 1.0 + az ** 2 + az ** 2 * math.log(az),
        "linear": lambda az: az,
    }
    names = ("log", "const", "sq-log", "linear")
    fitted = {}
    for k, name in enumerate(names):
        fitted[name] = rows[0][k + 1] / env[name](zr)
    breaches = []
    for z, *svals in rows[1:]:
        for k, name in enumerate(names):
            bound = fitted[name] * env[name](abs(z)) * slack
            if svals[k] > bound:
                breaches.append((name, z, svals[k], bound))
    return BoundReport(n_start=n0, rows=rows, fitted=fitted,
                       breaches=breaches, slack=slack)


def compose_multidimensional(solutions: Sequence[HomogeneousSolution],
                             leading_base: complex) -> Callable:
    """Product evaluator for the k-dimensional difference equation.

    Each component advances by its own step; the common power base
    ``leading_base`` (delta0 times the first step's power correction) is
    applied once, with the per-component power bases stripped.
    """
    solutions = list(solutions)
    if not solutions:
        raise IncompatibleParams("need at least one component")
    p0 = solutions[0].params
    for sol in solutions[1:]:
        p = sol.params
        if (p.a1, p.a2, p.nu) != (p0.a1, p0.a2, p0.nu):
            raise IncompatibleParams("components disagree on (a1, a2, nu)")
    leading_base = complex(leading_base)

    def evaluator(zvec, sigma=None) -> complex:
        if len(zvec) != len(solutions):
            raise IncompatibleParams(
                f"got {len(zvec)} coordinates for {len(solutions)} components")
        s = solutions[0].params.symbol(sigma)
        y1 = complex(zvec[0]) / solutions[0].params.beta
        log_out = (y1 - 0.5) * (cmath.log(leading_base) - cmath.log(s))
        for sol, zj in zip(solutions, zvec):
            log_out += sol.log_evaluate(zj, sigma, with_power_base=False,
                                        with_sigma_power=False)
        return cmath.exp(log_out)

    return evaluator
