"""The variable coefficient: finite factors times a normalized infinite product.

The coefficient has the shape

    Omega(z) = d0 * exp(A z^2 + B z)
               * prod(d1_i - z) prod(d2_i + z) / [prod(d3_i - z) prod(d4_i + z)]
               * Omega1(z),

where Omega1 is either identically 1 or an infinite product over four
sequence families (two in the numerator, two in the denominator), each
factor normalized so it tends to 1.  Families are closed-form generators,
not stored arrays.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidHypotheses, ParseError, PoleProximity, TruncationTooSmall

# family kinds, in the roles they play inside Omega1:
#   'h'     : (h_n - z)       numerator, minus orientation
#   'gamma' : (gamma_n + z)   numerator, plus orientation
#   'zeta'  : (zeta_n - z)    denominator, minus orientation
#   'eta'   : (eta_n + z)     denominator, plus orientation
KINDS = ("h", "gamma", "zeta", "eta")


@dataclass(frozen=True)
class PowerLawGenerator:
    """Closed-form sequence  c1 * n**p + c2 * n + c3 + i*c4."""

    c1: float
    p: float
    c2: float = 0.0
    c3: float = 0.0
    c4: float = 0.0

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        out = self.c1 * n ** self.p + self.c2 * n + self.c3
        if self.c4:
            return out + 1j * self.c4
        return out + 0j

    def as_dict(self) -> dict:
        return {"form": "affine-power", "c1": self.c1, "p": self.p,
                "c2": self.c2, "c3": self.c3, "c4": self.c4}


@dataclass(frozen=True)
class SequenceFamily:
    """One family of sequences indexed by (i, n), i < count, n >= 1."""

    kind: str
    count: int
    generator: Callable[[int, np.ndarray], np.ndarray]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidHypotheses(f"unknown family kind {self.kind!r}")
        if self.count < 0:
            raise InvalidHypotheses("family count must be >= 0")

    def term(self, i: int, n) -> complex:
        return complex(np.asarray(self.generator(i, np.asarray([n], dtype=float)))[0])

    def block(self, n_max: int) -> np.ndarray:
        """Values for i < count, 1 <= n <= n_max, as a (count, n_max) array."""
        ns = np.arange(1, n_max + 1, dtype=float)
        if self.count == 0:
            return np.zeros((0, n_max), dtype=complex)
        return np.vstack([np.asarray(self.generator(i, ns), dtype=complex)
                          for i in range(self.count)])


def family_from_power_laws(kind: str, rows: Sequence[PowerLawGenerator]) -> SequenceFamily:
    rows = tuple(rows)

    def gen(i, n):
        return rows[i](n)

    gen.rows = rows
    return SequenceFamily(kind, len(rows), gen)


@dataclass(frozen=True)
class FiniteFactorSpec:
    """Exponential factor and the four finite zero lists."""

    delta0: complex
    a_coeff: complex = 0.0
    b_coeff: complex = 0.0
    d1: tuple = ()
    d2: tuple = ()
    d3: tuple = ()
    d4: tuple = ()

    def __post_init__(self):
        if self.delta0 == 0:
            raise InvalidHypotheses("delta0 must be nonzero")
        if any(abs(complex(v)) == 0 for v in self.d1):
            raise InvalidHypotheses("d1 entries must be nonzero")
        if any(abs(complex(v)) == 0 for v in self.d3):
            raise InvalidHypotheses("d3 entries must be nonzero")

    @property
    def beta_power(self) -> int:
        return len(self.d1) + len(self.d2) - len(self.d3) - len(self.d4)


@dataclass(frozen=True)
class OmegaSpec:
    finite: FiniteFactorSpec
    families: tuple = ()
    is_finite_product: bool = True

    def family(self, kind: str) -> SequenceFamily | None:
        for fam in self.families:
            if fam.kind == kind:
                return fam
        return None

    def family_count(self, kind: str) -> int:
        fam = self.family(kind)
        return fam.count if fam is not None else 0

    def blocks(self, n_max: int) -> dict:
        return {k: (self.family(k).block(n_max) if self.family(k) is not None
                    else np.zeros((0, n_max), dtype=complex))
                for k in KINDS}


@dataclass(frozen=True)
class EquationParams:
    a1: float
    a2: float
    nu: float
    beta: float
    sigma: complex = 1.0

    def __post_init__(self):
        if self.a1 < 0 or self.a2 < 0 or self.a1 + self.a2 <= 0:
            raise InvalidHypotheses("need a1, a2 >= 0 and a1 + a2 > 0")
        if not (0.0 < self.nu < 1.0):
            raise InvalidHypotheses("nu must lie in (0, 1)")
        if self.beta == 0:
            raise InvalidHypotheses("beta must be nonzero")
        if complex(self.sigma).real < 0:
            raise InvalidHypotheses("Re sigma must be >= 0")

    def symbol(self, sigma=None) -> complex:
        """a1*sigma + a2*sigma**nu at the stored or supplied parameter."""
        s = complex(self.sigma if sigma is None else sigma)
        return self.a1 * s + self.a2 * s ** self.nu


@dataclass
class ClauseCheck:
    clause: str
    passed: bool
    detail: str = ""
    value: float | None = None


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    def add(self, clause: str, passed: bool, detail: str = "", value=None):
        self.checks.append(ClauseCheck(clause, bool(passed), detail, value))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def as_dict(self) -> dict:
        return {"passed": self.passed,
                "checks": [{"clause": c.clause, "passed": c.passed,
                            "detail": c.detail, "value": c.value}
                           for c in self.checks]}


def _tail_estimate(terms: np.ndarray) -> float:
    """Integral-tail extrapolation from the last decade of a positive series.

    Fits t_n ~ C n^-a on the final decade; returns the integral tail
    t_N * N / (a - 1), or inf when the fitted decay is too slow (a <= 1.05).
    """
    n = len(terms)
    if n < 20:
        return math.inf
    lo = max(4, int(n * 0.6))
    idx = np.arange(lo, n, dtype=float) + 1.0
    vals = np.abs(terms[lo:n])
    if np.all(vals < 1e-300):
        return 0.0
    vals = np.maximum(vals, 1e-300)
    slope, _ = np.polyfit(np.log(idx), np.log(vals), 1)
    a = -slope
    if a <= 1.05:
        return math.inf
    return float(vals[-1] * n / (a - 1.0))


def _is_complex_mode(blocks: dict) -> bool:
    return any(np.any(np.abs(b.imag) > 0) for b in blocks.values())


def _hatted(row: np.ndarray) -> np.ndarray:
    """Comparison magnitudes for complex sequences: Re when Im is constant
    along the row, else min(Re, Im)."""
    im = row.imag
    if np.allclose(im, im[0], rtol=0.0, atol=1e-14):
        return row.real.copy()
    return np.minimum(row.real, im)


def validate_hypotheses(spec: OmegaSpec, params: EquationParams,
                        probe_depth: int = 200,
                        tail_ceiling: float = 1e6) -> ValidationReport:
    """Check the structural hypotheses on parameters, finite factors and
    sequence families.

    For infinite products this probes monotonicity/positivity up to
    ``probe_depth`` and estimates both summability series by partial sums
    plus an integral-tail extrapolation; borderline tails are flagged in
    the report detail.
    """
    if probe_depth < 10:
        raise InvalidHypotheses("probe_depth must be >= 10")
    rep = ValidationReport()
    rep.add("params", True, f"a1={params.a1}, a2={params.a2}, nu={params.nu}, "
                            f"beta={params.beta}")
    rep.add("finite-nonzero", True,
            f"delta0={spec.finite.delta0}, |d1|={len(spec.finite.d1)}, "
            f"|d3|={len(spec.finite.d3)}")

    if spec.is_finite_product:
        rep.add("finite-product", True, "Omega1 == 1, no summability checks")
        return rep

    blocks = spec.blocks(probe_depth)
    complex_mode = _is_complex_mode(blocks)
    for kind in KINDS:
        b = blocks[kind]
        for i in range(b.shape[0]):
            row = b[i]
            if complex_mode:
                ok = bool(np.all(row.real > 0) and np.all(np.diff(row.real) > 0)
                          and np.all(row.imag >= -1e-15)
                          and np.all(np.diff(row.imag) >= -1e-12))
                label = "Re positive increasing, Im nonneg nondecreasing"
            else:
                ok = bool(np.all(row.real > 0) and np.all(np.diff(row.real) > 0))
                label = "positive strictly increasing"
            rep.add(f"monotone[{kind},{i}]", ok, label if ok else
                    f"row {i} of family {kind} violates: {label}")

    # first series: sum over n of sum_i 1/x_{i,n}^2 (hatted in complex mode)
    sq_terms = np.zeros(probe_depth)
    for kind in KINDS:
        b = blocks[kind]
        for i in range(b.shape[0]):
            mags = _hatted(b[i]) if complex_mode else b[i].real
            mags = np.maximum(np.abs(mags), 1e-300)
            sq_terms += 1.0 / mags ** 2
    tail_sq = _tail_estimate(sq_terms)
    partial_sq = float(np.sum(sq_terms))
    ok_sq = math.isfinite(tail_sq) and partial_sq + tail_sq < tail_ceiling
    rep.add("sum-squares", ok_sq,
            f"partial={partial_sq:.4g}, tail~{tail_sq:.4g}"
            + ("" if tail_sq < 0.1 * max(partial_sq, 1.0) else " (borderline)"),
            partial_sq + tail_sq if math.isfinite(tail_sq) else None)

    # second series: sum over n of |sum_i 1/h - sum 1/gamma - sum 1/zeta + sum 1/eta|
    comb = np.zeros(probe_depth, dtype=complex)
    signs = {"h": 1.0, "gamma": -1.0, "zeta": -1.0, "eta": 1.0}
    for kind in KINDS:
        b = blocks[kind]
        for i in range(b.shape[0]):
            comb += signs[kind] / b[i]
    comb_terms = np.abs(comb)
    tail_c = _tail_estimate(comb_terms)
    partial_c = float(np.sum(comb_terms))
    ok_c = math.isfinite(tail_c) and partial_c + tail_c < tail_ceiling
    rep.add("sum-balanced", ok_c,
            f"partial={partial_c:.4g}, tail~{tail_c:.4g}"
            + ("" if tail_c < 0.1 * max(partial_c, 1.0) else " (borderline)"),
            partial_c + tail_c if math.isfinite(tail_c) else None)
    return rep


@dataclass(frozen=True)
class OmegaValue:
    value: complex
    tail_estimate: float
    truncation: int


def omega_tails(spec: OmegaSpec, z: complex, truncation: int,
                probe: int = 400) -> float:
    """Truncation-error estimate for the normalized infinite product.

    Bounds |log of the dropped factors| by |z| * tail(balanced series)
    + 0.75 |z|^2 * tail(square series), the same first/second-order split
    that proves convergence of the product.
    """
    if spec.is_finite_product:
        return 0.0
    n0 = truncation
    blocks = spec.blocks(min(n0, probe))
    # extrapolate the two tail series from a probe window, then scale the
    # window tail to start at `truncation` via the fitted power law
    signs = {"h": 1.0, "gamma": -1.0, "zeta": -1.0, "eta": 1.0}
    m = min(n0, probe)
    sq = np.zeros(m)
    comb = np.zeros(m, dtype=complex)
    for kind in KINDS:
        b = blocks[kind]
        for i in range(b.shape[0]):
            mags = np.maximum(np.abs(b[i]), 1e-300)
            sq += 1.0 / mags ** 2
            comb += signs[kind] / b[i]
    absz = abs(z)

    def scaled_tail(terms: np.ndarray) -> float:
        lo = max(4, m // 2)
        vals = np.abs(terms[lo:])
        if np.all(vals < 1e-250):
            return 0.0
        idx = np.arange(lo, m, dtype=float) + 1.0
        vals = np.maximum(vals, 1e-300)
        slope, logc = np.polyfit(np.log(idx), np.log(vals), 1)
        a = -slope
        if a <= 1.05:
            return math.inf
        return float(math.exp(logc) * n0 ** (1.0 - a) / (a - 1.0))

    return absz * scaled_tail(np.abs(comb)) + 0.75 * absz ** 2 * scaled_tail(sq)


def evaluate_omega(spec: OmegaSpec, z, truncation: int = 10_000,
                   tol: float | None = None,
                   tol_pole: float = 1e-9) -> OmegaValue:
    """Evaluate the coefficient at z with the product truncated.

    The finite part is exact; the infinite part keeps ``truncation``
    normalized factors.  Raises ``PoleProximity`` when z sits within
    ``tol_pole`` of a denominator zero, and ``TruncationTooSmall`` when a
    requested tolerance exceeds the tail estimate.
    """
    z = complex(z)
    f = spec.finite
    val = complex(f.delta0) * np.exp(f.a_coeff * z * z + f.b_coeff * z)
    for d in f.d1:
        val *= (complex(d) - z)
    for d in f.d2:
        val *= (complex(d) + z)
    for d in f.d3:
        den = complex(d) - z
        if abs(den) < tol_pole:
            raise PoleProximity(f"z={z} within {tol_pole} of finite pole {d}")
        val /= den
    for d in f.d4:
        den = complex(d) + z
        if abs(den) < tol_pole:
            raise PoleProximity(f"z={z} within {tol_pole} of finite pole {-d}")
        val /= den

    tail = 0.0
    if not spec.is_finite_product:
        blocks = spec.blocks(truncation)
        num = np.ones(truncation, dtype=complex)
        den = np.ones(truncation, dtype=complex)
        for i in range(blocks["h"].shape[0]):
            num *= (blocks["h"][i] - z) / blocks["h"][i]
        for i in range(blocks["gamma"].shape[0]):
            num *= (blocks["gamma"][i] + z) / blocks["gamma"][i]
        for i in range(blocks["zeta"].shape[0]):
            dz = blocks["zeta"][i] - z
            if np.min(np.abs(dz)) < tol_pole:
                raise PoleProximity(f"z={z} within {tol_pole} of a zeta-type pole")
            den *= dz / blocks["zeta"][i]
        for i in range(blocks["eta"].shape[0]):
            dz = blocks["eta"][i] + z
            if np.min(np.abs(dz)) < tol_pole:
                raise PoleProximity(f"z={z} within {tol_pole} of an eta-type pole")
            den *= dz / blocks["eta"][i]
        val *= complex(np.prod(num / den))
        tail = omega_tails(spec, z, truncation)
        if tol is not None and not tail < tol:
            raise TruncationTooSmall(
                f"tail estimate {tail:.3g} exceeds requested tol {tol:.3g}")
    return OmegaValue(val, tail, truncation)


def rescale_to_unit_step(spec: OmegaSpec, params: EquationParams):
    """Return the spec/params in the unit-step variable y = z/beta.

    Finite deltas are divided by beta (signed), delta0 picks up
    beta**(M1+M2-M3-M4), A and B are rescaled by beta^2 and beta.  Sequence
    families are divided by |beta|; for beta < 0 the minus/plus family
    roles swap (h <-> gamma, zeta <-> eta) so the rescaled product is the
    same function of y, term by term.
    """
    beta = params.beta
    if beta == 1.0:
        return spec, params
    f = spec.finite
    new_finite = FiniteFactorSpec(
        delta0=complex(f.delta0) * beta ** f.beta_power,
        a_coeff=f.a_coeff * beta * beta,
        b_coeff=f.b_coeff * beta,
        d1=tuple(complex(v) / beta for v in f.d1),
        d2=tuple(complex(v) / beta for v in f.d2),
        d3=tuple(complex(v) / beta for v in f.d3),
        d4=tuple(complex(v) / beta for v in f.d4),
    )
    abeta = abs(beta)
    swap = {"h": "gamma", "gamma": "h", "zeta": "eta", "eta": "zeta"}

    def scaled(fam: SequenceFamily, kind: str) -> SequenceFamily:
        gen = fam.generator
        return SequenceFamily(kind, fam.count,
                              lambda i, n, _g=gen: np.asarray(_g(i, n)) / abeta)

    new_families = []
    for fam in spec.families:
        kind = fam.kind if beta > 0 else swap[fam.kind]
        new_families.append(scaled(fam, kind))
    new_spec = OmegaSpec(new_finite, tuple(new_families), spec.is_finite_product)
    new_params = EquationParams(params.a1, params.a2, params.nu, 1.0, params.sigma)
    return new_spec, new_params


# --- JSON schema -----------------------------------------------------------

def _c2pair(v) -> list:
    v = complex(v)
    return [v.real, v.imag]


def _pair2c(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    return complex(v[0], v[1])


def omega_spec_to_dict(spec: OmegaSpec) -> dict:
    fams = []
    for fam in spec.families:
        rows = []
        for i in range(fam.count):
            gen = fam.generator
            row = getattr(gen, "rows", None)
            if row is not None:
                rows.append(row[i].as_dict())
            else:
                raise ParseError("only affine-power generators serialize to JSON")
        fams.append({"kind": fam.kind, "count": fam.count, "generators": rows})
    f = spec.finite
    return {
        "delta0": _c2pair(f.delta0), "A": _c2pair(f.a_coeff), "B": _c2pair(f.b_coeff),
        "deltas": {"d1": [_c2pair(v) for v in f.d1], "d2": [_c2pair(v) for v in f.d2],
                   "d3": [_c2pair(v) for v in f.d3], "d4": [_c2pair(v) for v in f.d4]},
        "families": fams,
        "finite": spec.is_finite_product,
    }


def _family_from_json(obj: dict) -> SequenceFamily:
    rows = []
    for g in obj["generators"]:
        if g.get("form", "affine-power") != "affine-power":
            raise ParseError(f"unsupported generator form {g.get('form')!r}")
        rows.append(PowerLawGenerator(g.get("c1", 0.0), g.get("p", 1.0),
                                      g.get("c2", 0.0), g.get("c3", 0.0),
                                      g.get("c4", 0.0)))
    rows = tuple(rows)

    def gen(i, n):
        return rows[i](n)

    gen.rows = rows
    return SequenceFamily(obj["kind"], len(rows), gen)


def omega_spec_from_dict(obj: dict) -> OmegaSpec:
    try:
        deltas = obj.get("deltas", {})
        finite = FiniteFactorSpec(
            delta0=_pair2c(obj["delta0"]),
            a_coeff=_pair2c(obj.get("A", 0.0)),
            b_coeff=_pair2c(obj.get("B", 0.0)),
            d1=tuple(_pair2c(v) for v in deltas.get("d1", [])),
            d2=tuple(_pair2c(v) for v in deltas.get("d2", [])),
            d3=tuple(_pair2c(v) for v in deltas.get("d3", [])),
            d4=tuple(_pair2c(v) for v in deltas.get("d4", [])),
        )
        families = tuple(_family_from_json(f) for f in obj.get("families", [])
                         if f.get("count", len(f.get("generators", []))) > 0)
        return OmegaSpec(finite, families, bool(obj.get("finite", not families)))
    except (KeyError, TypeError, IndexError) as exc:
        raise ParseError(f"bad omega spec: {exc}") from exc


def load_omega_spec(path) -> OmegaSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(str(exc)) from exc
    return omega_spec_from_dict(obj)
