"""Particular solutions via the cotangent-kernel contour integral.

The particular solution is

    Y_ih(z) = Y_h(z; P1) / K1(0) * integral over the vertical contour of
              F(z + beta*xi) K(xi) / [(a1 s + a2 s^nu) Y_h(z + beta*xi + beta; P1)] dxi,

with K(xi) = (1/2i)(cot(pi xi) + i) K1(xi).  The kernel factor K1 and the
plug-in P1 form a matched pair: together with the forcing they must make
the integrand decay along both rays.  The contour is the straight line
Re xi = -d0 for d0 in (0, 1); at d0 in {0, 1} a small half-circle detour
avoids the cotangent pole sitting on the line.

The combination (cot + i) decays upward and tends to 2i downward, so the
downward decay budget falls on K1 and on F/Y_h.  A 1-periodic K1 that
decays in both directions necessarily carries a lattice of poles; one of
them always lies in the unit shift strip, and the difference equation then
holds only up to that pole's residue (see ``kernel_pole_defect``).  With a
pole-free (constant) K1 and a decaying F/Y_h ratio the identity is exact.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (BadContour, DecayViolation, KernelInvalid, OutOfRange,
                     RegionViolation)
from .homogeneous import (HomogeneousSolution, check_region, log_sin_pi,
                          _log_omega_truncated, _relative_diff_from_logs)

LOG_2I = cmath.log(2j)


@dataclass(frozen=True)
class ContourSpec:
    """The vertical integration path with optional detour."""

    d0: float
    d1: float = 0.05
    half_height: float = 40.0
    nodes_per_unit: int = 40

    def __post_init__(self):
        if not (0.0 <= self.d0 <= 1.0):
            raise BadContour(f"d0={self.d0} outside [0, 1]")
        if not (0.0 < self.d1 < 1.0 / 8.0):
            raise BadContour(f"d1={self.d1} outside (0, 1/8)")
        if self.half_height < 10.0:
            raise BadContour("half_height must be >= 10")
        if self.nodes_per_unit < 4:
            raise BadContour("nodes_per_unit must be >= 4")


@dataclass(frozen=True)
class QuadraturePath:
    nodes: np.ndarray
    weights: np.ndarray      # complex, include the path element d(xi)
    node_count: int
    pieces: tuple


def _ray_nodes(re: float, t_lo: float, t_hi: float, npu: int):
    n = max(8, int(round((t_hi - t_lo) * npu)))
    t = np.linspace(t_lo, t_hi, n + 1)
    w = np.full(n + 1, t[1] - t[0], dtype=complex)
    w[0] *= 0.5
    w[-1] *= 0.5
    return re + 1j * t, 1j * w


def build_contour(spec: ContourSpec) -> QuadraturePath:
    """Ordered nodes/weights traversing the path with increasing Im xi.

    Composite trapezoid on the rays; arc-parameter trapezoid on the
    half-circle detour, sampled proportionally to arc length.
    """
    T, npu = spec.half_height, spec.nodes_per_unit
    if 0.0 < spec.d0 < 1.0:
        nodes, weights = _ray_nodes(-spec.d0, -T, T, npu)
        return QuadraturePath(nodes, weights, len(nodes), ("line",))
    center = -1.0 if spec.d0 == 1.0 else 0.0
    lo_n, lo_w = _ray_nodes(center, -T, -spec.d1, npu)
    hi_n, hi_w = _ray_nodes(center, spec.d1, T, npu)
    n_arc = max(12, int(math.ceil(math.pi * spec.d1 * npu)) + 4)
    phi = np.linspace(-math.pi / 2.0, math.pi / 2.0, n_arc + 1)
    arc_n = center + spec.d1 * np.exp(1j * phi)
    arc_w = 1j * spec.d1 * np.exp(1j * phi) * (phi[1] - phi[0])
    arc_w[0] *= 0.5
    arc_w[-1] *= 0.5
    nodes = np.concatenate([lo_n, arc_n, hi_n])
    weights = np.concatenate([lo_w, arc_w, hi_w])
    return QuadraturePath(nodes, weights, len(nodes),
                          ("ray", "half-circle", "ray"))


@dataclass(frozen=True)
class KernelSpec:
    """The periodic decaying factor of the cotangent kernel."""

    k1: Callable[[complex], complex]
    label: str = "kernel"
    log_k1: Callable[[complex], complex] | None = None
    pole_re_offsets: tuple = ()     # Re positions (mod 1) of the pole lattice
    d_parameter: float | None = None

    def log_value(self, xi) -> complex:
        if self.log_k1 is not None:
            return complex(self.log_k1(complex(xi)))
        v = complex(self.k1(complex(xi)))
        if v == 0:
            return complex(-math.inf, 0.0)
        return cmath.log(v)


CONSTANT_KERNEL = KernelSpec(lambda xi: 1.0 + 0.0j, "1",
                             log_k1=lambda xi: 0.0 + 0.0j)


def sin_power_kernel(d: float, power: int) -> KernelSpec:
    """sin(pi d)**power / sin(pi (xi+d))**power; poles at xi = -d mod 1."""
    if abs(math.sin(math.pi * d)) < 1e-12:
        raise KernelInvalid(f"sin(pi d) vanishes at d={d}")
    logc = power * cmath.log(cmath.sin(math.pi * d))

    def log_k1(xi):
        return logc - power * log_sin_pi(xi + d)

    def k1(xi):
        return cmath.exp(log_k1(xi))

    return KernelSpec(k1, f"sin^{power}(pi d)/sin^{power}(pi(xi+d)), d={d}",
                      log_k1=log_k1, pole_re_offsets=((-d) % 1.0,),
                      d_parameter=d)


@dataclass(frozen=True)
class ForcingSpec:
    """Right-hand side with its declared decay class."""

    f: Callable       # (z, sigma) -> complex
    decay_class: str = "bounded"        # 'bounded' | 'exp_decay'
    rate: float = 0.0
    log_f: Callable | None = None
    analytic_strip: tuple | None = None
    label: str = "forcing"

    def log_value(self, z, sigma) -> complex:
        if self.log_f is not None:
            return complex(self.log_f(complex(z), sigma))
        v = complex(self.f(complex(z), sigma))
        if v == 0:
            return complex(-math.inf, 0.0)
        return cmath.log(v)


ZERO_FORCING = ForcingSpec(lambda z, s: 0.0 + 0.0j, "exp_decay",
                           rate=math.inf,
                           log_f=lambda z, s: complex(-math.inf, 0.0),
                           label="0")


def validate_kernel(kernel: KernelSpec, probe_height: float = 25.0,
                    tol: float = 1e-9) -> "ValidationReport":
    """Probe the kernel requirements.

    Periodicity and the origin value are checked on a grid, the decay of
    K1 along Re xi = -1/2 is measured, pole blow-ups are probed along the
    lines Re xi in {-1, -1/2, 0}, and the (cot + i) limits are measured.
    The pole lattice positions carried by the spec are reported separately:
    a periodic kernel that decays in both directions necessarily has poles
    somewhere in every unit strip.
    """
    from .coefficient import ValidationReport

    rep = ValidationReport()
    pts = [-0.37, -0.11 + 3.2j, -0.93 - 2.4j, -0.5 + 0.7j]
    per = max(abs(cmath.exp(kernel.log_value(w + 1.0) - kernel.log_value(w)) - 1.0)
              if kernel.log_value(w).real > -1e308 else 0.0
              for w in pts)
    rep.add("kernel-periodic", per < 1e-8, f"max deviation {per:.2e}")

    k10 = complex(kernel.k1(0.0))
    rep.add("kernel-origin", abs(k10) > tol, f"K1(0) = {k10}")

    heights = np.linspace(3.0, probe_height, 12)
    vals_up = [kernel.log_value(-0.5 + 1j * t).real for t in heights]
    vals_dn = [kernel.log_value(-0.5 - 1j * t).real for t in heights]
    rate_up = -(vals_up[-1] - vals_up[0]) / (heights[-1] - heights[0])
    rate_dn = -(vals_dn[-1] - vals_dn[0]) / (heights[-1] - heights[0])
    decays = vals_up[-1] < math.log(tol) or rate_up > 0.1
    decays_dn = vals_dn[-1] < math.log(tol) or rate_dn > 0.1
    is_const = abs(rate_up) < 1e-12 and abs(rate_dn) < 1e-12 and \
        abs(kernel.log_value(-0.5)) < 1e-12
    rep.add("kernel-decay", (decays and decays_dn) or is_const,
            f"measured decay rates {rate_up:.3f} (up), {rate_dn:.3f} (down)"
            + ("; constant kernel admitted via the rapid-forcing-decay route"
               if is_const else ""))

    blow = 0.0
    for re in (-1.0, -0.5, 0.0):
        for t in np.linspace(-2.0, 2.0, 81):
            lv = kernel.log_value(re + 1j * t).real
            blow = max(blow, lv)
    rep.add("kernel-no-pole-on-probe-lines", blow < 25.0,
            f"max log|K1| on probe lines = {blow:.2f}")
    if kernel.pole_re_offsets:
        rep.add("kernel-pole-lattice", True,
                f"declared pole lattice at Re xi = "
                f"{tuple(round(p, 6) for p in kernel.pole_re_offsets)} (mod 1); "
                "the shift identity holds only up to these poles' residues")

    cot_up = 1.0 / cmath.tan(math.pi * (-0.5 + 1j * probe_height)) + 1j
    cot_dn = 1.0 / cmath.tan(math.pi * (-0.5 - 1j * probe_height)) + 1j
    rep.add("cot-limits", abs(cot_up) < 1e-8 and abs(cot_dn - 2j) < 1e-8,
            f"cot+i -> {abs(cot_up):.2e} (up), {cot_dn:.6f} (down)")
    return rep


@dataclass(frozen=True)
class ParticularValue:
    value: complex
    tail_estimate: float
    node_count: int
    peak_log: float = 0.0


def _integrand_logs(sol_h, forcing, kernel, z, sigma, nodes):
    beta = sol_h.params.beta
    logs_yh = sol_h.log_evaluate_many(z + beta * nodes + beta, sigma)
    out = np.empty(len(nodes), dtype=complex)
    log_s = cmath.log(sol_h.params.symbol(sigma))
    for k, xi in enumerate(nodes):
        lf = forcing.log_value(z + beta * xi, sigma)
        # cot(pi xi) + i = exp(i pi xi) / sin(pi xi)
        lcot = 1j * math.pi * xi - log_sin_pi(xi)
        out[k] = lf + lcot + kernel.log_value(xi) - LOG_2I - log_s - logs_yh[k]
    return out


def solve_particular(sol_h: HomogeneousSolution, forcing: ForcingSpec,
                     kernel: KernelSpec, contour: ContourSpec, z, sigma=None,
                     tail_tol: float = 1e-8, check_regions: bool = True) -> ParticularValue:
    """Quadrature the contour representation of the particular solution.

    Returns the value together with a tail estimate combining the measured
    ray tails and a half-resolution Richardson error.  Raises
    ``DecayViolation`` when the integrand has not decayed below
    ``tail_tol`` (relative to its peak) at the ray ends.
    """
    z = complex(z)
    if check_regions:
        rep = check_region(sol_h.spec, sol_h.params, z, d0=contour.d0)
        if not rep.admissible:
            raise RegionViolation(f"z={z}: {rep.violated_clauses[:4]}")
    if abs(complex(kernel.k1(0.0))) < 1e-12:
        raise KernelInvalid("K1(0) vanishes")
    path = build_contour(contour)
    logs = _integrand_logs(sol_h, forcing, kernel, z, sigma, path.nodes)

    peak = float(np.max(logs.real))
    if peak == -math.inf:
        return ParticularValue(0.0 + 0.0j, 0.0, path.node_count, peak)
    ends = max(float(np.max(logs.real[:3])), float(np.max(logs.real[-3:])))
    if ends - peak > math.log(tail_tol):
        raise DecayViolation(
            f"integrand at |Im xi|={contour.half_height} is "
            f"{math.exp(ends - peak):.2e} of its peak (tol {tail_tol:.1e})")

    scaled = np.exp(logs - peak)
    integral = complex(np.sum(scaled * path.weights))
    integral_half = complex(np.sum((scaled * path.weights)[::2])) * 2.0
    quad_err = abs(integral - integral_half) / 3.0

    # ray-tail estimate from the fitted decay rate of the last nodes
    tail = 0.0
    for seg in (slice(0, 8), slice(-8, None)):
        seg_logs = logs.real[seg]
        dt = abs(path.nodes[seg][-1].imag - path.nodes[seg][0].imag)
        if dt > 0:
            rate = abs(seg_logs[-1] - seg_logs[0]) / dt
            end_mag = math.exp(max(seg_logs[0], seg_logs[-1]) - peak)
            tail += end_mag / max(rate, 0.05)

    log_pref = sol_h.log_evaluate(z, sigma) - kernel.log_value(0.0)
    pref = cmath.exp(log_pref + peak)
    value = pref * integral
    tail_abs = abs(pref) * (tail + quad_err)
    return ParticularValue(value, tail_abs, path.node_count, peak)


def telescoping_window_clear(sol_h: HomogeneousSolution, z, d0: float,
                             tol: float = 1e-6) -> list:
    """Zero-lattice points of Y_h/P inside the unit shift window.

    Comparing the contour value at z+beta against the one at z sweeps the
    strip Re xi in (-d0, 1-d0); any zero of Y_h(z+beta+beta*xi)/P there adds
    its residue to the difference-equation defect.  The zero lattice is the
    mirror (no-zero) clause set: h_n + 1 + m, d1_i + 1 + m on the right,
    -eta_n - m, -d4_i - m on the left, in the unit-step variable.
    Returns the blocking lattice points (empty when the window is clear).
    """
    cspec = sol_h.cspec
    x = (complex(z) / sol_h.params.beta).real
    lo, hi = x + 1.0 - d0 + tol, x + 2.0 - d0 - tol
    blocking = []

    def check_right(base: float, label):
        # membership of base + m (m >= 0) in [lo, hi]
        start = max(0, math.ceil(lo - base))
        if base + start <= hi:
            blocking.append((label, base + start))

    def check_left(base: float, label):
        # membership of -base - m (m >= 0) in [lo, hi]
        start = max(0, math.ceil(-hi - base))
        if -base - start >= lo and -base - start <= hi:
            blocking.append((label, -base - start))

    for i, v in enumerate(cspec.finite.d1):
        check_right(complex(v).real + 1.0, f"d1[{i}]")
    for i, v in enumerate(cspec.finite.d4):
        check_left(complex(v).real, f"d4[{i}]")
    for kind, fn in (("h", check_right), ("eta", check_left)):
        fam = cspec.family(kind)
        if fam is None or cspec.is_finite_product:
            continue
        block = fam.block(max(8, int(abs(x)) + 8))
        for i in range(fam.count):
            for n, val in enumerate(block[i].real):
                base = val + 1.0 if kind == "h" else val
                if kind == "h" and base > hi:
                    break
                if kind == "eta" and -base < lo:
                    break
                fn(base, f"{kind}[{i}],n={n + 1}")
    return blocking


def residual_inhomogeneous(sol_h: HomogeneousSolution, forcing: ForcingSpec,
                           kernel: KernelSpec, contour: ContourSpec, z,
                           sigma=None) -> float:
    """Relative defect of the difference equation for the particular solution,

        |(a1 s + a2 s^nu) Y_ih(z+beta) - Omega(z) Y_ih(z) - F(z)| / (1 + |F(z)|),

    with the coefficient truncated at the solution's own product depth.
    """
    z = complex(z)
    beta = sol_h.params.beta
    blocking = telescoping_window_clear(sol_h, z, contour.d0)
    if blocking:
        raise RegionViolation(
            f"zero lattice of Y_h inside the shift window at {blocking[:3]}")
    y0 = solve_particular(sol_h, forcing, kernel, contour, z, sigma).value
    y1 = solve_particular(sol_h, forcing, kernel, contour, z + beta, sigma).value
    s = sol_h.params.symbol(sigma)
    omega = cmath.exp(_log_omega_truncated(sol_h, z))
    fz = complex(forcing.f(z, sigma))
    return abs(s * y1 - omega * y0 - fz) / (1.0 + abs(fz))


def kernel_pole_defect(sol_h: HomogeneousSolution, forcing: ForcingSpec,
                       kernel: KernelSpec, contour: ContourSpec, z, sigma=None,
                       radius: float = 0.04, n_circle: int = 64) -> complex:
    """Predicted shift defect from the kernel pole inside the unit strip.

    For a kernel with pole lattice at Re xi = -d (mod 1), the pole at
    xi_p in (-d0, 1-d0) contributes  -2*pi*i * S * Y_h(z+beta) * res(g, xi_p)
    / K1(0)  to the difference-equation residual; the residue is computed by
    a small-circle quadrature.
    """
    if not kernel.pole_re_offsets:
        return 0.0 + 0.0j
    beta = sol_h.params.beta
    off = kernel.pole_re_offsets[0]
    xi_p = off - math.floor(off + contour.d0)  # representative in (-d0, 1-d0)
    theta = 2.0 * math.pi * np.arange(n_circle) / n_circle
    circle = xi_p + radius * np.exp(1j * theta)
    logs = _integrand_logs(sol_h, forcing, kernel, z, sigma, circle)
    res = complex(np.mean(np.exp(logs) * radius * np.exp(1j * theta)))
    s = sol_h.params.symbol(sigma)
    pref = cmath.exp(sol_h.log_evaluate(z + beta, sigma) - kernel.log_value(0.0))
    return 2j * math.pi * s * pref * res


def assemble_general(sol_h: HomogeneousSolution,
                     particular_fn: Callable) -> Callable:
    """Sum evaluator  (z, sigma) -> Y_h(z, sigma; P) + Y_ih(z, sigma)."""

    def general(z, sigma=None) -> complex:
        return sol_h.evaluate(z, sigma) + complex(particular_fn(z, sigma))

    return general
