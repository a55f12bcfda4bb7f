"""Numerical integration: adaptive 1D rules on (0, 1) with endpoint care,
tensor-product disk/exterior rules, and pushforward integration over a
mapped domain.

The 1D driver marches dyadic panels toward each endpoint (Gauss-Legendre
inside every panel), so integrable endpoint singularities are resolved by
geometric refinement plus a tail extrapolation once the panel sums settle
into a geometric decay.  Improper integrals are *classified*: an integral
is declared divergent when doubling the resolution of the innermost dyadic
panel keeps growing the partial integral by more than a factor 1.5 across
four consecutive refinements, when the partial integral exceeds 1e12, when
the integrand overflows, or when the panel increments stop decaying at all
(the logarithmic-divergence case).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, DivergentIntegralError, PreconditionError

# Absolute floor for relative error control, so exact-zero integrals do not
# divide by zero.
SCALE_FLOOR = 1e-300

DIVERGENCE_CEILING = 1e12
GROWTH_FACTOR = 1.5
GROWTH_RUNS = 4
STALL_RATIO = 0.9995
STALL_RUNS = 6
EXTRAP_MAX_RATIO = 0.995

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_nodes(order):
    rule = _GL_CACHE.get(order)
    if rule is None:
        rule = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = rule
    return rule


@dataclass(frozen=True)
class IntegralEstimate:
    """Value of an integral together with an absolute error estimate."""

    value: complex | float | np.ndarray
    error: float | np.ndarray


class _Integrand:
    """Wraps a user integrand so panels always see a (npoints, m) array."""

    def __init__(self, f):
        self._f = f
        self.scalar = None

    def __call__(self, x):
        y = np.asarray(self._f(x))
        if y.ndim == 1:
            if self.scalar is None:
                self.scalar = True
            return y[:, None]
        if self.scalar is None:
            self.scalar = False
        return y


def _gl_panel(f, a, b, order):
    x, w = _gl_nodes(order)
    half = 0.5 * (b - a)
    vals = f(0.5 * (a + b) + half * x)
    return half * (w @ vals)


def _adaptive_panel(f, a, b, tol_abs, depth=0):
    """Gauss 16/24 pair with bisection; returns (value, error) vectors."""
    v16 = _gl_panel(f, a, b, 16)
    v24 = _gl_panel(f, a, b, 24)
    err = np.abs(v24 - v16)
    if not np.all(np.isfinite(v24)) or not np.all(np.isfinite(v16)):
        bad = ~(np.isfinite(v24) & np.isfinite(v16))
        v24 = np.where(bad, np.inf, v24)
        return v24, np.full_like(err, np.inf)
    width_floor = (b - a) <= 1e-14 * max(abs(a), abs(b), 1.0)
    if np.all(err <= tol_abs) or depth >= 24 or width_floor:
        return v24, err
    m = 0.5 * (a + b)
    lv, le = _adaptive_panel(f, a, m, 0.5 * tol_abs, depth + 1)
    rv, re = _adaptive_panel(f, m, b, 0.5 * tol_abs, depth + 1)
    return lv + rv, le + re


class _Ladder:
    """Marches dyadic panels from ``start`` toward the endpoint ``target``."""

    def __init__(self, f, start, target, tol, scale, max_depth):
        self.f = f
        self.start = start
        self.target = target
        self.tol = tol
        self.scale = scale  # per-component magnitude floor, updated in place
        self.max_depth = max_depth

    def _tol_abs(self):
        return self.tol * np.maximum(self.scale, SCALE_FLOOR)

    def run(self):
        f, q = self.f, self.target
        d = q - self.start
        total = None
        err = None
        prev = [None, None]  # last two panel increments
        growth_run = 0
        stall_run = 0
        prev_norm = None
        zero_run = 0
        for j in range(self.max_depth):
            t0 = q - d * 2.0 ** (-j)
            t1 = q - d * 2.0 ** (-(j + 1))
            a, b = (t0, t1) if d > 0 else (t1, t0)
            sign = 1.0 if d > 0 else -1.0
            delta, derr = _adaptive_panel(f, a, b, 0.05 * self._tol_abs())
            delta = sign * delta
            if total is None:
                total = np.array(delta, dtype=complex)
                err = np.array(derr, dtype=float)
            else:
                total = total + delta
                err = err + derr
            if not np.all(np.isfinite(delta)):
                raise DivergentIntegralError(
                    "integrand overflow near endpoint %r" % (q,))
            mag = np.abs(total)
            self.scale[:] = np.maximum.reduce([self.scale, mag, np.abs(delta)])
            norm = mag.max() if mag.size else 0.0
            if norm > DIVERGENCE_CEILING:
                raise DivergentIntegralError(
                    "partial integral exceeded %.0e near %r"
                    % (DIVERGENCE_CEILING, q))
            if prev_norm is not None and norm > GROWTH_FACTOR * prev_norm:
                growth_run += 1
                if growth_run >= GROWTH_RUNS:
                    raise DivergentIntegralError(
                        "partial integral grew by >%.1fx across %d dyadic "
                        "refinements near %r" % (GROWTH_FACTOR, GROWTH_RUNS, q))
            else:
                growth_run = 0
            prev_norm = norm

            dmag = np.abs(delta)
            tol_abs = self._tol_abs()
            if np.all(dmag <= SCALE_FLOOR):
                zero_run += 1
                if zero_run >= 2:
                    return total, err
            else:
                zero_run = 0

            if prev[1] is not None:
                pmag = np.abs(prev[1])
                live = dmag > 0.05 * tol_abs
                if j >= 12 and np.any(live) and np.all(
                        dmag[live] >= STALL_RATIO * pmag[live]):
                    stall_run += 1
                    if stall_run >= STALL_RUNS:
                        raise DivergentIntegralError(
                            "panel increments stopped decaying near %r "
                            "(logarithmic-type divergence)" % (q,))
                else:
                    stall_run = 0

            if prev[0] is not None and prev[1] is not None:
                done, tail, terr = self._tail(delta, prev[1], prev[0], tol_abs, j)
                if done:
                    return total + tail, err + terr
            prev = [prev[1], delta]
        bracket_err = err + np.abs(delta) if total is not None else None
        raise AccuracyError(
            "dyadic marching toward %r exhausted depth %d"
            % (q, self.max_depth),
            value=total, error=bracket_err)

    def _tail(self, d2, d1, d0, tol_abs, j):
        """Geometric tail handling.  Returns (done, tail, tail_err)."""
        m2, m1, m0 = np.abs(d2), np.abs(d1), np.abs(d0)
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = np.where(m1 > 0, m2 / np.maximum(m1, SCALE_FLOOR), 0.0)
            r0 = np.where(m0 > 0, m1 / np.maximum(m0, SCALE_FLOOR), 0.0)
        negligible = m2 <= 0.02 * tol_abs
        if not np.all(negligible | (r1 <= EXTRAP_MAX_RATIO)):
            return False, None, None
        rhat = np.clip(np.maximum(r1, r0), 0.0, EXTRAP_MAX_RATIO)
        tail_mag = m2 * rhat / (1.0 - rhat)
        # Plain stop: the remaining tail is already below tolerance and can
        # simply be dropped.
        if np.all(tail_mag <= tol_abs):
            return True, np.zeros_like(d2), tail_mag
        # Extrapolated stop: the increment ratios have stabilised, so the
        # complex geometric tail is added with a spread-based model error.
        spread = np.abs(r1 - r0) / np.maximum(r1, 1e-3)
        model_err = tail_mag * np.minimum(1.0, 4.0 * spread + 2.0 ** (-j))
        if j >= 10 and np.all(negligible | (model_err <= 0.5 * tol_abs)):
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(m1 > 0, d2 / np.where(m1 > 0, d1, 1.0), 0.0)
            ok = np.abs(ratio) < 0.997
            tail = np.where(ok, d2 * ratio / (1.0 - np.where(ok, ratio, 0.0)), 0.0)
            return True, tail, model_err + tail_mag * 1e-3
        return False, None, None


def integrate_01(f, tol=1e-10, *, lo=0.0, hi=1.0, breakpoints=(), max_depth=50):
    """Adaptively integrate ``f`` over (lo, hi), default (0, 1).

    ``f`` receives a float array of abscissae and returns either a matching
    1D array (scalar integrand) or an (npoints, m) array (batched
    integrands sharing the same singularity structure).  Both endpoints are
    approached by dyadic panel marching, so ``f`` is never evaluated at
    ``lo`` or ``hi`` themselves.  ``breakpoints`` mark interior kinks.

    Returns an :class:`IntegralEstimate`; raises
    :class:`DivergentIntegralError` when the endpoint policy classifies the
    integral as divergent and :class:`AccuracyError` when the budget is
    exhausted first.
    """
    if not (hi > lo):
        raise PreconditionError("empty integration interval [%r, %r]" % (lo, hi))
    wrapped = _Integrand(f)
    pts = sorted(p for p in breakpoints if lo < p < hi)
    edges = [lo] + pts + [hi]

    # Rough scale pass: one coarse panel per segment, ignoring overflow.
    probe = _gl_panel(wrapped, edges[0], edges[1], 16)
    m = probe.shape[0]
    scale = np.zeros(m)
    rough = np.zeros(m, dtype=complex)
    for a, b in zip(edges[:-1], edges[1:]):
        v = _gl_panel(wrapped, a, b, 16)
        good = np.isfinite(v)
        rough[good] += v[good]
    scale = np.maximum(scale, np.abs(rough))

    total = np.zeros(m, dtype=complex)
    err = np.zeros(m)

    def add(value, error):
        nonlocal total, err
        total = total + value
        err = err + error
        scale[:] = np.maximum(scale, np.abs(total))

    if len(edges) == 2:
        mid = 0.5 * (lo + hi)
        for target in (lo, hi):
            v, e = _Ladder(wrapped, mid, target, tol, scale, max_depth).run()
            add(v, e)
    else:
        v, e = _Ladder(wrapped, edges[1], lo, tol, scale, max_depth).run()
        add(v, e)
        for a, b in zip(edges[1:-2], edges[2:-1]):
            v, e = _adaptive_panel(
                wrapped, a, b, 0.2 * tol * np.maximum(scale, SCALE_FLOOR))
            add(v, e)
        v, e = _Ladder(wrapped, edges[-2], hi, tol, scale, max_depth).run()
        add(v, e)

    tol_abs = tol * np.maximum(scale, SCALE_FLOOR)
    if np.any(err > 8.0 * tol_abs):
        raise AccuracyError(
            "integral error estimate %s exceeds tolerance" % (err.max(),),
            value=total, error=err)
    if np.all(np.abs(total.imag) == 0.0):
        total = total.real
    if wrapped.scalar:
        return IntegralEstimate(total[0], float(err[0]))
    return IntegralEstimate(total, err)


# ---------------------------------------------------------------------------
# Fixed tensor rules on the disk and its exterior.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialRule:
    """Gauss-Legendre panels on (0, 1), dyadically refined toward both
    endpoints.  Weights integrate dr, so they sum to 1."""

    nodes: np.ndarray
    weights: np.ndarray
    panel_count: int
    order: int
    depth: int

    @classmethod
    def build(cls, depth=12, order=16):
        if depth < 1 or order < 2:
            raise PreconditionError("radial rule needs depth >= 1, order >= 2")
        edges = [0.0]
        edges += [2.0 ** (-j) for j in range(depth, 0, -1)]
        edges += [1.0 - 2.0 ** (-j) for j in range(2, depth + 1)]
        edges.append(1.0)
        x, w = _gl_nodes(order)
        nodes, weights = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            half = 0.5 * (b - a)
            nodes.append(0.5 * (a + b) + half * x)
            weights.append(half * w)
        nodes = np.concatenate(nodes)
        weights = np.concatenate(weights)
        if not (np.all(nodes > 0.0) and np.all(nodes < 1.0)):
            raise AccuracyError("radial nodes escaped (0, 1)")
        if abs(weights.sum() - 1.0) > 1e-14:
            raise AccuracyError("radial weights do not sum to 1")
        return cls(nodes=nodes, weights=weights,
                   panel_count=len(edges) - 1, order=order, depth=depth)


@dataclass(frozen=True)
class DiskRule:
    """Tensor rule: radial Gauss panels x uniform (trapezoid) angles."""

    radial: RadialRule
    angular_count: int

    def __post_init__(self):
        m = self.angular_count
        if m < 8 or m % 2 != 0:
            raise PreconditionError("angular_count must be even and >= 8")

    @classmethod
    def build(cls, depth=12, order=16, angular_count=256):
        return cls(radial=RadialRule.build(depth, order),
                   angular_count=angular_count)

    def thetas(self):
        m = self.angular_count
        return 2.0 * np.pi * np.arange(m) / m

    def grid(self):
        """Complex nodes (R, M) and the matching area weights."""
        r = self.radial.nodes
        z = r[:, None] * np.exp(1j * self.thetas())[None, :]
        w2 = (2.0 * np.pi / self.angular_count) * (self.radial.weights * r)
        return z, w2


def integrate_disk(F, rule):
    """Tensor-product integral of ``F`` over the unit disk.

    ``F`` must accept a complex ndarray.  Spectrally accurate in the angle
    for integrands smooth on circles; exact for low-degree monomials
    z^p conj(z)^q (p + q below the radial order, |p - q| below half the
    angular count).
    """
    z, w2 = rule.grid()
    vals = np.asarray(F(z))
    return (w2[:, None] * vals).sum()


def integrate_exterior(F, rule):
    """Integrate ``F`` over {|zeta| > 1} via the substitution zeta = 1/w.

    The image integrand is F(1/w)/|w|^4 over the punctured disk; the rule's
    nodes avoid 0.  Raises :class:`AccuracyError` when the panel sums fail
    to decay toward w = 0 (insufficient decay of ``F`` at infinity).
    """
    z, w2 = rule.grid()
    vals = np.asarray(F(1.0 / z)) / np.abs(z) ** 4
    per_radius = (w2[:, None] * vals).sum(axis=1)
    order = rule.radial.order
    inner = [np.abs(per_radius[i * order:(i + 1) * order]).sum()
             for i in range(min(rule.radial.depth, rule.radial.panel_count))]
    # inner[0] is the panel closest to w = 0; sums must shrink toward it.
    bad = 0
    for deeper, shallower in zip(inner[:-1], inner[1:]):
        if deeper > 0.9 * shallower and deeper > SCALE_FLOOR:
            bad += 1
        else:
            bad = 0
    if bad >= 4:
        raise AccuracyError(
            "exterior integrand decays too slowly at infinity",
            value=per_radius.sum(), error=np.inf)
    return per_radius.sum()


def integrate_domain(H, map_, rule):
    """Integrate ``H`` over G = map(disk) by pulling back to the disk."""

    def F(w):
        return np.asarray(H(map_.forward(w))) * np.abs(map_.derivative(w)) ** 2

    return integrate_disk(F, rule)


def circle_mean(fn, r, angular_count):
    """Mean of ``fn`` over circles of the given radii (vectorized)."""
    theta = 2.0 * np.pi * np.arange(angular_count) / angular_count
    z = np.asarray(r)[:, None] * np.exp(1j * theta)[None, :]
    return np.asarray(fn(z)).mean(axis=1)


def tail_mass(map_, weight, n, tol=1e-10, angular_count=None):
    """Weighted area of the outer annulus {1 - 2/n <= |z| < 1} pulled back
    through the map: the integrand is |phi'|^2 * weight(1 - |z|).

    Strictly decreasing in ``n``; divergence of the underlying weighted
    area integral surfaces as :class:`DivergentIntegralError`.
    """
    if n < 2:
        raise PreconditionError("tail_mass requires n >= 2")
    r0 = max(0.0, 1.0 - 2.0 / n)
    m = angular_count or max(32, 4 * map_.degree_hint() + 8)

    def profile(r):
        mean = circle_mean(lambda z: np.abs(map_.derivative(z)) ** 2, r, m)
        return 2.0 * np.pi * r * mean.real * weight(1.0 - r)

    return float(integrate_01(profile, tol, lo=r0, hi=1.0).value)
