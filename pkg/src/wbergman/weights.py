"""Radial weights on (0, 1], their moment sequences, and every weight
condition the library checks: integrability over a mapped domain, the
polynomial-density diagnostic, and the Muckenhoupt-type moment bounds.

The divergent flag for inverse moments is ``math.inf``: it is a value, not
an error, and it propagates through the Muckenhoupt ratio arithmetic.
"""

from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DivergentIntegralError,
    DomainError,
    InvalidWeightError,
    PreconditionError,
)
from .quadrature import circle_mean, integrate_01

DEFAULT_MOMENT_TOL = 1e-10
DEFAULT_INTEGRABILITY_TOL = 1e-8

_FAMILIES = ("constant", "power", "expexp", "tabulated")


class WeightSpec:
    """A positive weight on (0, 1].

    Families: ``constant`` (identically 1), ``power`` (t**alpha),
    ``expexp`` (exp(-exp(1/t)), vanishing faster than any power at 0) and
    ``tabulated`` (log-linear interpolation between positive knots, with
    nearest-knot extension outside the knot range).  ``scale`` multiplies
    any family by a positive constant.
    """

    def __init__(self, family, alpha=None, knots=None, scale=1.0,
                 description=""):
        if family not in _FAMILIES:
            raise InvalidWeightError("unknown weight family %r" % (family,))
        if scale <= 0.0 or not math.isfinite(scale):
            raise InvalidWeightError("weight scale must be a positive real")
        self.family = family
        self.alpha = float(alpha) if alpha is not None else None
        self.scale = float(scale)
        self._knot_t = None
        self._knot_logv = None
        if family == "power" and self.alpha is None:
            raise InvalidWeightError("power weight needs an exponent")
        if family == "tabulated":
            knots = list(knots or ())
            if len(knots) < 2:
                raise InvalidWeightError("tabulated weight needs >= 2 knots")
            t = np.asarray([float(p[0]) for p in knots])
            v = np.asarray([float(p[1]) for p in knots])
            if np.any(t <= 0.0) or np.any(t > 1.0):
                raise InvalidWeightError("knot abscissae must lie in (0, 1]")
            if np.any(np.diff(t) <= 0.0):
                raise InvalidWeightError("knot abscissae must strictly increase")
            if np.any(v <= 0.0) or not np.all(np.isfinite(v)):
                raise InvalidWeightError("knot values must be positive finite")
            self._knot_t = t
            self._knot_logv = np.log(v)
        self.description = description or self._default_description()
        self._moment_cache: dict[float, MomentSequence] = {}
        self._cache_lock = threading.Lock()

    # -- construction -----------------------------------------------------

    @classmethod
    def constant(cls):
        return cls("constant")

    @classmethod
    def power(cls, alpha):
        return cls("power", alpha=alpha)

    @classmethod
    def double_exponential(cls):
        return cls("expexp")

    @classmethod
    def tabulated(cls, knots, description=""):
        return cls("tabulated", knots=knots, description=description)

    def scaled(self, c):
        """The weight c * omega (same family, rescaled)."""
        knots = None
        if self.family == "tabulated":
            knots = list(zip(self._knot_t, np.exp(self._knot_logv)))
        return WeightSpec(self.family, alpha=self.alpha, knots=knots,
                          scale=self.scale * c,
                          description="%g * (%s)" % (c, self.description))

    def _default_description(self):
        if self.family == "constant":
            base = "1"
        elif self.family == "power":
            base = "t^%g" % self.alpha
        elif self.family == "expexp":
            base = "exp(-exp(1/t))"
        else:
            base = "tabulated(%d knots)" % len(self._knot_t)
        if self.scale != 1.0:
            return "%g * %s" % (self.scale, base)
        return base

    def __repr__(self):
        return "WeightSpec(%s)" % self.description

    # -- evaluation --------------------------------------------------------

    def _check_domain(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0.0) or np.any(t > 1.0 + 1e-12):
            raise DomainError("weight argument outside (0, 1]")
        return t

    def value(self, t):
        """omega(t) for t in (0, 1]; scalar in, scalar out."""
        t_arr = self._check_domain(t)
        out = np.exp(self.log_value(t_arr))
        if np.isscalar(t) or np.ndim(t) == 0:
            return float(out)
        return out

    __call__ = value

    def log_value(self, t):
        """log omega(t); may be -inf when omega underflows (expexp family)."""
        t = np.asarray(t, dtype=float)
        logc = math.log(self.scale)
        if self.family == "constant":
            return np.full_like(t, logc)
        if self.family == "power":
            return self.alpha * np.log(t) + logc
        if self.family == "expexp":
            with np.errstate(over="ignore"):
                return -np.exp(1.0 / t) + logc
        return np.interp(t, self._knot_t, self._knot_logv) + logc

    def loglog_inverse(self, t):
        """log(log(1/omega(t))), computed stably per family.

        Returns nan where log(1/omega) <= 0, i.e. where omega(t) >= 1.
        """
        t = np.asarray(t, dtype=float)
        logc = math.log(self.scale)
        if self.family == "expexp" and logc == 0.0:
            return 1.0 / t
        if self.family == "expexp":
            # log(exp(1/t) - logc): the correction is negligible once 1/t
            # is large enough that exp(1/t) dwarfs |logc|.
            u = 1.0 / t
            inner = np.exp(np.minimum(u, 700.0)) - logc
            with np.errstate(invalid="ignore"):
                small = np.where(inner > 0.0,
                                 np.log(np.where(inner > 0.0, inner, 1.0)),
                                 np.nan)
            return np.where(u > 50.0, u, small)
        log_inv = -self.log_value(t)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(log_inv > 0.0, np.log(np.where(
                log_inv > 0.0, log_inv, 1.0)), np.nan)

    # -- cached moments ------------------------------------------------------

    def moments(self, tol=DEFAULT_MOMENT_TOL):
        """The cached moment sequence of this weight at the given tolerance."""
        with self._cache_lock:
            seq = self._moment_cache.get(tol)
            if seq is None:
                seq = MomentSequence(self, tol)
                self._moment_cache[tol] = seq
            return seq


class MomentSequence:
    """Caches the moments omega_k = 2 * int_0^1 r^(2k+1) omega(1-r) dr and
    the inverse moments sigma_k = int_0^1 r^(2k+1) / omega(1-r) dr.

    sigma_k is ``math.inf`` when the quadrature layer classifies the
    integral as divergent; each index is evaluated independently but one
    batched sweep fills ranges of k at once (the singularity at r = 1 is
    shared across indices).  Thread-safe under concurrent readers.
    """

    def __init__(self, weight, quadrature_tolerance=DEFAULT_MOMENT_TOL):
        if quadrature_tolerance <= 0.0:
            raise PreconditionError("quadrature tolerance must be positive")
        self.weight = weight
        self.quadrature_tolerance = quadrature_tolerance
        self.values: dict[int, float] = {}
        self.inverse_values: dict[int, float] = {}
        self._lock = threading.Lock()

    def _batch(self, k_max, inverse):
        w = self.weight
        exps = 2.0 * np.arange(k_max + 1) + 1.0

        def f(r):
            with np.errstate(under="ignore", over="ignore", divide="ignore"):
                powers = r[:, None] ** exps[None, :]
                wt = np.exp(w.log_value(1.0 - r))
                col = 1.0 / wt if inverse else wt
            return powers * col[:, None]

        res = integrate_01(f, self.quadrature_tolerance)
        return np.real(res.value)

    def ensure(self, k_max):
        """Fill the direct-moment cache for all k <= k_max."""
        with self._lock:
            if all(k in self.values for k in range(k_max + 1)):
                return
            vals = 2.0 * self._batch(k_max, inverse=False)
            for k, v in enumerate(vals):
                self.values[k] = float(v)

    def ensure_inverse(self, k_max):
        """Fill the inverse-moment cache for all k <= k_max."""
        with self._lock:
            if all(k in self.inverse_values for k in range(k_max + 1)):
                return
            try:
                vals = self._batch(k_max, inverse=True)
            except DivergentIntegralError:
                vals = np.full(k_max + 1, math.inf)
            for k, v in enumerate(vals):
                self.inverse_values[k] = float(v)

    def moment(self, k):
        if k < 0:
            raise PreconditionError("moment index must be >= 0")
        if k not in self.values:
            self.ensure(k)
        return self.values[k]

    def inverse_moment(self, k):
        if k < 0:
            raise PreconditionError("moment index must be >= 0")
        if k not in self.inverse_values:
            self.ensure_inverse(k)
        return self.inverse_values[k]

    def muckenhoupt(self, k):
        sigma = self.inverse_moment(k)
        if math.isinf(sigma):
            return math.inf
        return (k + 1) ** 2 * (self.moment(k) / 2.0) * sigma

    def table(self, k_max):
        """(omega_k, sigma_k, M_k) arrays for k = 0..k_max."""
        self.ensure(k_max)
        self.ensure_inverse(k_max)
        om = np.array([self.values[k] for k in range(k_max + 1)])
        sg = np.array([self.inverse_values[k] for k in range(k_max + 1)])
        ks = np.arange(k_max + 1)
        with np.errstate(invalid="ignore", over="ignore"):
            mk = np.where(np.isinf(sg), np.inf, (ks + 1) ** 2 * (om / 2.0) * sg)
        return om, sg, mk


# ---------------------------------------------------------------------------
# Operation surface.
# ---------------------------------------------------------------------------


def eval_weight(w, t):
    """omega(t) for 0 < t <= 1."""
    return w.value(t)


def moment(w, k, tol=DEFAULT_MOMENT_TOL):
    """omega_k = 2 * int_0^1 r^(2k+1) omega(1-r) dr, to relative ``tol``."""
    return w.moments(tol).moment(k)


def inverse_moment(w, k, tol=DEFAULT_MOMENT_TOL):
    """sigma_k = int_0^1 r^(2k+1) dr / omega(1-r), or math.inf if divergent."""
    return w.moments(tol).inverse_moment(k)


def muckenhoupt_ratio(w, k, tol=DEFAULT_MOMENT_TOL):
    """M_k = (k+1)^2 * (omega_k / 2) * sigma_k; inf propagates from sigma_k."""
    return w.moments(tol).muckenhoupt(k)


@dataclass
class Condition41Report:
    """Boundedness diagnostics for the Muckenhoupt-type ratio sequence."""

    k_max: int
    sup_ratio: float
    arg_sup: int
    verdict: str  # bounded-observed | divergent | inconclusive
    trend: str
    stabilization: float
    ratios: np.ndarray = field(repr=False)

    def to_dict(self):
        return {
            "k_max": self.k_max,
            "sup_ratio": self.sup_ratio,
            "arg_sup": self.arg_sup,
            "verdict": self.verdict,
            "trend": self.trend,
            "stabilization": self.stabilization,
            "ratios": [float(x) for x in self.ratios],
        }


def check_condition_41(w, k_max, tol=DEFAULT_MOMENT_TOL):
    """sup_k M_k over k <= k_max with a stabilization verdict.

    ``bounded-observed`` requires the running sup to move by less than 1%
    over the last decade of indices (k_max/10 .. k_max); any divergent
    sigma_k yields ``divergent``; otherwise ``inconclusive``.
    """
    if k_max < 1:
        raise PreconditionError("k_max must be >= 1")
    _, _, mk = w.moments(tol).table(k_max)
    if np.any(np.isinf(mk)):
        return Condition41Report(k_max, math.inf, int(np.argmax(np.isinf(mk))),
                                 "divergent", "divergent", math.inf, mk)
    running = np.maximum.accumulate(mk)
    k_cut = max(1, k_max // 10)
    change = (running[-1] - running[k_cut]) / running[-1]
    verdict = "bounded-observed" if change < 0.01 else "inconclusive"
    q = max(2, k_max // 10)
    recent = mk[-q:].mean()
    earlier = mk[-2 * q:-q].mean() if k_max + 1 >= 2 * q else mk[:q].mean()
    if recent > earlier * 1.001:
        trend = "rising"
    elif recent < earlier * 0.999:
        trend = "falling"
    else:
        trend = "flat"
    return Condition41Report(k_max, float(mk.max()), int(np.argmax(mk)),
                             verdict, trend, float(change), mk)


@dataclass
class Condition42Report:
    """Universal lower bound M_k >= 1/4 checked up to numerical tolerance."""

    k_max: int
    min_ratio: float
    arg_min: int
    threshold: float
    passed: bool
    ratios: np.ndarray = field(repr=False)

    def to_dict(self):
        return {
            "k_max": self.k_max,
            "min_ratio": self.min_ratio,
            "arg_min": self.arg_min,
            "threshold": self.threshold,
            "passed": self.passed,
            "ratios": [float(x) for x in self.ratios],
        }


def check_condition_42(w, k_max, tol=DEFAULT_MOMENT_TOL):
    """Check M_k >= 1/4 - 10*tol for every k <= k_max.

    The lower bound is forced by Cauchy-Schwarz for any positive weight, so
    a violation indicates quadrature error, not a property of the weight.
    Requires every sigma_k finite.
    """
    if k_max < 1:
        raise PreconditionError("k_max must be >= 1")
    _, sg, mk = w.moments(tol).table(k_max)
    if np.any(np.isinf(sg)):
        raise PreconditionError(
            "condition (4.2) check requires finite inverse moments")
    threshold = 0.25 - 10.0 * tol
    arg_min = int(np.argmin(mk))
    return Condition42Report(k_max, float(mk.min()), arg_min, threshold,
                             bool(mk.min() >= threshold), mk)


@dataclass
class VolbergReport:
    """Sampled diagnostic for the fast-vanishing-weight density condition."""

    verdict: str
    samples: np.ndarray = field(repr=False)
    g_log: np.ndarray = field(repr=False)
    undefined_points: list = field(default_factory=list)
    monotone: bool = True
    partial_integrals: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "samples": [float(x) for x in self.samples],
            "g_log": [float(x) for x in self.g_log],
            "undefined_points": [float(x) for x in self.undefined_points],
            "monotone": self.monotone,
            "partial_integrals": None if self.partial_integrals is None
            else [float(x) for x in self.partial_integrals],
        }


def default_volberg_samples(levels=18):
    return np.array([2.0 ** (-j) for j in range(1, levels + 1)])


def check_volberg(w, sample_points=None):
    """Sampled diagnostic for the sufficient polynomial-density condition:
    t*log(1/omega(t)) should climb to +inf as t drops to 0 and the partial
    integrals of loglog(1/omega) should keep growing.

    This is a diagnostic on the supplied samples, never a proof.  Verdicts:
    ``consistent-with-condition``, ``fails-monotonicity``,
    ``integral-appears-convergent``, ``undefined`` (omega >= 1 somewhere).
    """
    t = np.asarray(sample_points if sample_points is not None
                   else default_volberg_samples(), dtype=float)
    if t.ndim != 1 or len(t) < 3:
        raise PreconditionError("need at least 3 sample points")
    if np.any(np.diff(t) >= 0.0) or np.any(t <= 0.0):
        raise PreconditionError("samples must strictly decrease toward 0")

    loglog = w.loglog_inverse(t)
    undefined = [float(tp) for tp, v in zip(t, loglog) if not np.isfinite(v)]
    # log of g(t) = t*log(1/omega(t)); stable even when g overflows.
    with np.errstate(invalid="ignore"):
        g_log = np.log(t) + loglog

    if undefined:
        return VolbergReport("undefined", t, g_log, undefined)

    # g must strictly increase as t decreases toward 0.
    monotone = bool(np.all(np.diff(g_log) > 0.0))
    if not monotone:
        return VolbergReport("fails-monotonicity", t, g_log, [], False)

    # Nested partial integrals of loglog(1/omega) over [t_j, t_0].
    partials = np.zeros(len(t) - 1)
    acc = 0.0
    for j in range(1, len(t)):
        seg = integrate_01(lambda s: w.loglog_inverse(s), 1e-9,
                           lo=t[j], hi=t[j - 1])
        acc += float(np.real(seg.value))
        partials[j - 1] = acc
    tail = abs(partials[-1] - partials[max(0, len(partials) - 4)])
    if tail < 0.01 * max(abs(partials[-1]), 1e-30):
        return VolbergReport("integral-appears-convergent", t, g_log, [],
                             True, partials)
    return VolbergReport("consistent-with-condition", t, g_log, [],
                         True, partials)


def check_integrability(w, map_, tol=DEFAULT_INTEGRABILITY_TOL,
                        angular_count=None):
    """The weighted area of G = map(disk), via the pullback
    2*pi*int_0^1 r * mean_theta |phi'(r e^{i theta})|^2 * omega(1-r) dr.

    Raises :class:`DivergentIntegralError` when the annular refinements
    near |w| = 1 classify the integral as divergent; such a weight/domain
    pair is rejected for downstream use.
    """
    m = angular_count or max(32, 4 * map_.degree_hint() + 8)

    def profile(r):
        mean = circle_mean(lambda z: np.abs(map_.derivative(z)) ** 2, r, m)
        return 2.0 * np.pi * r * mean.real * w(1.0 - r)

    return float(integrate_01(profile, tol).value)


# ---------------------------------------------------------------------------
# CLI grammar: const | pow:<alpha> | expexp | table:<path>
# ---------------------------------------------------------------------------


def parse_weight(spec):
    """Parse a weight spec string: ``const``, ``pow:<alpha>``, ``expexp``
    or ``table:<csv path>`` (header ``t,omega``)."""
    spec = spec.strip()
    if spec == "const":
        return WeightSpec.constant()
    if spec == "expexp":
        return WeightSpec.double_exponential()
    if spec.startswith("pow:"):
        try:
            return WeightSpec.power(float(spec[4:]))
        except ValueError as exc:
            raise InvalidWeightError("bad power exponent in %r" % spec) from exc
    if spec.startswith("table:"):
        path = spec[6:]
        knots = []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or \
                    [c.strip() for c in reader.fieldnames] != ["t", "omega"]:
                raise InvalidWeightError(
                    "weight table needs header 't,omega' in %s" % path)
            for row in reader:
                knots.append((float(row["t"]), float(row["omega"])))
        return WeightSpec.tabulated(knots, description="table:%s" % path)
    raise InvalidWeightError("unrecognized weight spec %r" % spec)
