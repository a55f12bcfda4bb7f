"""Coefficient-level representations: finite Taylor series on the closed
disk, finite Laurent tails on the exterior (vanishing at infinity), and
windowed Fourier coefficients of circle functions, together with the
weighted ell^2 functional on the negative-index window.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, PreconditionError

DEFAULT_DEGREE = 64
DEFAULT_WINDOW = 128
LAURENT_EVAL_MARGIN = 1e-6


def _as_coeff_array(coefficients):
    arr = np.atleast_1d(np.asarray(coefficients, dtype=complex))
    if arr.ndim != 1:
        raise PreconditionError("coefficients must form a 1D sequence")
    return arr


def _trim(arr):
    nz = np.nonzero(arr)[0]
    if len(nz) == 0:
        return arr[:1] * 0.0
    return arr[: nz[-1] + 1]


class TaylorSeries:
    """Finite polynomial sum a_0 + a_1 z + ... + a_N z^N on the closed disk.

    Trailing exact zeros are trimmed on construction.
    """

    def __init__(self, coefficients):
        self.coefficients = _trim(_as_coeff_array(coefficients))

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def eval(self, z):
        """Horner evaluation; the argument must satisfy |z| <= 1 + 1e-12."""
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z) > 1.0 + 1e-12):
            raise DomainError("Taylor evaluation point outside the closed disk")
        return self._eval_unchecked(z)

    def _eval_unchecked(self, z):
        acc = np.zeros_like(np.asarray(z, dtype=complex))
        for a in self.coefficients[::-1]:
            acc = acc * z + a
        return acc

    def __call__(self, z):
        return self.eval(z)

    def __add__(self, other):
        n = max(len(self.coefficients), len(other.coefficients))
        a = np.zeros(n, dtype=complex)
        a[: len(self.coefficients)] += self.coefficients
        a[: len(other.coefficients)] += other.coefficients
        return TaylorSeries(a)

    def __mul__(self, scalar):
        return TaylorSeries(self.coefficients * scalar)

    __rmul__ = __mul__

    def __repr__(self):
        return "TaylorSeries(degree=%d)" % self.degree

    def to_pairs(self):
        return [[float(c.real), float(c.imag)] for c in self.coefficients]

    @classmethod
    def from_pairs(cls, pairs):
        return cls([complex(p[0], p[1]) for p in pairs])


class LaurentSeries:
    """Finite tail b_1/zeta + b_2/zeta^2 + ... + b_M/zeta^M.

    There is no constant or positive-power part: vanishing at infinity is
    structural.  ``coefficients[k-1]`` multiplies zeta^(-k).
    """

    def __init__(self, coefficients):
        self.coefficients = _trim(_as_coeff_array(coefficients))

    @property
    def order(self):
        return len(self.coefficients)

    def coefficient(self, k):
        """b_k (k >= 1); zero beyond the stored window."""
        if k < 1:
            raise PreconditionError("Laurent indices start at 1")
        if k > len(self.coefficients):
            return 0.0 + 0.0j
        return complex(self.coefficients[k - 1])

    def eval(self, zeta, margin=LAURENT_EVAL_MARGIN):
        """Horner in 1/zeta.  Points with |zeta| < 1 + margin are rejected:
        truncated tails are ill-conditioned near the circle."""
        zeta = np.asarray(zeta, dtype=complex)
        if np.any(np.abs(zeta) < 1.0 + margin):
            raise DomainError(
                "Laurent evaluation requires |zeta| >= 1 + %g" % margin)
        return self._eval_unchecked(zeta)

    def _eval_unchecked(self, zeta):
        u = 1.0 / np.asarray(zeta, dtype=complex)
        acc = np.zeros_like(u)
        for b in self.coefficients[::-1]:
            acc = acc * u + b
        return acc * u

    def __call__(self, zeta):
        return self.eval(zeta)

    def derivative(self):
        """Term-wise derivative: d/dzeta (b_k zeta^(-k)) = -k b_k zeta^(-k-1).

        Returned as another exterior tail whose zeta^(-1) coefficient is 0.
        """
        out = np.zeros(len(self.coefficients) + 1, dtype=complex)
        ks = np.arange(1, len(self.coefficients) + 1)
        out[1:] = -ks * self.coefficients
        return LaurentSeries(out)

    def __repr__(self):
        return "LaurentSeries(order=%d)" % self.order

    def to_pairs(self):
        return [[float(c.real), float(c.imag)] for c in self.coefficients]

    @classmethod
    def from_pairs(cls, pairs):
        return cls([complex(p[0], p[1]) for p in pairs])


class BoundaryFunction:
    """Fourier window {f_k : -K <= k <= K} of a circle function.

    No Hermitian symmetry is assumed; the function may be complex-valued.
    """

    def __init__(self, coefficients, sample_count=0):
        """``coefficients`` is either a dict {k: f_k} or an array of length
        2K+1 ordered f_{-K}, ..., f_0, ..., f_K."""
        if isinstance(coefficients, dict):
            if not coefficients:
                raise PreconditionError("empty Fourier window")
            window = max(abs(int(k)) for k in coefficients)
            arr = np.zeros(2 * window + 1, dtype=complex)
            for k, v in coefficients.items():
                arr[int(k) + window] = v
        else:
            arr = _as_coeff_array(coefficients)
            if len(arr) % 2 != 1:
                raise PreconditionError(
                    "coefficient array must have odd length 2K+1")
            window = (len(arr) - 1) // 2
        self.window = window
        self.coefficients = arr
        self.sample_count = sample_count

    def get(self, k):
        if abs(k) > self.window:
            return 0.0 + 0.0j
        return complex(self.coefficients[k + self.window])

    def negative_window(self):
        """[f_{-1}, f_{-2}, ..., f_{-K}]."""
        return self.coefficients[: self.window][::-1].copy()

    def eval(self, theta):
        theta = np.asarray(theta, dtype=float)
        ks = np.arange(-self.window, self.window + 1)
        return np.exp(1j * np.outer(theta, ks)) @ self.coefficients

    def __repr__(self):
        return "BoundaryFunction(window=%d, samples=%d)" % (
            self.window, self.sample_count)


def eval_taylor(s, z):
    return s.eval(z)


def eval_laurent(s, zeta, margin=LAURENT_EVAL_MARGIN):
    return s.eval(zeta, margin=margin)


def derivative_laurent(s):
    return s.derivative()


def fourier_coeffs(samples, window):
    """Trapezoid Fourier extraction from equispaced circle samples.

    ``samples[j]`` is the value at theta_j = 2 pi j / N.  Requires
    N >= 4*window + 4 as an oversampling guard; exact for trigonometric
    polynomials of degree below N/2.
    """
    samples = np.asarray(samples, dtype=complex)
    n = len(samples)
    if window < 0:
        raise PreconditionError("window must be >= 0")
    if n < 4 * window + 4:
        raise PreconditionError(
            "need N >= 4K + 4 samples (got N=%d for K=%d)" % (n, window))
    spectrum = np.fft.fft(samples) / n
    ks = np.arange(-window, window + 1)
    return BoundaryFunction(spectrum[ks % n], sample_count=n)


def rho(f, moments):
    """Weighted ell^2 size of the negative Fourier window:
    sqrt(pi * sum_{k>=1} |f_{-k}|^2 / omega_{k-1}).

    Truncated at the stored window, hence monotone nondecreasing in the
    window size.  Moment accuracy errors propagate.
    """
    neg = f.negative_window()
    if len(neg) == 0:
        return 0.0
    moments.ensure(len(neg) - 1)
    om = np.array([moments.moment(k) for k in range(len(neg))])
    return float(np.sqrt(np.pi * np.sum(np.abs(neg) ** 2 / om)))
