"""Dense univariate real polynomials with a multiplicity-aware root finder.

Every spectral object handled by this package (discriminant, fundamental
solutions, state polynomial) is a low-degree real polynomial, so a single
small carrier class is enough.  Coefficients are stored in ascending order;
the zero polynomial is the empty coefficient sequence.
"""

from __future__ import annotations

import numpy as np
import numpy.polynomial.polynomial as npoly

TRIM_REL = 1e-13


class ZeroPolynomialError(ValueError):
    """Root extraction was asked for the identically zero polynomial."""


def _trim(coeffs: np.ndarray) -> np.ndarray:
    if coeffs.size == 0:
        return coeffs
    top = np.max(np.abs(coeffs))
    if top == 0.0:
        return coeffs[:0]
    keep = coeffs.size
    while keep > 0 and abs(coeffs[keep - 1]) < TRIM_REL * top:
        keep -= 1
    return coeffs[:keep]


class Poly:
    """Immutable dense polynomial over the reals.

    Supports +, -, * (with polynomials or scalars), / by scalar, evaluation at
    real or complex points (Horner), differentiation, and root extraction with
    multiplicity clustering.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        arr = np.atleast_1d(np.asarray(coeffs, dtype=float)).copy()
        arr = _trim(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # -- basic structure -------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree after trimming; -1 for the zero polynomial."""
        return self.coeffs.size - 1

    def is_zero(self) -> bool:
        return self.coeffs.size == 0

    @property
    def leading(self) -> float:
        if self.is_zero():
            return 0.0
        return float(self.coeffs[-1])

    def coeff(self, k: int) -> float:
        if 0 <= k < self.coeffs.size:
            return float(self.coeffs[k])
        return 0.0

    def __repr__(self):
        return f"Poly({list(self.coeffs)})"

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs.shape == other.coeffs.shape and bool(
            np.all(self.coeffs == other.coeffs)
        )

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Poly):
            if self.is_zero():
                return other
            if other.is_zero():
                return self
            return Poly(npoly.polyadd(self.coeffs, other.coeffs))
        return self + Poly([other])

    __radd__ = __add__

    def __neg__(self):
        return Poly(-self.coeffs)

    def __sub__(self, other):
        if isinstance(other, Poly):
            return self + (-other)
        return self + Poly([-other])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Poly):
            if self.is_zero() or other.is_zero():
                return Poly()
            return Poly(npoly.polymul(self.coeffs, other.coeffs))
        return Poly(self.coeffs * float(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Poly(self.coeffs / float(scalar))

    def square(self) -> "Poly":
        return self * self

    # -- evaluation and calculus ------------------------------------------

    def __call__(self, lam):
        """Horner evaluation; real coefficients keep real inputs real."""
        if self.is_zero():
            if np.isscalar(lam):
                return 0.0 if not isinstance(lam, complex) else 0.0 + 0.0j
            return np.zeros_like(np.asarray(lam))
        if np.isscalar(lam):
            acc = self.coeffs[-1] + 0 * lam
            for c in self.coeffs[-2::-1]:
                acc = acc * lam + c
            return acc
        return npoly.polyval(np.asarray(lam), self.coeffs)

    def deriv(self) -> "Poly":
        if self.degree < 1:
            return Poly()
        return Poly(npoly.polyder(self.coeffs))

    def eval_mp(self, lam, mp):
        """Evaluate with mpmath arithmetic (for cancellation-prone regimes)."""
        acc = mp.mpf(0) if not isinstance(lam, mp.mpc) else mp.mpc(0)
        for c in self.coeffs[::-1]:
            acc = acc * lam + mp.mpf(float(c))
        return acc

    # -- roots --------------------------------------------------------------

    def roots(self, tol: float = 1e-7) -> list[tuple[complex, int]]:
        """All complex roots with multiplicities.

        Companion-matrix eigenvalues (balanced by LAPACK), Newton-polished,
        then single-linkage clustered with radius tol*(1+|root|).  Near-real
        roots are snapped onto the axis and complex roots of the real input
        are paired into exact conjugates.  Multiplicities sum to the degree.
        """
        if self.is_zero():
            raise ZeroPolynomialError("identically zero")
        if self.degree < 1:
            return []
        raw = npoly.polyroots(self.coeffs)
        raw = [self._polish(complex(r), 1) for r in raw]
        clusters = _cluster(raw, tol)
        out = []
        for center, mult in clusters:
            center = self._polish(center, mult)
            if abs(center.imag) < tol * (1.0 + abs(center.real)):
                center = complex(center.real, 0.0)
            out.append((center, mult))
        out = _pair_conjugates(out, tol)
        out.sort(key=lambda rm: (rm[0].real, rm[0].imag))
        return out

    def real_roots(self, tol: float = 1e-7) -> list[tuple[float, int]]:
        return [(r.real, m) for r, m in self.roots(tol) if r.imag == 0.0]

    def _polish(self, x: complex, mult: int, iters: int = 6) -> complex:
        d = self.deriv()
        for _ in range(iters):
            fx = self(x)
            dfx = d(x)
            if dfx == 0:
                break
            step = mult * fx / dfx
            if not np.isfinite(step.real) or not np.isfinite(step.imag):
                break
            xn = x - step
            if abs(self(xn)) <= abs(fx):
                x = xn
            else:
                break
        return x


def _cluster(roots: list[complex], tol: float) -> list[tuple[complex, int]]:
    """Greedy single-linkage clustering with radius tol*(1+|r|)."""
    remaining = sorted(roots, key=lambda z: (z.real, z.imag))
    clusters: list[list[complex]] = []
    for r in remaining:
        placed = False
        for cl in clusters:
            if any(abs(r - s) <= tol * (1.0 + abs(s)) for s in cl):
                cl.append(r)
                placed = True
                break
        if not placed:
            clusters.append([r])
    return [(sum(cl) / len(cl), len(cl)) for cl in clusters]


def _pair_conjugates(roots: list[tuple[complex, int]], tol: float):
    """Force exact conjugate symmetry on the non-real roots."""
    real = [(r, m) for r, m in roots if r.imag == 0.0]
    upper = [(r, m) for r, m in roots if r.imag > 0.0]
    lower = [(r, m) for r, m in roots if r.imag < 0.0]
    paired = []
    for r, m in upper:
        best = None
        for i, (s, ms) in enumerate(lower):
            if ms == m and (best is None or abs(s.conjugate() - r) < abs(lower[best][0].conjugate() - r)):
                best = i
        if best is None:
            paired.append((r, m))
            continue
        s, ms = lower.pop(best)
        mean = (r + s.conjugate()) / 2
        paired.append((mean, m))
        paired.append((mean.conjugate(), ms))
    paired.extend(lower)
    return real + paired


def from_roots(roots: list[tuple[complex, int]], leading: float = 1.0) -> Poly:
    """Reconstruct leading * prod (lam - r)^m; complex roots must pair up."""
    acc = np.array([1.0 + 0.0j])
    for r, m in roots:
        for _ in range(m):
            acc = npoly.polymul(acc, np.array([-r, 1.0]))
    if np.max(np.abs(acc.imag)) > 1e-9 * max(1.0, np.max(np.abs(acc.real))):
        raise ValueError("roots are not conjugate-symmetric")
    return Poly(leading * acc.real)
