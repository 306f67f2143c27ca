"""Exact oracle spectra for the closed-form test domains.

Lattice triangles, unit discs via Bessel-function zeros, the hemisphere and
the spherical equilateral right triangle. Bessel functions are evaluated
in-package (ascending series for small argument, Miller backward recurrence
otherwise); zeros are bracketed by a sign scan seeded with the McMahon
expansion and polished with Newton steps.
"""

from __future__ import annotations

import heapq
import math
import threading
from dataclasses import dataclass

import numpy as np


class OracleError(ValueError):
    """Invalid oracle request."""


@dataclass(frozen=True)
class OracleSpectrum:
    """Ascending eigenvalue list with multiplicity expanded."""

    case: str
    eigenvalues: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", np.asarray(self.eigenvalues, dtype=float))

    def __len__(self) -> int:
        return len(self.eigenvalues)


# ---------------------------------------------------------------------------
# Bessel functions of the first kind

_SERIES_X_MAX = 9.0


def _bessel_series(k: int, x: float) -> float:
    # ascending series; safe for small |x| only (cancellation grows like e^x)
    half = 0.5 * x
    term = 1.0
    for m in range(1, k + 1):
        term *= half / m
    total = term
    m = 1
    while True:
        term *= -(half * half) / (m * (m + k))
        total += term
        if abs(term) <= 1e-18 * (abs(total) + 1e-300):
            return total
        m += 1


def _bessel_array_miller(k_max: int, x: float) -> np.ndarray:
    # J_0..J_k_max(x) by backward recurrence, normalized by J_0 + 2*sum J_{2m} = 1
    top = max(k_max, x)
    start = int(top + 14.0 * max(1.0, top) ** (1.0 / 3.0) + 16)
    jp, j = 0.0, 1e-300
    out = np.empty(start + 1)
    out[start] = j
    for m in range(start, 0, -1):
        jm = (2.0 * m / x) * j - jp
        jp, j = j, jm
        out[m - 1] = jm
        if abs(jm) > 1e250:
            jp *= 1e-250
            j *= 1e-250
            out[: start + 1] *= 1e-250
            out[m - 1] = j
    norm = out[0] + 2.0 * np.sum(out[2::2])
    return out[: k_max + 1] / norm


def bessel_j_all(k_max: int, x: float) -> np.ndarray:
    """J_0(x) .. J_{k_max}(x) for x > 0."""
    if x <= 0.0:
        raise OracleError(f"Bessel evaluation needs x > 0, got {x}")
    if x <= _SERIES_X_MAX:
        return np.array([_bessel_series(k, x) for k in range(k_max + 1)])
    return _bessel_array_miller(k_max, x)


def _j_and_derivs(k: int, x: float) -> tuple[float, float, float]:
    # J_k, J_k', J_k'' via the three-term ladder (J_{-m} = (-1)^m J_m)
    arr = bessel_j_all(k + 2, x)

    def at(m: int) -> float:
        return arr[m] if m >= 0 else (-1.0) ** (-m) * arr[-m]

    j = at(k)
    jp = 0.5 * (at(k - 1) - at(k + 1))
    jpp = 0.25 * (at(k - 2) - 2.0 * j + at(k + 2))
    return j, jp, jpp


def bessel_j(k: int, x: float) -> float:
    return _j_and_derivs(k, x)[0]


def bessel_j_prime(k: int, x: float) -> float:
    return _j_and_derivs(k, x)[1]


# ---------------------------------------------------------------------------
# Zeros

_MCMAHON_SAFE = 0.35  # accept the expansion when mu/(8 beta)^2 terms are this small


def _mcmahon_zero(k: int, n: int, derivative: bool) -> float | None:
    mu = 4.0 * k * k
    if derivative:
        beta = (n + 0.5 * k - 0.75) * math.pi
        if beta <= 0.0 or (mu + 3.0) / (8.0 * beta) > _MCMAHON_SAFE:
            return None
        b8 = 8.0 * beta
        return beta - (mu + 3.0) / b8 - 4.0 * (7.0 * mu * mu + 82.0 * mu - 9.0) / (
            3.0 * b8**3
        ) - 32.0 * (83.0 * mu**3 + 2075.0 * mu * mu - 3039.0 * mu + 3537.0) / (
            15.0 * b8**5
        )
    beta = (n + 0.5 * k - 0.25) * math.pi
    if beta <= 0.0 or (mu - 1.0) / (8.0 * beta) > _MCMAHON_SAFE:
        return None
    b8 = 8.0 * beta
    return beta - (mu - 1.0) / b8 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (
        3.0 * b8**3
    ) - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * b8**5)


def _refine_zero(k: int, lo: float, hi: float, derivative: bool) -> float:
    def f(x):
        j, jp, jpp = _j_and_derivs(k, x)
        return (jp, jpp) if derivative else (j, jp)

    flo = f(lo)[0]
    for _ in range(6):  # shrink the bracket before Newton
        mid = 0.5 * (lo + hi)
        fm = f(mid)[0]
        if flo * fm <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    x = 0.5 * (lo + hi)
    for _ in range(60):
        val, dval = f(x)
        if dval == 0.0:
            break
        step = val / dval
        x_new = x - step
        if not lo <= x_new <= hi:
            mid = 0.5 * (lo + hi)
            if f(mid)[0] * flo <= 0.0:
                hi = mid
            else:
                lo, flo = mid, f(mid)[0]
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-13 * (1.0 + abs(x_new)):
            return x_new
        x = x_new
    return x


class _ZeroTable:
    """Cached ascending zeros of J_k or J_k' found by a forward sign scan."""

    def __init__(self, k: int, derivative: bool):
        self.k = k
        self.derivative = derivative
        self.zeros: list[float] = []
        self.direct: dict[int, float] = {}
        # J_k (and J_k' for k >= 1) has no positive zero below sqrt(k(k+2));
        # zeros of J_0' coincide with those of J_1
        self._scan_x = max(1e-6, math.sqrt(k * (k + 2.0)) * 0.99) if k else 1e-6

    def _f(self, x: float) -> float:
        j, jp, _ = _j_and_derivs(self.k, x)
        return jp if self.derivative else j

    def _append_next(self) -> None:
        n = len(self.zeros) + 1
        seed = _mcmahon_zero(self.k, n, self.derivative)
        if seed is not None and (not self.zeros or seed > self.zeros[-1] + 1.0):
            lo, hi = seed - 0.45, seed + 0.45
            if (not self.zeros or lo > self.zeros[-1]) and self._f(lo) * self._f(hi) < 0.0:
                self.zeros.append(_refine_zero(self.k, lo, hi, self.derivative))
                self._scan_x = self.zeros[-1] + 0.2
                return
        x = self._scan_x
        fx = self._f(x)
        step = math.pi / 4.0
        while True:
            x_next = x + step
            f_next = self._f(x_next)
            if fx == 0.0:
                self.zeros.append(x)
                self._scan_x = x + 0.2
                return
            if fx * f_next < 0.0:
                self.zeros.append(_refine_zero(self.k, x, x_next, self.derivative))
                self._scan_x = self.zeros[-1] + 0.2
                return
            x, fx = x_next, f_next

    def get(self, n: int) -> float:
        if n <= len(self.zeros):
            return self.zeros[n - 1]
        if n in self.direct:
            return self.direct[n]
        # deep in the asymptotic regime the expansion error is far below the
        # zero spacing, so the n-th zero can be bracketed without marching
        mu = 4.0 * self.k * self.k
        beta = (n + 0.5 * self.k - (0.75 if self.derivative else 0.25)) * math.pi
        if n > 60 and (mu + 3.0) / (8.0 * beta) < 0.02:
            seed = _mcmahon_zero(self.k, n, self.derivative)
            lo, hi = seed - 0.45, seed + 0.45
            if self._f(lo) * self._f(hi) < 0.0:
                self.direct[n] = _refine_zero(self.k, lo, hi, self.derivative)
                return self.direct[n]
        while len(self.zeros) < n:
            self._append_next()
        return self.zeros[n - 1]


_zero_tables: dict[tuple[int, bool], _ZeroTable] = {}
_zero_lock = threading.Lock()  # tables cache across calls; keep them race-free


def bessel_zero(k: int, n: int, derivative: bool = False) -> float:
    """n-th positive zero of J_k (or of J_k' when derivative=True).

    J_0'(0) = 0 is not counted: the first derivative zero of order 0 is the
    first positive one (it equals the first zero of J_1).
    """
    if k < 0 or int(k) != k:
        raise OracleError(f"Bessel order must be a nonnegative integer, got {k}")
    if n < 1 or int(n) != n:
        raise OracleError(f"zero index must be a positive integer, got {n}")
    key = (int(k), bool(derivative))
    with _zero_lock:
        table = _zero_tables.get(key)
        if table is None:
            table = _zero_tables[key] = _ZeroTable(*key)
        return table.get(int(n))


# ---------------------------------------------------------------------------
# Oracle spectra


def _expand_sorted(values, count: int) -> np.ndarray:
    return np.array(values[:count], dtype=float)


def right_isosceles_spectrum(count: int) -> OracleSpectrum:
    """First eigenvalues pi^2 (j^2 + k^2), 0 < j < k, of the unit-leg right isosceles triangle."""
    if count < 1:
        raise OracleError("count must be >= 1")
    vals: list[float] = []
    kmax = 3
    while True:
        vals = [
            math.pi**2 * (j * j + k * k)
            for k in range(2, kmax + 1)
            for j in range(1, k)
        ]
        vals.sort()
        # entries below pi^2 (1 + kmax^2) cannot be displaced by larger k
        cutoff = math.pi**2 * (1.0 + (kmax + 1) ** 2)
        safe = [v for v in vals if v < cutoff]
        if len(safe) >= count:
            return OracleSpectrum("right-isosceles", _expand_sorted(safe, count))
        kmax *= 2


def equilateral_spectrum(count: int) -> OracleSpectrum:
    """First eigenvalues (4 pi / 3)^2 (j^2 + k^2 + j k) of the unit-side equilateral triangle.

    Unordered pairs {j, k}; multiplicity 2 when j != k.
    """
    if count < 1:
        raise OracleError("count must be >= 1")
    scale = (4.0 * math.pi / 3.0) ** 2
    kmax = 3
    while True:
        vals: list[float] = []
        for j in range(1, kmax + 1):
            for k in range(j, kmax + 1):
                q = j * j + k * k + j * k
                vals.append(scale * q)
                if j != k:
                    vals.append(scale * q)
        vals.sort()
        cutoff = scale * (1 + (kmax + 1) ** 2 + (kmax + 1))
        safe = [v for v in vals if v < cutoff]
        if len(safe) >= count:
            return OracleSpectrum("equilateral", _expand_sorted(safe, count))
        kmax *= 2


def disc_spectrum(count: int, bc: str = "D") -> OracleSpectrum:
    """Unit-disc spectrum: squares of Bessel zeros (Dirichlet) or of derivative
    zeros plus the zero mode (Neumann); multiplicity 1 for order 0, 2 otherwise."""
    if count < 1:
        raise OracleError("count must be >= 1")
    if bc not in ("D", "N"):
        raise OracleError(f"bc must be 'D' or 'N', got {bc!r}")
    derivative = bc == "N"
    out: list[float] = []
    if derivative:
        out.append(0.0)
    # merge the per-order zero streams by always extending the smallest front
    heap: list[tuple[float, int, int]] = []

    def push(k: int, n: int):
        z = bessel_zero(k, n, derivative)
        heapq.heappush(heap, (z * z, k, n))

    push(0, 1)
    k_open = 1
    while len(out) < count:
        # first zeros exceed the order, so any order with k^2 above the heap
        # front cannot contribute yet; open the rest before popping
        while k_open * k_open <= heap[0][0]:
            push(k_open, 1)
            k_open += 1
        lam, k, n = heapq.heappop(heap)
        out.append(lam)
        if k > 0:
            out.append(lam)
        push(k, n + 1)
    return OracleSpectrum(f"disc-{bc.lower()}", _expand_sorted(out, count))


def spherical_right_triangle_spectrum(count: int) -> OracleSpectrum:
    """Spherical equilateral right triangle: i-th distinct value 4 i^2 + 6 i + 2, multiplicity i."""
    if count < 1:
        raise OracleError("count must be >= 1")
    vals: list[float] = []
    i = 1
    while len(vals) < count:
        vals.extend([float(4 * i * i + 6 * i + 2)] * i)
        i += 1
    return OracleSpectrum("spherical-right-triangle", _expand_sorted(vals, count))


def hemisphere_spectrum(count: int) -> OracleSpectrum:
    """Dirichlet hemisphere: n-th distinct value n (n + 1), multiplicity n."""
    if count < 1:
        raise OracleError("count must be >= 1")
    vals: list[float] = []
    n = 1
    while len(vals) < count:
        vals.extend([float(n * (n + 1))] * n)
        n += 1
    return OracleSpectrum("hemisphere", _expand_sorted(vals, count))


def known_subspectrum(case: str, count: int) -> OracleSpectrum:
    """Known partial spectrum embedded in a larger domain by odd reflection.

    The unit-side hexagon and the edge-1 six-pointed star both contain the
    unit equilateral triangle's Dirichlet eigenvalues. Containment check only:
    these values must appear in the domain's spectrum, but do not enumerate it.
    """
    if case not in ("hexagon", "six-star"):
        raise OracleError(f"no known sub-spectrum for {case!r}")
    sub = equilateral_spectrum(count)
    return OracleSpectrum(f"{case}-subspectrum", sub.eigenvalues)


ORACLE_CASES = {
    "right-isosceles": right_isosceles_spectrum,
    "equilateral": equilateral_spectrum,
    "disc-d": lambda n: disc_spectrum(n, "D"),
    "disc-n": lambda n: disc_spectrum(n, "N"),
    "spherical-right-triangle": spherical_right_triangle_spectrum,
    "hemisphere": hemisphere_spectrum,
}


def oracle_spectrum(case: str, count: int) -> OracleSpectrum:
    try:
        fn = ORACLE_CASES[case]
    except KeyError:
        raise OracleError(
            f"unknown oracle case {case!r}; valid cases: {', '.join(sorted(ORACLE_CASES))}"
        ) from None
    return fn(count)
