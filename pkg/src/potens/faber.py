"""Faber polynomials of the exterior map and their remainder functions.

F_n denotes the polynomial part of Phi^n * Phi'.  The construction goes
through the classical Faber polynomials Ftilde_n (polynomial part of Phi^n),
which satisfy an exact recurrence in the Laurent coefficients of phi:

    cap * Ftilde_{n+1}(z) = (z - c_0) Ftilde_n(z)
                            - sum_{k=1}^{n-1} c_k Ftilde_{n-k}(z)
                            - (n+1) c_n,

with Ftilde_0 = 1 (this drops out of matching Laurent coefficients in
w phi'(w)/(phi(w)-z) = sum Ftilde_n(z) w^{-n}).  Differentiating the identity
Ftilde_{n+1} = Phi^{n+1} + O(1/z) gives (n+1) F_n = Ftilde_{n+1}'.

The same recurrence run on composed series delivers the exact Laurent
expansion of Ftilde_n(phi(w)) in w, from which everything downstream
(exterior grams, remainder tails, boundary L2 norms) follows without any
cancellation-prone subtraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import INSIDE, ExteriorMap, big_phi_eval


@dataclass(frozen=True)
class FaberPolynomial:
    degree: int
    mono_coeffs: np.ndarray  # ascending, length degree+1


@dataclass(frozen=True)
class RemainderEval:
    """E_n(z) = F_n(z) - Phi^n(z) Phi'(z), with the two raw terms attached."""

    value: complex
    faber_term: complex
    exterior_term: complex


class FaberBasis:
    """All Faber data of one map up to a fixed degree.

    Holds the monomial coefficients of F_0..F_nmax and the exact Laurent
    series (in w) of Ftilde_n(phi(w)); the latter makes exterior-plane
    evaluation stable at any radius because no large powers are subtracted.
    """

    def __init__(self, emap: ExteriorMap, n_max: int):
        if n_max < 0:
            raise ValueError("n_max must be >= 0")
        self.map = emap
        self.n_max = n_max
        m = emap.tail_length
        cap = emap.cap
        c = np.asarray(emap.laurent_coeffs, dtype=complex)

        # ---- monomial table of Ftilde_0..Ftilde_{n_max+1} ----
        tilde = [np.array([1.0 + 0j])]
        for n in range(n_max + 1):
            cur = tilde[n]
            nxt = np.zeros(n + 2, dtype=complex)
            nxt[1:] += cur                     # z * Ftilde_n
            nxt[: n + 1] -= c[0] * cur
            for k in range(1, min(m, n - 1) + 1):
                nxt[: n + 1 - k] -= c[k] * tilde[n - k]
            if 1 <= n <= m:
                nxt[0] -= (n + 1) * c[n]
            tilde.append(nxt / cap)
        self._tilde_mono = tilde

        mono = []
        for n in range(n_max + 1):
            t = tilde[n + 1]
            mono.append(np.arange(1, n + 2) * t[1:] / (n + 1))
        self.mono = mono

        # ---- composed series Ftilde_n(phi(w)) ----
        # power p lives at column p + off
        self._off = (n_max + 1) * max(m, 1) + 2
        width = self._off + n_max + 3
        comp = np.zeros((n_max + 2, width), dtype=complex)
        comp[0, self._off] = 1.0
        for n in range(n_max + 1):
            cur = comp[n]
            nxt = np.zeros(width, dtype=complex)
            nxt[1:] += cap * cur[:-1]          # cap * w * S_n
            for k in range(1, m + 1):
                # c_k w^{-k} * S_n and the recurrence's -c_k S_{n-k}
                nxt[:-k] += c[k] * cur[k:]
                if k <= n - 1:
                    nxt -= c[k] * comp[n - k]
            if 1 <= n <= m:
                nxt[self._off] -= (n + 1) * c[n]
            comp[n + 1] = nxt / cap
        self._comp = comp

        # A_n = F_n(phi(w)) phi'(w) = d/dw [Ftilde_{n+1}(phi(w))] / (n+1)
        powers = np.arange(width) - self._off
        outer = np.zeros((n_max + 1, width), dtype=complex)
        for n in range(n_max + 1):
            deriv = comp[n + 1] * powers
            outer[n, :-1] = deriv[1:] / (n + 1)
        self._outer = outer

    # -- series access --------------------------------------------------------

    @property
    def offset(self) -> int:
        return self._off

    def outer_series(self, n: int) -> np.ndarray:
        """Laurent coefficients of F_n(phi(w)) phi'(w), power p at index p+offset."""
        return self._outer[n]

    def outer_series_all(self) -> np.ndarray:
        return self._outer

    def antiderivative_series(self, k: int) -> np.ndarray:
        """Laurent coefficients of G_k(phi(w)) with G_k' = F_k (constant fixed to 0)."""
        return self._comp[k + 1] / (k + 1)

    def remainder_series(self, n: int) -> np.ndarray:
        """Strictly negative-power part of outer_series(n).

        Equals E_n(phi(w)) phi'(w): the nonnegative part of A_n is exactly w^n.
        """
        tail = self._outer[n].copy()
        tail[self._off:] = 0.0
        return tail

    def eval_series(self, coeffs: np.ndarray, w) -> np.ndarray:
        """Evaluate a stored Laurent series at points w (|w| >= 1)."""
        w = np.asarray(w, dtype=complex)
        neg, nonneg = coeffs[: self._off], coeffs[self._off:]
        # Horner in 1/w for the tail, Horner in w for the polynomial part
        invw = 1.0 / w
        out = np.zeros_like(w)
        for a in neg:                      # lowest power first
            out = (out + a) * invw
        poly = np.zeros_like(w)
        for a in nonneg[::-1]:
            poly = poly * w + a
        return out + poly

    # -- pointwise evaluation ---------------------------------------------------

    def eval_all(self, z, n_upto: int | None = None) -> np.ndarray:
        """Values F_0(z)..F_n(z) by the joint (Ftilde, Ftilde') recurrence.

        Returns an array of shape (n_upto+1,) + shape(z); stable for |z| of
        order the boundary scale even at degree several hundred.
        """
        n_upto = self.n_max if n_upto is None else n_upto
        z = np.asarray(z, dtype=complex)
        m = self.map.tail_length
        cap = self.map.cap
        c = self.map.laurent_coeffs
        ft = [np.ones_like(z)]
        fd = [np.zeros_like(z)]
        out = np.empty((n_upto + 1,) + z.shape, dtype=complex)
        for n in range(n_upto + 1):
            val = (z - c[0]) * ft[n]
            der = ft[n] + (z - c[0]) * fd[n]
            for k in range(1, min(m, n - 1) + 1):
                val = val - c[k] * ft[n - k]
                der = der - c[k] * fd[n - k]
            if 1 <= n <= m:
                val = val - (n + 1) * c[n]
            ft.append(val / cap)
            fd.append(der / cap)
            out[n] = fd[n + 1] / (n + 1)
        return out

    def polynomials(self) -> list[FaberPolynomial]:
        polys = []
        for n, coeffs in enumerate(self.mono):
            lead = coeffs[-1]
            expected = self.map.cap ** (-(n + 1))
            if abs(lead - expected) > 1e-12 * abs(expected):
                raise AssertionError(
                    f"Faber leading coefficient off at degree {n}: {lead} vs {expected}"
                )
            polys.append(FaberPolynomial(n, coeffs.copy()))
        return polys


def faber_all(emap: ExteriorMap, n_max: int) -> list[FaberPolynomial]:
    """F_0..F_{n_max} by the classical recurrence (exact in the coefficients)."""
    return FaberBasis(emap, n_max).polynomials()


def faber_oracle_coeffs(emap: ExteriorMap, n: int, n_nodes: int = 1024, radius: float = 2.0) -> np.ndarray:
    """Independent brute-force coefficients of F_n; test oracle only.

    Expands w^n / phi'(w) on |w| = radius by trapezoidal Fourier inversion and
    solves for the combination of powers of phi matching all nonnegative
    Laurent powers of w.  The negative-power mismatch is exactly the
    remainder term, which never enters the solve.
    """
    theta = 2 * np.pi * np.arange(n_nodes) / n_nodes
    w = radius * np.exp(1j * theta)
    g = w ** n / emap._phi_prime_raw(w)
    hat = np.fft.fft(g) / n_nodes
    # Laurent coefficient of w^p with |p| < n_nodes/2
    lau = np.array([hat[p % n_nodes] * radius ** (-p) for p in range(n + 1)])

    m = emap.tail_length
    # coefficient table of phi^j, exact polynomial algebra in w
    powmat = np.zeros((n + 1, n + 1), dtype=complex)  # [p, j]
    phi_ser = {1: complex(emap.cap), 0: complex(emap.laurent_coeffs[0])}
    for k in range(1, m + 1):
        phi_ser[-k] = complex(emap.laurent_coeffs[k])
    cur = {0: 1.0 + 0j}
    for j in range(n + 1):
        for p, v in cur.items():
            if 0 <= p <= n:
                powmat[p, j] = v
        nxt = {}
        for p, v in cur.items():
            for dq, cv in phi_ser.items():
                nxt[p + dq] = nxt.get(p + dq, 0) + v * cv
        cur = nxt
    return np.linalg.solve(powmat, lau)


def remainder_eval(emap: ExteriorMap, basis: FaberBasis, n: int, z: complex) -> RemainderEval:
    """E_n(z) for z on or outside the boundary.

    The value is computed from the Laurent tail of F_n(phi(w)) phi'(w), which
    stays accurate even where F_n and Phi^n Phi' agree to hundreds of digits;
    the two raw terms are reported alongside.  Extremely close to the curve
    (dist < ~1e-8) the inversion w = Phi(z) itself limits the precision.
    """
    w = big_phi_eval(emap, z)
    if w == INSIDE:
        raise ValueError("remainder function is defined on the closure of the exterior only")
    dphi = complex(emap._phi_prime_raw(np.asarray(w, dtype=complex)))
    tail = basis.remainder_series(n)
    value = complex(basis.eval_series(tail, w)) / dphi
    faber_term = complex(basis.eval_all(z, n)[n])
    exterior_term = w ** n / dphi
    return RemainderEval(value, faber_term, exterior_term)
