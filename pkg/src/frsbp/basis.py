"""Nodal bases on the reference element [-1, 1].

Legendre polynomials, Gauss-Legendre / Gauss-Lobatto rules, barycentric
Lagrange interpolation and the one-parameter family of FR correction
functions.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

NEWTON_TOL = 1e-15
NEWTON_MAXITER = 100
NODE_SNAP = 1e-14


class BasisKind(enum.Enum):
    GaussLegendre = "legendre"
    GaussLobatto = "lobatto"

    @classmethod
    def parse(cls, name: str | "BasisKind") -> "BasisKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        aliases = {
            "legendre": cls.GaussLegendre,
            "gausslegendre": cls.GaussLegendre,
            "gauss-legendre": cls.GaussLegendre,
            "g": cls.GaussLegendre,
            "lobatto": cls.GaussLobatto,
            "gausslobatto": cls.GaussLobatto,
            "gauss-lobatto": cls.GaussLobatto,
            "l": cls.GaussLobatto,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown basis kind: {name!r}") from None


class Side(enum.Enum):
    Left = "left"
    Right = "right"


class QuadratureError(RuntimeError):
    """Newton iteration for quadrature nodes failed to converge."""


def legendre_eval(n: int, xi):
    """Return ``(L_n(xi), L_n'(xi))``.

    Works on scalars and arrays. The derivative uses
    ``(1 - xi^2) L_n' = n (L_{n-1} - xi L_n)`` away from the endpoints and
    the closed form ``(+-1)^(n-1) n (n+1) / 2`` at ``xi = +-1``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    x = np.asarray(xi, dtype=float)
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    for k in range(1, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k

    one_minus = 1.0 - x * x
    at_end = np.abs(one_minus) < 1e-15
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = np.where(at_end, 0.0, n * (p_prev - x * p) / np.where(at_end, 1.0, one_minus))
    if n > 0:
        end_val = 0.5 * n * (n + 1) * np.sign(x) ** (n - 1)
        dp = np.where(at_end, end_val, dp)

    if np.ndim(xi) == 0:
        return float(p), float(dp)
    return p, dp


def _newton(f, x0: np.ndarray) -> np.ndarray:
    x = x0.copy()
    for _ in range(NEWTON_MAXITER):
        val, der = f(x)
        dx = val / der
        x = x - dx
        if np.max(np.abs(dx)) <= NEWTON_TOL:
            return x
    # one last check: Newton may stall at the round-off floor
    val, der = f(x)
    if np.max(np.abs(val / der)) <= 10 * np.finfo(float).eps:
        return x
    raise QuadratureError("Newton iteration for quadrature nodes did not converge")


def gauss_legendre_rule(N: int) -> tuple[np.ndarray, np.ndarray]:
    """N + 1 point Gauss-Legendre rule, exact for degree 2N + 1."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    n = N + 1
    k = np.arange(n)
    # Chebyshev initial guesses, ascending
    x0 = -np.cos((2 * k + 1) * np.pi / (2 * n))
    x = _newton(lambda x: legendre_eval(n, x), x0)
    x = 0.5 * (x - x[::-1])
    _, dp = legendre_eval(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    return x, 0.5 * (w + w[::-1])


def gauss_lobatto_rule(N: int) -> tuple[np.ndarray, np.ndarray]:
    """N + 1 point Gauss-Lobatto rule, exact for degree 2N - 1."""
    if N < 1:
        raise ValueError("Gauss-Lobatto needs N >= 1")
    if N == 1:
        interior = np.empty(0)
    else:
        k = np.arange(1, N)
        x0 = -np.cos(np.pi * k / N)

        def f(x):
            # roots of L_N'; (1-x^2) L_N'' = 2x L_N' - N(N+1) L_N
            p, dp = legendre_eval(N, x)
            d2p = (2 * x * dp - N * (N + 1) * p) / (1 - x * x)
            return dp, d2p

        interior = _newton(f, x0)
        interior = 0.5 * (interior - interior[::-1])
    x = np.concatenate(([-1.0], interior, [1.0]))
    p, _ = legendre_eval(N, x)
    w = 2.0 / (N * (N + 1) * p * p)
    return x, 0.5 * (w + w[::-1])


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


@dataclass(frozen=True)
class NodalBasis:
    kind: BasisKind
    N: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    barycentric_weights: np.ndarray = field(repr=False)

    @classmethod
    def create(cls, kind, N: int) -> "NodalBasis":
        kind = BasisKind.parse(kind)
        if kind is BasisKind.GaussLegendre:
            x, w = gauss_legendre_rule(N)
        else:
            x, w = gauss_lobatto_rule(N)
        for a in (x, w):
            a.setflags(write=False)
        bw = barycentric_weights(x)
        bw.setflags(write=False)
        return cls(kind, N, x, w, bw)

    @property
    def exactness(self) -> int:
        return 2 * self.N + 1 if self.kind is BasisKind.GaussLegendre else 2 * self.N - 1

    def lagrange_row(self, xi: float) -> np.ndarray:
        """Values ``l_j(xi)`` of all cardinal polynomials at one point."""
        d = xi - self.nodes
        hit = np.flatnonzero(np.abs(d) <= NODE_SNAP)
        if hit.size:
            row = np.zeros_like(self.nodes)
            row[hit[0]] = 1.0
            return row
        t = self.barycentric_weights / d
        return t / t.sum()

    def interpolate(self, values, xi: float) -> float:
        return interpolate(self, values, xi)


def interpolate(basis: NodalBasis, values, xi: float) -> float:
    """Evaluate the degree-N interpolant of nodal ``values`` at ``xi``."""
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != basis.N + 1:
        raise ValueError("values must have length N + 1")
    return float(basis.lagrange_row(xi) @ values)


def correction_function(p: int, lam: float, side, xi):
    """Left/right boundary correction function of degree p + 1.

    ``lam = 0`` gives the Radau polynomials (the DG choice).
    """
    side = Side(side) if not isinstance(side, Side) else side
    lp, _ = legendre_eval(p, xi)
    lm, _ = legendre_eval(p - 1, xi)
    lq, _ = legendre_eval(p + 1, xi)
    mix = (lam * lm + lq) / (1.0 + lam)
    if side is Side.Right:
        return 0.5 * (lp + mix)
    return 0.5 * (-1) ** p * (lp - mix)


def correction_derivative(p: int, lam: float, side, xi):
    """Derivative of :func:`correction_function` with respect to xi."""
    side = Side(side) if not isinstance(side, Side) else side
    _, dp = legendre_eval(p, xi)
    _, dm = legendre_eval(p - 1, xi)
    _, dq = legendre_eval(p + 1, xi)
    mix = (lam * dm + dq) / (1.0 + lam)
    if side is Side.Right:
        return 0.5 * (dp + mix)
    return 0.5 * (-1) ** p * (dp - mix)


def lambda_p(kappa: float, p: int) -> float:
    """Map the scheme parameter kappa to the correction-function lambda_p."""
    if p < 1:
        raise ValueError("p must be positive")
    fp = math.factorial(p)
    num = (p + 1) * 4**p * fp**4
    den = (math.factorial(2 * p) * fp) ** 2
    return kappa * num / den
