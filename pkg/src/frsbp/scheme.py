"""FR semidiscretization of u_t + u_x = 0 on (0, L) with inflow data at x = 0."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .basis import NodalBasis
from .operators import SbpOperators


@dataclass(frozen=True)
class Mesh:
    K: int
    L: float = 2 * math.pi
    edges: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be positive")
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.edges is None:
            edges = self.L * np.arange(self.K + 1) / self.K
        else:
            edges = np.asarray(self.edges, dtype=float)
            if edges.shape != (self.K + 1,) or np.any(np.diff(edges) <= 0):
                raise ValueError("edges must be K + 1 strictly increasing values")
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)

    @property
    def dx(self) -> np.ndarray:
        return np.diff(self.edges)

    def nodes(self, basis: NodalBasis) -> np.ndarray:
        """Physical node coordinates, shape (K, N + 1).

        Written so that xi = -1 / +1 land exactly on the element edges.
        """
        xi = basis.nodes
        left = self.edges[:-1, None]
        right = self.edges[1:, None]
        return left * (0.5 * (1 - xi)) + right * (0.5 * (1 + xi))

    def map_points(self, xi: np.ndarray) -> np.ndarray:
        left = self.edges[:-1, None]
        right = self.edges[1:, None]
        return left * (0.5 * (1 - xi)) + right * (0.5 * (1 + xi))


@dataclass
class SolutionState:
    mesh: Mesh
    coeffs: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.ndim != 2 or self.coeffs.shape[0] != self.mesh.K:
            raise ValueError(f"coeffs must have shape (K, N + 1), got {self.coeffs.shape}")

    @property
    def N(self) -> int:
        return self.coeffs.shape[1] - 1

    def with_coeffs(self, coeffs, t=None) -> "SolutionState":
        return replace(self, coeffs=coeffs, t=self.t if t is None else t)


@dataclass(frozen=True)
class FluxConfig:
    """Interior interface flux; 0 is central, 1 is upwind.

    Physical boundaries always use the upwind flux.
    """

    sigma: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.sigma <= 1.0:
            raise ValueError(f"sigma must lie in [0, 1], got {self.sigma}")


def numerical_flux(uL, uR, sigma: float):
    """``(uL + uR)/2 - sigma/2 (uR - uL)`` for unit advection speed."""
    return 0.5 * (uL + uR) - 0.5 * sigma * (uR - uL)


class CaseName(enum.Enum):
    Sine = "sine"
    Cosine = "cosine"
    Poly8 = "poly8"
    Custom = "custom"


@dataclass(frozen=True)
class TestCase:
    """Initial data, inflow and exact solution of one advection problem.

    ``exact`` takes ``(x, t)``; the initial datum and inflow are its
    restrictions to t = 0 and x = 0.
    """

    __test__ = False  # not a pytest class

    name: CaseName
    exact: Callable

    def initial(self, x):
        return self.exact(x, 0.0)

    def inflow(self, t: float) -> float:
        return float(self.exact(0.0, t))

    @classmethod
    def sine(cls) -> "TestCase":
        return cls(CaseName.Sine, lambda x, t: np.sin(12.0 * (x - t - 0.1)))

    @classmethod
    def cosine(cls) -> "TestCase":
        return cls(CaseName.Cosine, lambda x, t: np.cos(12.0 * (x - t - 0.1)))

    @classmethod
    def poly8(cls) -> "TestCase":
        return cls(CaseName.Poly8, lambda x, t: (np.asarray(x) - t) ** 8)

    @classmethod
    def constant(cls, c: float) -> "TestCase":
        return cls(CaseName.Custom, lambda x, t: np.full(np.shape(x), float(c)) if np.ndim(x) else float(c))

    @classmethod
    def custom(cls, profile: Callable) -> "TestCase":
        """Any travelling profile ``u(x, t) = profile(x - t)``."""
        return cls(CaseName.Custom, lambda x, t: profile(np.asarray(x) - t))

    @classmethod
    def from_name(cls, name: str) -> "TestCase":
        key = CaseName(name.strip().lower())
        if key is CaseName.Custom:
            raise ValueError("custom cases are built in code, not by name")
        return {CaseName.Sine: cls.sine, CaseName.Cosine: cls.cosine, CaseName.Poly8: cls.poly8}[key]()


def exact_solution(case: TestCase, x, t: float):
    return case.exact(x, t)


def nodal_interpolant(case: TestCase, mesh: Mesh, basis: NodalBasis, t: float) -> np.ndarray:
    """Nodal values of the exact solution at time t, shape (K, N + 1)."""
    return np.asarray(case.exact(mesh.nodes(basis), t), dtype=float)


def init_state(case: TestCase, mesh: Mesh, basis: NodalBasis) -> SolutionState:
    return SolutionState(mesh, nodal_interpolant(case, mesh, basis, 0.0), 0.0)


def interface_fluxes(traces: np.ndarray, sigma: float, g: float) -> np.ndarray:
    """Fluxes at the K + 1 element edges from (K, 2) left/right traces.

    Left physical edge: upwind with external state g. Right physical edge:
    upwind with the external state set to the interior trace.
    """
    K = traces.shape[0]
    F = np.empty(K + 1)
    F[0] = g
    F[1:K] = numerical_flux(traces[:-1, 1], traces[1:, 0], sigma)
    F[K] = traces[-1, 1]
    return F


def element_fluxes(F: np.ndarray) -> np.ndarray:
    """Per-element (left, right) flux pairs, shape (K, 2)."""
    out = np.empty((F.size - 1, 2))
    out[:, 0] = F[:-1]
    out[:, 1] = F[1:]
    return out


def rhs_with_traces(u: np.ndarray, g: float, ops: SbpOperators, sigma: float, dx: np.ndarray):
    """Right-hand side plus the (K, 2) boundary traces it was built from."""
    traces = u @ ops.R.T
    F = interface_fluxes(traces, sigma, g)
    jump = np.empty_like(traces)
    jump[:, 0] = F[:-1]
    jump[:, 1] = F[1:]
    jump -= traces
    du = u @ ops.D.T
    du += jump @ ops.C.T
    du *= (-2.0 / dx)[:, None]
    return du, traces


def rhs_coeffs(u: np.ndarray, g: float, ops: SbpOperators, sigma: float, dx: np.ndarray) -> np.ndarray:
    """Array-level right-hand side for f(u) = u."""
    return rhs_with_traces(u, g, ops, sigma, dx)[0]


def rhs(state: SolutionState, t: float, ops: SbpOperators, flux: FluxConfig, case: TestCase) -> np.ndarray:
    """Time derivative of the nodal coefficients, shape (K, N + 1)."""
    u = state.coeffs
    if u.shape != (state.mesh.K, ops.N + 1):
        raise ValueError(f"state shape {u.shape} does not match K={state.mesh.K}, N={ops.N}")
    return rhs_coeffs(u, case.inflow(t), ops, flux.sigma, state.mesh.dx)


def energy(u: np.ndarray, ops: SbpOperators, dx: np.ndarray) -> float:
    """Global ``sum_k dx_k/2 u_k^T (M + Ktilde) u_k``."""
    return float(np.einsum("k,ki,ij,kj->", 0.5 * dx, u, ops.MK, u))


def energy_rate(u: np.ndarray, du: np.ndarray, ops: SbpOperators, dx: np.ndarray) -> float:
    """d/dt of :func:`energy` along the direction du."""
    return float(2.0 * np.einsum("k,ki,ij,kj->", 0.5 * dx, u, ops.MK, du))


def boundary_energy_rate(u: np.ndarray, g: float, ops: SbpOperators, sigma: float) -> float:
    """``-2 sum_k u_k^T R^T B (f^num_k - R u_k / 2)``, the predicted energy rate."""
    traces = u @ ops.R.T
    fnum = element_fluxes(interface_fluxes(traces, sigma, g))
    return float(-2.0 * np.sum((traces @ ops.B) * (fnum - 0.5 * traces)))
