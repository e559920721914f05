"""SBP operator sets for the one-parameter FR family.

For a nodal basis we build the derivative ``D``, the diagonal norm ``M``,
the boundary restriction ``R`` and ``B = diag(-1, 1)``, together with the
correction family ``Ktilde = kappa (D^N)^T M D^N`` and the correction
matrix ``C = (M + Ktilde)^{-1} R^T B``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg as sla

from .basis import BasisKind, NodalBasis

IDENTITY_TOL = 1e-11

B = np.diag([-1.0, 1.0])
B.setflags(write=False)


class InadmissibleKappa(ValueError):
    """M + Ktilde is not positive definite for the requested kappa."""


class Scheme(enum.Enum):
    DG = "dg"
    SD = "sd"
    Huynh = "huynh"
    Custom = "custom"


def build_derivative(basis: NodalBasis) -> np.ndarray:
    """``D[i, j] = l_j'(xi_i)`` from barycentric weights."""
    x = basis.nodes
    w = basis.barycentric_weights
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (w[None, :] / w[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    # negative sum trick keeps D @ 1 = 0 to round-off
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def build_mass(basis: NodalBasis) -> np.ndarray:
    return np.diag(basis.weights)


def build_restriction(basis: NodalBasis) -> np.ndarray:
    """Rows interpolate nodal values to xi = -1 and xi = +1."""
    return np.vstack([basis.lagrange_row(-1.0), basis.lagrange_row(1.0)])


def build_ktilde(basis: NodalBasis, kappa: float, D: np.ndarray | None = None) -> np.ndarray:
    if D is None:
        D = build_derivative(basis)
    DN = np.linalg.matrix_power(D, basis.N)
    K = kappa * (DN.T @ build_mass(basis) @ DN)
    return 0.5 * (K + K.T)


def _a_N(N: int) -> Fraction:
    return Fraction(math.factorial(2 * N), 2**N * math.factorial(N) ** 2)


def _aN_fact_sq(N: int):
    """(a_N N!)^2, exact for N <= 10 and via log-gamma beyond."""
    if N <= 10:
        return (_a_N(N) * math.factorial(N)) ** 2
    # a_N N! = (2N)! / (2^N N!)
    log_val = math.lgamma(2 * N + 1) - N * math.log(2.0) - math.lgamma(N + 1)
    return math.exp(2 * log_val)


def kappa_value(scheme, N: int) -> float:
    """kappa for DG, SD or Huynh at polynomial degree N."""
    return float(kappa_fraction(scheme, N))


def kappa_fraction(scheme, N: int):
    """Like :func:`kappa_value` but exact (a :class:`Fraction`) for N <= 10."""
    scheme = Scheme(scheme) if not isinstance(scheme, Scheme) else scheme
    if N < 1:
        raise ValueError("N must be positive")
    s = _aN_fact_sq(N)
    if scheme is Scheme.DG:
        return Fraction(0)
    if scheme is Scheme.SD:
        return Fraction(2 * N) / ((2 * N + 1) * (N + 1) * s) if N <= 10 else 2 * N / ((2 * N + 1) * (N + 1) * s)
    if scheme is Scheme.Huynh:
        return Fraction(2 * (N + 1)) / ((2 * N + 1) * N * s) if N <= 10 else 2 * (N + 1) / ((2 * N + 1) * N * s)
    raise ValueError("a custom scheme has no tabulated kappa")


def kappa_lower_bound(kind, N: int) -> float:
    """Smallest admissible kappa (exclusive) for the basis kind."""
    kind = BasisKind.parse(kind)
    if N < 1:
        raise ValueError("N must be positive")
    s = _aN_fact_sq(N)
    if kind is BasisKind.GaussLegendre:
        return float(-1 / ((2 * N + 1) * s))
    return float(-1 / (N * s))


def is_positive_definite(A: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        return False
    return True


@dataclass(frozen=True)
class SbpOperators:
    basis: NodalBasis
    kappa: float
    D: np.ndarray = field(repr=False)
    M: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    Ktilde: np.ndarray = field(repr=False)
    C: np.ndarray = field(repr=False)

    B = B

    @property
    def N(self) -> int:
        return self.basis.N

    @property
    def MK(self) -> np.ndarray:
        return self.M + self.Ktilde

    @classmethod
    def build(cls, basis: NodalBasis, kappa: float = 0.0, check: bool = True) -> "SbpOperators":
        """Assemble the operator set.

        With ``check`` (the default) an inadmissible kappa raises
        :class:`InadmissibleKappa`; ``check=False`` skips the correction
        solve so :func:`verify_sbp` can report on a bad kappa.
        """
        D = build_derivative(basis)
        M = build_mass(basis)
        R = build_restriction(basis)
        K = build_ktilde(basis, kappa, D)
        if check:
            C = build_correction(basis, kappa, M=M, R=R, K=K)
        else:
            C = np.full((basis.N + 1, 2), np.nan)
        for a in (D, M, R, K, C):
            a.setflags(write=False)
        return cls(basis, float(kappa), D, M, R, K, C)


def build_correction(basis: NodalBasis, kappa: float, *, M=None, R=None, K=None) -> np.ndarray:
    """Solve ``(M + Ktilde) C = R^T B`` by Cholesky."""
    if basis.N >= 1 and kappa <= kappa_lower_bound(basis.kind, basis.N):
        raise InadmissibleKappa(
            f"kappa={kappa!r} <= lower bound {kappa_lower_bound(basis.kind, basis.N)!r} "
            f"for {basis.kind.name} N={basis.N}"
        )
    M = build_mass(basis) if M is None else M
    R = build_restriction(basis) if R is None else R
    K = build_ktilde(basis, kappa) if K is None else K
    try:
        factor = sla.cho_factor(M + K)
    except np.linalg.LinAlgError:
        raise InadmissibleKappa(f"M + Ktilde is not positive definite for kappa={kappa!r}") from None
    return sla.cho_solve(factor, R.T @ B)


@dataclass
class SbpReport:
    kind: BasisKind
    N: int
    kappa: float
    sbp: float
    extended_sbp: float
    ktilde_D: float
    quadrature: float
    positive_definite: bool
    tol: float = IDENTITY_TOL

    @property
    def passed(self) -> bool:
        return (
            self.positive_definite
            and self.sbp <= self.tol
            and self.extended_sbp <= self.tol
            and self.ktilde_D <= self.tol
            and self.quadrature <= self.tol
        )


def quadrature_residual(basis: NodalBasis) -> float:
    """Max error of the rule over monomials up to its exactness degree."""
    worst = 0.0
    for m in range(basis.exactness + 1):
        exact = 0.0 if m % 2 else 2.0 / (m + 1)
        approx = float(basis.weights @ basis.nodes**m)
        worst = max(worst, abs(approx - exact))
    return worst


def verify_sbp(ops: SbpOperators) -> SbpReport:
    """Max-norm residuals of the SBP identities for one operator set."""
    D, M, R, K = ops.D, ops.M, ops.R, ops.Ktilde
    RBR = R.T @ B @ R
    MK = M + K
    return SbpReport(
        kind=ops.basis.kind,
        N=ops.N,
        kappa=ops.kappa,
        sbp=float(np.max(np.abs(M @ D + D.T @ M - RBR))),
        extended_sbp=float(np.max(np.abs(MK @ D + D.T @ MK - RBR))),
        ktilde_D=float(np.max(np.abs(K @ D))),
        quadrature=quadrature_residual(ops.basis),
        positive_definite=is_positive_definite(MK),
    )


def parse_scheme(text: str, N: int) -> float:
    """kappa from a scheme flag: ``dg``, ``sd``, ``huynh``, ``kappa=<real>``
    or ``scaled:<name>/<divisor>``.

    The divisor may be a number or the literal ``2^(N-1)``.
    """
    s = text.strip().lower()
    if s.startswith("kappa="):
        return float(s.split("=", 1)[1])
    if s.startswith("scaled:"):
        body = s.split(":", 1)[1]
        if "/" not in body:
            raise ValueError(f"scaled scheme needs a divisor: {text!r}")
        name, div = body.split("/", 1)
        div = div.strip().replace(" ", "")
        if div in ("2^(n-1)", "2^n-1", "2**(n-1)"):
            divisor = 2.0 ** (N - 1)
        else:
            divisor = float(div)
        return kappa_value(Scheme(name.strip()), N) / divisor
    try:
        return kappa_value(Scheme(s), N)
    except ValueError:
        raise ValueError(f"unknown scheme: {text!r}") from None
