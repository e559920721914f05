"""Error, energy and boundary-term diagnostics for one sampled time.

The error is split as E = eps1 + eps_p with eps1 the difference between the
nodal interpolant of the exact solution and the numerical solution. At the
collocation nodes eps_p vanishes, so the nodal arrays of E and eps1 agree.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

import numpy as np

from .basis import NodalBasis, gauss_legendre_rule
from .operators import InadmissibleKappa, SbpOperators
from .scheme import (
    FluxConfig,
    Mesh,
    SolutionState,
    TestCase,
    element_fluxes,
    interface_fluxes,
    nodal_interpolant,
)

CSV_FIELDS = ("t", "err_E_M", "err_E_MK", "err_eps1_MK", "theta2", "bts", "eta", "energy", "budget_slack")


def local_norm_MK(coeffs, ops: SbpOperators) -> float:
    v = np.asarray(coeffs, dtype=float)
    q = float(v @ ops.MK @ v)
    if q < 0:
        if q > -1e-14 * max(1.0, float(v @ v)):
            return 0.0
        raise InadmissibleKappa(f"negative quadratic form {q!r}: M + Ktilde is not positive definite")
    return math.sqrt(q)


def global_norm(u: np.ndarray, mesh: Mesh, ops: SbpOperators, *, extended: bool = True) -> float:
    """``sqrt(sum_k dx_k/2 |u_k|^2)`` in the M + Ktilde norm, or M alone."""
    A = ops.MK if extended else ops.M
    q = float(np.einsum("k,ki,ij,kj->", 0.5 * mesh.dx, u, A, u))
    if q < 0:
        if q > -1e-14 * float(np.sum(u * u)):
            return 0.0
        raise InadmissibleKappa(f"negative global quadratic form {q!r}")
    return math.sqrt(q)


def error_fields(state: SolutionState, case: TestCase, basis: NodalBasis) -> tuple[np.ndarray, np.ndarray]:
    """Nodal total error E and eps1 = I^N(u) - U. They coincide by construction."""
    interp = nodal_interpolant(case, state.mesh, basis, state.t)
    E = case.exact(state.mesh.nodes(basis), state.t) - state.coeffs
    eps1 = interp - state.coeffs
    return np.asarray(E, dtype=float), eps1


def interpolation_error_l2(case: TestCase, mesh: Mesh, basis: NodalBasis, t: float) -> float:
    """L2 norm of u - I^N(u) over the domain with a 2N + 2 point Gauss rule per element."""
    xq, wq = gauss_legendre_rule(2 * basis.N + 1)
    # interpolation matrix from the basis nodes to the fine points
    P = np.vstack([basis.lagrange_row(x) for x in xq])
    interp = nodal_interpolant(case, mesh, basis, t) @ P.T
    exact = np.asarray(case.exact(mesh.map_points(xq), t), dtype=float)
    diff = exact - interp
    return math.sqrt(float(np.sum(0.5 * mesh.dx[:, None] * wq[None, :] * diff * diff)))


def epsilon2_terms(
    interp: np.ndarray, eps1: np.ndarray, ops: SbpOperators, flux: FluxConfig, g: float
) -> tuple[np.ndarray, float]:
    """Per-element ``eps1^T R^T B (R I^N(u) - f^num(I^N(u)^-, I^N(u)^+))`` and their sum.

    ``interp`` holds the nodal values of the exact solution; ``g`` is the
    inflow value used as the external state at x = 0.
    """
    tr_I = interp @ ops.R.T
    fnum = element_fluxes(interface_fluxes(tr_I, flux.sigma, g))
    tr_e = eps1 @ ops.R.T
    per_elem = -tr_e[:, 0] * (tr_I[:, 0] - fnum[:, 0]) + tr_e[:, 1] * (tr_I[:, 1] - fnum[:, 1])
    return per_elem, float(per_elem.sum())


def bts_eta(eps1_traces: np.ndarray, sigma: float, theta2: float, eps1_norm: float) -> tuple[float, Optional[float]]:
    """Boundary/jump dissipation of the eps1 energy balance and the ratio eta.

    Physical boundaries are always upwind, so they enter with weight 1/2.
    ``eta`` is None when ``eps1_norm`` is zero.
    """
    tr = np.asarray(eps1_traces, dtype=float)
    jumps = tr[:-1, 1] - tr[1:, 0]
    bts = 0.5 * (tr[-1, 1] ** 2 + tr[0, 0] ** 2) + 0.5 * sigma * float(jumps @ jumps)
    if eps1_norm <= 0.0:
        return bts, None
    return bts, (bts + theta2) / eps1_norm**2


def stability_budget(energy, inflow_sq_integral, outflow_sq_integral):
    """Slack of ``|U(T)|^2 + int U_R^2 <= |U(0)|^2 + int g^2``, elementwise in T.

    ``energy`` is the squared extended norm at each sample (first entry is
    t = 0); the integrals are cumulative from t = 0.
    """
    energy = np.asarray(energy, dtype=float)
    return energy[0] + np.asarray(inflow_sq_integral) - energy - np.asarray(outflow_sq_integral)


def trapezoid_integrals(times, values) -> np.ndarray:
    """Cumulative composite trapezoid integrals, starting at 0."""
    from scipy.integrate import cumulative_trapezoid

    return cumulative_trapezoid(np.asarray(values, dtype=float), np.asarray(times, dtype=float), initial=0.0)


@dataclass
class DiagnosticsRecord:
    t: float
    err_E_M: float
    err_E_MK: float
    err_eps1_MK: float
    theta2: float
    bts: float
    eta: Optional[float]
    energy: float
    budget_slack: float

    def csv_row(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            out.append("" if v is None else f"{v:.16e}")
        return out

    def as_dict(self) -> dict:
        return asdict(self)


class DiagnosticsTracker:
    """Builds one :class:`DiagnosticsRecord` per sample of a run.

    Also keeps the nodal-identity residual max|E - eps1| seen so far.
    """

    def __init__(self, ops: SbpOperators, flux: FluxConfig, case: TestCase, mesh: Mesh):
        self.ops = ops
        self.flux = flux
        self.case = case
        self.mesh = mesh
        self.records: list[DiagnosticsRecord] = []
        self.energy0: Optional[float] = None
        self.identity_residual = 0.0

    def __call__(self, sample) -> DiagnosticsRecord:
        rec = self.record(sample.state, sample.boundary_integrals)
        self.records.append(rec)
        return rec

    def record(self, state: SolutionState, boundary_integrals) -> DiagnosticsRecord:
        ops, mesh = self.ops, self.mesh
        E, eps1 = error_fields(state, self.case, ops.basis)
        self.identity_residual = max(self.identity_residual, float(np.max(np.abs(E - eps1))))
        interp = eps1 + state.coeffs
        g = self.case.inflow(state.t)
        _, theta2 = epsilon2_terms(interp, eps1, ops, self.flux, g)
        eps1_norm = global_norm(eps1, mesh, ops)
        bts, eta = bts_eta(eps1 @ ops.R.T, self.flux.sigma, theta2, eps1_norm)
        en = global_norm(state.coeffs, mesh, ops) ** 2
        if self.energy0 is None:
            self.energy0 = en
        inflow, outflow = boundary_integrals[0], boundary_integrals[1]
        slack = float(stability_budget([self.energy0, en], inflow, outflow)[1])
        return DiagnosticsRecord(
            t=float(state.t),
            err_E_M=global_norm(E, mesh, ops, extended=False),
            err_E_MK=global_norm(E, mesh, ops),
            err_eps1_MK=eps1_norm,
            theta2=theta2,
            bts=bts,
            eta=eta,
            energy=en,
            budget_slack=slack,
        )


def column(records: Sequence[DiagnosticsRecord], name: str) -> np.ndarray:
    return np.array([np.nan if getattr(r, name) is None else getattr(r, name) for r in records], dtype=float)


def asymptotic_error(records: Sequence[DiagnosticsRecord], name: str = "err_E_M", fraction: float = 0.25) -> float:
    """Mean of a column over the final ``fraction`` of the samples."""
    vals = column(records, name)
    start = int(math.floor(len(vals) * (1.0 - fraction)))
    return float(np.mean(vals[min(start, len(vals) - 1):]))


def eta_running_mean(records: Sequence[DiagnosticsRecord]) -> np.ndarray:
    """Running mean of eta over the samples where it is defined."""
    eta = column(records, "eta")
    ok = ~np.isnan(eta)
    csum = np.cumsum(np.where(ok, eta, 0.0))
    count = np.cumsum(ok)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(count > 0, csum / np.maximum(count, 1), np.nan)


def estimate_delta0(records: Sequence[DiagnosticsRecord], transient: float = 0.1) -> float:
    """Minimum of the running mean of eta after the first ``transient`` of the run."""
    t = column(records, "t")
    mean = eta_running_mean(records)
    keep = (t >= t[0] + transient * (t[-1] - t[0])) & ~np.isnan(mean)
    return float(np.min(mean[keep])) if np.any(keep) else float("nan")


def noise_proxy(records: Sequence[DiagnosticsRecord], name: str = "err_E_M", fraction: float = 0.25) -> float:
    """Sample standard deviation of a column over the final ``fraction`` of the run."""
    vals = column(records, name)
    start = int(math.floor(len(vals) * (1.0 - fraction)))
    tail = vals[min(start, len(vals) - 1):]
    return float(np.std(tail, ddof=1)) if tail.size > 1 else 0.0
