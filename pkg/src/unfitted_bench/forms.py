"""Bilinear form kernels, stabilisation kernels and manufactured data.

Kernels are pure array functions: they take basis values/gradients at
quadrature points plus weights and return dense local matrices or
vectors.  Assembly order and dof bookkeeping live in
:mod:`unfitted_bench.system`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "METHODS",
    "MethodConfig",
    "nitsche_tau",
    "lame_lambda",
    "ManufacturedSolution",
    "manufactured",
    "bulk_stiffness",
    "bulk_stiffness_elasticity",
    "load_vector",
    "nitsche_poisson",
    "nitsche_poisson_rhs",
    "nitsche_elasticity",
    "nitsche_elasticity_rhs",
    "neumann_rhs",
    "penalty_matrix",
    "penalty_matrix_grad",
    "expand_components",
]

METHODS = ("NONE", "F-GP", "A-GP", "B-GP-i", "W-Ag-L2", "W-Ag-GRAD", "S-Ag")

# Methods whose weak form contains a gamma-scaled stabilisation term.
GAMMA_METHODS = ("F-GP", "A-GP", "B-GP-i", "W-Ag-L2", "W-Ag-GRAD")


@dataclass(frozen=True)
class MethodConfig:
    """Stabilisation method selection.

    ``gamma`` scales the stabilisation term (unused for NONE and S-Ag),
    ``beta`` is the boundary penalty scaling (tau = beta * order^2 / h),
    ``ustar`` chooses the integration region of the extension-penalty
    methods: the whole aggregate ("full") or its part outside the
    domain ("exterior").
    """

    name: str
    gamma: float = 1.0
    beta: float = 10.0
    ustar: str = "full"

    def validate(self):
        if self.name not in METHODS:
            raise ValueError(f"unknown method {self.name!r}, expected one of {METHODS}")
        if self.name in GAMMA_METHODS and not self.gamma > 0.0:
            raise ValueError(f"{self.name} requires gamma > 0, got {self.gamma}")
        if not self.beta > 0.0:
            raise ValueError(f"boundary penalty scaling must be positive, got {self.beta}")
        if self.ustar not in ("full", "exterior"):
            raise ValueError(f"ustar must be 'full' or 'exterior', got {self.ustar!r}")
        return self

    @property
    def uses_gamma(self):
        return self.name in GAMMA_METHODS


def nitsche_tau(h, order, beta=10.0):
    """Boundary penalty tau = beta * order^2 / h."""
    return beta * order**2 / h


def lame_lambda(mu, nu):
    """First Lame parameter in plane strain from (mu, nu)."""
    return 2.0 * nu * mu / (1.0 - 2.0 * nu)


# ----------------------------------------------------------------------
# manufactured solutions

@dataclass(frozen=True)
class ManufacturedSolution:
    """Polynomial solution with matching volume and boundary data.

    ``u`` maps (k, 2) points to (k, ncomp) values, ``grad`` to
    (k, ncomp, 2), ``f`` is the volume load and ``flux(points,
    normals)`` the conormal boundary flux used as Neumann data.
    """

    problem: str
    degree: int
    ncomp: int
    mu: float
    lam: float
    u: Callable
    grad: Callable
    f: Callable
    flux: Callable


def manufactured(problem, degree, mu=1.0, lam=1.5):
    """Polynomial data u = (x + y)**degree for Poisson or elasticity.

    Patch tests use degree equal to the FE order (u lies in the space);
    convergence studies use order + 1.
    """
    k = int(degree)
    if k < 1:
        raise ValueError("need degree >= 1")
    if problem == "poisson":

        def u(p):
            return ((p[:, 0] + p[:, 1]) ** k)[:, None]

        def grad(p):
            g = k * (p[:, 0] + p[:, 1]) ** (k - 1)
            return np.stack([g, g], axis=1)[:, None, :]

        def f(p):
            if k < 2:
                return np.zeros((len(p), 1))
            return (-2.0 * k * (k - 1) * (p[:, 0] + p[:, 1]) ** (k - 2))[:, None]

        def flux(p, n):
            return np.einsum("kcd,kd->kc", grad(p), n)

        return ManufacturedSolution(problem, k, 1, mu, lam, u, grad, f, flux)

    if problem == "elasticity":

        def u(p):
            w = (p[:, 0] + p[:, 1]) ** k
            return np.stack([w, w], axis=1)

        def grad(p):
            dw = k * (p[:, 0] + p[:, 1]) ** (k - 1)
            g = np.empty((len(p), 2, 2))
            g[:, :, :] = dw[:, None, None]
            return g

        def f(p):
            if k < 2:
                return np.zeros((len(p), 2))
            ddw = k * (k - 1) * (p[:, 0] + p[:, 1]) ** (k - 2)
            val = -(4.0 * mu + 2.0 * lam) * ddw
            return np.stack([val, val], axis=1)

        def flux(p, n):
            g = grad(p)
            eps = 0.5 * (g + np.swapaxes(g, 1, 2))
            tr = np.trace(g, axis1=1, axis2=2)
            sig = 2.0 * mu * eps
            sig[:, 0, 0] += lam * tr
            sig[:, 1, 1] += lam * tr
            return np.einsum("kab,kb->ka", sig, n)

        return ManufacturedSolution(problem, k, 2, mu, lam, u, grad, f, flux)

    raise ValueError(f"unknown problem {problem!r}")


# ----------------------------------------------------------------------
# bulk kernels

def bulk_stiffness(grads, w):
    """grad-grad matrix; grads (q, l, 2), w (q,) -> (l, l)."""
    return np.einsum("qid,qjd,q->ij", grads, grads, w)


def bulk_stiffness_elasticity(grads, w, mu, lam):
    """Linear elasticity stiffness with interleaved components."""
    dot = np.einsum("qid,qjd,q->ij", grads, grads, w)
    cross = np.einsum("qid,qjc,q->icjd", grads, grads, w)
    l = grads.shape[1]
    K = np.zeros((2 * l, 2 * l))
    for c in range(2):
        for d in range(2):
            blk = mu * cross[:, c, :, d] + lam * cross[:, d, :, c]
            if c == d:
                blk = blk + mu * dot
            K[c::2, d::2] = blk
    return K


def load_vector(vals, w, fvals):
    """Volume load; vals (q, l), fvals (q, ncomp) -> (l * ncomp,)."""
    return np.einsum("qi,qc,q->ic", vals, fvals, w).ravel()


# ----------------------------------------------------------------------
# boundary kernels

def nitsche_poisson(vals, grads, normals, w, tau):
    ndg = np.einsum("qid,qd->qi", grads, normals)
    pen = np.einsum("qi,qj,q->ij", vals, vals, w)
    con = np.einsum("qi,qj,q->ij", vals, ndg, w)
    return tau * pen - con - con.T


def nitsche_poisson_rhs(vals, grads, normals, w, tau, gvals):
    ndg = np.einsum("qid,qd->qi", grads, normals)
    g = gvals[:, 0]
    return np.einsum("qi,q,q->i", tau * vals - ndg, g, w)


def _traction(vals, grads, normals, mu, lam):
    """T[q, i, c, a]: component a of the conormal stress of basis (i, c)."""
    q, l = vals.shape
    gn = np.einsum("qid,qd->qi", grads, normals)
    T = np.empty((q, l, 2, 2))
    for c in range(2):
        for a in range(2):
            T[:, :, c, a] = mu * grads[:, :, a] * normals[:, None, c] \
                + lam * grads[:, :, c] * normals[:, None, a]
            if a == c:
                T[:, :, c, a] += mu * gn
    return T


def nitsche_elasticity(vals, grads, normals, w, tau, mu, lam):
    l = vals.shape[1]
    T = _traction(vals, grads, normals, mu, lam)
    pen = np.einsum("qi,qj,q->ij", vals, vals, w)
    con = np.einsum("qi,qjdc,q->icjd", vals, T, w)
    K = np.zeros((2 * l, 2 * l))
    for c in range(2):
        K[c::2, c::2] += tau * pen
        for d in range(2):
            K[c::2, d::2] -= con[:, c, :, d]
            K[c::2, d::2] -= con[:, d, :, c].T
    return K


def nitsche_elasticity_rhs(vals, grads, normals, w, tau, mu, lam, gvals):
    T = _traction(vals, grads, normals, mu, lam)
    pen = tau * np.einsum("qi,qc,q->ic", vals, gvals, w)
    con = np.einsum("qica,qa,q->ic", T, gvals, w)
    return (pen - con).ravel()


def neumann_rhs(vals, w, qvals):
    return np.einsum("qi,qc,q->ic", vals, qvals, w).ravel()


# ----------------------------------------------------------------------
# penalty kernels

def penalty_matrix(table, w, scale):
    """Mass-type penalty; table (q, p) -> (p, p) scaled."""
    return scale * np.einsum("qa,qb,q->ab", table, table, w)


def penalty_matrix_grad(table, w, scale):
    """Gradient penalty; table (q, p, 2) -> (p, p) scaled."""
    return scale * np.einsum("qad,qbd,q->ab", table, table, w)


def expand_components(K, ncomp):
    """Apply a scalar node kernel identically to each component."""
    if ncomp == 1:
        return K
    return np.kron(K, np.eye(ncomp))
