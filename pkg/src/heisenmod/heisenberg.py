"""Heisenberg group actions on C^d-valued Schwartz vectors.

For parameters (p, q, d, theta) with gcd(p, q) = 1, q | d and
eth = theta - p/q != 0, the module carrier is S(R, C^d).  The continuous part
acts by

    (alpha^{x,y,u} xi)(s) = exp(2 i pi (eth*u + s*x)) xi(s + eth*y),

the symmetrized Weyl operators are sigma^{x,y} = alpha^{x,y,xy/2}, and the
discrete part acts through the clock and shift matrices.  The combination

    varpi^{n,m} = exp(i pi p n m / q) u^n v^m sigma^{n,m}

is a projective representation of Z^2 for the torus cocycle at theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .schwartz import SchwartzVector

ACT_SUPPORT_CAP = 100_000


@dataclass(frozen=True)
class ModuleParams:
    """Heisenberg module parameters: theta = p/q + eth with eth != 0, q | d."""

    p: int
    q: int
    d: int
    theta: float

    def __post_init__(self):
        if self.q < 1 or self.d < 1:
            raise ValueError("q and d must be positive")
        if math.gcd(abs(self.p), self.q) != 1:
            raise ValueError("p and q must be coprime")
        if self.d % self.q != 0:
            raise ValueError("d must be a multiple of q")
        if abs(self.eth) < 1e-12:
            raise ValueError("theta must differ from p/q")

    @property
    def eth(self):
        return self.theta - self.p / self.q


def clock_shift(params):
    """Clock u and shift v on C^d with v u = exp(2 i pi p / q) u v.

    v e_j = e_{(j+1) mod d}, u e_j = exp(-2 i pi p j / q) e_j for j = 0..d-1.
    """
    d, p, q = params.d, params.p, params.q
    j = np.arange(d)
    u = np.diag(np.exp(-2j * math.pi * p * j / q))
    v = np.zeros((d, d), dtype=complex)
    v[(j + 1) % d, j] = 1.0
    return u, v


def _uv_power_matrix(params, n, m):
    """Matrix of u^n v^m: (u^n v^m w)_i = exp(-2 i pi p n i / q) w_{(i-m) % d}."""
    d, p, q = params.d, params.p, params.q
    i = np.arange(d)
    mat = np.zeros((d, d), dtype=complex)
    mat[i, (i - m) % d] = np.exp(-2j * math.pi * p * n * i / q)
    return mat


def alpha_act(params, x, y, u, xi):
    """(alpha^{x,y,u} xi)(s) = exp(2 i pi (eth u + s x)) xi(s + eth y)."""
    eth = params.eth
    out = xi.translate(eth * float(y)).modulate(float(x))
    phase = np.exp(2j * math.pi * eth * float(u))
    return out.scale(phase)


def weyl_act(params, x, y, xi):
    """Symmetrized Weyl operator sigma^{x,y} = alpha^{x,y,xy/2}."""
    return alpha_act(params, x, y, 0.5 * float(x) * float(y), xi)


def varpi_act(params, n, m, xi):
    """Projective representation varpi^{n,m} = e^{i pi p n m / q} u^n v^m sigma^{n,m}."""
    n, m = int(n), int(m)
    out = weyl_act(params, n, m, xi)
    out = out.matrix_apply(_uv_power_matrix(params, n, m))
    return out.scale(np.exp(1j * math.pi * params.p * n * m / params.q))


def module_left_act(a, xi, params):
    """Left action of a torus element: a . xi = sum_g a(g) varpi^g xi."""
    if abs(a.theta - params.theta) > 1e-12:
        raise ValueError("element and module deformation parameters differ")
    if len(a.coeffs) * max(len(xi.terms), 1) > ACT_SUPPORT_CAP:
        raise ValueError("support too large for the closed-form representation")
    out = SchwartzVector(xi.dim, [])
    for (n, m), c in a.coeffs.items():
        out = out + varpi_act(params, n, m, xi).scale(c)
    return out


@dataclass(frozen=True)
class Grid2D:
    """Tensor Gauss-Legendre rule on the centered square of given radius."""

    radius: float
    points_per_axis: int = 16

    def nodes_weights(self):
        x, w = np.polynomial.legendre.leggauss(self.points_per_axis)
        x = x * self.radius
        w = w * self.radius
        X, Y = np.meshgrid(x, x, indexing="ij")
        W = np.outer(w, w)
        return X.ravel(), Y.ravel(), W.ravel()


def smeared_weyl(params, profile, xi, grid=None):
    """Integrated Weyl action int g(z, w) sigma^{z,w} xi dz dw.

    ``profile`` is radial with compact support (callable on r >= 0 plus a
    ``support_radius``); its quadrature mass must not exceed 1 + 1e-12 so the
    smeared operator stays a module-norm contraction.
    """
    rad = profile.support_radius
    if rad is None or not math.isfinite(rad):
        raise ValueError("smearing profile must have compact support")
    if grid is None:
        grid = Grid2D(rad, 16)
    X, Y, W = grid.nodes_weights()
    r = np.hypot(X, Y)
    g = np.where(r <= rad, profile(r), 0.0)
    mass = float(np.sum(g * W))
    if mass > 1.0 + 1e-12:
        raise ValueError(f"profile mass {mass} exceeds 1; not a contraction")
    out = SchwartzVector(xi.dim, [])
    for xk, yk, gk in zip(X, Y, g * W):
        if gk == 0.0:
            continue
        out = out + weyl_act(params, xk, yk, xi).scale(gk)
    return out
