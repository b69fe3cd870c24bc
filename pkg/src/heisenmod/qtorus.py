"""Twisted convolution algebra of a quantum 2-torus.

Elements are finitely supported coefficient functions on Z^2 multiplied with
the cocycle sigma_theta(g, h) = exp(i*pi*theta*(h1*g2 - g1*h2)).  The
generators U = delta_(1,0) and V = delta_(0,1) then satisfy
V * U = exp(2*i*pi*theta) U * V.

Operator norms are enclosed between the largest singular value of a finite
GNS-style truncation (a certified lower bound) and the l^1 coefficient norm
(an upper bound).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

DROP_TOL = 1e-15


@dataclass(frozen=True)
class NormInterval:
    """Certified enclosure [lower, upper] of an operator norm."""

    lower: float
    upper: float
    refinement: tuple = ()

    def __post_init__(self):
        if self.lower < -1e-12 or self.upper < 0:
            raise ValueError("norm bounds must be nonnegative")
        if self.lower > self.upper * (1.0 + 1e-9) + 1e-12:
            raise ValueError("lower bound exceeds upper bound")

    @property
    def mid(self):
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self):
        return self.upper - self.lower


class TorusElement:
    """Finitely supported coefficient function on Z^2 at deformation theta."""

    __slots__ = ("theta", "coeffs")

    def __init__(self, theta, coeffs=None, drop_tol=DROP_TOL):
        self.theta = float(theta)
        data = {}
        if coeffs:
            for (n, m), c in coeffs.items():
                c = complex(c)
                if abs(c) > drop_tol:
                    data[(int(n), int(m))] = c
        self.coeffs = data

    def __getitem__(self, g):
        return self.coeffs.get(g, 0j)

    @property
    def support(self):
        return self.coeffs.keys()

    def support_radius(self):
        if not self.coeffs:
            return 0
        return max(max(abs(n), abs(m)) for n, m in self.coeffs)

    def l1_norm(self):
        return float(sum(abs(c) for c in self.coeffs.values()))

    def scale(self, c):
        c = complex(c)
        return TorusElement(self.theta, {g: c * v for g, v in self.coeffs.items()})

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def __add__(self, other):
        _check_same_theta(self, other)
        out = dict(self.coeffs)
        for g, c in other.coeffs.items():
            out[g] = out.get(g, 0j) + c
        return TorusElement(self.theta, out)

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def __neg__(self):
        return self.scale(-1.0)


def _check_same_theta(a, b):
    if abs(a.theta - b.theta) > 1e-14:
        raise ValueError("elements live over different deformation parameters")


def unit(theta):
    return TorusElement(theta, {(0, 0): 1.0})


def monomial(theta, n, m, coeff=1.0):
    return TorusElement(theta, {(n, m): coeff})


def cocycle(theta, g1, g2):
    """sigma_theta(g1, g2) = exp(i*pi*theta*(x2*y1 - x1*y2))."""
    (x1, y1), (x2, y2) = g1, g2
    return complex(np.exp(1j * math.pi * theta * (x2 * y1 - x1 * y2)))


def twisted_product(a, b):
    """(a*b)(g) = sum_h a(h) b(g-h) sigma_theta(h, g-h)."""
    _check_same_theta(a, b)
    th = a.theta
    out = {}
    for (h1, h2), ca in a.coeffs.items():
        for (k1, k2), cb in b.coeffs.items():
            g = (h1 + k1, h2 + k2)
            phase = np.exp(1j * math.pi * th * (k1 * h2 - h1 * k2))
            out[g] = out.get(g, 0j) + ca * cb * phase
    return TorusElement(th, out)


def involution(a):
    """Adjoint: a*(g) = conj(a(-g)); antimultiplicative for this cocycle."""
    return TorusElement(a.theta,
                        {(-n, -m): np.conj(c) for (n, m), c in a.coeffs.items()})


def beta_act(a, x, y):
    """Dual torus action: multiply the (n, m) coefficient by exp(i(nx+my))."""
    return TorusElement(a.theta,
                        {(n, m): c * np.exp(1j * (n * x + m * y))
                         for (n, m), c in a.coeffs.items()})


def fejer_truncate(a, n):
    """Fejer multiplier: coefficient (j,k) scaled by the product triangle weight."""
    if n < 1:
        raise ValueError("Fejer parameter must be >= 1")
    out = {}
    for (j, k), c in a.coeffs.items():
        w = max(0.0, 1.0 - abs(j) / n) * max(0.0, 1.0 - abs(k) / n)
        if w > 0.0:
            out[(j, k)] = c * w
    return TorusElement(a.theta, out)


# -- GNS truncation and norm enclosures ---------------------------------------

def gns_matrix(a, box_radius):
    """Matrix of left twisted convolution by a on l^2 of the centered box.

    Basis points k are ordered lexicographically; the (k+g, k) entry is
    a(g) * sigma_theta(g, k).
    """
    R = int(box_radius)
    side = 2 * R + 1
    D = side * side
    M = np.zeros((D, D), dtype=complex)
    k1 = np.arange(-R, R + 1)
    for (g1, g2), c in a.coeffs.items():
        # sigma(g, k) = exp(i pi theta (k1 g2 - g1 k2)) factorizes over axes
        ph1 = np.exp(1j * math.pi * a.theta * g2 * k1)
        ph2 = np.exp(-1j * math.pi * a.theta * g1 * k1)
        lo1, hi1 = max(-R, -R - g1), min(R, R - g1)
        lo2, hi2 = max(-R, -R - g2), min(R, R - g2)
        if lo1 > hi1 or lo2 > hi2:
            continue
        src1 = np.arange(lo1, hi1 + 1)
        src2 = np.arange(lo2, hi2 + 1)
        rows = ((src1 + g1 + R) * side)[:, None] + (src2 + g2 + R)[None, :]
        cols = ((src1 + R) * side)[:, None] + (src2 + R)[None, :]
        vals = c * ph1[src1 + R][:, None] * ph2[src2 + R][None, :]
        M[rows.ravel(), cols.ravel()] += vals.ravel()
    return M


def _gns_apply(a, x, R):
    """Apply the GNS truncation to x of shape (2R+1, 2R+1) without the matrix."""
    side = 2 * R + 1
    y = np.zeros_like(x)
    k1 = np.arange(-R, R + 1)
    for (g1, g2), c in a.coeffs.items():
        ph1 = np.exp(1j * math.pi * a.theta * g2 * k1)
        ph2 = np.exp(-1j * math.pi * a.theta * g1 * k1)
        lo1, hi1 = max(-R, -R - g1), min(R, R - g1)
        lo2, hi2 = max(-R, -R - g2), min(R, R - g2)
        if lo1 > hi1 or lo2 > hi2:
            continue
        block = (x[lo1 + R:hi1 + R + 1, lo2 + R:hi2 + R + 1]
                 * ph1[lo1 + R:hi1 + R + 1][:, None]
                 * ph2[lo2 + R:hi2 + R + 1][None, :])
        y[lo1 + g1 + R:hi1 + g1 + R + 1, lo2 + g2 + R:hi2 + g2 + R + 1] += c * block
    return y


def _power_lower(apply_fn, apply_adj_fn, shape, iters=120, tol=1e-9, seed=7,
                 v0=None, floor=0.0, floor_iters=12):
    """Largest-singular-value lower bound by power iteration on A^H A.

    Rayleigh quotients of a Hermitian PSD operator never exceed the top
    eigenvalue, so every iterate yields a certified lower bound; when the
    estimate is still below `floor` after `floor_iters` steps the iteration
    is abandoned early (the caller only needs bounds beating `floor`).
    """
    rng = np.random.default_rng(seed)
    if v0 is None:
        v = np.ones(shape, dtype=complex)
        v += 0.25 * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    else:
        v = v0.astype(complex, copy=True)
    nv = np.linalg.norm(v)
    if nv == 0:
        return 0.0, v
    v /= nv
    best = 0.0
    for it in range(iters):
        if it == floor_iters and best < floor:
            return math.sqrt(max(best, 0.0)), v
        av = apply_fn(v)
        lam = np.vdot(av, av).real  # = v^H (A^H A) v since |v| = 1
        if lam <= 0:
            break
        best = max(best, lam)
        w = apply_adj_fn(av)
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        w /= nw
        if np.linalg.norm(w - v) < tol and lam >= best * (1 - tol):
            v = w
            break
        v = w
    return math.sqrt(max(best, 0.0)), v


def _dense_sv_lower(M, iters=120, tol=1e-9, seed=7, v0=None, floor=0.0):
    MH = M.conj().T
    val, v = _power_lower(lambda x: M @ x, lambda x: MH @ x, (M.shape[1],),
                          iters=iters, tol=tol, seed=seed, v0=v0, floor=floor)
    return val, v


def _box_sv_lower(a, R, iters=120, tol=1e-9, seed=7):
    adj = involution(a)
    val, _ = _power_lower(lambda x: _gns_apply(a, x, R),
                          lambda x: _gns_apply(adj, x, R),
                          (2 * R + 1, 2 * R + 1), iters=iters, tol=tol, seed=seed)
    return val


def torus_norm(a, box_radius=16, max_refinements=2, refine_tol=1e-3,
               power_iters=120, power_tol=1e-9, seed=7):
    """Enclose the operator norm of a.

    lower: largest singular value of the GNS truncation, refined by doubling
    the box until the relative change drops below refine_tol.
    upper: l^1 norm of the coefficients.
    """
    upper = a.l1_norm()
    if not a.coeffs:
        return NormInterval(0.0, 0.0)
    R = max(int(box_radius), a.support_radius() + 1)
    history = []
    lower = 0.0
    for step in range(max_refinements + 1):
        val = _box_sv_lower(a, R, iters=power_iters, tol=power_tol, seed=seed)
        lower = max(lower, val)
        history.append((R, lower))
        if step > 0 and abs(history[-1][1] - history[-2][1]) <= refine_tol * max(lower, 1e-30):
            break
        R *= 2
    lower = min(lower, upper)  # guard numerical round-off at the interface
    return NormInterval(lower, upper, tuple(history))


# -- Lip-seminorm from the dual torus action ----------------------------------

@dataclass(frozen=True)
class RNorm:
    """A norm on R^2 together with its dual norm on Z^2."""

    name: str

    def __call__(self, x, y):
        if self.name == "euclidean":
            return math.hypot(x, y)
        if self.name == "l1":
            return abs(x) + abs(y)
        if self.name == "linf":
            return max(abs(x), abs(y))
        raise ValueError(f"unknown norm {self.name!r}")

    def dual(self, n, m):
        if self.name == "euclidean":
            return math.hypot(n, m)
        if self.name == "l1":
            return max(abs(n), abs(m))
        if self.name == "linf":
            return abs(n) + abs(m)
        raise ValueError(f"unknown norm {self.name!r}")

    def sphere(self, count):
        """count points on the unit sphere of this norm."""
        ang = 2.0 * math.pi * np.arange(count) / count
        pts = []
        for t in ang:
            x, y = math.cos(t), math.sin(t)
            nrm = self(x, y)
            pts.append((x / nrm, y / nrm))
        return pts


EUCLIDEAN = RNorm("euclidean")


def l_seminorm(a, box_radius=16, direction_samples=32, rnorm=EUCLIDEAN,
               magnitudes=(1.0, 0.5, 0.1, 0.02), seed=7):
    """Enclose the Lipschitz seminorm sup ||beta^(x,y) a - a|| / ||(x,y)||.

    upper: sum of |a(n,m)| * dual_norm(n,m) (since |e^{it}-1| <= |t|).
    lower: best sampled difference quotient over sphere directions and
    magnitudes, using certified norm lower bounds.
    """
    upper = float(sum(abs(c) * rnorm.dual(n, m) for (n, m), c in a.coeffs.items()))
    lower = 0.0
    if a.coeffs:
        for ux, uy in rnorm.sphere(direction_samples):
            for t in magnitudes:
                x, y = t * ux, t * uy
                diff = beta_act(a, x, y) - a
                val = torus_norm(diff, box_radius, max_refinements=0,
                                 seed=seed).lower / rnorm(x, y)
                lower = max(lower, val)
    lower = min(lower, upper)
    return NormInterval(lower, upper)


# -- serialization -------------------------------------------------------------

def serialize(a):
    """Text format: a theta header line, then one 'n m re im' line per entry."""
    buf = io.StringIO()
    buf.write(f"theta {a.theta!r}\n")
    for (n, m) in sorted(a.coeffs):
        c = a.coeffs[(n, m)]
        buf.write(f"{n} {m} {c.real!r} {c.imag!r}\n")
    return buf.getvalue()


def deserialize(text):
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("theta "):
        raise ValueError("missing theta header")
    theta = float(lines[0].split()[1])
    coeffs = {}
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 4:
            raise ValueError(f"malformed coefficient line: {ln!r}")
        n, m = int(parts[0]), int(parts[1])
        coeffs[(n, m)] = complex(float(parts[2]), float(parts[3]))
    return TorusElement(theta, coeffs, drop_tol=0.0)
