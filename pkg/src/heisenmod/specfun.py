"""Laguerre and Hermite families, the Cesaro radial approximation operator,
and the anchor-family constructor for the module-approximation experiments.

Normalizations follow the source conventions:

    psi_eth^j(r)   = eth * exp(-pi*eth*r^2/2) * L_j(pi*eth*r^2)
    H_1^j(t)       = 2^(1/4)/sqrt(j! 2^j) * exp(-pi t^2) * H_j(t*sqrt(2*pi))
    H_eth^j(t)     = eth^(1/4) * H_1^j(sqrt(eth) t)

so that <psi_eth^j, psi_eth^k>_{L2(R+, r dr)} = (eth/2pi) delta_jk and the
H_1^j are L2-orthonormal on the line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hmodule import GridSpec, dnorm, module_norm, inner_quad
from .schwartz import SchwartzVector, _Term

_RECURRENCE_FROM = 9  # binomial sum below, three-term recurrence above


def laguerre(j, t):
    """Laguerre polynomial L_j(t), vectorized over t."""
    j = int(j)
    t = np.asarray(t, dtype=float)
    if j < 0:
        raise ValueError("order must be nonnegative")
    if j < _RECURRENCE_FROM:
        out = np.zeros_like(t)
        for k in range(j + 1):
            out += ((-1.0) ** k / math.factorial(k)) * math.comb(j, j - k) * t ** k
        return out if out.shape else float(out)
    prev, cur = np.ones_like(t), 1.0 - t
    for k in range(1, j):
        prev, cur = cur, ((2 * k + 1 - t) * cur - k * prev) / (k + 1)
    return cur if cur.shape else float(cur)


def laguerre_all(jmax, t):
    """L_0..L_jmax stacked, by the stable three-term recurrence."""
    t = np.asarray(t, dtype=float)
    out = np.empty((jmax + 1,) + t.shape)
    out[0] = 1.0
    if jmax >= 1:
        out[1] = 1.0 - t
    for k in range(1, jmax):
        out[k + 1] = ((2 * k + 1 - t) * out[k] - k * out[k - 1]) / (k + 1)
    return out


def psi(eth, j, r):
    """psi_eth^j(r) = eth * exp(-pi*eth*r^2/2) * L_j(pi*eth*r^2)."""
    if eth <= 0:
        raise ValueError("eth must be positive")
    r = np.asarray(r, dtype=float)
    x = math.pi * eth * r * r
    return eth * np.exp(-0.5 * x) * laguerre(j, x)


def hermite_poly_coeffs(j):
    """Ascending coefficients of the physicists' Hermite polynomial H_j."""
    c = np.zeros(j + 1)
    c[j] = 1.0
    return np.polynomial.hermite.herm2poly(c)


def hermite_fn(eth, j, t):
    """Hermite function H_eth^j(t) = eth^(1/4) H_1^j(sqrt(eth) t)."""
    if eth <= 0:
        raise ValueError("eth must be positive")
    t = np.asarray(t, dtype=float)
    x = math.sqrt(2.0 * math.pi * eth) * t
    if j < _RECURRENCE_FROM:
        hval = np.polynomial.polynomial.polyval(x, hermite_poly_coeffs(j))
    else:
        prev, cur = np.ones_like(x), 2.0 * x
        for k in range(1, j):
            prev, cur = cur, 2.0 * x * cur - 2.0 * k * prev
        hval = cur
    norm = eth ** 0.25 * 2.0 ** 0.25 / math.sqrt(math.factorial(j) * 2.0 ** j)
    out = norm * np.exp(-math.pi * eth * t * t) * hval
    return out if np.ndim(t) else float(out)


def hermite_vector(eth, j, dim=1, component=0):
    """H_eth^j as a closed-form SchwartzVector in the given component."""
    if eth <= 0:
        raise ValueError("eth must be positive")
    scale = math.sqrt(2.0 * math.pi * eth)
    coeffs = hermite_poly_coeffs(j) * scale ** np.arange(j + 1)
    norm = eth ** 0.25 * 2.0 ** 0.25 / math.sqrt(math.factorial(j) * 2.0 ** j)
    polys = np.zeros((j + 1, dim), dtype=complex)
    polys[:, component] = norm * coeffs
    return SchwartzVector(dim, [_Term(polys, -math.pi * eth)])


# -- radial profiles -----------------------------------------------------------

@dataclass
class RadialProfile:
    """Function on [0, inf) with a support radius and an L1(r dr) norm cache."""

    func: callable
    support_radius: float
    is_smearing: bool = False
    meta: dict = field(default_factory=dict)
    _l1_cache: float | None = None

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        vals = np.asarray(self.func(r), dtype=float)
        if self.support_radius is not None and math.isfinite(self.support_radius):
            vals = np.where(r <= self.support_radius, vals, 0.0)
        if self.is_smearing and vals.size and vals.min() < -1e-12:
            raise ValueError("smearing profile must be nonnegative")
        return vals

    def l1_rdr(self, rmax=None, points=4000):
        if self._l1_cache is None or rmax is not None:
            hi = rmax if rmax is not None else self.support_radius
            if hi is None or not math.isfinite(hi):
                raise ValueError("unbounded profile needs an explicit rmax")
            r, w = _radial_rule(hi, points)
            val = float(np.sum(np.abs(self(r)) * r * w))
            if rmax is not None:
                return val
            self._l1_cache = val
        return self._l1_cache


def _radial_rule(rmax, points=4000):
    x, w = np.polynomial.legendre.leggauss(min(points, 600))
    # composite over a few panels keeps high order without huge single rules
    panels = max(1, int(points // 600))
    edges = np.linspace(0.0, rmax, panels + 1)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        nodes.append(mid + half * x)
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def bump_profile(radius, mass=1.0, points=4000):
    """Smooth bump exp(-radius^2/(radius^2 - r^2)) scaled to the given
    total plane integral (2 pi int f r dr = mass)."""

    def raw(r):
        r = np.asarray(r, dtype=float)
        inside = np.abs(r) < radius
        out = np.zeros_like(r)
        denom = radius * radius - np.where(inside, r, 0.0) ** 2
        with np.errstate(divide="ignore", over="ignore"):
            vals = np.exp(-radius * radius / np.where(denom > 0, denom, 1.0))
        out[inside] = vals[inside]
        return out

    prof = RadialProfile(raw, radius, is_smearing=True)
    total = 2.0 * math.pi * prof.l1_rdr(points=points)
    scale = mass / total
    return RadialProfile(lambda r: scale * raw(r), radius, is_smearing=True,
                         meta={"mass": mass})


def zero_profile():
    return RadialProfile(lambda r: np.zeros_like(np.asarray(r, float)), 1.0)


# -- Cesaro-Laguerre approximation ----------------------------------------------

def cesaro_sum(f, eth, N, points=4000, normalization="literal"):
    """Finite-rank radial approximation sum_{j<=N} C_eth^j(f).

    normalization="literal": coefficients <f psi^k, psi^k>_{r dr} with weights
    W_k = sum_{j=k}^N (j+1-k)/(j+1), the displayed operator.
    normalization="orthonormal": a single Cesaro mean of the L2(r dr)
    orthonormal expansion, coefficients (2 pi / eth) <f, psi^k> and weights
    (N+1-k)/(N+1).  The switch used is recorded in the result metadata.
    """
    if eth <= 0:
        raise ValueError("eth must be positive")
    if N < 0:
        raise ValueError("N must be nonnegative")
    if normalization not in ("literal", "orthonormal"):
        raise ValueError(f"unknown normalization {normalization!r}")
    rmax = f.support_radius
    r, w = _radial_rule(rmax, points)
    fv = f(r)
    lag = laguerre_all(N, math.pi * eth * r * r)
    psis = eth * np.exp(-0.5 * math.pi * eth * r * r) * lag  # (N+1, nodes)
    ks = np.arange(N + 1)
    if normalization == "literal":
        coeffs = psis * psis @ (fv * r * w)
        weights = np.array([sum((j + 1.0 - k) / (j + 1.0)
                                for j in range(k, N + 1)) for k in ks])
    else:
        coeffs = (2.0 * math.pi / eth) * (psis @ (fv * r * w))
        weights = (N + 1.0 - ks) / (N + 1.0)
    amps = weights * coeffs

    def approx(rr):
        rr = np.asarray(rr, dtype=float)
        lg = laguerre_all(N, math.pi * eth * rr * rr)
        ps = eth * np.exp(-0.5 * math.pi * eth * rr * rr) * lg
        return amps @ ps

    out = RadialProfile(approx, None)
    out.support_radius = _effective_radius(approx, rmax)
    out.meta = {"normalization": normalization, "N": N, "eth": eth,
                "amplitudes": amps.tolist()}
    return out


def _effective_radius(func, start, tol=1e-14, cap=64.0):
    rr = float(max(start, 1.0))
    while rr < cap:
        probe = np.linspace(rr, rr + 2.0, 41)
        if np.max(np.abs(func(probe)) * (1.0 + probe)) < tol:
            return rr + 2.0
        rr += 2.0
    return cap


def l1_rdr_error(f, g, rmax=None, points=4000):
    """L1(R+, r dr) distance between two radial profiles."""
    hi = rmax
    if hi is None:
        hi = max(f.support_radius or 1.0, g.support_radius or 1.0)
    r, w = _radial_rule(hi, points)
    return float(np.sum(np.abs(f(r) - g(r)) * r * w))


def select_cesaro_normalization(f, eth, trial_ns=(4, 16), points=4000):
    """Pick the normalization whose error actually decreases on a short sweep."""
    scores = {}
    for mode in ("literal", "orthonormal"):
        errs = [l1_rdr_error(f, cesaro_sum(f, eth, n, points, mode))
                for n in trial_ns]
        decreasing = all(b < a for a, b in zip(errs, errs[1:]))
        scores[mode] = (0 if decreasing else 1, errs[-1])
    return min(scores, key=lambda m: scores[m])


# -- anchor families -------------------------------------------------------------

@dataclass
class AnchorFamily:
    vectors: list
    d_refs: list           # NormInterval reference D-norms (pre-normalization = 1)
    coefficients: list     # raw Hermite coefficient vectors, serializable
    params: object
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.vectors)


def anchor_family(params, epsilon, N, budget=64, seed=7, grid=GridSpec(16, 9),
                  box_radius=12, quad=None, samples=12, density_samples=8):
    """Finite family of D-norm <= 1 vectors spanning the Hermite range.

    Candidates are Hermite-coefficient vectors (basis directions plus seeded
    random combinations), each normalized by its D-norm upper bound so the
    family sits inside the unit D-ball.  A sampling-based density self-check
    appends any sampled unit-D combination farther than epsilon (module norm)
    from the family, erroring out if the D-norm budget runs dry first.
    """
    if params.eth == 0:
        raise ValueError("eth must be nonzero")
    eth = abs(params.eth)
    rng = np.random.default_rng(seed)
    dim = params.d
    basis = [hermite_vector(eth, j, dim, comp)
             for j in range(N + 1) for comp in range(dim)]

    def combo(c):
        vec = basis[0].scale(c[0])
        for cj, b in zip(c[1:], basis[1:]):
            vec = vec + b.scale(cj)
        return vec

    coeff_list = [np.eye(len(basis))[i].astype(complex)
                  for i in range(len(basis))]
    for _ in range(max(0, samples - len(basis))):
        c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        coeff_list.append(c / np.linalg.norm(c))

    evals = 0
    vectors, d_refs, normalized_coeffs = [], [], []
    for c in coeff_list:
        if evals >= budget:
            raise RuntimeError("dnorm budget exhausted while building anchors")
        vec = combo(c)
        est = dnorm(vec, params, grid=grid, box_radius=box_radius, quad=quad,
                    seed=seed)
        evals += 1
        scale = 1.0 / est.interval.upper
        vectors.append(vec.scale(scale))
        d_refs.append(est.interval)
        normalized_coeffs.append((c * scale).tolist())

    # density self-check on seeded unit-D combinations
    checked = 0
    while checked < density_samples:
        if evals >= budget:
            raise RuntimeError("dnorm budget exhausted during density check")
        c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        c /= np.linalg.norm(c)
        probe = combo(c)
        est = dnorm(probe, params, grid=grid, box_radius=box_radius, quad=quad,
                    seed=seed)
        evals += 1
        probe = probe.scale(1.0 / est.interval.upper)
        dist = min(module_norm(probe - v, params, box_radius, quad=quad).upper
                   for v in vectors)
        if dist > epsilon:
            vectors.append(probe)
            d_refs.append(est.interval)
            normalized_coeffs.append((c / est.interval.upper).tolist())
        checked += 1
    return AnchorFamily(vectors, d_refs, normalized_coeffs, params,
                        {"epsilon": epsilon, "N": N, "seed": seed,
                         "dnorm_evals": evals})
