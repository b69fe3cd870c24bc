"""Heisenberg-module inner products, module norms and the D-norm estimator.

The torus-algebra valued inner product is realized coefficientwise:

    <xi, omega>(g) = l2_inner(omega, varpi^{-g} xi),

which is linear in xi, conjugate-linear in omega, and makes the left-module
identity <a.xi, omega> = a * <xi, omega> hold for the left action
a.xi = sum a(g) varpi^g xi (checked entrywise in the tests).

The D-norm sup over Weyl displacements is estimated on the compact
reparametrization (unit directions x sphere, t in [0,1]) with the closed-form
branch at t = 0, yielding a certified lower bound and an upper estimate
inflated by a grid-refinement margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .heisenberg import ModuleParams, module_left_act, weyl_act
from .qtorus import (EUCLIDEAN, NormInterval, TorusElement, DROP_TOL,
                     gns_matrix, involution, twisted_product, _dense_sv_lower,
                     _gns_apply, _power_lower)
from .schwartz import QuadratureSpec, SchwartzVector

T_SWITCH = 1e-3          # below this, use the closed-form t = 0 branch
TAIL_TOL = 1e-10         # doubling-test ceiling on the added l^1 mass
TAIL_FACTOR = 10.0       # certified tail = factor * added mass
_OSC_PPU = 6             # quadrature points per unit per unit frequency


_KERNEL_CACHE: dict = {}


@dataclass(frozen=True)
class InnerProductResult:
    """Boxed coefficients of a module inner product plus a tail certificate."""

    element: TorusElement
    box_radius: int
    tail_bound: float


@dataclass(frozen=True)
class GridSpec:
    """Resolution of the (direction, t) grid for the D-norm supremum."""

    directions: int = 64
    t_samples: int = 33

    def __post_init__(self):
        if self.directions < 1 or self.t_samples < 1:
            raise ValueError("grid must be nonempty")


@dataclass(frozen=True)
class DNormEstimate:
    interval: NormInterval
    sphere_samples: int
    t_samples: int
    refinement: tuple = ()


def inner_quad(vectors, box_radius, margin=1.0, tol=1e-13, order=16):
    """Quadrature resolving both the vectors and frequencies up to box_radius."""
    hw = 2.0
    for v in vectors:
        hw = max(hw, v.envelope_halfwidth(tol))
    ppu = max(32, _OSC_PPU * (int(box_radius) + 3))
    return QuadratureSpec(hw + margin, ppu, order)


def _inner_array(xi, omega, params, box_radius, quad):
    """Inner-product coefficients on the centered box, indexed [n+R, m+R].

    Uses varpi^{-(n,m)} xi = e^{i pi p n m / q} u^{-n} v^{-m} sigma^{-n,-m} xi
    so each m needs one shifted evaluation of xi and one small matrix product
    over the frequencies n.
    """
    if xi.dim != omega.dim or xi.dim != params.d:
        raise ValueError("dimension mismatch")
    R = int(box_radius)
    d, p, q, eth, theta = params.d, params.p, params.q, params.eth, params.theta
    s, w = quad.nodes_weights()
    ns = np.arange(-R, R + 1)
    M = len(ns)
    key = (R, quad.half_width, quad.points_per_unit, quad.order)
    cached = _KERNEL_CACHE.get(key)
    if cached is None:
        cached = np.exp(-2j * math.pi * np.outer(ns, s))
        if len(_KERNEL_CACHE) > 32:
            _KERNEL_CACHE.clear()
        _KERNEL_CACHE[key] = cached
    osc = cached                                              # (M, Q)
    ckey = (R, p, q, d, theta)
    cached = _KERNEL_CACHE.get(ckey)
    if cached is None:
        clock = np.exp(2j * math.pi * p * np.outer(ns, np.arange(d)) / q)
        twist = np.exp(1j * math.pi * theta * np.outer(ns, ns))
        cached = (clock, twist)
        _KERNEL_CACHE[ckey] = cached
    clock, twist = cached
    omega_conj = np.conj(omega.eval(0, s))                    # (d, Q)
    shifted = xi.eval_lattice(s, -eth, -R, R)                 # (d, M, Q)
    if d > 1:
        rows = (np.arange(d)[:, None] + ns[None, :]) % d
        shifted = shifted[rows, np.arange(M)[None, :], :]
    weighted = omega_conj[:, None, :] * shifted * w           # (d, M, Q)
    freq = weighted.reshape(d * M, -1) @ osc.T                # (d*M, M) -> [i*M+m, n]
    freq = freq.reshape(d, M, M)
    vals = np.einsum("imn,ni->nm", freq, clock)               # (n, m)
    return vals * twist


def _array_to_element(arr, theta, box_radius):
    R = int(box_radius)
    ii, jj = np.nonzero(np.abs(arr) > DROP_TOL)
    coeffs = {(int(i) - R, int(j) - R): complex(arr[i, j])
              for i, j in zip(ii, jj)}
    return TorusElement(theta, coeffs, drop_tol=0.0)


def module_inner(xi, omega, params, box_radius=16, quad=None):
    """A_theta-valued inner product with a doubling-certified tail bound.

    The coefficients are recomputed on the doubled box; the l^1 mass that the
    doubling adds must fall below 1e-10 relative to the retained mass, and 10x
    the added mass is certified as the tail bound (if not, a larger box is
    required).
    """
    R = int(box_radius)
    if quad is None:
        quad = inner_quad([xi, omega], 2 * R, margin=1.0)
    else:
        quad = quad.widen(0.0, max(quad.points_per_unit, _OSC_PPU * (2 * R + 3)))
    arr2 = _inner_array(xi, omega, params, 2 * R, quad)
    inner_part = arr2[R:3 * R + 1, R:3 * R + 1]
    added = float(np.abs(arr2).sum() - np.abs(inner_part).sum())
    # the off-box quadrature noise floor scales with the element magnitude,
    # so the acceptance gate is relative to the retained l1 mass
    if added >= TAIL_TOL * max(1.0, float(np.abs(inner_part).sum())):
        raise ValueError(
            f"doubling test failed: box {R} leaks l1 mass {added:.3e}; "
            "increase box_radius")
    element = _array_to_element(inner_part, params.theta, R)
    return InnerProductResult(element, R, TAIL_FACTOR * added)


def serialize_inner(result):
    from .qtorus import serialize
    head = (f"box_radius {result.box_radius}\n"
            f"tail_bound {result.tail_bound!r}\n")
    return head + serialize(result.element)


# -- norms --------------------------------------------------------------------

def _tn_lower(elem, box_radius, iters=80, tol=1e-7, seed=7, v0=None,
              floor=0.0):
    """GNS-truncation singular-value lower bound, dense when profitable."""
    R = int(box_radius)
    side = 2 * R + 1
    if len(elem.coeffs) > 24 and side * side <= 5000:
        M = gns_matrix(elem, R)
        val, v = _dense_sv_lower(M, iters=iters, tol=tol, seed=seed,
                                 v0=None if v0 is None else v0.ravel(),
                                 floor=floor)
        return val, v.reshape(side, side)
    adj = involution(elem)
    return _power_lower(lambda x: _gns_apply(elem, x, R),
                        lambda x: _gns_apply(adj, x, R),
                        (side, side), iters=iters, tol=tol, seed=seed, v0=v0,
                        floor=floor)


_EXACT_SIDE_CAP = 1500


def _tn_exact(elem, box_radius):
    """Exact largest eigenvalue of the (Hermitian) GNS truncation.

    Power iteration on near-degenerate spectra (e.g. close-to-integer theta)
    converges too slowly to certify a tight lower bound; for self-adjoint
    positive elements the dense eigensolve is exact and still a certified
    norm lower bound (truncations never exceed the operator norm).
    """
    R = int(box_radius)
    M = gns_matrix(elem, R)
    lam = float(np.linalg.eigvalsh(0.5 * (M + M.conj().T))[-1])
    return max(lam, 0.0)


def module_norm(xi, params, box_radius=16, quad=None, power_iters=120, seed=7):
    """Enclosure of sqrt(||<xi, xi>||_{A_theta}).

    upper = sqrt(l1 + certified tail); lower = sqrt(GNS eigenvalue of the
    boxed inner product), monotone in box_radius.
    """
    res = module_inner(xi, xi, params, box_radius, quad)
    elem = res.element
    if not elem.coeffs:
        return NormInterval(0.0, math.sqrt(res.tail_bound))
    upper = math.sqrt(elem.l1_norm() + res.tail_bound)
    side = 2 * int(box_radius) + 1
    if side * side <= _EXACT_SIDE_CAP:
        lo = _tn_exact(elem, box_radius)
    else:
        lo, _ = _tn_lower(elem, box_radius, iters=power_iters, seed=seed)
    lower = min(math.sqrt(max(lo, 0.0)), upper)
    return NormInterval(lower, upper, ((box_radius, lower),))


# -- difference-quotient field -------------------------------------------------

def omega_quotient(x, y, t, params, xi, r=1.0, rnorm=EUCLIDEAN):
    """The reparametrized quotient (sigma^{tx,ty} xi_r - xi_r) / (2 pi eth t).

    Requires a unit direction (x, y) in the configured norm and t in [0, 1];
    for t below 1e-3 the closed-form limit

        s -> (i x s / eth) xi(r s) + y r xi'(r s) / (2 pi)

    avoids the catastrophic cancellation of the small-t difference.
    """
    if abs(rnorm(x, y) - 1.0) > 1e-9:
        raise ValueError("direction must lie on the unit sphere")
    if t < 0.0 or t > 1.0:
        raise ValueError("t must lie in [0, 1]")
    xi_r = xi.dilate(r) if r != 1.0 else xi
    if not xi.terms:
        return xi_r
    if t < T_SWITCH:
        part1 = xi_r.mul_by_s().scale(1j * x / params.eth)
        part2 = xi_r.derivative().scale(y / (2.0 * math.pi))
        return part1 + part2
    moved = weyl_act(params, t * x, t * y, xi_r)
    return (moved - xi_r).scale(1.0 / (2.0 * math.pi * params.eth * t))


def _grid_points(grid, rnorm):
    dirs = rnorm.sphere(grid.directions)
    ts = np.linspace(0.0, 1.0, grid.t_samples)
    return dirs, ts


def dnorm(xi, params, grid=GridSpec(), box_radius=16, quad=None, r=1.0,
          rnorm=EUCLIDEAN, seed=7, power_iters=80):
    """Estimate D(xi) = sup{||xi||, ||sigma^{x,y}xi - xi|| / (2 pi |eth| ||(x,y)||)}.

    The sup is scanned on the reparametrized grid; interval.lower is the best
    certified GNS lower bound over the grid (plus the module norm of xi)
    and interval.upper the largest l1-certified value inflated by the
    half-resolution refinement margin.
    """
    if not xi.terms:
        return DNormEstimate(NormInterval(0.0, 0.0), grid.directions,
                             grid.t_samples)
    xi_r = xi.dilate(r) if r != 1.0 else xi
    R = int(box_radius)
    if quad is None:
        quad = inner_quad([xi_r], R, margin=abs(params.eth) + 1.0)
    base = module_norm(xi_r, params, R, quad=quad, power_iters=power_iters,
                       seed=seed)

    dirs, ts = _grid_points(grid, rnorm)
    sq_upper = np.empty((len(dirs), len(ts)))
    elements = {}
    for i, (ux, uy) in enumerate(dirs):
        for j, t in enumerate(ts):
            om = omega_quotient(ux, uy, float(t), params, xi, r=r, rnorm=rnorm)
            arr = _inner_array(om, om, params, R, quad)
            elem = _array_to_element(arr, params.theta, R)
            elements[(i, j)] = elem
            sq_upper[i, j] = elem.l1_norm()

    # certify one shared tail at the worst grid point by the doubling test
    i0, j0 = np.unravel_index(int(np.argmax(sq_upper)), sq_upper.shape)
    om = omega_quotient(dirs[i0][0], dirs[i0][1], float(ts[j0]), params, xi,
                        r=r, rnorm=rnorm)
    tail = module_inner(om, om, params, R, quad=quad).tail_bound

    sup_full = float(sq_upper.max())
    coarse = sq_upper[::2, ::2]
    sup_half = float(coarse.max()) if coarse.size else sup_full
    est_full = math.sqrt(sup_full + tail)
    est_half = math.sqrt(sup_half + tail)
    margin = abs(est_full - est_half)
    upper = max(base.upper, est_full + margin)

    # certified lower bound: GNS singular values, scanned best-first so that
    # points whose l1 ceiling cannot beat the current bound are skipped
    lower = base.lower
    order = np.argsort(sq_upper.ravel())[::-1]
    warm = None
    scanned = []
    for flat in order:
        i, j = np.unravel_index(int(flat), sq_upper.shape)
        if math.sqrt(sq_upper[i, j] + tail) <= lower:
            break
        val, warm = _tn_lower(elements[(i, j)], R, iters=power_iters,
                              seed=seed, v0=warm,
                              floor=(0.98 * lower) ** 2)
        scanned.append((val, (i, j)))
        lower = max(lower, math.sqrt(max(val, 0.0)))
    # polish the dominant points exactly: power iteration stalls on
    # near-degenerate spectra (and early-bailed points can hide up to ~2%),
    # the dense eigensolve does not
    side = 2 * R + 1
    if side * side <= _EXACT_SIDE_CAP:
        scanned.sort(reverse=True)
        polish = {(int(i0), int(j0))}
        polish.update(pt for _, pt in scanned[:6])
        for pt in polish:
            lower = max(lower, math.sqrt(_tn_exact(elements[pt], R)))
    lower = min(lower, upper)
    refinement = ((coarse.size, est_half), (sq_upper.size, est_full))
    return DNormEstimate(NormInterval(lower, upper, refinement),
                         grid.directions, grid.t_samples, refinement)


# -- modular metric estimates --------------------------------------------------

def mk_modular_metric_lower(omega, eta, testers, params, box_radius=16,
                            quad=None, tester_dnorms=None, seed=7):
    """Certified lower bound of the modular Monge-Kantorovich distance.

    Returns max over testers of torus_norm(<omega - eta, tester>).lower, the
    tester family standing in for the D-unit ball.
    """
    testers = list(testers)
    if not testers:
        raise ValueError("tester family must be nonempty")
    if tester_dnorms is not None:
        for dv in tester_dnorms:
            if dv > 1.0 + 1e-9:
                raise ValueError("tester violates the D-norm bound")
    diff = omega - eta
    if not diff.terms:
        return 0.0
    R = int(box_radius)
    if quad is None:
        quad = inner_quad([diff] + testers, R)
    best = 0.0
    for tester in testers:
        arr = _inner_array(diff, tester, params, R, quad)
        elem = _array_to_element(arr, params.theta, R)
        if not elem.coeffs:
            continue
        if elem.l1_norm() <= best:
            continue
        val, _ = _tn_lower(elem, R, seed=seed)
        best = max(best, val)
    return best


def imprint_estimate(anchors, sample_unit_ball, params, box_radius=16,
                     quad=None, testers=None, seed=7):
    """One-sided Hausdorff estimate of the anchor family's density defect.

    max over samples of (min over anchors of the mk-style lower distance),
    restricted to the sampled unit ball; a lower bound of the true imprint.
    """
    anchors = list(anchors)
    samples = list(sample_unit_ball)
    if not anchors or not samples:
        raise ValueError("families must be nonempty")
    if testers is None:
        testers = samples
    worst = 0.0
    for sample in samples:
        best = math.inf
        # visit anchors nearest-first (coarse pointwise proxy) so the
        # dist >= best break prunes the tester loop early; the min over
        # anchors is unchanged by the ordering
        sgrid = np.linspace(-5.0, 5.0, 41)
        diffs = sorted(
            (sum(float(np.max(np.abs((sample - anchor).eval(c, sgrid))))
                 for c in range(sample.dim)), i)
            for i, anchor in enumerate(anchors))
        for _, idx in diffs:
            anchor = anchors[idx]
            diff = sample - anchor
            if not diff.terms:
                best = 0.0
                break
            R = int(box_radius)
            q = quad or inner_quad([diff] + list(testers), R)
            dist = 0.0
            for tester in testers:
                arr = _inner_array(diff, tester, params, R, q)
                elem = _array_to_element(arr, params.theta, R)
                if not elem.coeffs or elem.l1_norm() <= dist:
                    continue
                val, _ = _tn_lower(elem, R, seed=seed)
                dist = max(dist, val)
                if dist >= best:
                    break  # cannot improve the min over anchors
            best = min(best, dist)
        worst = max(worst, best)
    return worst
