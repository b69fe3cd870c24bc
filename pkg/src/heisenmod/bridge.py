"""Modular bridges between Heisenberg modules over nearby deformation
parameters, and length-report assembly for the propinquity upper bound.

The pivot is a diagonal operator of Fejer product weights on a truncated
sequence space (norm <= 1, self-adjoint, weight 1 at the origin).  The
basic length is a documented sampling ESTIMATE, not a certified bound.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .hmodule import (GridSpec, dnorm, imprint_estimate, module_inner,
                      inner_quad, _tn_lower)
from .qtorus import (EUCLIDEAN, NormInterval, TorusElement, fejer_truncate,
                     gns_matrix, involution, l_seminorm, _dense_sv_lower,
                     _gns_apply, _power_lower)
from .specfun import AnchorFamily, hermite_vector


@dataclass(frozen=True)
class PivotSpec:
    """Diagonal pivot on the centered box: Fejer product weights (or 1's).

    fejer_n = None means identity weights extended by 1 off the box, so the
    doubled-box check sees the same (identity) operator.  The invariant-state
    condition is satisfied structurally: the origin weight is 1.
    """

    box_radius: int
    fejer_n: int | None = None

    def __post_init__(self):
        if self.box_radius < 1:
            raise ValueError("pivot box radius must be positive")
        if self.fejer_n is not None and self.fejer_n < 1:
            raise ValueError("Fejer parameter must be positive")

    def weights(self, box_radius=None):
        R = int(box_radius if box_radius is not None else self.box_radius)
        k = np.arange(-R, R + 1)
        if self.fejer_n is None:
            w1 = np.ones_like(k, dtype=float)
        else:
            w1 = np.maximum(0.0, 1.0 - np.abs(k) / self.fejer_n)
        return np.outer(w1, w1)


def _sv_power(M, iters=400, seed=7, rel_tol=1e-12, chunk=10):
    """Top singular value of an explicit matrix by power iteration.

    Returns (estimate, margin) where the estimate is a certified lower bound
    (Rayleigh quotient of M^H M) and the margin is the improvement over the
    last converged chunk, a plateau-based error proxy.
    """
    rng = np.random.default_rng(seed)
    n = M.shape[1]
    v = np.ones(n, dtype=complex)
    v += 0.25 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    v /= np.linalg.norm(v)
    MH = M.conj().T
    best = 0.0
    marks = [0.0]
    for it in range(iters):
        u = M @ v
        lam = float(np.vdot(u, u).real)
        best = max(best, lam)
        if (it + 1) % chunk == 0:
            if best <= marks[-1] * (1.0 + rel_tol):
                marks.append(best)
                break
            marks.append(best)
        w = MH @ u
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        v = w / nw
    lower = math.sqrt(max(best, 0.0))
    prev = marks[-2] if len(marks) > 1 else 0.0
    margin = lower - math.sqrt(max(prev, 0.0))
    return lower, margin


def _prune(elem, tol=1e-13):
    """Drop coefficients below tol; returns (pruned, dropped l1 mass)."""
    keep = {g: c for g, c in elem.coeffs.items() if abs(c) > tol}
    dropped = sum(abs(c) for g, c in elem.coeffs.items() if g not in keep)
    if not dropped:
        return elem, 0.0
    return TorusElement(elem.theta, keep), float(dropped)


def bridge_norm(a, b, pivot, power_iters=150, seed=7):
    """Enclosure of ||gns(a) X - X gns(b)|| for the diagonal pivot X.

    Coefficients below 1e-13 are pruned first and their l1 mass is folded
    into the enclosure (they widen it by at most that mass on either side,
    since the pivot weights are bounded by 1).  For a Fejer pivot the weights
    vanish beyond fejer_n, so every nonzero entry of the full operator
    a X - X b lies inside the box of radius support + fejer_n and the
    truncation there is exact; the enclosure width is then only the
    power-iteration plateau margin plus the pruned mass.  For the identity
    pivot the truncation is not exact and the doubled-box discrepancy is
    added as the margin instead.
    """
    R = int(pivot.box_radius)
    a, drop_a = _prune(a)
    b, drop_b = _prune(b)
    slack = drop_a + drop_b
    supp = max(a.support_radius(), b.support_radius())
    if R < supp + 1:
        raise ValueError("pivot box too small for the element supports")
    ceiling = a.l1_norm() + b.l1_norm()
    if pivot.fejer_n is not None:
        Re = supp + int(pivot.fejer_n)
        side = 2 * Re + 1
        w = pivot.weights(Re).ravel()
        A = gns_matrix(a, Re)
        B = gns_matrix(b, Re)
        M = A * w[None, :] - w[:, None] * B
        del A, B
        lower, margin = _sv_power(M, iters=max(power_iters, 200), seed=seed)
        lower = max(lower - slack, 0.0)
        upper = min(lower + 10.0 * margin + 2.0 * slack, ceiling)
        return NormInterval(min(lower, upper), upper, ((Re, lower),))
    vals = []
    for RR in (R, 2 * R):
        vals.append(_bridge_sv(a, b, pivot, RR, power_iters, seed))
    lower = max(max(vals) - slack, 0.0)
    margin = abs(vals[1] - vals[0])
    upper = min(lower + margin + 2.0 * slack, ceiling)
    return NormInterval(min(lower, upper), upper, ((R, vals[0]), (2 * R, vals[1])))


def _bridge_sv(a, b, pivot, R, iters, seed):
    side = 2 * R + 1
    w = pivot.weights(R)
    if side * side <= 2500:
        A = gns_matrix(a, R)
        B = gns_matrix(b, R)
        wf = w.ravel()
        M = A * wf[None, :] - wf[:, None] * B
        val, _ = _dense_sv_lower(M, iters=iters, seed=seed)
        return val
    a_adj, b_adj = involution(a), involution(b)

    def apply_m(x):
        return _gns_apply(a, w * x, R) - w * _gns_apply(b, x, R)

    def apply_mh(x):
        return w * _gns_apply(a_adj, x, R) - _gns_apply(b_adj, w * x, R)

    val, _ = _power_lower(apply_m, apply_mh, (side, side), iters=iters,
                          seed=seed)
    return val


@dataclass
class ModularBridge:
    """Pivot plus matched anchor/co-anchor families over theta and vartheta."""

    pivot: PivotSpec
    params_a: object
    params_b: object
    anchors: list
    co_anchors: list

    def __post_init__(self):
        if len(self.anchors) != len(self.co_anchors):
            raise ValueError("anchor families must have equal length")
        if not self.anchors:
            raise ValueError("anchor families must be nonempty")

    @property
    def theta(self):
        return self.params_a.theta

    @property
    def vartheta(self):
        return self.params_b.theta


def rescaled_co_anchors(family, params_b, grid=GridSpec(16, 9), box_radius=12,
                        quad=None, seed=7):
    """Co-anchors eta_j = (D_theta(omega_j) / D_vartheta(omega_j)) omega_j.

    Anchors enter with D_theta = 1 after family normalization, so the rescale
    makes D_vartheta(eta_j) = D_theta(omega_j) up to enclosure width.
    """
    out, ratios = [], []
    for vec, ref in zip(family.vectors, family.d_refs):
        est = dnorm(vec, params_b, grid=grid, box_radius=box_radius, quad=quad,
                    seed=seed)
        # family vectors are normalized by the certified upper bound; use the
        # same convention here so the rescale tends to 1 as vartheta -> theta
        ratio = 1.0 / est.interval.upper
        out.append(vec.scale(ratio))
        ratios.append(ratio)
    return out, ratios


def modular_reach(bridge, box_radius=16, quad=None, power_iters=150, seed=7):
    """max over (j,k) of bridge_norm(<w_j,w_k>_theta, <e_j,e_k>_vartheta).upper.

    Inner-product tail bounds are added to the bridge-norm uppers so the
    reported reach covers the truncated coefficients.
    """
    pa, pb = bridge.params_a, bridge.params_b
    n = len(bridge.anchors)
    worst = 0.0
    for j in range(n):
        for k in range(j, n):
            ia = module_inner(bridge.anchors[j], bridge.anchors[k], pa,
                              box_radius, quad)
            ib = module_inner(bridge.co_anchors[j], bridge.co_anchors[k], pb,
                              box_radius, quad)
            bn = bridge_norm(ia.element, ib.element, bridge.pivot,
                             power_iters=power_iters, seed=seed)
            worst = max(worst, bn.upper + ia.tail_bound + ib.tail_bound)
    return worst


def _lip_ball_samples(theta, count, rng, rnorm=EUCLIDEAN, radius=3,
                      fejer_n=4, box_radius=8):
    """Seeded self-adjoint elements with Lipschitz seminorm upper <= 1."""
    out = []
    for _ in range(count):
        coeffs = {}
        for n in range(-radius, radius + 1):
            for m in range(-radius, radius + 1):
                coeffs[(n, m)] = complex(rng.standard_normal(),
                                         rng.standard_normal())
        raw = TorusElement(theta, coeffs)
        sym = fejer_truncate(raw + involution(raw), fejer_n)
        ls = l_seminorm(sym, box_radius=box_radius, direction_samples=4,
                        rnorm=rnorm).upper
        if ls > 0:
            out.append(sym.scale(1.0 / ls))
    return out


def basic_length_estimate(theta, vartheta, pivot, sample_budget=128, seed=7,
                          rnorm=EUCLIDEAN):
    """Seeded ESTIMATE of the basic bridge length (reach and height proxies).

    reach proxy: over matched L-unit-ball samples on both sides, the largest
    (over one side) smallest (over the other) bridge norm; height proxy: the
    largest pivot-twisted vector-state discrepancy over the same samples.
    Labeled an estimate in all outputs; not a certified bound.
    """
    if sample_budget < 1:
        raise ValueError("sample budget must be >= 1")
    rng = np.random.default_rng(seed)
    n_elem = max(2, min(12, sample_budget // 8))
    base = _lip_ball_samples(theta, n_elem, rng, rnorm)
    side_a = base
    side_b = [TorusElement(vartheta, dict(a.coeffs)) for a in base]

    def directed(src, dst):
        worst = 0.0
        for i, a in enumerate(src):
            best = math.inf
            # matched element first: the natural near-minimizer
            order = [i] + [j for j in range(len(dst)) if j != i]
            for j in order:
                b = dst[j]
                aa, bb = (a, b) if a.theta == theta else (b, a)
                val = bridge_norm(aa, bb, pivot, seed=seed).upper
                best = min(best, val)
                if best <= worst:
                    break
            worst = max(worst, best)
        return worst

    reach_proxy = max(directed(side_a, side_b), directed(side_b, side_a))

    # height proxy: localized vector states psi vs their pivot twists
    R = pivot.box_radius
    side = 2 * R + 1
    w = pivot.weights(R).ravel()
    k = np.arange(-R, R + 1)
    envelope = np.exp(-np.add.outer(k * k, k * k) / 18.0).ravel()
    n_states = max(2, min(8, sample_budget // 16))
    height = 0.0
    for _ in range(n_states):
        psi = envelope * (rng.standard_normal(side * side)
                          + 1j * rng.standard_normal(side * side))
        psi /= np.linalg.norm(psi)
        wpsi = w * psi
        nw = np.linalg.norm(wpsi)
        if nw < 1e-12:
            continue
        wpsi /= nw
        for elem in side_a + side_b:
            A = gns_matrix(elem, R)
            direct = np.vdot(psi, A @ psi)
            twisted = np.vdot(wpsi, A @ wpsi)
            height = max(height, abs(direct - twisted))
    return max(reach_proxy, float(height))


@dataclass
class BridgeLengthReport:
    theta: float
    vartheta: float
    bn_matrix: list
    modular_reach: float
    imprint_a: float
    imprint_b: float
    basic_estimate: float
    total_length: float
    propinquity_upper: float
    seed: int
    fingerprint: str

    def recompute_total(self):
        return max(self.basic_estimate,
                   max(self.imprint_a, self.imprint_b) + self.modular_reach)


def _unit_ball_samples(params, count, rng, degree=6, grid=GridSpec(8, 5),
                       box_radius=12, quad=None, seed=7):
    eth = abs(params.eth)
    out = []
    for _ in range(count):
        c = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
        c /= np.linalg.norm(c)
        vec = hermite_vector(eth, 0, params.d, 0).scale(c[0])
        for j in range(1, degree + 1):
            vec = vec + hermite_vector(eth, j, params.d, 0).scale(c[j])
        est = dnorm(vec, params, grid=grid, box_radius=box_radius, quad=quad,
                    seed=seed)
        out.append(vec.scale(1.0 / est.interval.upper))
    return out


def bridge_length(bridge, box_radius=16, quad=None, sample_budget=128, seed=7,
                  config_fingerprint=""):
    """Assemble the full length report for a modular bridge."""
    pa, pb = bridge.params_a, bridge.params_b
    n = len(bridge.anchors)
    rng = np.random.default_rng(seed)

    bn = np.zeros((n, n))
    reach = 0.0
    for j in range(n):
        for k in range(j, n):
            ia = module_inner(bridge.anchors[j], bridge.anchors[k], pa,
                              box_radius, quad)
            ib = module_inner(bridge.co_anchors[j], bridge.co_anchors[k], pb,
                              box_radius, quad)
            val = bridge_norm(ia.element, ib.element, bridge.pivot,
                              seed=seed).upper + ia.tail_bound + ib.tail_bound
            bn[j, k] = bn[k, j] = val
            reach = max(reach, val)

    n_samp = max(2, min(10, sample_budget // 12))
    samples_a = _unit_ball_samples(pa, n_samp, rng, box_radius=min(box_radius, 12),
                                   seed=seed)
    samples_b = _unit_ball_samples(pb, n_samp, rng, box_radius=min(box_radius, 12),
                                   seed=seed)
    imprint_a = imprint_estimate(bridge.anchors, samples_a, pa,
                                 box_radius=min(box_radius, 12), quad=quad,
                                 seed=seed)
    imprint_b = imprint_estimate(bridge.co_anchors, samples_b, pb,
                                 box_radius=min(box_radius, 12), quad=quad,
                                 seed=seed)
    basic = basic_length_estimate(bridge.theta, bridge.vartheta, bridge.pivot,
                                  sample_budget=sample_budget, seed=seed)
    total = max(basic, max(imprint_a, imprint_b) + reach)
    return BridgeLengthReport(bridge.theta, bridge.vartheta, bn.tolist(),
                              reach, imprint_a, imprint_b, basic, total,
                              total, seed, config_fingerprint)


# -- report output ---------------------------------------------------------------

CSV_COLUMNS = ["theta", "vartheta", "reach_modular", "imprint_a", "imprint_b",
               "basic_estimate", "total", "seed", "grid_fingerprint"]


def config_fingerprint(config_dict):
    blob = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _fmt(x):
    return format(float(x), ".12g")


def reports_to_csv(reports):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rep in reports:
        writer.writerow([_fmt(rep.theta), _fmt(rep.vartheta),
                         _fmt(rep.modular_reach), _fmt(rep.imprint_a),
                         _fmt(rep.imprint_b), _fmt(rep.basic_estimate),
                         _fmt(rep.total_length), str(rep.seed),
                         rep.fingerprint])
    return buf.getvalue()


def reports_to_json(reports):
    rows = []
    for rep in reports:
        rows.append({
            "theta": float(_fmt(rep.theta)),
            "vartheta": float(_fmt(rep.vartheta)),
            "reach_modular": float(_fmt(rep.modular_reach)),
            "imprint_a": float(_fmt(rep.imprint_a)),
            "imprint_b": float(_fmt(rep.imprint_b)),
            "basic_estimate": float(_fmt(rep.basic_estimate)),
            "total": float(_fmt(rep.total_length)),
            "seed": rep.seed,
            "grid_fingerprint": rep.fingerprint,
            "basic_estimate_is_estimate": True,
        })
    return json.dumps(rows, indent=2, sort_keys=True) + "\n"
