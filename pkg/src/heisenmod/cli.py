"""Batch experiment harness.

Subcommands: invariants, dnorm-sweep, laguerre-approx, bridge-length,
inner-product.  Configuration is a flat JSON object; every run is
deterministic given (config, seed) and writes byte-identical artifacts.
Exit codes: 0 pass, 1 invariant failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import bridge as bridge_mod
from . import hmodule, heisenberg, qtorus, schwartz, specfun
from .heisenberg import ModuleParams
from .hmodule import GridSpec
from .qtorus import RNorm, TorusElement, monomial, unit


class ConfigError(Exception):
    pass


DEFAULTS = {
    "norm": "euclidean",
    "p": 0,
    "q": 1,
    "d": 1,
    "theta": 1.0 / math.sqrt(2.0),
    "box_radius": 16,
    "directions": 64,
    "t_samples": 33,
    "seed": 7,
    "out": None,
    "xi": "gaussian",
    "omega": "gaussian",
    # dnorm sweep
    "theta_limit": 1.0 / math.sqrt(2.0),
    "k_max": 8,
    "sweep_scale": 1.0,
    "rho": "constant",
    # laguerre
    "eth": 1.0,
    "eth_values": None,
    "n_values": [4, 16, 64],
    "bump_radius": 2.0,
    "normalization": "auto",
    # bridge
    "h_values": [0.1, 0.05, 0.01],
    "epsilon": 0.35,
    "anchor_n": 6,
    "anchor_budget": 64,
    "pivot_fejer_n": 12,
    "pivot_box_radius": 24,
    "sample_budget": 128,
    "break_tolerance": False,
}


def load_config(path=None, overrides=None):
    cfg = dict(DEFAULTS)
    if path:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config parse error at line {exc.lineno}, "
                              f"column {exc.colno}: {exc.msg}")
        if not isinstance(data, dict):
            raise ConfigError("config must be a flat JSON object")
        for key, val in data.items():
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config field: {key}")
            cfg[key] = val
    for key, val in (overrides or {}).items():
        if val is not None:
            cfg[key] = val
    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg["norm"] not in ("euclidean", "l1", "linf"):
        raise ConfigError(f"field norm: unknown choice {cfg['norm']!r}")
    for key in ("q", "d", "box_radius", "directions", "t_samples"):
        if int(cfg[key]) < 1:
            raise ConfigError(f"field {key}: must be a positive integer")
    if int(cfg["d"]) % int(cfg["q"]) != 0:
        raise ConfigError("field d: must be a multiple of q")
    eth = float(cfg["theta"]) - int(cfg["p"]) / int(cfg["q"])
    if abs(eth) < 1e-12:
        raise ConfigError("field theta: theta - p/q must be nonzero")


def _params(cfg, theta=None):
    return ModuleParams(int(cfg["p"]), int(cfg["q"]), int(cfg["d"]),
                        float(cfg["theta"] if theta is None else theta))


def _rnorm(cfg):
    return RNorm(cfg["norm"])


def parse_vector_tag(tag, eth, dim=1):
    """Vector tags: gaussian | hermite:j | dilated:r:tag."""
    if tag == "gaussian":
        return schwartz.gaussian(dim)
    if tag.startswith("hermite:"):
        j = int(tag.split(":", 1)[1])
        return specfun.hermite_vector(abs(eth), j, dim)
    if tag.startswith("dilated:"):
        _, r, rest = tag.split(":", 2)
        return parse_vector_tag(rest, eth, dim).dilate(float(r))
    raise ConfigError(f"unknown vector tag: {tag!r}")


def _write(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _out_path(cfg, default_name):
    out = cfg.get("out")
    if out is None:
        out = os.environ.get("HEISENMOD_OUT", ".")
    if os.path.isdir(out) or not os.path.splitext(out)[1]:
        os.makedirs(out, exist_ok=True)
        return os.path.join(out, default_name)
    return out


def _fmt(x):
    return format(float(x), ".12g")


# -- invariants ------------------------------------------------------------------

def _invariant_checks(cfg):
    rng = np.random.default_rng(int(cfg["seed"]))
    theta = float(cfg["theta"])
    tol_break = 1e-3 if cfg.get("break_tolerance") else 0.0
    checks = []

    def record(name, err, tol):
        checks.append({"name": name, "error": float(err), "tolerance": tol,
                       "passed": bool(err <= tol)})

    # cocycle identity on random triples
    worst = 0.0
    for _ in range(200):
        g1, g2, g3 = (tuple(rng.integers(-6, 7, 2)) for _ in range(3))
        lhs = qtorus.cocycle(theta, g1, g2) * qtorus.cocycle(
            theta, (g1[0] + g2[0], g1[1] + g2[1]), g3)
        rhs = qtorus.cocycle(theta, g2, g3) * qtorus.cocycle(
            theta, g1, (g2[0] + g3[0], g2[1] + g3[1]))
        worst = max(worst, abs(lhs - rhs))
    record("cocycle_identity", worst + tol_break, 1e-12)

    # associativity on random small elements
    def rand_elem():
        coeffs = {tuple(rng.integers(-2, 3, 2)):
                  complex(rng.standard_normal(), rng.standard_normal())
                  for _ in range(4)}
        return TorusElement(theta, coeffs)

    worst = 0.0
    for _ in range(10):
        a, b, c = rand_elem(), rand_elem(), rand_elem()
        lhs = qtorus.twisted_product(qtorus.twisted_product(a, b), c)
        rhs = qtorus.twisted_product(a, qtorus.twisted_product(b, c))
        worst = max(worst, (lhs - rhs).l1_norm())
    record("product_associativity", worst + tol_break, 1e-10)

    # unit, involution, beta isometry
    a = rand_elem()
    record("unit_element",
           (qtorus.twisted_product(unit(theta), a) - a).l1_norm(), 1e-12)
    record("involution_involutive",
           (qtorus.involution(qtorus.involution(a)) - a).l1_norm(), 1e-12)
    record("beta_l1_isometry",
           abs(qtorus.beta_act(a, 0.3, -1.1).l1_norm() - a.l1_norm()), 1e-12)

    # commutation relation V * U = e^{2 i pi theta} U * V
    U, V = monomial(theta, 1, 0), monomial(theta, 0, 1)
    lhs = qtorus.twisted_product(V, U)
    rhs = qtorus.twisted_product(U, V).scale(np.exp(2j * math.pi * theta))
    record("commutation_phase", (lhs - rhs).l1_norm(), 1e-12)

    # projective representation at the configured parameters
    params = _params(cfg)
    xi = parse_vector_tag(cfg["xi"], params.eth, params.d)
    s = np.linspace(-3.0, 3.0, 25)
    worst = 0.0
    for _ in range(5):
        g = tuple(int(v) for v in rng.integers(-3, 4, 2))
        h = tuple(int(v) for v in rng.integers(-3, 4, 2))
        left = heisenberg.varpi_act(params, *g,
                                    heisenberg.varpi_act(params, *h, xi))
        right = heisenberg.varpi_act(params, g[0] + h[0], g[1] + h[1], xi)
        phase = qtorus.cocycle(theta, g, h)
        diff = np.abs(left.eval(0, s) - phase * right.eval(0, s)).max()
        worst = max(worst, diff)
    record("projective_representation", worst + tol_break, 1e-10)

    # module inner product hermiticity on the configured vector
    box = min(int(cfg["box_radius"]), 10)
    res = hmodule.module_inner(xi, xi, params, box)
    herm = (qtorus.involution(res.element) - res.element).l1_norm()
    record("inner_hermiticity", herm + tol_break, 1e-8)
    gram = qtorus.gns_matrix(res.element, box + 2)
    min_eig = float(np.linalg.eigvalsh((gram + gram.conj().T) / 2.0).min())
    record("inner_positivity", max(0.0, -min_eig), 1e-8)
    return checks


def cmd_invariants(cfg):
    checks = _invariant_checks(cfg)
    passed = all(c["passed"] for c in checks)
    report = {"passed": passed, "checks": checks,
              "fingerprint": bridge_mod.config_fingerprint(
                  {k: v for k, v in cfg.items() if k != "out"})}
    path = _out_path(cfg, "invariants.json")
    _write(path, json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(path)
    return 0 if passed else 1


# -- dnorm sweep -------------------------------------------------------------------

def cmd_dnorm_sweep(cfg):
    p, q = int(cfg["p"]), int(cfg["q"])
    theta_inf = float(cfg["theta_limit"])
    if abs(theta_inf - p / q) < 1e-12:
        raise ConfigError("field theta_limit: must differ from p/q")
    if cfg["rho"] != "constant":
        raise ConfigError("field rho: only the constant profile is supported")
    grid = GridSpec(int(cfg["directions"]), int(cfg["t_samples"]))
    box = int(cfg["box_radius"])
    rnorm = _rnorm(cfg)
    seed = int(cfg["seed"])

    def one(theta):
        params = ModuleParams(p, q, int(cfg["d"]), theta)
        xi = parse_vector_tag(cfg["xi"], params.eth, params.d)
        est = hmodule.dnorm(xi, params, grid=grid, box_radius=box,
                            rnorm=rnorm, seed=seed)
        return est.interval

    ref = one(theta_inf)
    rows = []
    for k in range(int(cfg["k_max"]) + 1):
        theta_k = theta_inf + 2.0 ** (-k) * float(cfg["sweep_scale"])
        iv = one(theta_k)
        gap = abs(iv.mid - ref.mid) / ref.mid if ref.mid > 0 else 0.0
        rows.append((k, theta_k, iv.lower, iv.upper, gap))
    fp = bridge_mod.config_fingerprint(
        {k: v for k, v in cfg.items() if k != "out"})
    lines = [f"# fingerprint={fp} units=dimensionless",
             "k,theta,lower,upper,gap_to_limit"]
    for k, theta_k, lo, up, gap in rows:
        lines.append(f"{k},{_fmt(theta_k)},{_fmt(lo)},{_fmt(up)},{_fmt(gap)}")
    lines.append(f"inf,{_fmt(theta_inf)},{_fmt(ref.lower)},{_fmt(ref.upper)},0")
    path = _out_path(cfg, "dnorm_sweep.csv")
    _write(path, "\n".join(lines) + "\n")
    print(path)
    return 0


# -- laguerre approximation ---------------------------------------------------------

def cmd_laguerre_approx(cfg):
    eth0 = float(cfg["eth"])
    if eth0 <= 0:
        raise ConfigError("field eth: must be positive")
    bump = specfun.bump_profile(float(cfg["bump_radius"]), mass=1.0)
    mode = cfg["normalization"]
    if mode == "auto":
        mode = specfun.select_cesaro_normalization(bump, eth0)
    elif mode not in ("literal", "orthonormal"):
        raise ConfigError("field normalization: literal|orthonormal|auto")
    eths = cfg["eth_values"] or [eth0]
    fp = bridge_mod.config_fingerprint(
        {k: v for k, v in cfg.items() if k != "out"})
    lines = [f"# fingerprint={fp} normalization={mode} units=L1(rdr)",
             "eth,N,l1_error"]
    for eth in eths:
        for n in cfg["n_values"]:
            approx = specfun.cesaro_sum(bump, float(eth), int(n),
                                        normalization=mode)
            err = specfun.l1_rdr_error(bump, approx,
                                       rmax=approx.support_radius)
            lines.append(f"{_fmt(eth)},{int(n)},{_fmt(err)}")
    path = _out_path(cfg, "laguerre_approx.csv")
    _write(path, "\n".join(lines) + "\n")
    print(path)
    return 0


# -- bridge length ------------------------------------------------------------------

def cmd_bridge_length(cfg):
    theta = float(cfg["theta"])
    seed = int(cfg["seed"])
    params_a = _params(cfg)
    family = specfun.anchor_family(params_a, float(cfg["epsilon"]),
                                   int(cfg["anchor_n"]),
                                   budget=int(cfg["anchor_budget"]), seed=seed)
    pivot = bridge_mod.PivotSpec(int(cfg["pivot_box_radius"]),
                                 int(cfg["pivot_fejer_n"]))
    fp = bridge_mod.config_fingerprint(
        {k: v for k, v in cfg.items() if k != "out"})
    reports = []
    for h in cfg["h_values"]:
        params_b = _params(cfg, theta + float(h))
        co, _ = rescaled = bridge_mod.rescaled_co_anchors(family, params_b,
                                                          seed=seed)
        br = bridge_mod.ModularBridge(pivot, params_a, params_b,
                                      family.vectors, co)
        rep = bridge_mod.bridge_length(br, box_radius=int(cfg["box_radius"]),
                                       sample_budget=int(cfg["sample_budget"]),
                                       seed=seed, config_fingerprint=fp)
        reports.append(rep)
    path = _out_path(cfg, "bridge_length.csv")
    _write(path, f"# fingerprint={fp} units=dimensionless "
                 "basic_estimate=ESTIMATE\n"
                 + bridge_mod.reports_to_csv(reports))
    _write(os.path.splitext(path)[0] + ".json",
           bridge_mod.reports_to_json(reports))
    print(path)
    return 0


# -- inner product -------------------------------------------------------------------

def cmd_inner_product(cfg):
    params = _params(cfg)
    xi = parse_vector_tag(cfg["xi"], params.eth, params.d)
    omega = parse_vector_tag(cfg["omega"], params.eth, params.d)
    res = hmodule.module_inner(xi, omega, params, int(cfg["box_radius"]))
    path = _out_path(cfg, "inner_product.txt")
    _write(path, hmodule.serialize_inner(res))
    print(path)
    return 0


# -- entry point ----------------------------------------------------------------------

COMMANDS = {
    "invariants": cmd_invariants,
    "dnorm-sweep": cmd_dnorm_sweep,
    "laguerre-approx": cmd_laguerre_approx,
    "bridge-length": cmd_bridge_length,
    "inner-product": cmd_inner_product,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="heisenmod",
        description="Quantum 2-torus module numerics: invariant checks, "
                    "D-norm sweeps, Laguerre approximation and bridge lengths.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output file or directory")
        sp.add_argument("--param", action="append", default=[],
                        metavar="KEY=JSON", help="override a config field")
    args = parser.parse_args(argv)
    overrides = {"seed": args.seed, "out": args.out}
    try:
        for item in args.param:
            if "=" not in item:
                raise ConfigError(f"malformed --param (need KEY=JSON): {item!r}")
            key, _, raw = item.partition("=")
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config field: {key}")
            try:
                overrides[key] = json.loads(raw)
            except json.JSONDecodeError:
                overrides[key] = raw
        cfg = load_config(args.config, overrides)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
