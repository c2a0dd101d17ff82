"""Command-line front end (``quatell``).

Exit status: 0 when every requested residual is within tolerance, 1 on a
violation, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import elliptic, geometry, lattice, regular
from .algebra import MultiIndex, Quat, QuatellError, bilinear, qconj, qdot, qmul, qnorm, sigma
from .geometry import ResidualReport, TWO_PI2

CSV_HEADER = ["identity", "abs_residual", "rel_residual", "R", "quad_order", "r", "seed"]

# default (rtol, atol) per identity family; a report passes if either holds
DEFAULT_TOL = {
    "legendre": (1e-3, 0.0),
    "qm": (1e-3, 0.0),
    "qm.U": (0.0, 0.0),
    "thm1": (1e-3, 1e-6),  # sphere integrands are O(100) at r = 0.4
    "binom": (0.0, 1e-11),
    "gexp": (0.0, 0.05),  # one-sided: rate <= |q|/|p| + atol
    "parity": (0.0, 0.0),
    "rlem": (1e-10, 1e-10),
    "dz": (0.0, 1e-10),
    "fprop": (5e-2, 0.0),
}


@dataclass
class RunConfig:
    command: str
    lattice: str = "preset:lipschitz"
    R: float = elliptic.DEFAULT_R
    quad_order: int = 24
    r: Optional[float] = None
    D: int = 12
    fmt: str = "json"
    seed: int = 0
    rtol: Optional[float] = None
    atol: Optional[float] = None
    extra: Dict = field(default_factory=dict)

    def sphere_radius(self, lat: lattice.Lattice) -> float:
        return 0.4 * lat.r_min if self.r is None else self.r

    def params(self, lat: lattice.Lattice) -> dict:
        return dict(R=self.R, quad_order=self.quad_order, r=self.sphere_radius(lat), seed=self.seed)


@dataclass
class Checked:
    report: ResidualReport
    family: str

    def passed(self, cfg: RunConfig) -> bool:
        rtol, atol = DEFAULT_TOL[self.family]
        rtol = cfg.rtol if cfg.rtol is not None else rtol
        atol = cfg.atol if cfg.atol is not None else atol
        if self.family == "gexp":
            return bool(self.report.lhs[0] <= self.report.rhs[0] + atol)
        a, r = self.report.abs_residual, self.report.rel_residual
        return bool(a <= atol or r <= rtol)


# ---------------------------------------------------------------------------
# parsing helpers


@lru_cache(maxsize=16)
def load_spec(text: str):
    """Parsed lattice spec; memoised so repeated runs share evaluator caches."""
    return lattice.load_lattice_spec(text)


def parse_quat(text: str) -> Quat:
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 4:
        raise ValueError(f"expected 4 comma-separated reals, got {text!r}")
    return Quat(*vals)


def parse_nu(text: str) -> MultiIndex:
    vals = [int(v) for v in text.split(",")]
    if len(vals) != 3 or min(vals) < 0:
        raise ValueError(f"expected 3 non-negative integers, got {text!r}")
    return MultiIndex(*vals)


# ---------------------------------------------------------------------------
# suites


def suite_legendre(cfg: RunConfig, lat: lattice.Lattice) -> List[Checked]:
    ev = elliptic.evaluator(lat, cfg.R)
    eta = elliptic.quasi_periods(lat, cfg.R, cfg.seed).array
    r = cfg.sphere_radius(lat)
    res = geometry.residue_at(ev.function(), 0.0, r, cfg.quad_order)
    rep = ResidualReport.make(
        "legendre", qdot(lat.lambda_hat, eta), res * TWO_PI2, **cfg.params(lat)
    )
    return [Checked(rep, "legendre")]


def suite_qm(cfg: RunConfig, ctx: lattice.OrderContext) -> List[Checked]:
    lat = ctx.lattice
    eta = elliptic.quasi_periods(lat, cfg.R, cfg.seed).array
    values = cfg.extra.get("a") or [
        t for t in ("1,0,0,0", "0,1,0,0", "0.5,0.5,0.5,0.5", "1,1,0,0") if ctx.contains(parse_quat(t))
    ]
    out: List[Checked] = []
    params = cfg.params(lat)
    for text in values:
        a = parse_quat(text)
        u = lattice.u_matrix(ctx, a)
        det = round(np.linalg.det(u.astype(float)))
        out.append(Checked(ResidualReport.make(
            f"qm.det a={text}", Quat(det), Quat(a.norm() ** 2), **params), "qm.U"))
        for rep in geometry.check_qm(ctx, a, eta, **params):
            out.append(Checked(rep, "qm"))
    return out


def suite_thm1(cfg: RunConfig, lat: lattice.Lattice) -> List[Checked]:
    ev = elliptic.evaluator(lat, cfg.R)
    eta = elliptic.quasi_periods(lat, cfg.R, cfg.seed).array
    r = cfg.sphere_radius(lat)
    params = cfg.params(lat)
    f = ev.function()
    df = ev.dzeta()
    reps = [
        geometry.check_ii_second(lat, eta, f, df, r, cfg.quad_order, R=cfg.R, seed=cfg.seed),
        geometry.check_ii_third(lat, eta, f, r, cfg.quad_order, R=cfg.R, seed=cfg.seed),
    ]
    out = [Checked(x, "thm1") for x in reps]
    out.extend(Checked(x, "dz") for x in dz_relations(lat, params))
    return out


def dz_relations(lat: lattice.Lattice, params: dict) -> List[ResidualReport]:
    """Theorem 1(iii) for omega, omega' in {dz1, dz2, dz3} (analytic periods)."""
    out = []
    periods = [geometry.period_1form(lat, _zfunc(j), check_poles=False) for j in (1, 2, 3)]
    for j, p in enumerate(periods, 1):
        out.append(ResidualReport.make(f"dz{j}.lambda_hat", qdot(lat.lambda_hat, p), Quat(), **params))
        norm = bilinear(qconj(p), lat.gram_q, p)
        out.append(ResidualReport.make(f"dz{j}.norm", norm, Quat(-2.0 * lat.det), **params,
                                       note="constant 2 (stated as 1)"))
        for k, p2 in enumerate(periods, 1):
            out.append(ResidualReport.make(f"dz{k}.Q.dz{j}", bilinear(p2, lat.gram_q, p), Quat(), **params))
    return out


def _zfunc(j: int):
    return lambda q: regular.eval_z(j, np.asarray(q, dtype=float))


def binom_reports(points: np.ndarray, top: int = 6) -> List[ResidualReport]:
    table = regular.fueter_table(points, top)
    out = []
    for n in range(2, top + 1):
        worst = 0.0
        for nu in sigma(n):
            for m in range(1, n):
                acc = sum(
                    qmul(table[mu], table[nu.minus(mu)])
                    for mu in sigma(m)
                    if all(x <= y for x, y in zip(mu, nu))
                )
                ref = math.comb(n, m) * table[nu]
                err = np.sqrt(qnorm(acc - ref)) / np.maximum(np.sqrt(qnorm(ref)), 1e-300)
                worst = max(worst, float(err.max()))
        out.append(ResidualReport.make(f"binom n={n}", Quat(worst), Quat(), note="max relative error"))
    return out


def gexp_rate(p: np.ndarray, q: np.ndarray, mu=(0, 0, 0), top: int = 12) -> float:
    """Per-degree convergence rate of the partial sums of
    G_mu(p - q) = sum_nu P_nu(q) G_{nu+mu}(p).

    The rate is the geometric mean error ratio over the upper half of the
    degrees, (e_top / e_{top/2})^(2/top); low degrees carry a polynomial
    prefactor (n + 3) / (n + 1) on top of |q|/|p|.
    """
    mu = MultiIndex(*mu)
    top = min(top, regular.MAX_DEGREE - mu.degree)
    exact = regular.kernel(mu)(p - q)
    table = regular.fueter_table(q, top)
    acc = np.zeros(4)
    errs = []
    for n in range(top + 1):
        for nu in sigma(n):
            acc = acc + qmul(table[nu], regular.kernel(nu.plus(mu))(p))
        errs.append(float(np.sqrt(qnorm(acc - exact))))
    half = top // 2
    return (errs[top] / errs[half]) ** (1.0 / (top - half))


def gexp_reports(rng: np.random.Generator, count: int = 20, ratio: float = 0.25) -> List[ResidualReport]:
    worst = 0.0
    for _ in range(count):
        p = rng.normal(size=4)
        q = rng.normal(size=4)
        q *= ratio * np.linalg.norm(p) / np.linalg.norm(q)
        worst = max(worst, gexp_rate(p, q))
    return [ResidualReport.make("gexp.rate", Quat(worst), Quat(ratio),
                                note="per-degree error ratio over degrees 6..12, |q|/|p| = 0.25")]


def suite_identities(cfg: RunConfig, lat: lattice.Lattice) -> List[Checked]:
    rng = np.random.default_rng(cfg.seed)
    params = cfg.params(lat)
    out = [Checked(x, "binom") for x in binom_reports(rng.normal(size=(20, 4)))]
    out += [Checked(x, "gexp") for x in gexp_reports(rng)]
    for nu in [(2, 0, 0), (1, 1, 0), (2, 2, 0), (1, 1, 2)]:
        e = lattice.eisenstein(lat, nu, cfg.R)
        out.append(Checked(ResidualReport.make(f"parity nu={nu}", e.value, Quat(), **params), "parity"))
    p1 = geometry.period_1form(lat, _zfunc(1), check_poles=False)
    form = geometry.dz(1)
    pr = geometry.period_3form(lat, geometry.map_LR(form, "right"), cfg.quad_order)
    pl = geometry.period_3form(lat, geometry.map_LR(form, "left"), cfg.quad_order)
    out.append(Checked(ResidualReport.make(
        "rlem.right dz1", pr.ravel(), geometry.apply_jq_right(lat, p1).ravel(), **params), "rlem"))
    out.append(Checked(ResidualReport.make(
        "rlem.left dz1", pl.ravel(), geometry.apply_jq_left(lat, p1).ravel(), **params), "rlem"))
    out.extend(Checked(x, "dz") for x in dz_relations(lat, params))
    return out


def suite_slow(cfg: RunConfig, lat: lattice.Lattice) -> List[Checked]:
    ev = elliptic.evaluator(lat, cfg.R)
    n = int(cfg.extra.get("n") or 2_000_000)
    r = cfg.sphere_radius(lat)
    rep = geometry.check_fprop(lat, geometry.D3Q, ev.function(), ev.dzeta(), r, n=n, seed=cfg.seed,
                               order=cfg.quad_order)
    rep.params["R"] = cfg.R
    return [Checked(rep, "fprop")]


# ---------------------------------------------------------------------------
# output


def emit_reports(reports: Sequence[ResidualReport], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([r.to_dict() for r in reports], indent=2)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for rep in reports:
            d = rep.to_dict()
            p = d["params"]
            w.writerow([d["identity"], d["abs_residual"], d["rel_residual"],
                        p.get("R"), p.get("quad_order"), p.get("r"), p.get("seed")])
        return buf.getvalue().rstrip("\n")
    lines = []
    for rep in reports:
        lines.append(f"{rep.identity}: abs={rep.abs_residual:.3e} rel={rep.rel_residual:.3e}")
    return "\n".join(lines)


def emit_values(data: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(data, indent=2)
    flat = []

    def walk(prefix, v):
        if isinstance(v, dict):
            for k, x in v.items():
                walk(f"{prefix}.{k}" if prefix else str(k), x)
        else:
            flat.append((prefix, v))

    walk("", data)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in flat:
            w.writerow([k, json.dumps(v)])
        return buf.getvalue().rstrip("\n")
    return "\n".join(f"{k}: {json.dumps(v)}" for k, v in flat)


# ---------------------------------------------------------------------------
# commands


def lattice_info(lat: lattice.Lattice) -> dict:
    return {
        "generators": lat.matrix.tolist(),
        "det": lat.det,
        "covolume": lat.covolume,
        "r_L": lat.r_min,
        "lambda_hat": lat.lambda_hat.tolist(),
        "Q": lat.gram_q.tolist(),
    }


def _values_command(cfg: RunConfig, lat: lattice.Lattice) -> dict:
    ex = cfg.extra
    if cfg.command == "lattice-info":
        return lattice_info(lat)
    if cfg.command == "eisenstein":
        nu = parse_nu(ex["nu"])
        e = lattice.eisenstein(lat, nu, cfg.R, ex.get("method") or "smooth")
        return {"nu": list(nu), "value": list(e.value), "bound": e.bound, "estimate": e.estimate, "R": cfg.R}
    if cfg.command == "wp":
        nu, q = parse_nu(ex["nu"]), parse_quat(ex["q"])
        if ex.get("series"):
            w = elliptic.wp_series(lat, nu, q, cfg.D, R=cfg.R)
        else:
            w = elliptic.wp(lat, nu, q, cfg.R)
        return {"nu": list(nu), "q": list(q), "value": list(w.value), "bound": w.bound, "R": cfg.R, "D": cfg.D}
    if cfg.command == "zeta":
        q = parse_quat(ex["q"])
        v, b = elliptic.zeta(lat, q, cfg.R)
        return {"q": list(q), "value": list(v), "bound": b, "R": cfg.R}
    if cfg.command == "quasi-periods":
        qp = elliptic.quasi_periods(lat, cfg.R, cfg.seed)
        return {"eta": qp.eta.tolist(), "bound": qp.bound, "difference_check": qp.difference_check,
                "R": cfg.R, "seed": cfg.seed}
    raise AssertionError(cfg.command)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lattice", default="preset:lipschitz",
                        help='"preset:hurwitz", "preset:lipschitz", "diag:a,b,c" or 16 reals')
    common.add_argument("--R", type=float, default=elliptic.DEFAULT_R, help="truncation radius")
    common.add_argument("--quad-order", type=int, default=24)
    common.add_argument("--r", type=float, default=None, help="sphere radius (default 0.4 r_L)")
    common.add_argument("--D", type=int, default=12, help="series truncation degree")
    common.add_argument("--format", dest="fmt", choices=["json", "csv", "text"], default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--rtol", type=float, default=None)
    common.add_argument("--atol", type=float, default=None)

    p = argparse.ArgumentParser(prog="quatell", description="Quaternionic elliptic functions")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("lattice-info", parents=[common])
    e = sub.add_parser("eisenstein", parents=[common])
    e.add_argument("--nu", required=True)
    e.add_argument("--method", choices=["smooth", "ball", "richardson"], default="smooth")
    w = sub.add_parser("wp", parents=[common])
    w.add_argument("--nu", required=True)
    w.add_argument("--q", required=True)
    w.add_argument("--series", action="store_true", help="use the local expansion")
    z = sub.add_parser("zeta", parents=[common])
    z.add_argument("--q", required=True)
    sub.add_parser("quasi-periods", parents=[common])
    sub.add_parser("e-star", parents=[common])
    v = sub.add_parser("verify", parents=[common])
    v.add_argument("suite", choices=["legendre", "thm1", "qm", "identities", "slow"])
    v.add_argument("--a", action="append", help="order element for the qm suite (repeatable)")
    v.add_argument("--n", type=int, default=None, help="QMC sample count for the slow suite")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    extra = {k: getattr(ns, k) for k in ("nu", "q", "method", "series", "suite", "a", "n") if hasattr(ns, k)}
    return RunConfig(ns.command, ns.lattice, ns.R, ns.quad_order, ns.r, ns.D, ns.fmt, ns.seed,
                     ns.rtol, ns.atol, extra)


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    cfg = config_from_args(ns)
    try:
        obj = load_spec(cfg.lattice)
        lat = lattice.as_lattice(obj)
        if cfg.command == "verify":
            suite = cfg.extra["suite"]
            if suite == "qm":
                if not isinstance(obj, lattice.OrderContext):
                    raise ValueError("the qm suite needs an order preset (preset:hurwitz or preset:lipschitz)")
                checked = suite_qm(cfg, obj)
            else:
                checked = {
                    "legendre": suite_legendre,
                    "thm1": suite_thm1,
                    "identities": suite_identities,
                    "slow": suite_slow,
                }[suite](cfg, lat)
            print(emit_reports([c.report for c in checked], cfg.fmt), file=out)
            return 0 if all(c.passed(cfg) for c in checked) else 1
        if cfg.command == "e-star":
            es = elliptic.e_star(lat, cfg.R)
            if cfg.fmt == "json":
                data = {"E": es.E.tolist(), "E_transpose": es.E_transpose.tolist(), "eprop_sign": es.eprop_sign,
                        "reports": [r.to_dict() for r in es.reports]}
                print(json.dumps(data, indent=2), file=out)
            else:
                print(emit_reports(es.reports, cfg.fmt), file=out)
            return 0
        print(emit_values(_values_command(cfg, lat), cfg.fmt), file=out)
        return 0
    except (QuatellError, ValueError, KeyError) as exc:
        print(f"quatell: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
