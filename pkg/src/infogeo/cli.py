"""Command-line front end.

Every subcommand prints one JSON document on stdout carrying ``version``,
``command`` and ``seed``.  Exit status: 0 success, 1 usage error (nothing on
stdout), 2 numeric failure (the document then holds ``error`` and ``message``).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from typing import Any

import numpy as np

from . import __version__
from . import clustering, convexcore as cc, decisions, divergences as dv, expfam, fisherrao, flatgeo, mixfam
from .errors import InfoGeoError


class UsageError(Exception):
    pass


class ModelSpecError(UsageError):
    def __init__(self, field: str, message: str):
        super().__init__(f"model spec field {field!r}: {message}")
        self.field = field


# ---------------------------------------------------------------------------
# output


def _num(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return json.dumps(str(x))
    if x == int(x) and abs(x) < 1e16:
        return repr(float(x))
    return format(x, ".17g")


def dumps(obj: Any) -> str:
    """JSON with every float written to 17 significant digits."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if obj is None:
        return "null"
    return json.dumps(obj)


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return v


def write_csv(path: str, header: list, rows: list) -> None:
    """Append rows to ``path``; the header is written only for a new file."""
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(header)
        for r in rows:
            w.writerow([_csv_cell(v) for v in r])


# ---------------------------------------------------------------------------
# parsing helpers


def parse_vector(text: str, flag: str) -> np.ndarray:
    text = text.strip()
    try:
        if text.startswith("["):
            vals = json.loads(text)
        else:
            vals = [float(v) for v in text.split(",") if v.strip()]
        arr = np.asarray(vals, dtype=float).ravel()
    except (ValueError, TypeError, json.JSONDecodeError):
        raise UsageError(f"{flag}: cannot parse numeric vector {text!r}") from None
    if arr.size == 0:
        raise UsageError(f"{flag}: empty vector")
    return arr


def _load_json(text: str, flag: str):
    if os.path.exists(text):
        with open(text) as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{flag}: invalid JSON ({exc.msg})") from None


FAMILIES = ("bernoulli", "categorical", "poisson", "gaussian", "gaussian_fixed_var", "exponential", "mixture")


def parse_model(spec, flag: str = "--model", need_theta: bool = True):
    """Return ``(family, theta or None)`` from a model-spec object or JSON text."""
    if isinstance(spec, str):
        spec = _load_json(spec, flag)
    if not isinstance(spec, dict):
        raise ModelSpecError("family", "model spec must be a JSON object")
    name = spec.get("family")
    if name not in FAMILIES:
        raise ModelSpecError("family", f"expected one of {', '.join(FAMILIES)}")
    theta = spec.get("theta")
    if theta is not None:
        try:
            theta = np.asarray(theta, dtype=float).ravel()
        except (TypeError, ValueError):
            raise ModelSpecError("theta", "must be an array of numbers") from None
    try:
        if name == "mixture":
            if "components" not in spec:
                raise ModelSpecError("components", "required for a mixture")
            fam = mixfam.parse_mixture(spec)
        elif name == "categorical":
            k = spec.get("k")
            if k is None:
                if theta is None:
                    raise ModelSpecError("k", "required when theta is absent")
                k = theta.size + 1
            fam = expfam.categorical(int(k))
        elif name == "gaussian_fixed_var":
            sigma = float(spec.get("sigma", 1.0))
            if not sigma > 0:
                raise ModelSpecError("sigma", "must be positive")
            fam = expfam.gaussian_fixed_var(sigma)
        else:
            fam = expfam.by_name(name)
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, ModelSpecError):
            raise
        raise ModelSpecError("components" if name == "mixture" else "family", str(exc)) from None
    if theta is None:
        if need_theta:
            raise ModelSpecError("theta", "required")
        return fam, None
    try:
        theta = fam.check(theta)
    except InfoGeoError as exc:
        raise ModelSpecError("theta", str(exc)) from None
    return fam, theta


def _potential(fam):
    if isinstance(fam, mixfam.MixtureFamily):
        return fam.exact_potential()
    return fam.potential


def _point(fam, text, flag):
    theta = parse_vector(text, flag)
    try:
        return fam.check(theta)
    except InfoGeoError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def parse_constraint(text: str, dim: int):
    """``"a11,a12|a21,a22;b1,b2"`` -> (A, b)."""
    try:
        a_txt, b_txt = text.split(";")
        A = np.array([[float(v) for v in row.split(",")] for row in a_txt.split("|")])
        b = np.array([float(v) for v in b_txt.split(",")])
    except ValueError:
        raise UsageError(f"--constraint: expected 'A;b', got {text!r}") from None
    if A.shape[1] != dim or A.shape[0] != b.size:
        raise UsageError(f"--constraint: shapes {A.shape} and {b.shape} do not fit dimension {dim}")
    return A, b


# ---------------------------------------------------------------------------
# subcommands; each returns (document, csv header, csv rows)


def cmd_divergence(args):
    kind = args.kind
    p_raw = _load_json(args.p, "--p")
    q_raw = _load_json(args.q, "--q")
    if isinstance(p_raw, list) and isinstance(q_raw, list):
        p = np.asarray(p_raw, dtype=float)
        q = np.asarray(q_raw, dtype=float)
        try:
            P = dv.DiscreteDistribution(p)
            Q = dv.DiscreteDistribution(q)
        except ValueError as exc:
            raise UsageError(f"--p/--q: {exc}") from None
        if kind in ("bregman", "jensen"):
            F = cc.negative_entropy_potential(p.size)
            if kind == "bregman":
                value = dv.bregman(F, p, q)
            else:
                value = dv.skew_jensen(F, args.alpha if args.alpha is not None else 0.5, p, q)
        else:
            value = dv.f_divergence_discrete(_generator(kind, args.alpha), P, Q)
        rows = [[kind, value]]
        if kind == "alpha":
            rows = [[a, dv.f_divergence_discrete(dv.alpha_generator(a), P, Q)] for a in np.linspace(-3, 3, 25)]
        return {"kind": kind, "value": value}, ["parameter", "value"], rows
    fam, tp = parse_model(p_raw, "--p")
    fam_q, tq = parse_model(q_raw, "--q")
    if type(fam) is not type(fam_q) or fam.dim != fam_q.dim:
        raise UsageError("--p and --q must describe the same family")
    if kind == "bregman":
        value = dv.bregman(_potential(fam), tp, tq)
    elif kind == "jensen":
        value = dv.skew_jensen(_potential(fam), args.alpha if args.alpha is not None else 0.5, tp, tq)
    elif kind == "kl":
        value = fam.kl(tp, tq)
    elif kind == "revkl":
        value = fam.kl(tq, tp)
    elif isinstance(fam, mixfam.MixtureFamily):
        raise UsageError(f"--kind {kind} is not available for mixture models")
    else:
        value = fam.f_divergence(_generator(kind, args.alpha), tp, tq)
    return {"kind": kind, "value": value}, ["parameter", "value"], [[kind, value]]


def _generator(kind, alpha):
    if kind == "alpha":
        if alpha is None:
            raise UsageError("--alpha is required for --kind alpha")
        return dv.alpha_generator(alpha)
    return dv.BUILTIN_GENERATORS[kind]()


def cmd_legendre(args):
    fam, _ = parse_model(args.model, need_theta=False)
    eta = parse_vector(args.eta, "--eta")
    res = cc.legendre_conjugate(_potential(fam), eta)
    doc = {"eta": eta, "value": res.value, "theta": res.theta}
    return doc, ["eta", "value", "theta"], [[";".join(map(str, eta)), res.value, ";".join(map(str, res.theta))]]


def cmd_fim(args):
    fam, theta = parse_model(args.model)
    method = args.method
    n, seed = args.samples, args.seed
    if method == "exact":
        M = fam.fim(theta)
        est = fisherrao.FIMEstimate(M, np.zeros_like(M), 0, "exact")
    elif method == "score":
        est = fisherrao.fim_score_outer(fam, theta, n, seed)
    elif method == "hessian":
        est = fisherrao.fim_neg_hessian(fam, theta, n, seed)
    elif method == "sqrt":
        est = fisherrao.fim_sqrt(fam, theta, n, seed)
    else:
        if args.alpha is None:
            raise UsageError("--alpha is required for --method alpha")
        est = fisherrao.fim_alpha(fam, theta, args.alpha, n, seed)
    doc = {"method": est.method, "matrix": est.matrix, "stderr": est.stderr, "samples": est.n}
    D = est.matrix.shape[0]
    rows = [[i, j, est.matrix[i, j], est.stderr[i, j]] for i in range(D) for j in range(D)]
    return doc, ["i", "j", "value", "stderr"], rows


def cmd_chernoff(args):
    fam, _ = parse_model(args.model, need_theta=False)
    if not isinstance(fam, expfam.ExponentialFamily):
        raise UsageError("chernoff needs an exponential-family model")
    t1 = _point(fam, args.theta1, "--theta1")
    t2 = _point(fam, args.theta2, "--theta2")
    res = decisions.chernoff(fam, t1, t2)
    bis = decisions.bisector_intersection(fam, t1, t2)
    doc = {"alpha_star": res.alpha_star, "value": res.value, "theta_star": res.theta_star, "bisector_point": bis}
    if args.simulate:
        h = decisions.BinaryHypothesis(fam, t1, t2)
        sim = decisions.map_error_simulation(h, args.nobs, args.trials, args.seed)
        doc["simulation"] = dict(sim._asdict())
    grid = np.linspace(0.0, 1.0, 101)[1:-1]
    rows = [[a, decisions.bhattacharyya(fam, t1, t2, 1.0 - a)] for a in grid]
    return doc, ["alpha", "bhattacharyya"], rows


def cmd_project(args):
    fam, theta_model = parse_model(args.model, need_theta=False)
    point = _point(fam, args.point, "--point") if args.point else theta_model
    if point is None:
        raise UsageError("--point (or a model theta) is required")
    F = _potential(fam)
    A, b = parse_constraint(args.constraint, F.dim)
    mfd = flatgeo.DuallyFlatManifold(F)
    S = flatgeo.AffineSubmanifold(args.chart, A, b)
    if args.chart == "theta":
        q = flatgeo.project_dual(mfd, point, S)
        div = dv.bregman(F, q, point)
    else:
        q = flatgeo.project_primal(mfd, point, S)
        div = dv.bregman(F, point, q)
    doc = {"chart": args.chart, "theta": q, "eta": mfd.theta_to_eta(q), "divergence": div}
    return doc, ["coordinate", "theta", "eta"], [[i, q[i], doc["eta"][i]] for i in range(q.size)]


def cmd_cluster(args):
    fam = mixfam.parse_mixture(_load_json(args.mixture, "--mixture"))
    thetas = _load_json(args.thetas, "--thetas")
    if isinstance(thetas, dict):
        thetas = thetas.get("thetas")
    try:
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    except (TypeError, ValueError):
        raise UsageError("--thetas: expected a list of weight vectors") from None
    if thetas.ndim != 2 or thetas.shape[1] != fam.dim:
        raise UsageError(f"--thetas: each weight vector needs {fam.dim} entries")
    res = clustering.cluster_wmixtures(fam, thetas, args.k, args.samples, args.seed)
    doc = {"assignments": res.assignments.tolist(), "centers": res.centers, "objective": res.objective,
           "iterations": res.iterations}
    rows = [[i, int(res.assignments[i])] + list(thetas[i]) for i in range(thetas.shape[0])]
    return doc, ["index", "label"] + [f"theta{j + 1}" for j in range(fam.dim)], rows


def cmd_rao(args):
    fam, _ = parse_model(args.model, need_theta=False)
    t1 = _point(fam, args.theta1, "--theta1")
    t2 = _point(fam, args.theta2, "--theta2")
    dist, nodes = fisherrao.rao_distance_numeric(fam, t1, t2, args.segments, full=True)
    doc = {"distance": dist, "segments": args.segments}
    if isinstance(fam, expfam.ExponentialFamily) and fam.name.startswith("categorical"):
        def probs(t):
            e = fam.theta_to_eta(t)
            return np.append(e, 1 - e.sum())
        doc["closed_form"] = fisherrao.rao_distance_categorical(probs(t1), probs(t2))
    rows = [[u] + list(nodes[u]) for u in range(nodes.shape[0])]
    return doc, ["node"] + [f"theta{j + 1}" for j in range(nodes.shape[1])], rows


COMMANDS = {
    "divergence": cmd_divergence,
    "legendre": cmd_legendre,
    "fim": cmd_fim,
    "chernoff": cmd_chernoff,
    "project": cmd_project,
    "cluster": cmd_cluster,
    "rao": cmd_rao,
}

CSV_HELP = {
    "divergence": "CSV columns: parameter,value (an alpha sweep for --kind alpha on discrete inputs).",
    "legendre": "CSV columns: eta,value,theta (vectors joined by ';').",
    "fim": "CSV columns: i,j,value,stderr.",
    "chernoff": "CSV columns: alpha,bhattacharyya (alpha is the geodesic parameter).",
    "project": "CSV columns: coordinate,theta,eta of the projected point.",
    "cluster": "CSV columns: index,label,theta1..thetaD.",
    "rao": "CSV columns: node,theta1..thetaD of the optimized path.",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="infogeo", description="Dually flat information geometry toolkit.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, epilog=CSV_HELP[name])
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        p.add_argument("--emit-csv", action="store_true", dest="emit_csv", help="also append tabular data to --out")
        p.add_argument("--out", metavar="PATH", help="CSV destination for --emit-csv")
        return p

    p = add("divergence", "divergence between two distributions or models")
    p.add_argument("--kind", required=True,
                   choices=["kl", "revkl", "hellinger", "js", "tv", "alpha", "bregman", "jensen", "chi2"])
    p.add_argument("--p", required=True, help="probability vector or model spec")
    p.add_argument("--q", required=True, help="probability vector or model spec")
    p.add_argument("--alpha", type=float)

    p = add("legendre", "Legendre-Fenchel conjugate of a model's potential")
    p.add_argument("--model", required=True)
    p.add_argument("--eta", required=True)

    p = add("fim", "Fisher information matrix")
    p.add_argument("--model", required=True)
    p.add_argument("--method", choices=["score", "hessian", "alpha", "sqrt", "exact"], default="exact")
    p.add_argument("--alpha", type=float)
    p.add_argument("--samples", type=int, default=100_000)

    p = add("chernoff", "Chernoff information between two exponential-family members")
    p.add_argument("--model", required=True)
    p.add_argument("--theta1", required=True)
    p.add_argument("--theta2", required=True)
    p.add_argument("--simulate", action="store_true")
    p.add_argument("--nobs", type=int, default=1)
    p.add_argument("--trials", type=int, default=10_000)

    p = add("project", "flat projection onto an affine submanifold")
    p.add_argument("--model", required=True)
    p.add_argument("--point")
    p.add_argument("--constraint", required=True, help="'a11,a12|a21,a22;b1,b2'")
    p.add_argument("--chart", choices=["theta", "eta"], required=True)

    p = add("cluster", "Bregman k-means of w-mixtures")
    p.add_argument("--mixture", required=True, help="mixture spec JSON file or text")
    p.add_argument("--thetas", required=True, help="JSON list of weight vectors (file or text)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=10_000)

    p = add("rao", "Fisher-Rao distance by path-energy minimization")
    p.add_argument("--model", required=True)
    p.add_argument("--theta1", required=True)
    p.add_argument("--theta2", required=True)
    p.add_argument("--segments", type=int, default=100)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if args.emit_csv and not args.out:
            raise UsageError("--emit-csv requires --out PATH")
        meta = {"version": __version__, "command": args.command, "seed": args.seed}
        doc, header, rows = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return 1
    except InfoGeoError as exc:
        print(f"{type(exc).__name__}: {exc}", file=stderr)
        stdout.write(dumps({**meta, "error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2
    except ValueError as exc:
        # violated preconditions (equal hypotheses, k > n, ...) are the caller's to fix
        print(f"usage error: {exc}", file=stderr)
        return 1
    if args.emit_csv:
        write_csv(args.out, header, rows)
    stdout.write(dumps({**meta, **doc}) + "\n")
    return 0


def main() -> None:
    sys.exit(run())
