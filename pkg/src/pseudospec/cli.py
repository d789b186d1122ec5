"""Command-line interface: ``pseudospec <command> ...``.

Every command prints one JSON document on stdout. Exit status is 0 on
success, 1 when a check fails and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .cartan import CartanPoint, GroupShape, ShapeError, random_point
from .characters import check_vandermonde_identity, merged_character, character_density, split_sum_character
from .diagrams import (
    Signature,
    bare_count,
    enumerate_split_diagrams,
    enumerate_bare_diagrams,
    enumerate_merged_diagrams,
    split_count,
    merged_count,
)
from .exppoly import ExpPoly, PreconditionError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_CONFIG = {
    "cutoffs": {"m_max": 40, "c_max": 40, "chain_N": 60, "fourier_K": 20},
    "tolerances": {"pairing": 1e-12, "lemma": 1e-6, "series": 1e-4, "symmetry": 1e-10, "lab": 0.02},
    "quadrature": {"radial": 64, "angular": 16, "window": 7.0, "remark_nodes": 160},
    "seed": 0,
    "format": "json",
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    data: dict = field(default_factory=lambda: copy.deepcopy(DEFAULT_CONFIG))

    def __post_init__(self):
        for name, v in self.data["cutoffs"].items():
            if not isinstance(v, int) or v < 1:
                raise UsageError(f"cutoff {name} must be an integer >= 1")
        for name, v in self.data["tolerances"].items():
            if not v > 0:
                raise UsageError(f"tolerance {name} must be positive")
        if self.data["format"] not in ("json", "csv"):
            raise UsageError("format must be json or csv")

    @classmethod
    def load(cls, path: str | None) -> "RunConfig":
        data = copy.deepcopy(DEFAULT_CONFIG)
        path = path or os.environ.get("PSEUDOSPEC_CONFIG")
        if path:
            try:
                with open(path) as fh:
                    user = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read config {path}: {exc}") from exc
            for key, val in user.items():
                if key not in data:
                    raise UsageError(f"unknown config key {key!r}")
                if isinstance(data[key], dict):
                    data[key].update(val)
                else:
                    data[key] = val
        return cls(data)

    def __getitem__(self, key):
        return self.data[key]


# -- helpers ---------------------------------------------------------------------


def _encode(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {str(k): _encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_encode(v) for v in x]
    if isinstance(x, np.ndarray):
        return _encode(x.tolist())
    if isinstance(x, np.generic):
        return _encode(x.item())
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def emit(doc, cfg: RunConfig, out=None):
    out = out or sys.stdout
    doc = _encode(doc)
    if cfg["format"] == "csv" and isinstance(doc, dict) and isinstance(doc.get("rows"), list):
        rows = doc["rows"]
        writer = csv.writer(out)
        if rows and isinstance(rows[0], dict):
            keys = sorted(rows[0])
            writer.writerow(keys)
            for r in rows:
                writer.writerow([json.dumps(r[k]) if isinstance(r[k], (list, dict)) else r[k] for k in keys])
        else:
            for r in rows:
                writer.writerow(r if isinstance(r, list) else [r])
        return
    out.write(json.dumps(doc, sort_keys=True) + "\n")


def write_plot_data(path: str | None, triples):
    if not path:
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "err"])
        for x, y, e in triples:
            w.writerow([x, y, e])


def _ints(text: str | None) -> tuple:
    if text is None or text == "":
        return ()
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def _floats(text: str | None) -> tuple:
    if text is None or text == "":
        return ()
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _shape(args) -> GroupShape:
    try:
        return GroupShape(args.p, args.q)
    except ShapeError as exc:
        raise UsageError(str(exc)) from exc


def _signature(args, shape) -> Signature:
    r = args.r
    size = shape.n - 2 * r
    c = _ints(args.c) or tuple(range(size, 0, -1))
    m = _ints(args.m) or (0,) * r
    rho = _floats(args.rho) or tuple(float(r - i) for i in range(r))
    try:
        return Signature(shape, r, _ints(args.A), c, m, rho)
    except ShapeError as exc:
        raise UsageError(str(exc)) from exc


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _family(args, shape, cfg):
    from .projectors import OrbitalFamily, random_family

    if args.family:
        data = _load_json(args.family)
        members = {int(k): ExpPoly.from_json(v, shape, int(k)) for k, v in data["members"].items()}
        return OrbitalFamily(shape, members, frozenset(int(k) for k in data.get("applied", [])))
    return random_family(shape, np.random.default_rng(args.seed if args.seed is not None else cfg["seed"]))


# -- commands ----------------------------------------------------------------------


def cmd_diagrams(args, cfg):
    shape = _shape(args)
    kind = args.set
    if kind == "tilde":
        count = merged_count(shape, args.r, args.k)
        items = None if args.count_only else enumerate_merged_diagrams(shape, args.r, args.k)
    else:
        sig = _signature(args, shape)
        if not sig.A and shape.p - args.r > 0:
            raise UsageError("--A is required for the omega and circ sets")
        if kind == "omega":
            items = None if args.count_only else enumerate_split_diagrams(sig, args.k)
            count = split_count(shape, args.r, args.k) if args.count_only else len(items)
        else:
            items = None if args.count_only else enumerate_bare_diagrams(sig, args.k)
            count = bare_count(shape, args.r, args.k) if args.count_only else len(items)
    if items is None:
        emit({"count": count}, cfg)
    else:
        # one diagram per line
        for d in items:
            emit(d.to_json(), cfg)
    return EXIT_OK


def cmd_character(args, cfg):
    shape = _shape(args)
    sig = _signature(args, shape)
    if args.point:
        points = [CartanPoint.from_json(_load_json(args.point))]
    else:
        rng = np.random.default_rng(args.seed if args.seed is not None else cfg["seed"])
        points = [random_point(shape, args.k, rng) for _ in range(args.samples)]
    rows = []
    for h in points:
        row = {"point": h.to_json(), "split_sum": split_sum_character(sig, args.k, h), "merged": merged_character(sig, args.k, h)}
        if sig.A or shape.p == args.r:
            row["density"] = character_density(sig, args.k, h)
        rows.append(row)
    emit({"rows": rows}, cfg)
    return EXIT_OK


def cmd_pair(args, cfg):
    from .projectors import (
        sum_split_projectors,
        split_projector_pairing,
        mode_projector_pairing,
        most_continuous_pairing,
        series_projector_pairing,
    )

    shape = _shape(args)
    fam = _family(args, shape, cfg)
    try:
        if args.theorem == "1":
            res = series_projector_pairing(shape, args.r, fam)
            doc = {"theorem": 1, "r": args.r, **res.to_json()}
            if args.r == shape.q:
                doc["specialised"] = most_continuous_pairing(shape, fam, cfg["quadrature"]["remark_nodes"]).to_json()
        elif args.theorem == "2":
            sig = _signature(args, shape)
            if args.sum:
                res = sum_split_projectors(shape, args.r, fam, cutoff=args.cutoff or cfg["cutoffs"]["c_max"])
            else:
                res = split_projector_pairing(sig, fam)
            doc = {"theorem": 2, **res.to_json()}
        else:
            sig = _signature(args, shape)
            res = mode_projector_pairing(sig, fam)
            doc = {"theorem": 3, **res.to_json()}
    except PreconditionError as exc:
        emit({"error": str(exc)}, cfg)
        return EXIT_FAIL
    emit(doc, cfg)
    return EXIT_OK


def _lemma_function(args, k_dims):
    """ExpPoly from --function (JSON) or a trigonometric polynomial from --coeffs."""
    if args.function:
        data = _load_json(args.function)
        return ExpPoly.from_json(data)
    if args.coeffs:
        try:
            coeffs = json.loads(args.coeffs)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--coeffs must be JSON: {exc}") from exc
        if isinstance(coeffs, list):
            coeffs = dict(enumerate(coeffs))
        if not isinstance(coeffs, dict):
            raise UsageError("--coeffs must be a JSON object {mode: coeff} or a list")
        f = ExpPoly(1, 0, 0)
        for a, c in coeffs.items():
            c = complex(*c) if isinstance(c, list) else complex(c)
            f = f + ExpPoly.term(None, 0, c, [int(a)], (), dims=(1, 0))
        return f
    return None


def cmd_verify(args, cfg):
    from . import projectors as pj
    from . import suite

    tol = cfg["tolerances"]
    rng = np.random.default_rng(args.seed if args.seed is not None else cfg["seed"])
    if args.identity:
        shape = _shape(args)
        sig = suite.strict_signature(shape, args.r, _ints(args.A) or (), rng) if not args.c else _signature(args, shape)
        rep = check_vandermonde_identity(sig, args.k, rng=rng)
        emit({"pass": rep.passed, **rep.to_json()}, cfg)
        return EXIT_OK if rep.passed else EXIT_FAIL
    lemma = args.lemma
    if lemma is None:
        raise UsageError("give --lemma or --identity")
    f = _lemma_function(args, None)
    try:
        if lemma == "3.1":
            f = f or suite.odd_gaussian_poly(rng)
            res = {v: pj.kernel_transform_check(f, v) for v in ("coth", "tanh")}
            err = max(r["error"] for r in res.values())
            doc = {"pass": err <= tol["lemma"], "error": err, "variants": res}
        elif lemma == "3.2":
            f = f or suite.odd_theta_profile(rng)
            res = pj.cycle_series_check(f, (10, 20, cfg["cutoffs"]["m_max"]))
            errs = [c["error"] for c in res["curve"]]
            ok = errs[-1] <= tol["series"] and all(a > b for a, b in zip(errs, errs[1:]))
            doc = {"pass": ok, "error": errs[-1], **res}
            write_plot_data(args.emit_plot_data, [(c["M"], c["series"].real, c["error"]) for c in res["curve"]])
        elif lemma == "3.3":
            f = f or suite.odd_theta_profile(rng)
            res = pj.chain_series_check(f, cutoff=cfg["cutoffs"]["chain_N"])
            ok = res["error"] <= tol["series"] and res["decay_slope_diff"] >= 1.9 and res["decay_bounded"]
            doc = {"pass": ok, **res}
            write_plot_data(args.emit_plot_data, [(n, 0.0, 0.0) for n in res["cutoffs"]])
        elif lemma == "3.4":
            if f is None:
                raise UsageError("--lemma 3.4 needs --coeffs or --function")
            res = pj.fourier_inversion_check(f, cfg["cutoffs"]["fourier_K"])
            doc = {"pass": res["error"] <= tol["pairing"], "error": res["error"], "partial_sum": res["partial_sum"],
                   "target": res["target"], "decay_constant": res["decay_constant"], "K": cfg["cutoffs"]["fourier_K"]}
        elif lemma == "ysigma":  # diagram-sum independence
            shape = _shape(args)
            if not 0 <= args.r <= args.k <= shape.q:
                raise UsageError("the diagram-sum check needs 0 <= r <= k <= q")
            fam = pj.random_family(shape, rng, ks=(args.k,))
            res = pj.diagram_sum_check(fam.F(args.k), shape, args.r, args.k)
            scale = max(abs(res["closed_form"]), 1.0)
            rel = res["max_error_vs_closed"] / scale
            ok = res["pairwise_spread"] / scale <= tol["series"] and rel <= tol["series"]
            doc = {"pass": ok, "error": rel, **res}
        else:
            raise UsageError(f"unknown lemma {lemma!r}")
    except (PreconditionError, ShapeError) as exc:
        emit({"pass": False, "error": str(exc)}, cfg)
        return EXIT_FAIL
    emit(doc, cfg)
    return EXIT_OK if doc["pass"] else EXIT_FAIL


def cmd_lab(args, cfg):
    from . import smallgroup as sg

    rng = np.random.default_rng(args.seed if args.seed is not None else cfg["seed"])
    q = cfg["quadrature"]
    grid = sg.QuadratureGrid(q["radial"], q["angular"], q["window"])
    if args.functions:
        try:
            fs = sg.load_functions(args.functions)
        except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
            raise UsageError(f"cannot read functions: {exc}") from exc
    else:
        fs = [sg.SmoothGroupFunction.random(rng) for _ in range(7 if args.lab_command == "weyl-check" else 5)]
    if args.cutoffs:
        cfg.data["cutoffs"].update(_load_json(args.cutoffs))
    tol = cfg["tolerances"]["lab"]
    try:
        if args.lab_command == "weyl-check":
            if len(fs) < 3:
                raise UsageError("weyl-check needs at least 3 functions (2 calibration + validation)")
            rep = sg.weyl_integration_check(fs[:2], fs[2:], tol=tol, grid=grid)
        else:
            rep = sg.completeness_check(fs, tol=tol, grid=grid)
    except (sg.CalibrationError, sg.FitError, ValueError) as exc:
        emit({"passed": False, "error": str(exc)}, cfg)
        return EXIT_FAIL
    emit(rep.to_json(), cfg)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_verify_all(args, cfg):
    from .suite import run_all

    only = _ints(args.only) if args.only else None
    results = run_all(only, threads=args.threads, seed_offset=args.seed or 0)
    failing = [r.criterion for r in results if not r.passed]
    doc = {
        "passed": not failing,
        "failing": failing,
        "results": [r.to_json() for r in results],
    }
    emit(doc, cfg)
    return EXIT_OK if not failing else EXIT_FAIL


# -- parser ------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _shape_args(p, with_k=True, required=True):
    p.add_argument("--p", type=int, required=required, default=1)
    p.add_argument("--q", type=int, required=required, default=1)
    p.add_argument("--r", type=int, default=0)
    if with_k:
        p.add_argument("--k", type=int, default=0)


def _sig_args(p):
    p.add_argument("--A", help="comma-separated 1-based indices")
    p.add_argument("--c", help="comma-separated integers")
    p.add_argument("--m", help="comma-separated integers")
    p.add_argument("--rho", help="comma-separated reals")


def _common(suppress: bool) -> argparse.ArgumentParser:
    # the subcommand copy uses SUPPRESS so it does not overwrite values given earlier
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="RunConfig JSON (default: $PSEUDOSPEC_CONFIG)", **kw)
    p.add_argument("--print-config", action="store_true", help="print the effective config and exit", **kw)
    p.add_argument("--format", choices=("json", "csv"), **kw)
    p.add_argument("--threads", type=int, **({"default": 1} if not suppress else kw))
    p.add_argument("--seed", type=int, **kw)
    p.add_argument("--emit-plot-data", metavar="PATH", help="write (x, y, err) triples as CSV", **kw)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pseudospec", description=__doc__.splitlines()[0], parents=[_common(False)])
    common = _common(True)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **k: _add(*a, parents=[common], **k)

    d = sub.add_parser("diagrams", help="enumerate or count diagram families")
    _shape_args(d)
    _sig_args(d)
    d.add_argument("--set", choices=("omega", "tilde", "circ"), default="tilde")
    d.add_argument("--count-only", action="store_true")

    c = sub.add_parser("character", help="evaluate the character density, its split sum and the merged sine-type sum")
    _shape_args(c)
    _sig_args(c)
    c.add_argument("--point", help="CartanPoint JSON")
    c.add_argument("--samples", type=int, default=1)

    pr = sub.add_parser("pair", help="projector pairings against a test family")
    _shape_args(pr, with_k=False)
    _sig_args(pr)
    pr.add_argument("--theorem", choices=("1", "2", "3"), default="1")
    pr.add_argument("--family", help="OrbitalFamily JSON: {members: {k: ExpPoly}, applied: [k, ...]}")
    pr.add_argument("--sum", action="store_true", help="split projectors: sum over all (A; c) up to c_max")
    pr.add_argument("--cutoff", type=int, help="override c_max for --sum")

    v = sub.add_parser("verify", help="single lemma or identity check")
    _shape_args(v, required=False)
    _sig_args(v)
    v.add_argument("--lemma", choices=("3.1", "3.2", "3.3", "3.4", "ysigma"))
    v.add_argument("--identity", action="store_true")
    v.add_argument("--function", help="ExpPoly JSON")
    v.add_argument("--coeffs", help='trigonometric coefficients as {mode: coeff} or a list indexed by mode, e.g. \'{"1": 0.5, "-1": 0.5}\'')

    lab = sub.add_parser("lab", help="U(1,1) group experiments")
    lab_sub = lab.add_subparsers(dest="lab_command", parser_class=_Parser)
    for name in ("weyl-check", "completeness"):
        sp = lab_sub.add_parser(name, parents=[common])
        sp.add_argument("--functions", help="JSON list of SmoothGroupFunction")
        sp.add_argument("--cutoffs", help="JSON cutoff overrides")

    va = sub.add_parser("verify-all", help="run the acceptance scorecard")
    va.add_argument("--only", help="comma-separated criterion numbers")
    return parser


COMMANDS = {
    "diagrams": cmd_diagrams,
    "character": cmd_character,
    "pair": cmd_pair,
    "verify": cmd_verify,
    "lab": cmd_lab,
    "verify-all": cmd_verify_all,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        if args.format:
            cfg.data["format"] = args.format
        if args.print_config:
            emit(cfg.data, RunConfig())
            return EXIT_OK
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        if args.command == "lab" and not args.lab_command:
            raise UsageError("lab needs a subcommand: weyl-check or completeness")
        if args.threads is None or args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        sys.stderr.write(f"pseudospec: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
