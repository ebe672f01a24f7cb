"""Command-line front end: spec parsing, report emission and the verification suite."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .bodies import body_from_spec, volume
from .densities import make_density
from .distances import (bp_compare, dbm_scaling, dovr_upper, jensen_check, john_witnesses,
                        lp_ball_witness, witness_from_spec)
from .moments import gamma_ratio, min_moment, moment
from .quad import IntegrationConfig, SpecError, config_from_spec
from .slicing import g_from_spec, max_section, monotonic_q, section_moment_check, slicing_constant

EXIT_OK, EXIT_INEQUALITY, EXIT_INPUT, EXIT_TOLERANCE = 0, 1, 2, 3
WITNESS_TYPES = ("lp_ball", "euclidean")


# ---------------------------------------------------------------------------
# spec parsing

def load_json(text: str, field: str):
    """Inline JSON or a path to a JSON file; errors name the field and the line."""
    source = text
    stripped = text.strip()
    if not stripped.startswith(("{", "[")) and os.path.exists(text):
        with open(text) as fh:
            source = fh.read()
        where = f"{field} ({text})"
    else:
        where = field
    try:
        return json.loads(source)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{where}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def parse_body(text: str, field: str = "body"):
    try:
        return body_from_spec(load_json(text, field))
    except SpecError as exc:
        raise SpecError(f"--{field}: {exc}") from None


def parse_density(text: str | None):
    if text is None:
        return make_density({"type": "constant"})
    try:
        return make_density(load_json(text, "density"))
    except SpecError as exc:
        raise SpecError(f"--density: {exc}") from None


def parse_xi(text: str, n: int) -> np.ndarray:
    """``axis:k`` or a JSON list; the direction is normalized."""
    if text.startswith("axis:"):
        try:
            k = int(text[5:])
        except ValueError:
            raise SpecError(f"--xi: bad axis index in {text!r}") from None
        if not 0 <= k < n:
            raise SpecError(f"--xi: axis {k} out of range for dimension {n}")
        xi = np.zeros(n)
        xi[k] = 1.0
        return xi
    try:
        xi = np.asarray(load_json(text, "xi"), dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"--xi: {exc}") from None
    if xi.shape != (n,):
        raise SpecError(f"--xi: expected {n} coordinates, got shape {xi.shape}")
    norm = float(np.linalg.norm(xi))
    if not norm > 0 or not math.isfinite(norm):
        raise SpecError("--xi: direction must be nonzero and finite")
    return xi / norm


def parse_witness(text: str, p: float, n: int):
    spec = load_json(text, "witness")
    if isinstance(spec, dict) and spec.get("type") in WITNESS_TYPES:
        spec = dict(spec)
        spec.setdefault("n", n)
    try:
        w = witness_from_spec(spec, p)
    except SpecError as exc:
        raise SpecError(f"--witnesses: {exc}") from None
    if w.body.dim != n:
        raise SpecError(f"--witnesses: witness dimension {w.body.dim} does not match body dimension {n}")
    return w, spec


def parse_qgrid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a JSON list."""
    if ":" in text and not text.strip().startswith("["):
        try:
            a, b, step = (float(v) for v in text.split(":"))
        except ValueError:
            raise SpecError(f"--qgrid: expected start:stop:step, got {text!r}") from None
        if not step > 0 or b < a:
            raise SpecError("--qgrid: need step > 0 and stop >= start")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        return [a + i * step for i in range(count)]
    vals = load_json(text, "qgrid")
    if not isinstance(vals, list) or not vals:
        raise SpecError("--qgrid: expected a nonempty list")
    return [float(v) for v in vals]


def positive(name):
    def conv(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name}: expected a number, got {text!r}") from None
        if not v > 0 or not math.isfinite(v):
            raise argparse.ArgumentTypeError(f"{name}: expected a positive number, got {text!r}")
        return v
    return conv


def build_config(args) -> IntegrationConfig:
    cfg = config_from_spec(load_json(args.cfg, "cfg")) if args.cfg else IntegrationConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.samples is not None:
        cfg = replace(cfg, sphere_samples=args.samples)
    if args.tol is not None:
        cfg = replace(cfg, rel_tol_target=args.tol)
    return cfg


# ---------------------------------------------------------------------------
# serialization

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _float_text(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj, indent: int = 2, level: int = 0) -> str:
    """JSON with sorted keys and every float written with 17 significant digits."""
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _float_text(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        if isinstance(obj, float):
            text = _float_text(obj).strip('"')
        elif isinstance(obj, bool) or obj is None:
            text = json.dumps(obj)
        else:
            text = str(obj)
        yield prefix, text


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in _flatten(report):
        w.writerow([k, v])
    return buf.getvalue()


def _tolerance_missed(obj) -> bool:
    if isinstance(obj, dict):
        if obj.get("status") == "tolerance_not_met":
            return True
        return any(_tolerance_missed(v) for v in obj.values())
    if isinstance(obj, list):
        return any(_tolerance_missed(v) for v in obj)
    return False


# ---------------------------------------------------------------------------
# subcommands: each returns (inputs echo, results, inequality_ok)

def cmd_eval_gauge(args, cfg):
    body = parse_body(args.body)
    x = np.asarray(load_json(args.x, "x"), dtype=float)
    if x.shape[-1:] != (body.dim,):
        raise SpecError(f"--x: last axis must have length {body.dim}")
    g = body.gauge(x)
    return ({"body": body.to_spec(), "x": x}, {"gauge": g, "contains": np.asarray(g) <= 1.0}, True)


def cmd_volume(args, cfg):
    body = parse_body(args.body)
    est = volume(body, cfg)
    return {"body": body.to_spec()}, {"volume": est.to_dict()}, True


def _body_density_p(args):
    body = parse_body(args.body)
    f = parse_density(args.density)
    return body, f, {"body": body.to_spec(), "density": f.to_spec(), "p": args.p}


def cmd_moment(args, cfg):
    body, f, inputs = _body_density_p(args)
    xi = parse_xi(args.xi, body.dim)
    inputs["xi"] = xi
    return inputs, {"moment": moment(body, f, args.p, xi, cfg).to_dict()}, True


def cmd_min_moment(args, cfg):
    body, f, inputs = _body_density_p(args)
    return inputs, min_moment(body, f, args.p, cfg).to_dict(), True


def cmd_gamma(args, cfg):
    body, f, inputs = _body_density_p(args)
    res = min_moment(body, f, args.p, cfg)
    return inputs, {"gamma_ratio": gamma_ratio(body, f, args.p, cfg, result=res),
                    "min_moment": res.to_dict()}, True


def cmd_slice_sup(args, cfg):
    body = parse_body(args.body)
    f = parse_density(args.density)
    res = max_section(body, f, args.mode, cfg)
    return {"body": body.to_spec(), "density": f.to_spec(), "mode": args.mode}, res.to_dict(), True


def cmd_slicing_constant(args, cfg):
    body = parse_body(args.body)
    f = parse_density(args.density)
    rep = slicing_constant(body, f, args.mode, cfg)
    return {"body": body.to_spec(), "density": f.to_spec(), "mode": args.mode}, rep.to_dict(), True


def cmd_section_moment(args, cfg):
    body, f, inputs = _body_density_p(args)
    xi = parse_xi(args.xi, body.dim)
    inputs["xi"] = xi
    res = section_moment_check(body, f, args.p, xi, cfg)
    return inputs, res.to_dict(), res.holds


def cmd_monotonic_q(args, cfg):
    g_spec = load_json(args.g, "g")
    try:
        g = g_from_spec(g_spec)
    except SpecError as exc:
        raise SpecError(f"--g: {exc}") from None
    qs = parse_qgrid(args.qgrid)
    if min(qs) <= -1:
        raise SpecError("--qgrid: every q must exceed -1")
    res = monotonic_q(g, qs, cfg, slack=args.slack)
    return {"g": g_spec, "qgrid": qs, "slack": args.slack}, res.to_dict(), res.nondecreasing


def cmd_dovr(args, cfg):
    body = parse_body(args.body)
    if args.witnesses:
        pairs = [parse_witness(t, args.p, body.dim) for t in args.witnesses]
        ws = [w for w, _ in pairs]
        echo = [s for _, s in pairs]
    else:
        ws = john_witnesses(body, args.p) + [lp_ball_witness(body.dim, args.p)]
        echo = None
    rep = dovr_upper(body, args.p, ws, cfg, with_dbm=not args.no_dbm)
    inputs = {"body": body.to_spec(), "p": args.p, "witnesses": echo if echo is not None else "default"}
    return inputs, rep.to_dict(), True


def _body_or_witness(text: str, field: str, p: float, n: int | None = None):
    spec = load_json(text, field)
    if isinstance(spec, dict) and spec.get("type") in WITNESS_TYPES:
        spec = dict(spec)
        if n is not None:
            spec.setdefault("n", n)
        try:
            return witness_from_spec(spec, p).body, spec
        except SpecError as exc:
            raise SpecError(f"--{field}: {exc}") from None
    try:
        body = body_from_spec(spec)
    except SpecError as exc:
        raise SpecError(f"--{field}: {exc}") from None
    return body, body.to_spec()


def cmd_dbm(args, cfg):
    M = parse_body(args.M, "M")
    D, d_spec = _body_or_witness(args.D, "D", args.p, M.dim)
    if D.dim != M.dim:
        raise SpecError("--D: dimension does not match --M")
    a = dbm_scaling(M, D, cfg, diagonal=args.diagonal)
    return {"M": M.to_spec(), "D": d_spec, "p": args.p, "diagonal": args.diagonal}, {"a": a}, True


def cmd_bp_compare(args, cfg):
    K = parse_body(args.K, "K")
    M = parse_body(args.M, "M")
    if K.dim != M.dim:
        raise SpecError("--M: dimension does not match --K")
    f = parse_density(args.density)
    D, d_spec = _body_or_witness(args.D, "D", args.p, K.dim)
    if D.dim != K.dim:
        raise SpecError("--D: dimension does not match --K")
    rep = bp_compare(K, M, f, args.p, D, cfg, grid=args.grid)
    inputs = {"K": K.to_spec(), "M": M.to_spec(), "density": f.to_spec(), "p": args.p, "D": d_spec,
              "grid": args.grid}
    # a violated hypothesis is a finding about the instance, not a failed inequality
    ok = rep.conclusion_holds or not rep.hypothesis_holds
    return inputs, rep.to_dict(), ok


def cmd_jensen(args, cfg):
    body = parse_body(args.body)
    res = jensen_check(body, args.p, cfg)
    return {"body": body.to_spec(), "p": args.p}, res.to_dict(), res.holds


def cmd_verify_suite(args, cfg):
    from .suite import verify_suite

    progress = (lambda line: print(line, file=sys.stderr)) if args.progress else None
    res = verify_suite(args.seed if args.seed is not None else 7, args.budget, timing=args.timing,
                       progress=progress)
    return {"budget": args.budget}, res, res["passed"]


# ---------------------------------------------------------------------------
# argument parser

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None, help="random seed (default: config default)")
    p.add_argument("--samples", type=int, default=None, help="sphere samples for polar rules")
    p.add_argument("--tol", type=float, default=None, help="relative tolerance target")
    p.add_argument("--cfg", default=None, help="IntegrationConfig fields as JSON or a file path")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--timing", action="store_true", help="include wall-clock seconds in the report")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="slicelab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"slicelab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, aliases=()):
        sp = sub.add_parser(name, parents=[common], help=help_, aliases=list(aliases))
        sp.set_defaults(handler=fn, command_name=name)
        return sp

    pos = positive("--p")
    sp = add("eval-gauge", cmd_eval_gauge, "gauge of points (JSON list or list of lists)")
    sp.add_argument("--body", required=True)
    sp.add_argument("--x", required=True)
    add("volume", cmd_volume, "polar volume estimate").add_argument("--body", required=True)

    for name, fn, help_ in (("moment", cmd_moment, "directional moment"),
                            ("min-moment", cmd_min_moment, "minimal directional moment"),
                            ("gamma", cmd_gamma, "normalized minimal moment ratio")):
        sp = add(name, fn, help_)
        sp.add_argument("--body", required=True)
        sp.add_argument("--density", default=None)
        sp.add_argument("--p", type=pos, required=True)
        if name == "moment":
            sp.add_argument("--xi", required=True, help="axis:k or a JSON list")

    sp = add("slice-sup", cmd_slice_sup, "largest section integral")
    sp.add_argument("--body", required=True)
    sp.add_argument("--density", default=None)
    sp.add_argument("--mode", choices=("central", "affine"), default="central")
    sp = add("slicing-constant", cmd_slicing_constant, "slicing constant estimate")
    sp.add_argument("--body", required=True)
    sp.add_argument("--density", default=None)
    sp.add_argument("--mode", choices=("central", "affine", "both"), default="central")

    sp = add("section-moment", cmd_section_moment, "section/moment inequality along a direction",
             aliases=("lemma16",))
    sp.add_argument("--body", required=True)
    sp.add_argument("--density", default=None)
    sp.add_argument("--p", type=pos, required=True)
    sp.add_argument("--xi", required=True, help="axis:k or a JSON list")

    sp = add("monotonic-q", cmd_monotonic_q, "monotonicity of the normalized moment functional in q")
    sp.add_argument("--g", required=True)
    sp.add_argument("--qgrid", default="0:8:0.5")
    sp.add_argument("--slack", type=float, default=1e-6)

    sp = add("dovr", cmd_dovr, "witness-restricted outer volume ratio distance")
    sp.add_argument("--body", required=True)
    sp.add_argument("--p", type=pos, required=True)
    sp.add_argument("--witnesses", nargs="*", default=None)
    sp.add_argument("--no-dbm", action="store_true", help="skip the Banach-Mazur scaling")

    sp = add("dbm", cmd_dbm, "homothety-restricted Banach-Mazur scaling")
    sp.add_argument("--M", required=True)
    sp.add_argument("--D", required=True)
    sp.add_argument("--p", type=pos, default=2.0, help="exponent for witness-type D specs")
    sp.add_argument("--diagonal", action="store_true")

    sp = add("bp-compare", cmd_bp_compare, "moment hypothesis and mass comparison")
    sp.add_argument("--K", required=True)
    sp.add_argument("--M", required=True)
    sp.add_argument("--density", default=None)
    sp.add_argument("--p", type=pos, required=True)
    sp.add_argument("--D", required=True)
    sp.add_argument("--grid", type=int, default=512)

    sp = add("jensen", cmd_jensen, "Jensen step for the gauge on the sphere")
    sp.add_argument("--body", required=True)
    sp.add_argument("--p", type=pos, required=True)

    sp = add("verify-suite", cmd_verify_suite, "run the acceptance matrix")
    sp.add_argument("--budget", choices=("quick", "full"), default="quick")
    sp.add_argument("--progress", action="store_true", help="print one line per check to stderr")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        cfg = build_config(args)
        inputs, results, ok = args.handler(args, cfg)
    except (SpecError, ValueError, KeyError, TypeError) as exc:
        print(f"slicelab {args.command_name}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    seed = results.get("seed") if args.command_name == "verify-suite" else cfg.seed
    report = {"command": args.command_name, "inputs": _plain(inputs), "results": _plain(results),
              "seed": seed, "version": __version__}
    if args.command_name != "verify-suite":
        report["inputs"]["cfg"] = cfg.to_spec()
    if args.timing:
        report["wall_time"] = time.perf_counter() - t0
    text = to_csv(report) if args.format == "csv" else dumps(report) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not ok:
        return EXIT_INEQUALITY
    if _tolerance_missed(report["results"]):
        return EXIT_TOLERANCE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
