"""The ``selfsim`` command line.

Every subcommand takes its options as flags or from ``--config FILE``
(TOML or JSON, keys named like the flags with underscores); flags win.
Outputs are canonical JSON or CSV and record the tool version, a digest of
the effective configuration and the enclosure precision.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import re
import sys
from fractions import Fraction
from pathlib import Path


from . import __version__
from .arithmetic import LogOf, check_condition_D, check_condition_d, in_log_span, log_rank
from .embedding import Certificate, certify_empty, search_embeddings, verify_certificate
from .ifs import AffineMap1D, IFSystem, homogeneous_pair, load_ifs, middle_thirds, toml_loads
from .measures import AtomicMeasure, cantor_endpoints, cp_trajectory
from .numerics import as_rational, default_precision, format_rational
from .orbits import box_dim_estimate, choice_sequence, generate_multirotation, lambda_of, LambdaSet
from .renorm import repeat_word, theta_sequence

EXIT_OK, EXIT_UNKNOWN, EXIT_REFUTED, EXIT_CONFIG = 0, 2, 3, 64


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Input parsing
# ---------------------------------------------------------------------------

def _load_file(path) -> dict:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        return toml_loads(text)
    return json.loads(text)


def parse_ifs(spec) -> IFSystem:
    """An IFS from a dict, a config path, ``cantor`` or ``pair:R`` (maps ``Rx`` and ``Rx + 1 - R``)."""
    if isinstance(spec, dict):
        return IFSystem.from_config(spec)
    s = str(spec)
    if s in ("cantor", "middle-thirds"):
        return middle_thirds()
    if s.startswith("pair:"):
        return homogeneous_pair(as_rational(s[5:]))
    return load_ifs(s)


def parse_list(v) -> list:
    if isinstance(v, (list, tuple)):
        return list(v)
    return [t.strip() for t in str(v).split(",") if t.strip()]


_LOG = re.compile(r"^(-?)log\(?([^()]+)\)?$")


def parse_gamma(v):
    """``log2``, ``log(3/2)``, ``-log3`` or a rational number."""
    s = str(v).replace(" ", "")
    m = _LOG.match(s)
    if m:
        g = LogOf(as_rational(m.group(2)))
        return -g if m.group(1) else g
    return as_rational(s)


def parse_map(v) -> AffineMap1D:
    a, b = parse_list(v)
    return AffineMap1D(as_rational(a), as_rational(b))


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

_OUTPUT_KEYS = ("out", "csv")


def _digest(cfg: dict) -> str:
    """Digest of the effective configuration; output paths do not count."""
    cfg = {k: v for k, v in cfg.items() if k not in _OUTPUT_KEYS}
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _meta(cfg: dict) -> dict:
    m = {"tool_version": __version__, "config_digest": _digest(cfg), "precision": cfg.get("precision") or default_precision()}
    if "seed" in cfg:
        m["seed"] = cfg["seed"]
    return m


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _csv_with_meta(csv: str, cfg: dict) -> str:
    m = _meta(cfg)
    head = "".join(f"# {k}: {m[k]}\n" for k in sorted(m))
    return head + csv


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_certify(cfg: dict) -> int:
    X, Y = parse_ifs(cfg["x"]), parse_ifs(cfg["y"])
    res = certify_empty(
        X,
        Y,
        max_depth=int(cfg["max_depth"]),
        witness_depth=int(cfg["witness_depth"]),
        cover_depth=None if cfg.get("cover_depth") is None else int(cfg["cover_depth"]),
        budget=int(cfg["budget"]),
        precision=cfg.get("precision"),
        orientation=cfg["orientation"],
        jobs=int(cfg["jobs"]),
    )
    per_depth = [{k: (format_rational(v) if isinstance(v, Fraction) else v) for k, v in d.items()} for d in res.stats["per_depth"]]
    if res.tag == "Empty":
        cert = res.certificate
        cert.header["meta"] = _meta(cfg)
        _emit(cert.dumps() + "\n", cfg.get("out"))
        if cfg.get("out"):
            sys.stdout.write(_dumps({"outcome": "Empty", "leaves": len(cert.leaves), "per_depth": per_depth}))
        return EXIT_OK
    body = {"outcome": res.tag, "meta": _meta(cfg), "per_depth": per_depth}
    if res.tag == "Unknown":
        body.update(res.to_json())
    else:
        body["candidate"] = [format_rational(res.f.ratio), format_rational(res.f.translation)]
    _emit(_dumps(body), cfg.get("out"))
    return EXIT_UNKNOWN


def cmd_verify(cfg: dict) -> int:
    cert = Certificate.from_json(_load_file(cfg["certificate"]))
    inst = cert.header["instance"]
    X = parse_ifs(cfg["x"]) if cfg.get("x") else IFSystem.from_config(inst["X"])
    Y = parse_ifs(cfg["y"]) if cfg.get("y") else IFSystem.from_config(inst["Y"])
    diag: list[str] = []
    ok = verify_certificate(cert, X, Y, cfg.get("precision"), diag)
    _emit(_dumps({"verified": ok, "diagnostics": diag, "leaves": len(cert.leaves), "meta": _meta(cfg)}), cfg.get("out"))
    return EXIT_OK if ok else EXIT_REFUTED


def cmd_search(cfg: dict) -> int:
    X, Y = parse_ifs(cfg["x"]), parse_ifs(cfg["y"])
    extra = [parse_map(m) for m in cfg.get("maps") or []]
    rows = []
    for f, st in search_embeddings(X, Y, int(cfg["candidate_depth"]), int(cfg["verify_depth"]), extra):
        rows.append({
            "map": [format_rational(f.ratio), format_rational(f.translation)],
            "status": st.status,
            "depth": st.depth,
            "witness": None if st.witness is None else format_rational(st.witness),
            "image": None if st.image is None else format_rational(st.image),
        })
    _emit(_dumps({"candidates": rows, "meta": _meta(cfg)}), cfg.get("out"))
    return EXIT_OK


def cmd_rank(cfg: dict) -> int:
    ratios = [as_rational(r) for r in parse_list(cfg["ratios"])]
    _emit(_dumps({"rank": log_rank(ratios), "ratios": [format_rational(r) for r in ratios], "meta": _meta(cfg)}), cfg.get("out"))
    return EXIT_OK


def cmd_span(cfg: dict) -> int:
    r = as_rational(cfg["r"])
    basis = [as_rational(b) for b in parse_list(cfg["basis"])]
    res = in_log_span(r, basis)
    coeffs = None if not res else [format_rational(c) for c in res.coefficients]
    _emit(_dumps({"in_span": bool(res), "coefficients": coeffs, "meta": _meta(cfg)}), cfg.get("out"))
    return EXIT_OK


def cmd_dioph(cfg: dict) -> int:
    gammas = [parse_gamma(g) for g in parse_list(cfg["gammas"])]
    c = as_rational(cfg["c"])
    fn = check_condition_D if cfg["mode"] == "D" else check_condition_d
    rep = fn(gammas, c, int(cfg["N"]), cfg.get("precision"))
    if cfg.get("csv"):
        Path(cfg["csv"]).write_text(_csv_with_meta(rep.to_csv(), cfg))
    body = rep.to_json()
    body["gammas"] = [repr(g) if isinstance(g, LogOf) else format_rational(g) for g in gammas]
    body["meta"] = _meta(cfg)
    _emit(_dumps(body), cfg.get("out"))
    return EXIT_OK


def _lambda_set(cfg: dict) -> LambdaSet:
    if cfg.get("lambdas") is not None:
        return LambdaSet(tuple(as_rational(v) for v in parse_list(cfg["lambdas"])))
    return lambda_of(as_rational(cfg["alpha"]), [as_rational(b) for b in parse_list(cfg["betas"])], cfg.get("precision"))


def cmd_multirot(cfg: dict) -> int:
    lam = _lambda_set(cfg)
    choices = choice_sequence(cfg["kind"], int(cfg["length"]) - 1, len(lam), [int(p) for p in parse_list(cfg["pattern"])], int(cfg["seed"]))
    orbit = generate_multirotation(lam, as_rational(cfg["theta0"]), choices)
    _emit(_csv_with_meta(orbit.to_csv(), cfg), cfg.get("out"))
    return EXIT_OK


def cmd_boxdim(cfg: dict) -> int:
    if cfg.get("points"):
        pts = [as_rational(line.split(",")[0]) for line in Path(cfg["points"]).read_text().split() if line and not line.startswith(("#", "n", "x"))]
    elif cfg.get("cantor_depth") is not None:
        pts = cantor_endpoints(int(cfg["cantor_depth"]))
    else:
        lam = _lambda_set(cfg)
        choices = choice_sequence(cfg["kind"], int(cfg["length"]) - 1, len(lam), [int(p) for p in parse_list(cfg["pattern"])], int(cfg["seed"]))
        pts = generate_multirotation(lam, as_rational(cfg["theta0"]), choices).floats()
    scales = [as_rational(s) for s in parse_list(cfg["scales"])]
    est = box_dim_estimate(pts, scales)
    _emit(_dumps({**est.to_json(), "points": len(pts), "meta": _meta(cfg)}), cfg.get("out"))
    return EXIT_OK


def cmd_renorm(cfg: dict) -> int:
    X, Y = parse_ifs(cfg["x"]), parse_ifs(cfg["y"])
    f = parse_map(cfg["f"])
    rep = theta_sequence(f, repeat_word(cfg["word"]), int(cfg["N"]), X, Y, int(cfg["start"]), int(cfg["verify_depth"]), cfg.get("precision"))
    if cfg.get("csv"):
        Path(cfg["csv"]).write_text(_csv_with_meta(rep.to_csv(), cfg))
    _emit(_dumps({**rep.to_json(), "meta": _meta(cfg)}), cfg.get("out"))
    return EXIT_OK


def _read_atoms(path) -> AtomicMeasure:
    pts, ws = [], []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line[0].isalpha():
            continue
        *coords, w = [as_rational(t) for t in line.split(",")]
        pts.append(tuple(coords))
        ws.append(w)
    return AtomicMeasure.from_weights(pts, ws)


def cmd_cpstep(cfg: dict) -> int:
    if cfg.get("atoms"):
        mu = _read_atoms(cfg["atoms"])
    else:
        mu = AtomicMeasure.uniform(p for p in cantor_endpoints(int(cfg["cantor_depth"])) if p < 1)
    recs = cp_trajectory(mu, int(cfg["level"]), int(cfg["steps"]), int(cfg["seed"]))
    meta = json.dumps({"meta": _meta(cfg)}, sort_keys=True)
    _emit(meta + "\n" + "".join(json.dumps(r, sort_keys=True) + "\n" for r in recs), cfg.get("out"))
    return EXIT_OK


# name: (handler, help, [(flag, default, help)])
COMMANDS = {
    "certify": (cmd_certify, "certify that no affine map embeds X into Y", [
        ("x", None, "X: config path, 'cantor' or 'pair:R'"),
        ("y", None, "Y: config path, 'cantor' or 'pair:R'"),
        ("max_depth", 30, "maximum subdivision depth"),
        ("witness_depth", 12, "maximum witness word length"),
        ("cover_depth", None, "fixed Y cover depth (default: automatic)"),
        ("budget", 2_000_000, "maximum number of cells examined"),
        ("orientation", "both", "both | preserving | reversing"),
        ("jobs", 1, "worker processes"),
        ("out", None, "output file"),
    ]),
    "verify": (cmd_verify, "replay a certificate", [
        ("certificate", None, "certificate JSON"),
        ("x", None, "override X"),
        ("y", None, "override Y"),
        ("out", None, "output file"),
    ]),
    "search": (cmd_search, "test candidate embeddings", [
        ("x", None, "X"), ("y", None, "Y"),
        ("candidate_depth", 2, "word length for candidates"),
        ("verify_depth", 6, "verification depth"),
        ("maps", None, "extra maps 'a,b' (repeatable)"),
        ("out", None, "output file"),
    ]),
    "rank": (cmd_rank, "rank of the logarithms of rationals", [("ratios", None, "comma-separated rationals"), ("out", None, "output file")]),
    "span": (cmd_span, "is log r in the rational span of log basis", [("r", None, "rational"), ("basis", None, "comma-separated rationals"), ("out", None, "output file")]),
    "dioph": (cmd_dioph, "scan small integer combinations of reals", [
        ("gammas", None, "comma-separated, e.g. log2,log3"),
        ("c", 2, "exponent"),
        ("N", 100, "horizon"),
        ("mode", "D", "D (all signs) or d (nonnegative)"),
        ("csv", None, "margin table CSV"),
        ("out", None, "output file"),
    ]),
    "multirot": (cmd_multirot, "generate a multi-rotation orbit (CSV)", [
        ("lambdas", None, "comma-separated rotation numbers"),
        ("alpha", None, "or: contraction alpha"),
        ("betas", None, "and target ratios"),
        ("theta0", "0", "starting point"),
        ("kind", "constant", "constant | periodic | random"),
        ("pattern", "0", "index pattern"),
        ("length", 1024, "orbit length"),
        ("seed", 0, "random seed"),
        ("out", None, "output file"),
    ]),
    "boxdim": (cmd_boxdim, "box-counting slope of a point set", [
        ("points", None, "file with one number per line"),
        ("cantor_depth", None, "or: middle-thirds endpoints at this depth"),
        ("lambdas", None, "or: multi-rotation orbit"),
        ("alpha", None, ""), ("betas", None, ""),
        ("theta0", "0", ""), ("kind", "constant", ""), ("pattern", "0", ""),
        ("length", 4096, ""), ("seed", 0, ""),
        ("scales", "1/16,1/32,1/64,1/128,1/256,1/512,1/1024", "decreasing scales"),
        ("out", None, "output file"),
    ]),
    "renorm": (cmd_renorm, "renormalization trajectory of an embedding", [
        ("x", "cantor", "X"), ("y", "cantor", "Y"),
        ("f", "1/3,0", "map 'a,b'"),
        ("word", "1", "ii word, repeated"),
        ("N", 16, "last level"),
        ("start", 1, "first level"),
        ("verify_depth", 0, "re-verify renormalized maps to this depth"),
        ("csv", None, "trajectory CSV"),
        ("out", None, "output file"),
    ]),
    "cpstep": (cmd_cpstep, "run the CP chain (JSON lines)", [
        ("atoms", None, "CSV of coordinates and weight"),
        ("cantor_depth", 6, "or: uniform middle-thirds endpoints"),
        ("level", 1, "dyadic level of each step"),
        ("steps", 10, "number of steps"),
        ("seed", 0, "random seed"),
        ("out", None, "output file"),
    ]),
}

REQUIRED = {
    "certify": ("x", "y"), "verify": ("certificate",), "search": ("x", "y"), "rank": ("ratios",),
    "span": ("r", "basis"), "dioph": ("gammas",),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="selfsim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"selfsim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_, opts) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="TOML or JSON file with default option values")
        sp.add_argument("--precision", type=int, help="enclosure precision in bits")
        if name == "verify":
            sp.add_argument("certificate_pos", nargs="?", metavar="CERTIFICATE")
        for key, _, h in opts:
            flag = "--" + key.replace("_", "-")
            if key == "maps":
                sp.add_argument(flag, action="append", help=h)
            else:
                sp.add_argument(flag, dest=key, default=None, help=h)
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    _, _, opts = COMMANDS[args.command]
    cfg = {k: d for k, d, _ in opts}
    cfg["precision"] = None
    if args.config:
        loaded = _load_file(args.config)
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for k in list(cfg):
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    if args.command == "verify" and args.certificate_pos:
        cfg["certificate"] = args.certificate_pos
    for k in REQUIRED.get(args.command, ()):
        if cfg.get(k) is None:
            raise ConfigError(f"missing required option --{k.replace('_', '-')}")
    if cfg.get("precision") is not None:
        cfg["precision"] = int(cfg["precision"])
        if cfg["precision"] < 2:
            raise ConfigError("precision must be at least 2 bits")
    for k in ("max_depth", "witness_depth", "budget", "jobs", "N", "length", "steps", "level"):
        if k in cfg and cfg[k] is not None and int(cfg[k]) <= 0:
            raise ConfigError(f"{k} must be positive")
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command][0](cfg)
    except (ValueError, KeyError, TypeError, OSError, ZeroDivisionError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"selfsim {args.command}: invalid configuration: {msg}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
