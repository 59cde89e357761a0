"""
Command-line front end.

Subcommands
-----------
``classify-weight``  class verdicts and constants of a weight, as JSON
``run``              execute a JSON experiment config, write CSV + summary
``list-checks``      the available check ids
``print-constants``  explicit constants for a weight and exponent

Exit codes: 0 success, 1 some verdict inconclusive (none violated),
2 configuration or parse error, 3 invalid weight exponent, 4 some verdict
violated, 5 solver failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ClassificationError, ConfigError, InputError, SolverError, WeightError
from .harness.checks import CHECK_IDS, CheckSpec, default_threads, run_check
from .harness.constants import explicit_constants
from .harness.report import dump_json, to_csv
from .weights import Weight, classify_weight

log = logging.getLogger("apx")

EXIT_OK, EXIT_INCONCLUSIVE, EXIT_CONFIG, EXIT_EXPONENT, EXIT_VIOLATED, EXIT_SOLVER = range(6)

CHECK_HELP = {
    "nikolskii": "||U||_p <= C n^(1/q - 1/p) ||U||_q for degree-n polynomials, q <= p",
    "jackson": "E_n(f) <= C Omega_r(f, 1/n)",
    "jackson_derivative": "E_n(f) <= C n^-r Omega_k(f^(r), 1/n)",
    "bernstein": "||U^(r)|| <= 2^r C12^r n^r ||U|| (explicit constant)",
    "stechkin_inverse": "Omega_k(f, 1/n) <= C n^-k sum_{v<=n} (v+1)^(k-1) E_v(f)",
    "marchaud": "Omega_k(f, t) <= C t^k int_t^1 Omega_{k+1}(f, u) u^-k du/u",
    "ulyanov_modulus": "Omega_k(f, d)_q <= C (int_0^d (t^-theta Omega_k(f, t)_p)^q* dt/t)^(1/q*)",
    "ulyanov_best_approx": "five Ul'yanov-type bounds of E_n(f)_q and ||f||_q by E_k(f)_p or Omega_j(f)_p",
    "realization_equiv": "R_r(f, 1/n) ~ Omega_r(f, 1/n); lower constant (1 + C1)^-r",
    "kfunctional_equiv": "K_r(f, v) ~ Omega_r(f, v); lower constant (1 + C1)^-r",
    "operator_uniform": "||Op f|| <= C ||f|| for T_v, S, F_n, V_n, D_n (explicit constants)",
    "modulus_props": "limit, order reduction, step scaling, smooth bound and R_v proximity",
    "upsilon_nikste": "l ||f'|| <= 2 C2 ||(T_l - I) f|| with the Upsilon identity residual",
    "jackson_operator": "||f - D_n f|| <= C Omega_k(f, 1/n)",
}


# ---------------------------------------------------------------------- #
# config handling

def _schema() -> dict:
    return json.loads(resources.files("apx").joinpath("data/config.schema.json").read_text())


def default_suite_path() -> Path:
    return Path(str(resources.files("apx").joinpath("data/default_suite.json")))


def load_config(path) -> dict:
    """Read and validate an experiment config (``default`` names the bundled
    suite)."""
    import jsonschema

    path = default_suite_path() if str(path) == "default" else Path(path)
    try:
        cfg = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    try:
        jsonschema.validate(cfg, _schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config {path} at {where}: {exc.message}") from None
    return cfg


def _table(entries, what):
    out = {}
    for e in entries:
        e = dict(e)
        key = e.pop("id")
        if key in out:
            raise ConfigError(f"duplicate {what} id {key!r}")
        out[key] = e
    return out


def build_specs(cfg: dict) -> list:
    seed = int(cfg.get("seed", 0))
    weights = _table(cfg.get("weights", []), "weight")
    functions = _table(cfg.get("functions", []), "function")
    for wid, d in weights.items():
        Weight.from_descriptor(d)  # fail early on bad descriptors
    return [CheckSpec.from_dict(c, seed, weights, functions) for c in cfg.get("checks", [])]


def _constants_for(spec: CheckSpec):
    w = Weight.constant(1.0) if spec.weight is None else Weight.from_descriptor(spec.weight)
    try:
        return {k: v.as_dict() for k, v in explicit_constants(w, spec.p).items()}
    except (ClassificationError, InputError):
        return None


def _file_name(i: int, spec: CheckSpec) -> str:
    slug = "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in spec.name)
    return f"{i:02d}_{slug}.csv"


def execute(cfg: dict, out_dir=None, only=None, threads=None, source="") -> tuple:
    """
    Run every check of ``cfg`` and write the reports.

    Returns ``(exit_code, summary)``.  Files are written after all checks
    have finished.
    """
    specs = build_specs(cfg)
    if only:
        specs = [s for s in specs if s.check_id in only or s.name in only]
    out = cfg.get("output", {})
    formats = out.get("formats", ["csv", "json"])
    directory = Path(out_dir or out.get("directory", "apx_results"))
    threads = default_threads() if threads is None else threads

    reports = []
    for spec in specs:
        t0 = time.perf_counter()
        try:
            rep = run_check(spec, threads)
        except SolverError as exc:
            exc.diagnostics.setdefault("check", spec.name)
            raise
        log.info("%s: %s (%.1fs)", spec.name, rep.verdict, time.perf_counter() - t0)
        reports.append((spec, rep, time.perf_counter() - t0))

    summary = {
        "metadata": {"tool_version": __version__, "seed": int(cfg.get("seed", 0)), "config": source,
                     "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "threads": threads},
        "checks": [],
    }
    files = {}
    for i, (spec, rep, secs) in enumerate(reports):
        entry = rep.summary()
        entry["constants"] = _constants_for(spec)
        entry["seconds"] = round(secs, 3)
        if "csv" in formats:
            entry["csv"] = _file_name(i, spec)
            files[entry["csv"]] = to_csv(rep)
        summary["checks"].append(entry)
    verdicts = [rep.verdict for _, rep, _ in reports]
    if "violated" in verdicts:
        code = EXIT_VIOLATED
    elif "inconclusive" in verdicts:
        code = EXIT_INCONCLUSIVE
    else:
        code = EXIT_OK
    summary["exit_code"] = code

    if formats:
        directory.mkdir(parents=True, exist_ok=True)
        for name, body in files.items():
            (directory / name).write_text(body)
        if "json" in formats:
            (directory / "summary.json").write_text(dump_json(summary))
    return code, summary


# ---------------------------------------------------------------------- #
# argument parsing

def _float(s: str) -> float:
    if s.lower() in ("inf", "infinity"):
        return float("inf")
    return float(s)


def _add_weight_args(p):
    p.add_argument("--family", default="constant", choices=["constant", "power", "product", "tabulated"])
    p.add_argument("--x0", type=float, default=0.0, help="singular point of the power family")
    p.add_argument("--alpha", type=float, default=0.0, help="exponent of the power family")
    p.add_argument("--c", type=float, default=1.0, help="positive scale factor")
    p.add_argument("--factors", default="", help="product family: 'x0:beta,x1:beta1,...'")
    p.add_argument("--values", default="", help="tabulated family: comma-separated samples")
    p.add_argument("--descriptor", default="", help="weight descriptor as a JSON object (overrides the flags)")


def _weight_from_args(a) -> Weight:
    if a.descriptor:
        try:
            d = json.loads(a.descriptor)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--descriptor is not valid JSON: {exc}") from None
        return Weight.from_descriptor(d)
    if a.family == "constant":
        return Weight.constant(a.c)
    if a.family == "power":
        return Weight.power(a.x0, a.alpha, a.c)
    if a.family == "product":
        try:
            factors = [tuple(float(t) for t in f.split(":")) for f in a.factors.split(",") if f]
        except ValueError:
            raise ConfigError("--factors must look like 'x0:beta,x1:beta1'") from None
        if not factors or any(len(f) != 2 for f in factors):
            raise ConfigError("--factors must look like 'x0:beta,x1:beta1'")
        return Weight.product(factors, a.c)
    try:
        vals = [float(v) for v in a.values.split(",") if v]
    except ValueError:
        raise ConfigError("--values must be comma-separated numbers") from None
    return Weight.tabulated(vals)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="apx", description=__doc__.split("\n\n")[0].strip())
    ap.add_argument("--version", action="version", version=f"apx {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    cw = sub.add_parser("classify-weight", help="class verdicts and constants of a weight")
    _add_weight_args(cw)
    cw.add_argument("--p", type=_float, default=2.0, help="exponent in [1, inf]")

    run = sub.add_parser("run", help="run an experiment config ('default' for the bundled suite)")
    run.add_argument("config")
    run.add_argument("--out", default=None, help="output directory (overrides the config)")
    run.add_argument("--only", action="append", default=None, help="run only this check id or name")

    sub.add_parser("list-checks", help="list check ids")

    pc = sub.add_parser("print-constants", help="explicit constants for a weight and exponent")
    _add_weight_args(pc)
    pc.add_argument("--p", type=_float, default=2.0)
    pc.add_argument("--r", type=int, default=1)
    pc.add_argument("--k", type=int, default=None)
    return ap


def _emit(obj):
    sys.stdout.write(dump_json(obj))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "list-checks":
            for cid in CHECK_IDS:
                print(f"{cid:22s} {CHECK_HELP[cid]}")
            return EXIT_OK
        if args.command == "classify-weight":
            w = _weight_from_args(args)
            _emit(classify_weight(w, args.p).as_dict())
            return EXIT_OK
        if args.command == "print-constants":
            w = _weight_from_args(args)
            consts = explicit_constants(w, args.p, args.r, args.k)
            _emit({"weight": w.label(), "p": args.p, "r": args.r,
                   "constants": {k: v.as_dict() for k, v in consts.items()}})
            return EXIT_OK
        cfg = load_config(args.config)
        code, summary = execute(cfg, args.out, args.only, source=str(args.config))
        for c in summary["checks"]:
            print(f"{c['verdict']:26s} {c['name']}")
        return code
    except WeightError as exc:
        print(f"apx: invalid weight exponent: {exc}", file=sys.stderr)
        return EXIT_EXPONENT
    except SolverError as exc:
        print(f"apx: solver failure: {exc} {json.dumps(exc.diagnostics, default=str)}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, ClassificationError, InputError) as exc:
        print(f"apx: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
