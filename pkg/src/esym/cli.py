"""Command-line front end.

Exit status is 0 on success, 2 for bad input or arguments, 3 for a numerical
or verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

from . import __version__, efficiency, etests, pvalues
from .baseline import gauss_lr_e, gauss_mix_e
from .datasets import InputError, ingest
from .etests import DEFAULT_NORMALIZATION, NORMALIZATIONS, ParamGrid
from .numerics import QuadratureError, log_cosh_mean
from .symmetry import EnumerationCapError, RngSeed, summarize, verify_e_variable

COMMANDS = ("evalue", "curve", "mix", "verify", "are", "pvalue", "inequality-curve")
SQRT10 = math.sqrt(10)
DEFAULT_SEED = 20230517

EVALUE_TESTS = ("fisher", "delapena", "fisher-mix", "sign", "sign-mix", "wilcoxon",
                "gauss-lr", "gauss-mix")
GRID_TESTS = ("fisher", "delapena", "sign", "wilcoxon", "gauss-lr")
VERIFY_TESTS = ("all", "fisher", "delapena", "fisher-mix", "sign", "sign-mix", "wilcoxon")


class UsageError(ValueError):
    pass


class VerificationFailure(RuntimeError):
    pass


@dataclass
class RunConfig:
    command: str
    test: str | None = None
    parameter: float | None = None
    parameter_name: str | None = None
    grid: str | None = None
    normalize: str = DEFAULT_NORMALIZATION
    side: str = "one"
    seed: int = DEFAULT_SEED
    output_format: str = "json"
    source: str | None = None
    reps: int = 10_000
    beta: float = 2.0
    theta_seq: tuple = (0.4, 0.3, 0.2, 0.15, 0.1)
    workers: int = 1
    bootstrap: int = 200
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.parameter is not None and self.grid is not None:
            raise UsageError("give either a single parameter or a --grid, not both")
        if self.normalize not in NORMALIZATIONS:
            raise UsageError(f"--normalize must be one of {NORMALIZATIONS}")
        if self.command not in ("are", "inequality-curve") and self.source is None:
            raise UsageError(f"{self.command} needs an input file or builtin dataset id")


def _base_record(cfg: RunConfig, sample=None) -> dict:
    rec = {"command": cfg.command, "test": cfg.test}
    if sample is not None:
        rec["n"] = sample.n
        rec["k"] = etests.sign_count(sample)
        try:
            rec["V"] = etests.signed_rank_stats(sample).V
        except etests.TiedMagnitudesError:
            rec["V"] = None
    return rec


def _e_fields(e: etests.EValue) -> dict:
    value = e.value
    return {
        "e_value": value if math.isfinite(value) else "inf",
        "log_e": e.log_value if math.isfinite(e.log_value) else str(e.log_value),
        "exceeds_sqrt10": value >= SQRT10,
        "exceeds_10": value >= 10.0,
    }


def _finish(cfg: RunConfig, rec: dict) -> dict:
    rec["seed"] = cfg.seed
    rec["version"] = __version__
    return rec


def _param(cfg: RunConfig, default_name: str):
    if cfg.parameter is None:
        raise UsageError(f"test {cfg.test!r} needs --{default_name}")
    return cfg.parameter_name or default_name, cfg.parameter


def _single_e(cfg: RunConfig, x):
    """e-value of one test on (normalized) data; returns (param name, value, EValue)."""
    t = cfg.test
    if t in ("fisher", "delapena", "wilcoxon"):
        name, lam = _param(cfg, "lambda")
        if name != "lambda":
            raise UsageError(f"test {t!r} takes --lambda")
        fn = {"fisher": etests.fisher_e, "delapena": etests.delapena_e,
              "wilcoxon": etests.wilcoxon_e}[t]
        return name, lam, fn(lam, x)
    if t == "sign":
        name, val = _param(cfg, "p")
        if name == "lambda":
            return name, val, etests.sign_e_lambda(val, x)
        if name != "p":
            raise UsageError("sign test takes --p or --lambda")
        return name, val, etests.sign_e_p(val, x)
    if t == "gauss-lr":
        name, th = _param(cfg, "theta")
        return name, th, gauss_lr_e(th, x)
    if t == "fisher-mix":
        return None, None, etests.fisher_mix_e(x)
    if t == "gauss-mix":
        return None, None, gauss_mix_e(x)
    if t == "sign-mix":
        fn = etests.sign_mix_one_sided if cfg.side == "one" else etests.sign_mix_two_sided
        return None, None, fn(x)
    raise UsageError(f"unknown test {t!r} for evalue; choose from {EVALUE_TESTS}")


def _grid_family(test: str, name: str | None) -> tuple[str, str]:
    if test == "sign":
        return ("sign_lambda", "lambda") if name == "lambda" else ("sign_p", "p")
    if test == "gauss-lr":
        return "gauss_lr", "theta"
    if test in ("fisher", "delapena", "wilcoxon"):
        return test, "lambda"
    raise UsageError(f"test {test!r} has no parameter grid; choose from {GRID_TESTS}")


def _grid(cfg: RunConfig, default: str):
    try:
        return ParamGrid.parse(cfg.grid or default)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cmd_evalue(cfg, sample):
    x = etests.normalize(sample, cfg.normalize)
    name, val, e = _single_e(cfg, x)
    rec = _base_record(cfg, sample)
    rec.update({"parameter_name": name, "parameter": val, "normalize": cfg.normalize,
                "side": cfg.side if cfg.test == "sign-mix" else None})
    rec.update(_e_fields(e))
    rec["p_value"] = None
    return _finish(cfg, rec)


def _cmd_mix(cfg, sample):
    x = etests.normalize(sample, cfg.normalize)
    rec = _base_record(cfg, sample)
    rec["normalize"] = cfg.normalize
    if cfg.grid is None:
        if cfg.test == "fisher":
            e, how = etests.fisher_mix_e(x), "closed form, lambda ~ N(0,1)"
        elif cfg.test == "sign":
            if cfg.side == "one":
                e, how = etests.sign_mix_one_sided(x), "exact, p ~ U[1/2,1]"
            else:
                e, how = etests.sign_mix_two_sided(x), "exact, p ~ U[0,1]"
        else:
            raise UsageError(f"mix --test {cfg.test} needs --grid")
        rec.update({"mixture": how, "grid": None})
    else:
        name, grid = _grid(cfg, cfg.grid)
        family, pname = _grid_family(cfg.test, name)
        if family == "gauss_lr":
            raise UsageError("gauss-lr has a closed-form mixture: use evalue --test gauss-mix")
        e = etests.grid_average_e(family, grid, x)
        rec.update({"mixture": f"trapezoid average over {pname}", "grid": cfg.grid})
    rec.update(_e_fields(e))
    rec["p_value"] = None
    return _finish(cfg, rec)


def _grid_point_log(family, p, x):
    if family == "gauss_lr":
        return gauss_lr_e(p, x).log_value
    return etests.grid_average_e(family, ParamGrid([p]), x).log_value


def _cmd_curve(cfg, sample):
    x = etests.normalize(sample, cfg.normalize)
    default = "p:0:1:1001" if cfg.test == "sign" else "lambda:0:1:1001"
    name, grid = _grid(cfg, default)
    family, pname = _grid_family(cfg.test, name)
    rows = []
    for p in grid.points:
        e = etests.EValue(_grid_point_log(family, p, x))
        rows.append({"parameter": p, "e_value": e.value,
                     "log_e": e.log_value if math.isfinite(e.log_value) else str(e.log_value)})
    doc = _base_record(cfg, sample)
    doc.update({"parameter_name": pname, "normalize": cfg.normalize,
                "grid": cfg.grid or default, "records": rows})
    return _finish(cfg, doc)


def _cmd_inequality(cfg, sample):
    _, grid = _grid(cfg, "x:-3:3:1001")
    rows = [{"x": x, "log_cosh": log_cosh_mean(x), "half_square": 0.5 * x * x}
            for x in grid.points]
    doc = {"command": cfg.command, "test": None, "grid": cfg.grid or "x:-3:3:1001",
           "records": rows}
    return _finish(cfg, doc)


def _verify_targets(cfg):
    lam = cfg.parameter if cfg.parameter is not None else 0.5
    if cfg.test in (None, "all"):
        return [("fisher", "fisher", lam), ("sign", "sign_lambda", lam),
                ("wilcoxon", "wilcoxon", lam)]
    table = {"fisher": "fisher", "delapena": "delapena", "wilcoxon": "wilcoxon",
             "fisher-mix": "fisher_mix"}
    if cfg.test in table:
        return [(cfg.test, table[cfg.test], lam)]
    if cfg.test == "sign":
        if cfg.parameter_name == "p":
            return [("sign", "sign_p", cfg.parameter)]
        return [("sign", "sign_lambda", lam)]
    if cfg.test == "sign-mix":
        return [("sign-mix", "sign_mix_one" if cfg.side == "one" else "sign_mix_two", None)]
    raise UsageError(f"unknown test {cfg.test!r} for verify; choose from {VERIFY_TESTS}")


def _cmd_verify(cfg, sample):
    x = etests.normalize(sample, cfg.normalize)
    m = summarize(x)
    if cfg.test in (None, "all", "wilcoxon"):
        etests.signed_rank_stats(x)
    rows, ok = [], True
    for label, family, param in _verify_targets(cfg):
        rep = verify_e_variable(etests.batched_e(family, param), m, batched=True)
        ok &= rep.is_e_variable
        rows.append({"test": label, "family": family, "parameter": param,
                     "mean": rep.mean, "is_e_variable": rep.is_e_variable,
                     "is_admissible": rep.is_admissible})
    doc = _base_record(cfg, sample)
    doc.update({"normalize": cfg.normalize, "tolerance": 1e-9, "passed": ok, "records": rows})
    doc = _finish(cfg, doc)
    if not ok:
        raise VerificationFailure(json.dumps(doc))
    return doc


def _cmd_are(cfg, sample):
    test = (cfg.test or "fisher").replace("-", "_")
    if test not in efficiency.FAMILIES:
        raise UsageError(f"are --test must be one of {efficiency.FAMILIES}")
    try:
        acfg = efficiency.AreConfig(theta_sequence=tuple(cfg.theta_seq), beta=cfg.beta,
                                    replications=cfg.reps, seed=RngSeed(cfg.seed),
                                    workers=cfg.workers, bootstrap=cfg.bootstrap)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = efficiency.are_estimate(test, acfg)
    rows = [{"theta": r.theta, "n_test": r.n_test, "n_baseline": r.n_baseline,
             "ratio": r.ratio} for r in res.records]
    doc = {"command": cfg.command, "test": test, "beta": cfg.beta, "reps": cfg.reps,
           "extrapolated_are": res.extrapolated_are, "se": res.se, "records": rows}
    return _finish(cfg, doc)


def _cmd_pvalue(cfg, sample):
    side = "one_sided" if cfg.side == "one" else "two_sided"
    if cfg.test == "fisher":
        p = pvalues.fisher_permutation_pvalue(sample, side)
    elif cfg.test == "sign":
        p = pvalues.sign_test_pvalue(sample, side)
    else:
        raise UsageError("pvalue --test must be fisher or sign")
    rec = _base_record(cfg, sample)
    rec.update({"side": side, "e_value": None, "log_e": None, "p_value": p.value,
                "p_numerator": p.exact.numerator, "p_denominator": p.exact.denominator})
    return _finish(cfg, rec)


_DISPATCH = {"evalue": _cmd_evalue, "mix": _cmd_mix, "curve": _cmd_curve,
             "inequality-curve": _cmd_inequality, "verify": _cmd_verify,
             "are": _cmd_are, "pvalue": _cmd_pvalue}


def run(cfg: RunConfig) -> dict:
    """Execute one command and return its report as a JSON-ready dict."""
    sample = ingest(cfg.source) if cfg.source is not None and cfg.command not in (
        "are", "inequality-curve") else None
    return _DISPATCH[cfg.command](cfg, sample)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    rows = report.get("records")
    if rows is None:
        rows = [report]
    elif report["command"] == "curve":
        rows = [{"parameter": r["parameter"], "e_value": r["e_value"]} for r in rows]
    else:
        meta = {k: v for k, v in report.items() if k not in ("records", "version")}
        meta_keys = [k for k in ("command", "test") if k in meta]
        rows = [{**{k: meta[k] for k in meta_keys}, **r} for r in rows]
    header = []
    for r in rows:
        header.extend(k for k in r if k not in header)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in header})
    return buf.getvalue()


def _float_list(text):
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="esym", description="Nonparametric e-tests of symmetry.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=True):
        if data:
            p.add_argument("data", help="numeric text file, or builtin id (darwin-maize)")
        p.add_argument("--normalize", choices=NORMALIZATIONS, default=DEFAULT_NORMALIZATION)
        p.add_argument("--side", choices=("one", "two"), default="one")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (default: $ESYM_SEED or %d)" % DEFAULT_SEED)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--output", "-o", metavar="PATH")
        param = p.add_mutually_exclusive_group()
        param.add_argument("--lambda", dest="lam", type=float)
        param.add_argument("--p", type=float)
        param.add_argument("--theta", type=float)
        p.add_argument("--grid", help="[name:]lo:hi:count, trapezoid weights")

    for name, tests, default in (("evalue", EVALUE_TESTS, None), ("mix", GRID_TESTS, None),
                                 ("curve", GRID_TESTS, None), ("verify", VERIFY_TESTS, "all"),
                                 ("pvalue", ("fisher", "sign"), None)):
        p = sub.add_parser(name)
        p.add_argument("--test", choices=tests, required=default is None, default=default)
        common(p)

    p = sub.add_parser("inequality-curve")
    common(p, data=False)

    p = sub.add_parser("are")
    common(p, data=False)
    p.add_argument("--test", choices=efficiency.FAMILIES + ("gauss-lr",), default="fisher")
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--theta-seq", type=_float_list, default=(0.4, 0.3, 0.2, 0.15, 0.1))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--bootstrap", type=int, default=200)
    return parser


def config_from_args(args) -> RunConfig:
    seed = args.seed
    if seed is None:
        env = os.environ.get("ESYM_SEED")
        try:
            seed = int(env) if env else DEFAULT_SEED
        except ValueError:
            raise UsageError(f"ESYM_SEED={env!r} is not an integer") from None
    pname, pval = None, None
    for name, attr in (("lambda", "lam"), ("p", "p"), ("theta", "theta")):
        if getattr(args, attr, None) is not None:
            pname, pval = name, getattr(args, attr)
    kw = {}
    for attr in ("reps", "beta", "theta_seq", "workers", "bootstrap"):
        if hasattr(args, attr):
            kw[attr] = getattr(args, attr)
    return RunConfig(command=args.command, test=getattr(args, "test", None), parameter=pval,
                     parameter_name=pname, grid=args.grid, normalize=args.normalize,
                     side=args.side, seed=seed, output_format=args.format,
                     source=getattr(args, "data", None), **kw)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        text = render(run(cfg), cfg.output_format)
    except VerificationFailure as exc:
        sys.stdout.write(str(exc) + "\n")
        print("esym: verification failed", file=sys.stderr)
        return 3
    except (EnumerationCapError, QuadratureError, efficiency.SearchCapError,
            ArithmeticError) as exc:
        print(f"esym: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (InputError, UsageError, ValueError) as exc:
        print(f"esym: error: {exc}", file=sys.stderr)
        return 2
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
