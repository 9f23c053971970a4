"""
Command-line front end.

Exit codes: 0 success, 1 bad parameters, 2 numerical failure, 3 a
verification check failed. Every output starts with the effective
configuration; ``--no-meta`` drops the timestamp so identical configs give
byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import mpmath

from . import asymptotics as asy
from . import integrals, series
from .errors import NumericalError, ParameterError, VerificationError
from .exact import DescentSpec, build_triangle, count_with_set, parametrized_count
from .oracle import DEFAULT_CAP, GROUPINGS, OracleReport, PatternQuery, enumerate_counts
from .verify import FULL_ORACLE_CAP, SuiteConfig, run_suite

OUTPUT_DIR_ENV = "KDESCENT_OUTPUT_DIR"
EXIT_OK, EXIT_PARAM, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARAM, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    return vals


class Outcome:
    """What a command produced: a JSON-able payload, optional table rows, optional exit code."""

    def __init__(self, data, table=None, plain=None, code=EXIT_OK):
        self.data = data
        self.table = table  # (header, rows)
        self.plain = plain
        self.code = code


def _bigint(v: int) -> str:
    return str(v)


# -- commands ------------------------------------------------------------------

def cmd_triangle(a) -> Outcome:
    tri = build_triangle(a.k, a.n)
    rows = [(tri.k, n, m, str(v)) for n, row in tri.rows() for m, v in enumerate(row, 1)]
    return Outcome(tri.records(), (("k", "n", "m", "value"), rows))


def cmd_count(a) -> Outcome:
    v = count_with_set(DescentSpec(a.k, a.set), a.n)
    return Outcome({"k": a.k, "I": list(a.set), "n": a.n, "count": _bigint(v)},
                   (("k", "I", "n", "count"), [(a.k, _set_str(a.set), a.n, v)]), plain=str(v))


def cmd_param_count(a) -> Outcome:
    v = parametrized_count(DescentSpec(a.k, a.set), a.m, a.n)
    return Outcome({"k": a.k, "I": list(a.set), "m": a.m, "n": a.n, "count": _bigint(v)},
                   (("k", "I", "m", "n", "count"), [(a.k, _set_str(a.set), a.m, a.n, v)]), plain=str(v))


def cmd_oracle(a) -> Outcome:
    if a.pattern:
        q = PatternQuery(a.n, a.pattern, a.grouping)
    else:
        q = PatternQuery.kdescent(a.k, a.n, a.grouping)
    rep = enumerate_counts(q, cap=a.oracle_cap)
    items = sorted(rep.counts.items(), key=lambda kv: (len(kv[0][0]), kv[0]))
    data = {OracleReport.key_string(k): str(v) for k, v in items}
    rows = [(OracleReport.key_string(k), v) for k, v in items]
    return Outcome(data, (("key", "count"), rows))


def cmd_constants(a) -> Outcome:
    d = asy.growth_rate(a.k).as_dict()
    return Outcome(d, (tuple(d), [tuple(d.values())]))


def cmd_phi(a) -> Outcome:
    if a.diagnostics:
        d = asy.phi_diagnostics(a.k, grid=a.grid)
        d["sup_abs_phi_minus_1"] = {str(k): v for k, v in d["sup_abs_phi_minus_1"].items()}
        return Outcome(d)
    ev = asy.PhiEvaluator(a.k, a.mode)
    xs = [i / (a.grid - 1) for i in range(a.grid)] if a.grid >= 2 else None
    if xs is None:
        raise ParameterError("grid must have at least 2 points")
    vals = [asy.phi(ev, x) for x in xs]
    return Outcome({"k": a.k, "mode": a.mode, "x": xs, "phi": vals},
                   (("x", "phi"), [(f"{x:.12g}", repr(v)) for x, v in zip(xs, vals)]))


def cmd_c_of_i(a) -> Outcome:
    res = integrals.dasy_integral_direct(a.k, a.set) if a.direct else integrals.c_constant(a.k, a.set)
    d = res.as_dict()
    return Outcome(d, (tuple(d), [tuple(_set_str(v) if isinstance(v, list) else v for v in d.values())]))


def cmd_ratios(a) -> Outcome:
    rows = integrals.dudu_ratios(a.k, a.max_i)
    data = [{"i": r.i, "c": r.c, "ratio_to_next": r.ratio_to_next} for r in rows]
    return Outcome(data, (("i", "c", "ratio_to_next"), [(r.i, r.c, "" if r.ratio_to_next is None else r.ratio_to_next) for r in rows]))


def cmd_equidist(a) -> Outcome:
    res = integrals.equidist_constant(a.k, a.a, samples=a.samples, seed=a.seed, kernel=a.kernel)
    d = res.as_dict()
    if a.check_n:
        chk = integrals.prefactor_check(res, a.check_n)
        d["exact_check"] = {"n": chk.n, "I": list(chk.I), "exact_ratio": chk.exact_ratio, "closer": chk.closer}
    return Outcome(d)


def cmd_orderstat(a) -> Outcome:
    spec = asy.OrderStatSpec(a.n, a.t, a.s)
    d = asy.discrete_order_stat(spec)
    data = {
        "n": a.n, "t": a.t, "s": a.s,
        "pmf": {str(k): str(v) for k, v in d.pmf.items()},
        "mean": str(d.mean), "variance": str(d.variance),
        "mean_formula": str(d.mean_formula(spec)), "variance_formula": str(d.variance_formula(spec)),
        "variance_bound": str(Fraction(spec.n ** 2, spec.t)),
    }
    return Outcome(data, (("ell", "probability"), [(k, str(v)) for k, v in d.pmf.items()]))


def cmd_series_check(a) -> Outcome:
    chk = series.identity_residual(a.cap)
    data = {"cap": chk.cap, "safe_degree": chk.safe_degree, "max_residual": str(chk.max_residual),
            "nonzero": [list(p) for p in chk.nonzero]}
    rows = [(i, j, c) for (i, j), c in chk.residual.items()]
    return Outcome(data, (("i", "j", "coefficient"), rows),
                   code=EXIT_OK if chk.max_residual == 0 else EXIT_VERIFY)


def cmd_converge(a) -> Outcome:
    table = integrals.convergence_report(a.k, a.set, a.n_list)
    rows = [(r.n, mpmath.nstr(r.ratio_exact, 20), mpmath.nstr(r.constant, 20), mpmath.nstr(r.rel_gap, 6))
            for r in table.rows]
    data = {"k": a.k, "I": list(a.set), "gaps_decreasing": table.gaps_decreasing(),
            "rows": [dict(zip(("n", "ratio_exact", "constant", "rel_gap"), r)) for r in rows]}
    return Outcome(data, (("n", "ratio_exact", "constant", "rel_gap"), rows))


def cmd_verify(a) -> Outcome:
    cfg = SuiteConfig(oracle_cap=a.oracle_cap, mc_samples=a.samples, seed=a.seed,
                      corrupt_cell=tuple(a.corrupt_cell) if a.corrupt_cell else None)
    rep = run_suite(cfg)
    d = rep.as_dict()
    rows = [(c["name"], c["tolerance"], c["measured"], "pass" if c["passed"] else "FAIL") for c in d["checks"]]
    return Outcome(d, (("name", "tolerance", "measured", "status"), rows),
                   code=EXIT_OK if rep.passed else EXIT_VERIFY)


def _set_str(I) -> str:
    return ",".join(str(i) for i in I)


# -- parser ----------------------------------------------------------------------

COMMANDS = {
    "triangle": (cmd_triangle, "csv", "k-descent-free counts f_k(m,n) by first value"),
    "count": (cmd_count, "plain", "d_k(I,n): permutations with k-descent set exactly I"),
    "param-count": (cmd_param_count, "plain", "d_k(I,m,n): as count, with first value m"),
    "oracle": (cmd_oracle, "json", "brute-force occurrence-set counts over S_n"),
    "constants": (cmd_constants, "json", "growth constants x1, r_k, c_k"),
    "phi": (cmd_phi, "csv", "limiting first-value density on a grid"),
    "c-of-i": (cmd_c_of_i, "json", "asymptotic constant c_{I,k}"),
    "ratios": (cmd_ratios, "json", "c_{{i},k} and successive ratios"),
    "equidist": (cmd_equidist, "json", "equidistribution constant C_{k,a}"),
    "orderstat": (cmd_orderstat, "json", "exact law of a discrete order statistic"),
    "series-check": (cmd_series_check, "json", "k=3 generating-function identity residual"),
    "converge": (cmd_converge, "csv", "exact ratios against c_{I,k} over several n"),
    "verify": (cmd_verify, "json", "run every cross-check"),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "plain"), default=None)
    common.add_argument("--no-meta", action="store_true", help="omit the timestamp header")
    common.add_argument("--output", "-o", help=f"write here instead of stdout (relative to ${OUTPUT_DIR_ENV} if set)")

    parser = _Parser(prog="kdescent", description="Exact and asymptotic k-descent counting.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name):
        return sub.add_parser(name, parents=[common], help=COMMANDS[name][2])

    p = add("triangle")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)

    for name in ("count", "param-count"):
        p = add(name)
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--set", type=_int_list, default=(), help="comma-separated, e.g. 1,5,9")
        p.add_argument("--n", type=int, required=True)
        if name == "param-count":
            p.add_argument("--m", type=int, required=True)

    p = add("oracle")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--pattern", type=_int_list, help="e.g. 1,3,2; default is k..1")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--grouping", choices=GROUPINGS, default="by_set")
    p.add_argument("--oracle-cap", type=int, default=DEFAULT_CAP)

    p = add("constants")
    p.add_argument("--k", type=int, required=True)

    p = add("phi")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--mode", choices=asy.PHI_MODES, default="series")
    p.add_argument("--diagnostics", action="store_true")

    p = add("c-of-i")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--set", type=_int_list, required=True)
    p.add_argument("--direct", action="store_true", help="sum over enumerated permutations instead")

    p = add("ratios")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--max-i", type=int, default=4)

    p = add("equidist")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kernel", choices=integrals.KERNELS, default="flank")
    p.add_argument("--check-n", type=int, default=0, help="compare with the exact ratio at this n")

    p = add("orderstat")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--s", type=int, required=True)

    p = add("series-check")
    p.add_argument("--cap", type=int, default=24)

    p = add("converge")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--set", type=_int_list, required=True)
    p.add_argument("--n-list", type=_int_list, default=(50, 100, 200, 400))

    p = add("verify")
    p.add_argument("--oracle-cap", type=int, default=FULL_ORACLE_CAP)
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corrupt-cell", type=int, nargs=2, metavar=("M", "N"), help=argparse.SUPPRESS)
    return parser


def _config(a) -> dict:
    skip = {"output", "no_meta"}
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(vars(a).items()) if k not in skip}


def render(outcome: Outcome, fmt: str, config: dict, meta: bool) -> str:
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds") if meta else None
    if fmt == "json":
        doc = {"config": config, "result": outcome.data}
        if stamp:
            doc["meta"] = {"generated": stamp}
        return json.dumps(doc, indent=2, default=str) + "\n"
    head = [f"# config: {json.dumps(config, default=str)}"]
    if stamp:
        head.insert(0, f"# generated: {stamp}")
    if fmt == "plain" and outcome.plain is not None:
        return "\n".join(head + [outcome.plain]) + "\n"
    if outcome.table is None:
        body = json.dumps(outcome.data, indent=2, default=str)
        return "\n".join(head + [body]) + "\n"
    header, rows = outcome.table
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    else:
        buf.write(" ".join(header) + "\n")
        for r in rows:
            buf.write(" ".join(str(v) for v in r) + "\n")
    return "\n".join(head) + "\n" + buf.getvalue()


def _destination(a) -> Path | None:
    base = os.environ.get(OUTPUT_DIR_ENV)
    if a.output:
        p = Path(a.output)
        return p if p.is_absolute() or not base else Path(base) / p
    if base:
        return Path(base) / f"{a.command}.{a.format}"
    return None


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    fn, default_fmt, _ = COMMANDS[a.command]
    a.format = a.format or default_fmt
    try:
        outcome = fn(a)
    except ParameterError as e:
        print(f"kdescent: parameter error: {e}", file=sys.stderr)
        return EXIT_PARAM
    except NumericalError as e:
        print(f"kdescent: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except VerificationError as e:
        print(f"kdescent: verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFY
    text = render(outcome, a.format, _config(a), meta=not a.no_meta)
    dest = _destination(a)
    if dest is None:
        sys.stdout.write(text)
    else:
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(text)
        print(f"wrote {dest}", file=sys.stderr)
    return outcome.code


if __name__ == "__main__":
    sys.exit(main())
