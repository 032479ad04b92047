"""Command-line surface: evaluation, shift compilation/verification,
reduction demos, minimal-polynomial recovery, lower bounds, and Jones
evaluation.  All numeric output carries the exact literal first and a
decimal rendering second; runs are deterministic for fixed flags/seeds.

Exit codes: 0 success, 2 contract/precondition/parse errors,
3 verification failure.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction

import click

from .algebraic import AlgNum, as_algnum
from .graph import (
    MultiGraph,
    brute_force_pair,
    deletion_contraction_Z,
    graph_from_json,
    to_xy,
)
from .literals import LiteralError, format_literal, parse_literal, parse_rational
from .lattice import (
    MinPolyRecoveryError,
    minpoly_budget,
    minpoly_from_approx,
    sturm_isolate,
)
from . import jones as jones_mod
from . import reduction as red
from . import shifts as shifts_mod

EXIT_OK = 0
EXIT_CONTRACT = 2
EXIT_VERIFY = 3


def _decimal(a: AlgNum, digits: int = 12) -> str:
    a = as_algnum(a)
    box = a.enclosure(64)
    re_mid = (box.re.lo + box.re.hi) / 2
    im_mid = (box.im.lo + box.im.hi) / 2
    re_s = f"{float(re_mid):.{digits}g}"
    if im_mid == 0 and a.is_real():
        return re_s
    sign = "+" if im_mid >= 0 else "-"
    return f"{re_s}{sign}{abs(float(im_mid)):.{digits}g}i"


def _render(a) -> dict:
    a = as_algnum(a)
    return {"exact": format_literal(a), "decimal": _decimal(a)}


def _emit(payload: dict, fmt: str):
    if fmt == "json":
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for key in sorted(payload):
            click.echo(f"{key}: {payload[key]}")


def _load_graph(path: str) -> MultiGraph:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"cannot read graph {path}: {exc}")
    return graph_from_json(obj)


class _Fail(Exception):
    def __init__(self, code, message):
        self.code, self.message = code, message


@click.group(help=__doc__)
@click.option("--format", "fmt", type=click.Choice(["json", "table"]),
              default="json", show_default=True)
@click.pass_context
def cli(ctx, fmt):
    ctx.obj = {"fmt": fmt}


# ---------------------------------------------------------------------- tutte


@cli.group(help="Partition-function evaluation.")
def tutte():
    pass


@tutte.command("eval")
@click.option("--graph", "graph_path", required=True, type=click.Path())
@click.option("--q", "q_lit", required=True,
              help="literal, e.g. rat:3 or alg:...")
@click.option("--gamma", "gamma_lit", default=None,
              help="override every edge weight with this literal")
@click.pass_context
def tutte_eval(ctx, graph_path, q_lit, gamma_lit):
    G = _load_graph(graph_path)
    q = parse_literal(q_lit)
    if gamma_lit is not None:
        gamma = parse_literal(gamma_lit)
        G = G.with_weights({lab: gamma for lab in G.weight_table})
    Z = deletion_contraction_Z(G, q)
    _emit({"Z": _render(Z)}, ctx.obj["fmt"])


@tutte.command("ratio")
@click.option("--graph", "graph_path", required=True, type=click.Path())
@click.option("--q", "q_lit", required=True)
@click.option("--gamma", "gamma_lit", default=None)
@click.pass_context
def tutte_ratio(ctx, graph_path, q_lit, gamma_lit):
    G = _load_graph(graph_path)
    if G.terminals is None:
        raise click.ClickException("the graph file must declare terminals")
    q = parse_literal(q_lit)
    if gamma_lit is not None:
        gamma = parse_literal(gamma_lit)
        G = G.with_weights({lab: gamma for lab in G.weight_table})
    pair = brute_force_pair(G, q)
    if pair.z_st.is_zero():
        raise click.ClickException("Z_st = 0: the ratio is undefined")
    _emit({"ratio": _render(pair.z_s_split_t / pair.z_st)},
          ctx.obj["fmt"])


# ---------------------------------------------------------------------- shift


@cli.group(help="Certified weight shifts.")
def shift():
    pass


@shift.command("build")
@click.option("--q", "q_lit", required=True)
@click.option("--y", "y_lit", required=True, help="source y-coordinate")
@click.option("--target-y", "target_lit", required=True,
              help="real rational target y-coordinate")
@click.option("--bits", type=int, default=12, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.pass_context
def shift_build(ctx, q_lit, y_lit, target_lit, bits, out_path):
    q = parse_literal(q_lit)
    y = parse_literal(y_lit)
    target = parse_rational(target_lit)
    source = to_xy(q, y - AlgNum.from_rational(1))
    cert = shifts_mod.full_approx_shift(source, target, bits)
    obj = shifts_mod.certificate_to_json(cert)
    if out_path:
        with open(out_path, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
        _emit({"written": out_path, "size": cert.size,
               "trace": list(cert.trace)}, ctx.obj["fmt"])
    else:
        _emit({"certificate": obj}, ctx.obj["fmt"])


@shift.command("verify")
@click.argument("cert_path", type=click.Path())
@click.pass_context
def shift_verify(ctx, cert_path):
    try:
        with open(cert_path) as fh:
            obj = json.load(fh)
        cert = shifts_mod.certificate_from_json(obj)
    except (OSError, json.JSONDecodeError, LiteralError, ValueError,
            KeyError) as exc:
        raise click.ClickException(f"cannot load certificate: {exc}")
    res = shifts_mod.verify_certificate(cert)
    _emit({"ok": res.ok, "message": res.message,
           "error_bound": None if res.error_bound is None
           else str(res.error_bound)}, ctx.obj["fmt"])
    if not res.ok:
        raise _Fail(EXIT_VERIFY, "certificate verification failed")


# --------------------------------------------------------------------- reduce


def _parse_oracle(text: str) -> red.OracleSpec:
    if text == "honest":
        return red.OracleSpec()
    if text.startswith("noisy:"):
        return red.OracleSpec(backing="exact_with_noise",
                              seed=int(text.split(":", 1)[1]))
    raise click.ClickException(
        f"unknown oracle {text!r}; use honest or noisy:SEED")


@cli.group(help="Oracle-driven reduction demos.")
def reduce():
    pass


@reduce.command("demo")
@click.option("--graph", "graph_path", required=True, type=click.Path())
@click.option("--q", "q_txt", required=True, help="rational, e.g. 3 or 1/2")
@click.option("--gamma1", required=True, help="oracle-side weight")
@click.option("--gamma2", required=True, help="target weight (positive)")
@click.option("--rho", type=int, default=None,
              help="thickening power (default: minimal admissible)")
@click.option("--oracle", "oracle_txt", default="honest", show_default=True)
@click.pass_context
def reduce_demo(ctx, graph_path, q_txt, gamma1, gamma2, rho, oracle_txt):
    G = _load_graph(graph_path)
    q = parse_rational(q_txt)
    g1 = parse_rational(gamma1)
    g2 = parse_rational(gamma2)
    spec = _parse_oracle(oracle_txt)
    if q > 1:
        regime = "q>1"
    elif 0 < q < 1:
        regime = "0<q<1"
    elif q < 0:
        regime = "q<0"
    else:
        raise click.ClickException("q must avoid {0, 1}")
    if rho is None:
        rho = (red.ThickeningPlan.for_graph(q, g2, G).rho
               if q < 0 else 1)
    gamma = (g2 + 1) ** rho - 1

    counter = {"queries": 0}

    def provider(H):
        oracle = red.SimulatedOracle(spec)
        ratio = red.compute_ratio(oracle, H, rho, regime, q=q,
                                  gamma1=g1, gamma2=g2)
        counter["queries"] += oracle.query_count
        return ratio

    Z = red.ratio_to_exact(provider, G, q=q, gamma=gamma)
    payload = {
        "regime": regime,
        "rho": rho,
        "gamma": str(gamma),
        "oracle_queries": counter["queries"],
        "Z": _render(Z),
    }
    if G.terminals is not None:
        payload["ratio"] = _render(provider(
            MultiGraph(G.vertex_count, G.edges, G.terminals,
                       G.weight_table)))
    _emit(payload, ctx.obj["fmt"])


# -------------------------------------------------------------------- minpoly


@cli.command("minpoly")
@click.argument("action", type=click.Choice(["recover"]))
@click.option("--approx", required=True, help="rational approximation")
@click.option("--degree", type=int, required=True)
@click.option("--height", required=True, help="usual-height bound")
@click.pass_context
def minpoly(ctx, action, approx, degree, height):
    value = parse_rational(approx)
    budget = minpoly_budget(degree, parse_rational(height))
    try:
        poly = minpoly_from_approx(value, budget)
    except MinPolyRecoveryError as exc:
        raise _Fail(EXIT_VERIFY, f"recovery failed: {exc}")
    _emit({
        "poly_low_to_high": [int(c) for c in poly],
        "bits": budget.bits,
        "real_root_intervals": [[str(a), str(b)]
                                for a, b in sturm_isolate(poly)],
    }, ctx.obj["fmt"])


# ---------------------------------------------------------------------- bound


@cli.command("bound")
@click.argument("action", type=click.Choice(["lower"]))
@click.option("--q", "q_lit", required=True)
@click.option("--gamma", "gamma_lit", required=True)
@click.option("--size", type=int, default=None,
              help="also report C^-size for this graph size")
@click.pass_context
def bound(ctx, action, q_lit, gamma_lit, size):
    q = parse_literal(q_lit)
    gamma = parse_literal(gamma_lit)
    C = red.lower_bound_constant(q, gamma)
    payload = {"C": str(C)}
    if size is not None:
        payload["C_pow_minus_size"] = str(Fraction(1) / C ** size)
    _emit(payload, ctx.obj["fmt"])


# ---------------------------------------------------------------------- jones


@cli.group(help="Jones polynomial core evaluation.")
def jones():
    pass


@jones.command("eval")
@click.option("--graph", "graph_path", required=True, type=click.Path())
@click.option("--t", "t_lit", required=True)
@click.pass_context
def jones_eval(ctx, graph_path, t_lit):
    G = _load_graph(graph_path)
    t = parse_literal(t_lit)
    try:
        val = jones_mod.jones_core(G, t)
    except jones_mod.JonesEvalError as exc:
        raise click.ClickException(str(exc))
    _emit({"T(G;-t,-1/t)": _render(val),
           "q": _render(jones_mod.induced_q(t))}, ctx.obj["fmt"])


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except _Fail as exc:
        click.echo(exc.message, err=True)
        return exc.code
    except click.ClickException as exc:
        exc.show()
        return EXIT_CONTRACT
    except click.exceptions.Abort:
        return EXIT_CONTRACT
    except (LiteralError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
