"""Command-line client for the estimation service.

Every subcommand builds a service request model and dispatches it either
in process (default) or to a running server (--server URL); both paths
exercise the same request/response contract.  Output follows the plain
text table formats of the library: `method,estimate` lines for estimates,
coefficient tables for approximations, `atom,weight` tables for measures,
`L,error` tables for scans, and the results CSV for sweeps.
"""

from __future__ import annotations

import argparse
import sys

import httpx

from .bench import ResultRow, parse_n_grid, write_results, format_results
from .core import DomainError, nats_to_bits, read_histogram
from .lowerbound import ConstructionError
from .polyapprox import RemezError, format_coeff_table_values
from .service import schemas
from .service import operations

_ROUTES = {
    "/estimate": (operations.estimate, schemas.EstimateResponse),
    "/remez": (operations.remez_op, schemas.RemezResponse),
    "/lowerbound/pair": (operations.lowerbound_pair, schemas.PairResponse),
    "/lowerbound/prior": (operations.lowerbound_prior, schemas.PriorResponse),
    "/lowerbound/tv": (operations.lowerbound_tv, schemas.TvResponse),
    "/lowerbound/scan": (operations.lowerbound_scan, schemas.ScanResponse),
    "/simulate": (operations.simulate, schemas.SimulateResponse),
}


class ServiceClient:
    def __init__(self, server: str | None):
        self._http = httpx.Client(base_url=server, timeout=600.0) if server else None

    def call(self, path: str, request):
        op, response_model = _ROUTES[path]
        if self._http is None:
            return op(request)
        resp = self._http.post(path, json=request.model_dump())
        if resp.status_code != 200:
            detail = resp.json().get("detail", resp.text) if resp.content else resp.text
            raise DomainError(f"{path} failed ({resp.status_code}): {detail}")
        return response_model.model_validate(resp.json())


def _estimator_options(args) -> schemas.EstimatorOptions:
    return schemas.EstimatorOptions(
        c0=args.c0,
        c1=args.c1,
        c2=args.c2,
        clamp_upper=not args.no_clamp_upper,
        adaptive=args.adaptive,
        adaptive_mode=args.adaptive_mode,
        split=args.split,
    )


def _add_estimator_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--c0", type=float, default=1.6, help="degree constant: L = floor(c0 log k)")
    parser.add_argument("--c1", type=float, default=3.5, help="approximation-interval constant")
    parser.add_argument("--c2", type=float, default=1.6, help="branch-threshold constant")
    parser.add_argument("--adaptive", action="store_true", help="replace log k by log n; clamp below only")
    parser.add_argument(
        "--adaptive-mode", choices=["drop_constant", "pin_origin"], default="drop_constant",
        help="how the zero-count term is forced to zero in adaptive mode",
    )
    parser.add_argument("--no-clamp-upper", action="store_true", help="skip the upper clamp at log k")
    parser.add_argument("--split", action="store_true", help="use a separate selection histogram")


def cmd_estimate(args, client: ServiceClient) -> int:
    h = read_histogram(args.input, k=args.k)
    counts_select = None
    if args.select_input:
        counts_select = [int(c) for c in read_histogram(args.select_input, k=args.k).counts]
    req = schemas.EstimateRequest(
        counts=[int(c) for c in h.counts],
        counts_select=counts_select,
        k=args.k,
        n=args.n,
        method=args.method,
        options=_estimator_options(args),
    )
    resp = client.call("/estimate", req)
    value = nats_to_bits(resp.estimate_nats) if args.bits else resp.estimate_nats
    print(f"{resp.method},{value:.17g}")
    return 0


def cmd_remez(args, client: ServiceClient) -> int:
    if args.degrees:
        lo_s, hi_s = args.degrees.split(":")
        degrees = range(int(lo_s), int(hi_s) + 1)
    else:
        degrees = [args.degree]
    tables = []
    for degree in degrees:
        req = schemas.RemezRequest(
            func=args.func,
            degree=degree,
            interval_a=args.interval_a,
            interval_b=args.interval_b,
            tol=args.tol,
            max_iters=args.max_iters,
        )
        resp = client.call("/remez", req)
        tables.append(
            format_coeff_table_values(
                resp.degree, resp.interval_a, resp.interval_b, resp.error, resp.coeffs
            )
        )
    text = "\n".join(tables)
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _measure_table(name: str, measure: schemas.MeasureModel) -> str:
    lines = [f"# {name}", "atom,weight"]
    for atom, weight in zip(measure.atoms, measure.weights):
        lines.append(f"{atom:.17g},{weight:.17g}")
    return "\n".join(lines) + "\n"


def cmd_lowerbound(args, client: ServiceClient) -> int:
    if args.emit == "pair":
        resp = client.call("/lowerbound/pair", schemas.PairRequest(order=args.L, eta=args.eta))
        sys.stdout.write(_measure_table("X", resp.X))
        sys.stdout.write(_measure_table("Xprime", resp.Xprime))
        print(f"# separation,{resp.separation:.17g}")
        print(f"# approx_error,{resp.approx_error:.17g}")
    elif args.emit == "prior":
        resp = client.call(
            "/lowerbound/prior", schemas.PriorRequest(order=args.L, eta=args.eta, alpha=args.alpha)
        )
        sys.stdout.write(_measure_table("U", resp.U))
        sys.stdout.write(_measure_table("Uprime", resp.Uprime))
        print(f"# lambda_max,{resp.lambda_max:.17g}")
    elif args.emit == "tv":
        resp = client.call(
            "/lowerbound/tv",
            schemas.TvRequest(order=args.L, eta=args.eta, alpha=args.alpha, scale=args.scale),
        )
        print("scale,mean_bound,tv")
        print(f"{resp.scale:.17g},{resp.mean_bound:.17g},{resp.tv:.17g}")
    else:
        l_values = [int(v) for v in args.L_values.split(",")] if args.L_values else [args.L]
        resp = client.call("/lowerbound/scan", schemas.ScanRequest(L_values=l_values, c=args.c))
        print("L,error")
        for row in resp.rows:
            print(f"{row.L},{row.error:.17g}")
    return 0


def cmd_simulate(args, client: ServiceClient) -> int:
    req = schemas.SimulateRequest(
        k=args.k,
        dists=[d.strip() for d in args.dists.split(",") if d.strip()],
        n_grid=list(parse_n_grid(args.n_grid)),
        trials=args.trials,
        methods=[m.strip() for m in args.methods.split(",") if m.strip()],
        sampling=args.sampling,
        seed=args.seed,
        options=_estimator_options(args),
        measure_wall_time=not args.no_wall_time,
        workers=args.threads,
    )
    resp = client.call("/simulate", req)
    rows = [
        ResultRow(dist=r.dist, n=r.n, method=r.method, rmse=r.rmse, bias=r.bias, std=r.std, wall_time=r.wall_time)
        for r in resp.rows
    ]
    if args.out:
        write_results(rows, args.out)
    else:
        sys.stdout.write(format_results(rows))
    return 0


def cmd_serve(args, _client) -> int:
    import uvicorn

    uvicorn.run("entrokit.service.app:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entrokit", description=__doc__)
    parser.add_argument("--server", default=None, help="URL of a running service; default runs in process")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate entropy from a histogram file")
    p.add_argument("--input", required=True, help="histogram file, `symbol_id,count` lines")
    p.add_argument("--select-input", default=None, help="selection histogram for --split")
    p.add_argument("--k", type=int, default=None, help="alphabet size (default: from file)")
    p.add_argument("--n", type=int, default=None, help="sample size (default: sum of counts)")
    p.add_argument("--method", choices=["poly", "plugin", "mm"], default="poly")
    p.add_argument("--bits", action="store_true", help="print the estimate in bits instead of nats")
    _add_estimator_flags(p)
    p.set_defaults(handler=cmd_estimate)

    p = sub.add_parser("remez", help="emit best-approximation coefficient tables")
    p.add_argument("--func", choices=["phi", "log"], default="phi")
    p.add_argument("--degree", type=int, default=18)
    p.add_argument("--degrees", default=None, help="inclusive degree range lo:hi, one table each")
    p.add_argument("--interval-a", type=float, default=0.0)
    p.add_argument("--interval-b", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--out", default=None, help="write tables to this file instead of stdout")
    p.set_defaults(handler=cmd_remez)

    p = sub.add_parser("lowerbound", help="moment-matched pairs, priors, mixture TV, error scans")
    p.add_argument("--L", type=int, default=10, help="matched order (approximation degree)")
    p.add_argument("--eta", type=float, default=0.01, help="left endpoint of the base interval")
    p.add_argument("--alpha", type=float, default=0.5, help="common mean after change of measure")
    p.add_argument("--emit", choices=["pair", "prior", "tv", "scan"], default="pair")
    p.add_argument("--scale", type=float, default=0.0, help="Poisson scale for --emit tv")
    p.add_argument("--L-values", default=None, help="comma list of L values for --emit scan")
    p.add_argument("--c", type=float, default=0.2, help="degree fraction for --emit scan")
    p.set_defaults(handler=cmd_lowerbound)

    p = sub.add_parser("simulate", help="run an RMSE sweep and write a results CSV")
    p.add_argument("--k", type=int, default=10_000)
    p.add_argument("--dists", default="uniform,zipf:1,zipf:0.5,mix")
    p.add_argument("--n-grid", required=True, help="comma list `100,300` or geometric `lo:hi:points`")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--methods", default="poly,plugin,mm")
    p.add_argument("--sampling", choices=["multinomial", "poissonized"], default="multinomial")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="results CSV path (default: stdout)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--no-wall-time", action="store_true", help="record 0.0 wall time for byte-stable output")
    _add_estimator_flags(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    client = ServiceClient(args.server)
    try:
        return args.handler(args, client)
    except (DomainError, ConstructionError, RemezError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
