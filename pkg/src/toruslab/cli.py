"""`torus` command line: a thin client over the HTTP service.

By default requests go to the bundled FastAPI app in-process (no server
needed); set TORUS_SERVER_URL to talk to a deployed instance instead.
Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import asyncio
import csv
import io
import json
import os
import sys

import httpx

GRAMMAR = (
    "torus <subcommand> [--matrix STR | --lattice NAME | --r INT] [--t REAL] "
    "[--s REAL] [--n-min INT --n-max INT] [--config FILE] [--json|--csv] "
    "[--exact|--float]"
)


class _InProcessTransport(httpx.BaseTransport):
    """Sync bridge onto the bundled ASGI app, so the CLI stays a pure HTTP
    client whether or not a server is running."""

    def __init__(self, app):
        self._asgi = httpx.ASGITransport(app=app)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        async def call():
            resp = await self._asgi.handle_async_request(request)
            body = await resp.aread()
            await resp.aclose()
            return httpx.Response(resp.status_code, headers=resp.headers, content=body)

        return asyncio.run(call())


def _client() -> httpx.Client:
    url = os.environ.get("TORUS_SERVER_URL")
    if url:
        return httpx.Client(base_url=url, timeout=600.0)
    from .service.app import app

    return httpx.Client(transport=_InProcessTransport(app), base_url="http://torus", timeout=600.0)


def _json_15g(obj, indent=0) -> str:
    """JSON with floats rendered at 15 significant digits."""
    pad = " " * indent
    if isinstance(obj, float):
        return "null" if obj != obj or obj in (float("inf"), float("-inf")) else f"{obj:.15g}"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        items = ",\n".join(pad + "  " + _json_15g(v, indent + 2) for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{pad}  {json.dumps(str(k))}: {_json_15g(v, indent + 2)}' for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    return json.dumps(obj)


def _fmt_cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.15g}"
    if v is None:
        return ""
    return str(v)


def _emit(payload: dict, as_csv: bool) -> None:
    if not as_csv:
        print(_json_15g(payload))
        return
    rows = None
    for key in ("records", "rows", "eigenvalues"):
        if isinstance(payload.get(key), list):
            rows = payload[key]
            break
    out = io.StringIO()
    writer = csv.writer(out)
    if rows and isinstance(rows[0], dict):
        cols = list(rows[0].keys())
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_fmt_cell(row.get(c)) for c in cols])
    elif rows is not None:
        writer.writerow(["value"])
        for v in rows:
            writer.writerow([_fmt_cell(v)])
    else:
        writer.writerow(["key", "value"])
        for k, v in payload.items():
            writer.writerow([k, _fmt_cell(v)])
    sys.stdout.write(out.getvalue())


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torus",
        description="Spanning trees of discrete tori, heights of real tori.",
        epilog=GRAMMAR,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, matrix=False, lattice=False):
        if matrix:
            p.add_argument("--matrix", help="rows ';', entries ',' — e.g. '2,1;0,2'")
        if lattice:
            p.add_argument("--lattice", help="named lattice: square_r, hexagonal_A2, fcc_D3")
            p.add_argument("--r", type=int, help="dimension (square_r and c-const)")
        p.add_argument("--json", action="store_true", help="JSON output (default)")
        p.add_argument("--csv", action="store_true", help="CSV output")
        return p

    p = common(sub.add_parser("trees", help="exact/float spanning-tree count"), matrix=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--exact", action="store_true")
    group.add_argument("--float", dest="float_", action="store_true")

    common(sub.add_parser("spectrum", help="Laplacian eigenvalues"), matrix=True)

    p = common(sub.add_parser("theta", help="discrete theta, both branches"), matrix=True)
    p.add_argument("--t", type=float, required=True)

    common(sub.add_parser("height", help="log det* of a unit-volume real torus"),
           matrix=True, lattice=True)

    p = common(sub.add_parser("c-const", help="dimensional constant c_r"))
    p.add_argument("--r", type=int, required=True)

    p = common(sub.add_parser("identity", help="spectral log identity residual"), matrix=True)
    p.add_argument("--s", type=float, default=0.0)

    p = common(sub.add_parser("verify-theorem1", help="asymptotic expansion sweep"), matrix=True)
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--config", help="experiment file (runs server-side, persists a run dir)")

    common(sub.add_parser("bound", help="complexity upper bound check"), matrix=True)

    p = common(sub.add_parser("compare", help="hexagonal vs rectangular tree counts"))
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--config", help="experiment file with [sequence] and [sequence_b]")

    common(sub.add_parser("shortest-vector", help="shortest nonzero vector length"),
           matrix=True, lattice=True)
    return parser


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    resp = client.post(path, json=payload)
    if resp.status_code >= 400:
        try:
            detail = resp.json()
        except ValueError:
            detail = {"error": resp.text}
        raise SystemExit(_fail(detail))
    return resp.json()


def _fail(detail: dict) -> int:
    sys.stderr.write(_json_15g(detail) + "\n")
    return 1


def _selector(args) -> dict:
    return {
        "lattice": getattr(args, "lattice", None),
        "matrix": getattr(args, "matrix", None),
        "r": getattr(args, "r", None),
    }


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    as_csv = bool(getattr(args, "csv", False))
    with _client() as client:
        cmd = args.command
        if cmd == "trees":
            mode = "exact" if args.exact else ("float" if args.float_ else "auto")
            payload = _post(client, "/trees", {"matrix": args.matrix, "mode": mode})
        elif cmd == "spectrum":
            payload = _post(client, "/spectrum", {"matrix": args.matrix})
        elif cmd == "theta":
            payload = _post(client, "/theta", {"matrix": args.matrix, "t": args.t})
        elif cmd == "height":
            payload = _post(client, "/height", _selector(args))
        elif cmd == "c-const":
            payload = _post(client, "/c-const", {"r": args.r})
        elif cmd == "identity":
            payload = _post(client, "/identity", {"matrix": args.matrix, "s": args.s})
        elif cmd == "verify-theorem1":
            if args.config:
                payload = _run_config(client, args.config)
            else:
                if args.matrix is None or args.n_min is None or args.n_max is None:
                    parser.error("verify-theorem1 needs --config or --matrix with --n-min/--n-max")
                payload = _post(client, "/verify-theorem1", {
                    "sequence": {"kind": "scale", "base": args.matrix,
                                 "n_min": args.n_min, "n_max": args.n_max},
                })
        elif cmd == "bound":
            payload = _post(client, "/bound", {"matrix": args.matrix})
        elif cmd == "compare":
            if args.config:
                payload = _run_config(client, args.config)
            else:
                if args.n_min is None or args.n_max is None:
                    parser.error("compare needs --config or --n-min/--n-max")
                payload = _post(client, "/compare", {
                    "sequence_a": {"kind": "hexagonal_pq", "n_min": args.n_min, "n_max": args.n_max},
                    "sequence_b": {"kind": "rect_match", "n_min": args.n_min, "n_max": args.n_max},
                })
        elif cmd == "shortest-vector":
            payload = _post(client, "/shortest-vector", _selector(args))
        else:  # pragma: no cover - argparse enforces the enum
            parser.error(f"unknown subcommand {cmd}")
    _emit(payload, as_csv)
    return 0


def _run_config(client: httpx.Client, path: str) -> dict:
    try:
        text = open(path).read()
    except OSError as exc:
        raise SystemExit(_fail({"error": f"cannot read config: {exc}", "kind": "config"}))
    return _post(client, "/experiment", {"config": text})


def entrypoint():  # console_scripts hook
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
