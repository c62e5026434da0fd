"""Command-line client for the rtmkit service.

The CLI is a thin client: every subcommand builds one request, sends it to
the service, and writes the response body verbatim to ``--out`` (stdout by
default), so CLI output is byte-identical to service output.  By default
requests are dispatched in-process through an ASGI transport — no server,
no sockets, fully deterministic; ``--server URL`` targets a running
service (see the ``serve`` subcommand) instead.

Exit codes: 0 success; 1 usage or parameter errors; 2 data/ingestion or
resampling failures (and transport errors); 3 singular corrections
(estimated signal variance non-positive).
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path
from typing import Optional

import httpx

from .errors import EXIT_CODES, DataError, RtmError, UsageError
from .serialize import replicates_csv

__all__ = ["main", "build_parser"]

_STDOUT = "-"
_TIMEOUT = 600.0


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the contract wants 1."""

    def error(self, message: str):  # noqa: D102 - argparse override
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _parse_grid(text: str, flag: str) -> list[float]:
    """Parse ``lo:hi:step`` (inclusive, fp-dust-rounded) or ``a,b,c`` lists."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError("range syntax is lo:hi:step")
            lo, hi, step = (float(p) for p in parts)
            if step <= 0:
                raise ValueError("step must be > 0")
            if hi < lo:
                raise ValueError("hi must be >= lo")
            count = int((hi - lo) / step + 1e-9) + 1
            return [round(lo + k * step, 10) for k in range(count)]
        return [float(p) for p in text.split(",") if p.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"{flag}: cannot parse grid {text!r} ({exc})") from exc


def _add_params(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("population parameters (systolic defaults)")
    group.add_argument("--mu", type=float, default=141.0, help="trait mean (default 141)")
    group.add_argument("--sigma2", type=float, default=184.96, help="trait variance (default 184.96)")
    group.add_argument("--alpha", type=float, default=-20.0, help="constant change (default -20)")
    group.add_argument("--beta", type=float, default=0.0, help="differential effect (default 0)")
    group.add_argument("--nu2", type=float, default=100.0, help="innovation variance (default 100)")
    group.add_argument("--delta2", type=float, default=82.81, help="measurement-error variance (default 82.81)")


def _add_error_spec(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument(
        "--repeatability",
        type=float,
        default=None,
        metavar="R",
        help="measurement-error spec as a repeatability in (0, 1]",
    )
    group.add_argument(
        "--error-var",
        type=float,
        default=None,
        metavar="DELTA2",
        help="measurement-error spec as an absolute error variance",
    )


def _add_common(parser: argparse.ArgumentParser, *, seed: bool = True) -> None:
    if seed:
        parser.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    parser.add_argument(
        "--out", default=_STDOUT, metavar="PATH", help="output file (default: stdout)"
    )
    parser.add_argument(
        "--server",
        default=None,
        metavar="URL",
        help="send requests to a running service instead of in-process",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="rtmkit",
        description="Change-vs-baseline analysis under regression to the mean.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "population",
        help="closed-form population report (JSON) or slope sweep (CSV)",
        description="Population moments, slopes, null values and pitfall quantities.",
    )
    _add_params(p)
    p.add_argument("--sweep", action="store_true", help="emit the (beta, noise-ratio) sweep CSV")
    p.add_argument("--betas", default=None, metavar="GRID", help="sweep betas: a,b,c or lo:hi:step")
    p.add_argument(
        "--noise-ratios", default=None, metavar="GRID", help="sweep delta2/sigma2 grid (same syntax)"
    )
    _add_common(p, seed=False)

    p = sub.add_parser(
        "simulate",
        help="draw one seeded sample (CSV)",
        description="Draw one sample from the generative change model.",
    )
    _add_params(p)
    p.add_argument("--n", type=int, default=100, help="sample size (default 100)")
    p.add_argument(
        "--replicate-index", type=int, default=0, help="replicate stream index (default 0)"
    )
    p.add_argument(
        "--with-latent", action="store_true", help="include latent columns X1,X2 in the CSV"
    )
    _add_common(p)
    p.add_argument("--dump", dest="out", metavar="PATH", help="alias for --out")

    p = sub.add_parser(
        "sampling-dist",
        help="sampling distributions of the slope estimators (JSON)",
        description="Monte Carlo sampling distributions of crude/Berry/Blomqvist/true slopes.",
    )
    _add_params(p)
    p.add_argument("--n", type=int, default=100, help="sample size per replicate (default 100)")
    p.add_argument("--reps", type=int, default=1000, help="number of replicates (default 1000)")
    _add_error_spec(p)
    _add_common(p)

    p = sub.add_parser(
        "head-to-head",
        help="P(crude beats each correction) per beta (JSON or CSV)",
        description="Probability that the uncorrected slope lands closer to the true beta.",
    )
    _add_params(p)
    p.add_argument("--n", type=int, default=100, help="sample size per replicate (default 100)")
    p.add_argument("--reps", type=int, default=10_000, help="replicates per beta (default 10000)")
    p.add_argument(
        "--beta-grid",
        default="-2.0:0.5:0.1",
        metavar="GRID",
        help="beta grid: a,b,c or lo:hi:step (default -2.0:0.5:0.1)",
    )
    p.add_argument("--format", choices=("json", "csv"), default="json", help="output format")
    _add_error_spec(p)
    _add_common(p)

    p = sub.add_parser(
        "boot-demo",
        help="analyze one synthetic dataset end to end (JSON)",
        description="Draw a sample from a known population and run the full analysis on it.",
    )
    _add_params(p)
    p.add_argument("--n", type=int, default=100, help="sample size (default 100)")
    p.add_argument("--boot", type=int, default=10_000, help="bootstrap replicates (default 10000)")
    p.add_argument("--level", type=float, default=0.95, help="confidence level (default 0.95)")
    p.add_argument("--n-perm", type=int, default=999, help="permutations (default 999)")
    p.add_argument(
        "--known-r",
        type=float,
        default=None,
        metavar="R",
        help="repeatability for the null decision (default: the true value)",
    )
    _add_error_spec(p)
    _add_common(p)

    p = sub.add_parser(
        "analyze",
        help="full analysis of a paired-sample CSV (JSON)",
        description="Slopes, bootstrap intervals, repeatability interval, tests and decision.",
    )
    p.add_argument("--data", required=True, metavar="CSV", help="input CSV with columns x1,x2")
    p.add_argument("--boot", type=int, default=10_000, help="bootstrap replicates (default 10000)")
    p.add_argument("--level", type=float, default=0.95, help="confidence level (default 0.95)")
    p.add_argument("--n-perm", type=int, default=999, help="permutations (default 999)")
    p.add_argument(
        "--known-r", type=float, default=None, metavar="R", help="repeatability for the null decision"
    )
    p.add_argument(
        "--negate-change",
        action="store_true",
        help="report slopes for x1 - x2 (attrition convention)",
    )
    p.add_argument(
        "--dump-replicates",
        default=None,
        metavar="PATH",
        help="also write bootstrap replicates as CSV (column: slope)",
    )
    p.add_argument(
        "--replicates-method",
        choices=("crude", "blomqvist"),
        default="crude",
        help="which bootstrap to dump (default crude)",
    )
    p.add_argument(
        "--dump-adjusted",
        default=None,
        metavar="PATH",
        help="also write the adjusted-change vector as CSV (column: d_adj)",
    )
    p.add_argument(
        "--adjusted-method",
        choices=("berry", "blomqvist"),
        default="berry",
        help="which adjustment to dump (default berry)",
    )
    _add_error_spec(p)
    _add_common(p)

    p = sub.add_parser(
        "serve",
        help="run the HTTP service",
        description="Run the rtmkit FastAPI service under uvicorn.",
    )
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _post(server: Optional[str], path: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server.rstrip("/"), timeout=_TIMEOUT) as client:
            return client.post(path, json=payload)

    from .service.app import app  # deferred: keeps --help fast

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://rtmkit.internal", timeout=_TIMEOUT
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _write(out: str, content: bytes) -> None:
    if out == _STDOUT:
        sys.stdout.buffer.write(content)
        sys.stdout.buffer.flush()
    else:
        Path(out).write_bytes(content)


def _fail(response: httpx.Response) -> int:
    try:
        error = response.json()["error"]
        code, message = error["code"], error["message"]
    except Exception:
        code, message = "internal", f"HTTP {response.status_code}: {response.text[:500]}"
    print(f"rtmkit: error [{code}]: {message}", file=sys.stderr)
    return EXIT_CODES.get(code, 2)


def _deliver(response: httpx.Response, out: str) -> int:
    if response.status_code >= 400:
        return _fail(response)
    _write(out, response.content)
    return 0


def _params_payload(args: argparse.Namespace) -> dict:
    return {
        "mu": args.mu,
        "sigma2": args.sigma2,
        "alpha": args.alpha,
        "beta": args.beta,
        "nu2": args.nu2,
        "delta2": args.delta2,
    }


def _error_spec_payload(args: argparse.Namespace) -> Optional[dict]:
    if getattr(args, "repeatability", None) is not None:
        return {"repeatability": args.repeatability}
    if getattr(args, "error_var", None) is not None:
        return {"delta2": args.error_var}
    return None


def _cmd_population(args: argparse.Namespace) -> int:
    if args.sweep or args.betas is not None or args.noise_ratios is not None:
        payload: dict = {"params": _params_payload(args)}
        if args.betas is not None:
            payload["betas"] = _parse_grid(args.betas, "--betas")
        if args.noise_ratios is not None:
            payload["noise_ratios"] = _parse_grid(args.noise_ratios, "--noise-ratios")
        return _deliver(_post(args.server, "/population/sweep", payload), args.out)
    return _deliver(
        _post(args.server, "/population/report", {"params": _params_payload(args)}), args.out
    )


def _cmd_simulate(args: argparse.Namespace) -> int:
    payload = {
        "params": _params_payload(args),
        "n": args.n,
        "master_seed": args.seed,
        "replicate_index": args.replicate_index,
        "with_latent": args.with_latent,
    }
    return _deliver(_post(args.server, "/simulate", payload), args.out)


def _cmd_sampling_dist(args: argparse.Namespace) -> int:
    payload = {
        "params": _params_payload(args),
        "n": args.n,
        "replicates": args.reps,
        "master_seed": args.seed,
        "error_spec": _error_spec_payload(args),
    }
    return _deliver(_post(args.server, "/experiments/sampling-dist", payload), args.out)


def _cmd_head_to_head(args: argparse.Namespace) -> int:
    payload = {
        "params": _params_payload(args),
        "beta_grid": _parse_grid(args.beta_grid, "--beta-grid"),
        "n": args.n,
        "replicates": args.reps,
        "master_seed": args.seed,
        "error_spec": _error_spec_payload(args),
        "format": args.format,
    }
    return _deliver(_post(args.server, "/experiments/head-to-head", payload), args.out)


def _cmd_boot_demo(args: argparse.Namespace) -> int:
    payload = {
        "params": _params_payload(args),
        "n": args.n,
        "n_boot": args.boot,
        "level": args.level,
        "n_perm": args.n_perm,
        "master_seed": args.seed,
        "error_spec": _error_spec_payload(args),
        "known_r": args.known_r,
    }
    return _deliver(_post(args.server, "/experiments/boot-demo", payload), args.out)


def _cmd_analyze(args: argparse.Namespace) -> int:
    try:
        csv_text = Path(args.data).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {args.data}: {exc}") from exc

    payload = {
        "csv_text": csv_text,
        "n_boot": args.boot,
        "level": args.level,
        "n_perm": args.n_perm,
        "master_seed": args.seed,
        "error_spec": _error_spec_payload(args),
        "known_r": args.known_r,
        "negate_change": args.negate_change,
    }
    response = _post(args.server, "/analyze", payload)
    if response.status_code >= 400:
        return _fail(response)

    if args.dump_replicates is not None:
        report = json.loads(response.content)
        boot = report["bootstrap"].get(args.replicates_method)
        if boot is None:
            raise UsageError(
                f"no {args.replicates_method} bootstrap in the report "
                "(Blomqvist needs --repeatability or --error-var)"
            )
        Path(args.dump_replicates).write_bytes(
            replicates_csv(boot["replicates"]).encode("utf-8")
        )

    if args.dump_adjusted is not None:
        adjusted_payload = {
            "csv_text": csv_text,
            "method": args.adjusted_method,
            "error_spec": _error_spec_payload(args) if args.adjusted_method == "blomqvist" else None,
            "negate_change": args.negate_change,
        }
        adjusted = _post(args.server, "/estimators/adjusted-change", adjusted_payload)
        if adjusted.status_code >= 400:
            return _fail(adjusted)
        Path(args.dump_adjusted).write_bytes(adjusted.content)

    _write(args.out, response.content)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("rtmkit.service.app:app", host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "population": _cmd_population,
    "simulate": _cmd_simulate,
    "sampling-dist": _cmd_sampling_dist,
    "head-to-head": _cmd_head_to_head,
    "boot-demo": _cmd_boot_demo,
    "analyze": _cmd_analyze,
    "serve": _cmd_serve,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except RtmError as exc:
        print(f"rtmkit: error [{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except httpx.HTTPError as exc:
        print(f"rtmkit: error [transport]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
