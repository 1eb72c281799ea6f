"""Command-line entry point.

A thin client over the HTTP service: every subcommand builds a request,
posts it to the service (in-process by default, or a remote server via
--server), and formats the JSON response as plain text or CSV.

Exit codes: 0 success, 1 usage error, 2 configuration error,
3 numerical failure (solver non-convergence).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields

import httpx

from .config import ConfigError, load_config
from .mtd import MtdParams

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1 instead of argparse's 2
        raise UsageError(f"{message}\n{self.format_usage()}")


class CliFailure(Exception):
    def __init__(self, exit_code: int, message: str):
        super().__init__(message)
        self.exit_code = exit_code


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=300.0)
    # In-process mode: drive the ASGI app directly, no socket involved.
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service import app

    return TestClient(app)


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code in (200,):
        return response.json()
    try:
        body = response.json()
    except ValueError:
        body = {}
    message = body.get("message") or body.get("detail") or response.text
    if response.status_code == 409:
        raise CliFailure(EXIT_NUMERICAL, f"{message}")
    if response.status_code in (400, 422):
        raise CliFailure(EXIT_CONFIG, f"{message}")
    raise CliFailure(EXIT_CONFIG, f"HTTP {response.status_code}: {message}")


def _params_payload(args: argparse.Namespace) -> dict:
    config = load_config(getattr(args, "config", None))
    params = config.params
    for override in getattr(args, "set", None) or []:
        if "=" not in override:
            raise UsageError(f"--set expects key=value, got {override!r}")
        key, _, value = override.partition("=")
        key = key.strip()
        if key not in {f.name for f in fields(MtdParams)}:
            raise UsageError(f"unknown parameter {key!r} in --set")
        try:
            params = params.replace(**{key: float(value)})
        except ValueError as exc:
            raise CliFailure(EXIT_CONFIG, str(exc)) from None
    return {name: getattr(params, name) for name in (f.name for f in fields(MtdParams))}


def _emit(args: argparse.Namespace, text: str) -> None:
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _cmd_solve(args, client) -> int:
    data = _post(client, "/solve", {"params": _params_payload(args)})
    lines = [f"converged in {data['iterations']} iterations (delta {data['final_delta']:.3e})"]
    for state in ("N", "T", "E", "B"):
        lines.append(f"{state}: value={_fmt(data['values'][state])} optimal={data['policy'][state]}")
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_sweep(args, client) -> int:
    payload = {
        "params": _params_payload(args),
        "parameter": args.param,
        "start": args.start,
        "stop": args.stop,
        "step": args.step,
        "calibrate": args.calibrate,
    }
    if args.scale_base is not None:
        payload["scale_base"] = args.scale_base
    data = _post(client, "/sweep", payload)
    rows = ["cost_pct,V_wait_E,V_defend_E,V_reset_E,opt_N,opt_T,opt_E,opt_B"]
    for pt in data["points"]:
        q = pt["q_values"]["E"]
        rows.append(",".join([
            _fmt(pt["fraction"]),
            _fmt(q["Wait"]), _fmt(q["Defend"]), _fmt(q["Reset"]),
            pt["optimal"]["N"], pt["optimal"]["T"], pt["optimal"]["E"], pt["optimal"]["B"],
        ]))
    _emit(args, "\n".join(rows) + "\n")
    return EXIT_OK


def _cmd_turning_point(args, client) -> int:
    payload = {
        "params": _params_payload(args),
        "parameter": args.param,
        "state": args.state,
        "lo": args.lo,
        "hi": args.hi,
        "tol": args.tol,
    }
    if args.scale_base is not None:
        payload["scale_base"] = args.scale_base
    data = _post(client, "/turning-point", payload)
    line = ",".join([
        data["state"], data["from_action"], data["to_action"],
        _fmt(data["bracket_low"]), _fmt(data["bracket_high"]),
    ])
    _emit(args, line + "\n")
    return EXIT_OK


def _phase_csv(data: dict) -> str:
    rows = ["x_pct,y_pct,opt_action"]
    for iy, fy in enumerate(data["y_fractions"]):
        for ix, fx in enumerate(data["x_fractions"]):
            rows.append(f"{_fmt(fx)},{_fmt(fy)},{data['actions'][iy][ix]}")
    return "\n".join(rows) + "\n"


def _cmd_phase(args, client) -> int:
    payload = {
        "params": _params_payload(args),
        "x_parameter": args.x,
        "y_parameter": args.y,
        "state": args.state,
        "resolution": args.resolution,
    }
    if args.scale_base is not None:
        payload["scale_base"] = args.scale_base
    data = _post(client, "/phase", payload)
    _emit(args, _phase_csv(data))
    return EXIT_OK


def _cmd_case_study(args, client) -> int:
    overrides = {}
    for override in args.set or []:
        if "=" not in override:
            raise UsageError(f"--set expects key=value, got {override!r}")
        key, _, value = override.partition("=")
        overrides[key.strip()] = float(value)
    payload = {"preset": args.preset, "overrides": overrides, "resolution": args.resolution}
    data = _post(client, "/case-study", payload)
    _emit(args, _phase_csv(data))
    return EXIT_OK


def _cmd_mc_eval(args, client) -> int:
    payload = {
        "params": _params_payload(args),
        "state": args.state,
        "episodes": args.episodes,
        "seed": args.seed,
    }
    if args.horizon is not None:
        payload["horizon"] = args.horizon
    data = _post(client, "/mc-eval", payload)
    _emit(args, (
        f"state {data['state']}: mean_return={_fmt(data['mean_return'])} "
        f"stderr={_fmt(data['standard_error'])} "
        f"(episodes={data['episodes']}, horizon={data['horizon']}, seed={data['seed']})\n"
    ))
    return EXIT_OK


def _cmd_enumerate(args, client) -> int:
    data = _post(client, "/enumerate", {"params": _params_payload(args)})
    lines = [f"{data['n_policies']} deterministic policies"]
    for state in ("N", "T", "E", "B"):
        lines.append(f"envelope {state}: {_fmt(data['envelope'][state])}")
    if data["simultaneously_optimal"]:
        best = data["best_policy"]
        lines.append("best: " + " ".join(f"{s}={best[s]}" for s in ("N", "T", "E", "B")))
        if len(data["ties"]) > 1:
            lines.append(f"note: {len(data['ties'])} policies tie for the optimum")
    else:
        lines.append("no single policy attains the envelope at every state")
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_serve(args, _client_unused) -> int:
    import uvicorn

    uvicorn.run("mtdpolicy.service:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="mtdpolicy", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a single parameter")
        p.add_argument("--server", help="base URL of a running service (default: in-process)")
        p.add_argument("--out", help="write output to a file instead of stdout")

    p = sub.add_parser("solve", help="solve the model and print values and optimal actions")
    common(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("sweep", help="1D cost sweep, CSV output")
    common(p)
    p.add_argument("--param", default="cost_defend")
    p.add_argument("--from", dest="start", type=float, default=0.05)
    p.add_argument("--to", dest="stop", type=float, default=1.0)
    p.add_argument("--step", type=float, default=0.025)
    p.add_argument("--scale-base", type=float, default=None)
    p.add_argument("--calibrate", action="store_true",
                   help="calibrate the percentage base before sweeping")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("turning-point", help="bisect for a policy switch")
    common(p)
    p.add_argument("--param", default="cost_defend")
    p.add_argument("--state", default="E")
    p.add_argument("--lo", type=float, default=0.05)
    p.add_argument("--hi", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=0.005)
    p.add_argument("--scale-base", type=float, default=None)
    p.set_defaults(func=_cmd_turning_point)

    p = sub.add_parser("phase", help="2D policy phase diagram, CSV output")
    common(p)
    p.add_argument("--x", default="cost_defend")
    p.add_argument("--y", default="cost_exploit")
    p.add_argument("--state", default="E")
    p.add_argument("--resolution", type=int, default=41)
    p.add_argument("--scale-base", type=float, default=None)
    p.set_defaults(func=_cmd_phase)

    p = sub.add_parser("case-study", help="preset phase diagram, CSV output")
    common(p)
    p.add_argument("preset", choices=["decoy", "scit"])
    p.add_argument("--resolution", type=int, default=41)
    p.set_defaults(func=_cmd_case_study)

    p = sub.add_parser("mc-eval", help="Monte Carlo return estimate for the optimal policy")
    common(p)
    p.add_argument("--state", default="E")
    p.add_argument("--episodes", type=int, default=100_000)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_mc_eval)

    p = sub.add_parser("enumerate", help="exhaustive deterministic-policy enumeration")
    common(p)
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "serve":
            return args.func(args, None)
        with _client(getattr(args, "server", None)) as client:
            return args.func(args, client)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CliFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
