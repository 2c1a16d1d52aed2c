"""Command-line client for the solver service.

Talks HTTP to a running service when --server is given; otherwise it
mounts the service in-process, so every command works standalone.

Exit codes: 0 converged / verification passed, 1 configuration or schema
errors, 2 singular stall, horizon reached, or verification failure,
3 step failure or domain violation.
"""

import argparse
import asyncio
import json
import os
import sys
from pathlib import Path

import httpx

from . import __version__
from .errors import ConfigError

SCHEMA_TAG = "# olfkit-trajectory-v1"
COLUMNS = ("t", "V", "normS", "res_stat", "res_eq", "res_ineq", "normU", "sigma")

_EXIT_BY_STATUS = {
    "converged": 0,
    "singular_stall": 2,
    "horizon_reached": 2,
    "step_failure": 3,
    "domain_violation": 3,
}


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; the contract wants 1."""

    def error(self, message):
        raise ConfigError(message)


def _call(server, method, path, payload=None):
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            response = client.request(method, path, json=payload)
    else:
        from .service.app import app

        async def go():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://olfkit", timeout=None
            ) as client:
                return await client.request(method, path, json=payload)

        response = asyncio.run(go())
    if response.status_code == 422:
        detail = response.json().get("detail", "invalid request")
        if isinstance(detail, list):
            detail = "; ".join(
                f"{'.'.join(str(p) for p in item.get('loc', []))}: {item.get('msg', '')}"
                for item in detail
            )
        raise ConfigError(str(detail))
    response.raise_for_status()
    return response.json()


def _parse_law(tokens):
    """--law ft k=1 gamma=0.5 -> {"kind": "ft", "params": {...}}."""
    if not tokens:
        raise ConfigError("--law needs a kind (exp, ft, fxt, pt)")
    kind, params = tokens[0], {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise ConfigError(f"law parameter {tok!r} must look like key=value")
        key, _, value = tok.partition("=")
        try:
            params[key] = float(value)
        except ValueError:
            raise ConfigError(f"law parameter {key}={value!r} is not a number") from None
    return {"kind": kind, "params": params}


def _out_root():
    return Path(os.environ.get("OLFKIT_OUT_DIR", "runs"))


def _fmt(x):
    return f"{float(x):.17g}"


def write_trajectory_csv(path, solve_response):
    """One row per sample: fixed columns then the state entries z0..z{n-1}."""
    traj = solve_response["trajectory"]
    res = traj["residuals"]
    n = solve_response["state_dim"]
    meta = {
        "problem": solve_response["problem"],
        "dynamics": solve_response["dynamics"],
        "law": solve_response["law"],
        "eps": solve_response["eps"],
        "seed": solve_response.get("seed"),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        fh.write(f"{SCHEMA_TAG} {json.dumps(meta, sort_keys=True)}\n")
        fh.write(",".join(COLUMNS + tuple(f"z{i}" for i in range(n))) + "\n")
        zeros = [0.0] * len(traj["t"])
        cols = [
            traj["t"],
            traj["v"],
            traj["norm_s"],
            res.get("stat", zeros),
            res.get("eq", zeros),
            res.get("ineq", zeros),
            traj["norm_u"],
            traj["sigma"],
        ]
        for i in range(len(traj["t"])):
            row = [_fmt(col[i]) for col in cols] + [_fmt(x) for x in traj["z"][i]]
            fh.write(",".join(row) + "\n")


def read_trajectory_csv(path):
    """Returns (meta, columns dict with t/v/norm_u/sigma lists, z rows)."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith(SCHEMA_TAG + " "):
        raise ConfigError(f"{path}: not an olfkit trajectory (missing {SCHEMA_TAG!r})")
    meta = json.loads(lines[0][len(SCHEMA_TAG) + 1 :])
    header = lines[1].split(",")
    if tuple(header[: len(COLUMNS)]) != COLUMNS:
        raise ConfigError(f"{path}: unexpected columns {header[:len(COLUMNS)]}")
    n_state = len(header) - len(COLUMNS)
    data = {"t": [], "v": [], "norm_u": [], "sigma": []}
    z = []
    for line in lines[2:]:
        if not line.strip():
            continue
        parts = [float(p) for p in line.split(",")]
        if len(parts) != len(header):
            raise ConfigError(f"{path}: row with {len(parts)} fields, expected {len(header)}")
        data["t"].append(parts[0])
        data["v"].append(parts[1])
        data["norm_u"].append(parts[6])
        data["sigma"].append(parts[7])
        z.append(parts[len(COLUMNS) :])
    if n_state < 1 or not z:
        raise ConfigError(f"{path}: no state columns or no samples")
    return meta, data, z


def _report_lines(label, response):
    report = response["report"]
    law = response["law"]
    lines = [
        f"case:             {label}",
        f"status:           {report['status']}",
        f"law:              {law['kind']} {law['params']}",
        f"stop time:        {report['stop_time']:.6g}",
        f"settling bound:   "
        + ("none (asymptotic law)" if report["settling_bound"] is None
           else f"{report['settling_bound']:.6g} (within: {report['within_bound']})"),
        f"final ||S||:      {report['norm_s_final']:.3e}",
        f"V0 -> V:          {report['v_initial']:.6g} -> {report['v_final']:.3e}",
        f"decay violation:  {report['decay_violation']:.3e}",
        f"field evals:      {report['field_evals']}",
    ]
    if report["detail"]:
        lines.append(f"detail:           {report['detail']}")
    return lines


def _load_config_file(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def cmd_run(args):
    payload = _load_config_file(args.config) if args.config else {}
    if args.problem:
        payload["problem"] = args.problem
    if "problem" not in payload:
        raise ConfigError("a problem is required (--problem or --config)")
    if args.law:
        payload["law"] = _parse_law(args.law)
    if args.dynamics:
        payload["dynamics"] = args.dynamics
    for key, value in (
        ("eps", args.eps),
        ("tol_stat", args.tol_stat),
        ("rel_tol", args.rel_tol),
        ("abs_tol", args.abs_tol),
        ("max_time", args.max_time),
        ("pt_clip", args.pt_clip),
        ("samples", args.samples),
        ("seed", args.seed),
    ):
        if value is not None:
            payload[key] = value
    if args.z0:
        payload["z0"] = [float(v) for v in args.z0.split(",")]

    response = _call(args.server, "POST", "/solve", payload)
    label = f"{response['problem']}-{response['dynamics']}-{response['law']['kind']}"
    out = Path(args.out) if args.out else _out_root() / f"run-{label}.csv"
    write_trajectory_csv(out, response)
    report_path = out.with_suffix(".report.txt")
    lines = _report_lines(label, response)
    report_path.write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    print(f"trajectory: {out}")
    print(f"report:     {report_path}")
    return _EXIT_BY_STATUS.get(response["report"]["status"], 3)


def cmd_bench(args):
    payload = {"suite": args.suite, "include_trajectories": True}
    if args.samples is not None:
        payload["samples"] = args.samples
    if args.seed is not None:
        payload["seed"] = args.seed
    response = _call(args.server, "POST", "/bench", payload)
    out_dir = Path(args.out) if args.out else _out_root() / args.suite
    out_dir.mkdir(parents=True, exist_ok=True)
    header = f"{'case':34s} {'status':16s} {'stop':>12s} {'bound':>12s} {'violation':>11s}"
    print(header)
    print("-" * len(header))
    rows = []
    for case, solve in zip(response["cases"], response["solves"]):
        label = f"{case['problem']}-{case['dynamics']}-{case['law']['kind']}"
        write_trajectory_csv(out_dir / f"{label}.csv", solve)
        bound = case["settling_bound"]
        rows.append(
            f"{label:34s} {case['status']:16s} {case['stop_time']:12.6g} "
            f"{bound if bound is not None else float('nan'):12.6g} "
            f"{case['decay_violation']:11.3e}"
        )
        print(rows[-1])
    (out_dir / "summary.txt").write_text(header + "\n" + "\n".join(rows) + "\n")
    print(f"wrote {len(response['cases'])} trajectories to {out_dir}")
    if response["all_converged"]:
        print("all cases converged")
        return 0
    print("NOT all cases converged")
    return 2


def cmd_verify(args):
    meta, data, z = read_trajectory_csv(args.trajectory)
    law = _parse_law(args.law) if args.law else meta.get("law")
    payload = {
        "problem": args.problem or meta.get("problem"),
        "dynamics": args.dynamics or meta.get("dynamics"),
        "law": law,
        "eps": args.eps if args.eps is not None else meta.get("eps"),
        "tol": args.tol,
        "t": data["t"],
        "z": z,
        "v": data["v"],
        "norm_u": data["norm_u"],
        "sigma": data["sigma"],
    }
    if payload["problem"] is None or payload["law"] is None:
        raise ConfigError("trajectory header lacks problem/law; pass --problem/--law")
    response = _call(args.server, "POST", "/verify", payload)
    print(f"max decay violation: {response['max_violation']:.3e} (tolerance {args.tol:g})")
    if response["ok"]:
        print("verification passed")
        return 0
    failures = response["failures"]
    for failure in failures[:5]:
        print(f"FAIL {failure}")
    if len(failures) > 5:
        print(f"... and {len(failures) - 5} more failing samples")
    if response["bad_index"] is not None:
        print(f"first offending sample: {response['bad_index']}")
    return 2


def cmd_problems(args):
    infos = _call(args.server, "GET", "/problems")
    print(f"{'name':16s} {'encoding':14s} {'dims':22s} notes")
    for info in infos:
        dims = ",".join(f"{k}={v}" for k, v in info["dims"].items())
        print(f"{info['name']:16s} {info['encoding']:14s} {dims:22s} {info['notes']}")
    return 0


def cmd_serve(args):
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _add_common(parser):
    parser.add_argument("--server", help="base URL of a running service; default runs in-process")


def build_parser():
    parser = _Parser(prog="olfkit", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"olfkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve one case and export a trajectory CSV")
    run.add_argument("--problem", help="built-in problem name (see `olfkit problems`)")
    run.add_argument("--config", help="JSON file with request fields (flags override)")
    run.add_argument("--dynamics", choices=("hgd", "nd", "gd"))
    run.add_argument("--law", nargs="+", metavar=("KIND", "KEY=VALUE"),
                     help="law kind plus parameters, e.g. --law ft k=1 gamma=0.5")
    run.add_argument("--eps", type=float, help="complementarity smoothing")
    run.add_argument("--tol-stat", dest="tol_stat", type=float)
    run.add_argument("--rel-tol", dest="rel_tol", type=float)
    run.add_argument("--abs-tol", dest="abs_tol", type=float)
    run.add_argument("--max-time", dest="max_time", type=float)
    run.add_argument("--pt-clip", dest="pt_clip", type=float)
    run.add_argument("--samples", type=int)
    run.add_argument("--z0", help="comma-separated start state override")
    run.add_argument("--seed", type=int, help="recorded in outputs for provenance")
    run.add_argument("--out", help="trajectory CSV path")
    _add_common(run)
    run.set_defaults(func=cmd_run)

    bench = sub.add_parser("bench", help="run a benchmark matrix")
    bench.add_argument("suite", choices=("logsumexp12", "num4", "cournot4", "all"))
    bench.add_argument("--samples", type=int)
    bench.add_argument("--seed", type=int)
    bench.add_argument("--out", help="output directory")
    _add_common(bench)
    bench.set_defaults(func=cmd_bench)

    verify = sub.add_parser("verify", help="re-check a trajectory CSV against a law+dynamics")
    verify.add_argument("trajectory", help="CSV produced by `olfkit run`")
    verify.add_argument("--problem")
    verify.add_argument("--dynamics", choices=("hgd", "nd", "gd"))
    verify.add_argument("--law", nargs="+", metavar=("KIND", "KEY=VALUE"))
    verify.add_argument("--eps", type=float)
    verify.add_argument("--tol", type=float, default=1e-6)
    _add_common(verify)
    verify.set_defaults(func=cmd_verify)

    problems = sub.add_parser("problems", help="list built-in problems")
    _add_common(problems)
    problems.set_defaults(func=cmd_problems)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except httpx.HTTPError as exc:
        print(f"error: service request failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
