"""Command-line client for the ilwsse service.

The client merges a JSON config file with command-line flags (flags win),
posts the request to the service and writes the response under ``--out``:
``report.json`` plus one CSV per table and one file per text record.  By
default the service runs in-process; ``--server URL`` targets a running one.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 a check failed.
"""

from __future__ import annotations

import json
import sys
import warnings
from pathlib import Path

import click

from .output import canonical_json, file_metadata, write_csv, write_json

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3


class CliUsage(Exception):
    pass


def _floats(text, name):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise CliUsage(f"--{name} expects comma-separated numbers, got {text!r}") from exc


def _profile_value(text):
    """A JSON profile spec file path, or ``NAME[:key=val,...]``."""
    path = Path(text)
    if text.endswith(".json") or path.is_file():
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliUsage(f"cannot read profile spec {text}: {exc}") from exc
        if not isinstance(data, dict):
            raise CliUsage("profile spec must be a JSON object")
        return data
    return text


def _load_config(path):
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliUsage(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise CliUsage("config must be a JSON object")
    if isinstance(data.get("profile"), str) and data["profile"].endswith(".json"):
        base = Path(path).parent
        data["profile"] = _profile_value(str(base / data["profile"]))
    return data


def _flag_overrides(command, opts) -> dict:
    """Translate the shared flags into request fields for ``command``.

    A flag that has no meaning for a command is passed through under its own
    name, so the service rejects it as an unknown field (exit code 1).
    """
    out = {}
    if opts["profile"] is not None:
        out["profile"] = _profile_value(opts["profile"])
    for key in ("delta", "eps", "N", "precision_bits", "tolerance"):
        if opts[key] is not None:
            out[key] = opts[key]
    if opts["grid"] is not None:
        out["n_x" if command == "simulate" else "grid"] = opts["grid"]
    if opts["t"] is not None:
        ts = _floats(opts["t"], "t")
        if command == "simulate":
            out["snapshots"] = ts
            out["t_end"] = max(ts)
        elif command == "ensemble":
            out["t"] = ts
        elif len(ts) == 1:
            out["t"] = ts[0]
        else:
            raise CliUsage(f"{command} takes a single --t value")
    if opts["x_range"] is not None:
        rng = _floats(opts["x_range"], "x-range")
        out["chi_range" if command == "mtp" else "x_range"] = rng
    for key in ("x", "nu", "criteria"):
        if opts.get(key) is not None:
            if key == "nu":
                out[key] = [v.strip() for v in opts[key].split(",")]
            elif key == "criteria":
                out[key] = [int(v) for v in _floats(opts[key], key)]
            else:
                out[key] = _floats(opts[key], key)
    return out


def _post(command, payload, server):
    if server:
        import httpx

        try:
            r = httpx.post(f"{server.rstrip('/')}/{command}", json=payload, timeout=None)
        except httpx.HTTPError as exc:
            raise CliUsage(f"cannot reach server {server}: {exc}") from exc
        return r.status_code, r.json()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient
    from .service.app import app

    r = TestClient(app, raise_server_exceptions=False).post(f"/{command}", json=payload)
    return r.status_code, r.json()


def _emit_error(kind, message, code, details=None):
    body = {"error": {"type": kind, "message": message, "exit_code": code, "details": details}}
    click.echo(json.dumps(body, sort_keys=True), err=True)
    return code


def _write_outputs(out_dir, command, body) -> list:
    config = body["config"]
    meta = file_metadata(command, config)
    out = Path(out_dir)
    written = [write_json(out / "report.json",
                          {"command": command, "config": config, "passed": body.get("passed"),
                           "report": body["report"]}, meta)]
    for table in body.get("tables", []):
        written.append(write_csv(out / f"{table['name']}.csv", table["columns"], table["rows"],
                                 {**meta, "table": table["name"]}))
    for name, text in body.get("records", {}).items():
        path = out / name
        path.write_text("# meta " + canonical_json(meta) + "\n" + text)
        written.append(path)
    return written


def run(command, opts) -> int:
    """Execute one command; returns the process exit code."""
    try:
        payload = {**_load_config(opts["config"]), **_flag_overrides(command, opts)}
        status, body = _post(command, payload, opts["server"])
    except CliUsage as exc:
        return _emit_error("UsageError", str(exc), EXIT_USAGE)
    if "error" in body:
        err = body["error"]
        return _emit_error(err["type"], err["message"], err["exit_code"], err.get("details"))
    if status != 200:
        return _emit_error("ServerError", f"unexpected HTTP status {status}", EXIT_NUMERIC)
    if opts["out"]:
        for path in _write_outputs(opts["out"], command, body):
            click.echo(str(path))
    else:
        click.echo(json.dumps({"passed": body.get("passed"), "report": body["report"]},
                              sort_keys=True, indent=2))
    return EXIT_VERIFY if body.get("passed") is False else EXIT_OK


_COMMON = [
    click.option("--config", type=click.Path(dir_okay=False), help="JSON config file."),
    click.option("--out", type=click.Path(file_okay=False), help="Output directory."),
    click.option("--server", help="Base URL of a running service (default: in-process)."),
    click.option("--profile", help="NAME[:key=val,...] or a JSON profile spec file."),
    click.option("--delta", type=float),
    click.option("--eps", type=float, help="Target eps (N = round(R0/(pi eps)))."),
    click.option("--N", "N", type=int, help="Number of solitons."),
    click.option("--precision-bits", "precision_bits", type=int),
    click.option("--t", help="Time, or comma-separated times."),
    click.option("--x-range", "x_range", help="a,b"),
    click.option("--grid", type=int),
    click.option("--tolerance", type=float),
]


def _command(name, extra=()):
    def deco(f):
        def callback(**opts):
            if opts.get("eps") is not None and opts.get("N") is not None and name != "mtp":
                sys.exit(_emit_error("UsageError", "--eps and --N are mutually exclusive",
                                     EXIT_USAGE))
            for key in ("x", "nu", "criteria"):
                opts.setdefault(key, None)
            sys.exit(run(name, opts))

        callback.__name__ = f.__name__
        callback.__doc__ = f.__doc__
        for opt in reversed(_COMMON + list(extra)):
            callback = opt(callback)
        return main.command(name)(callback)
    return deco


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Semiclassical soliton ensembles for the ILW equation."""


@_command("simulate")
def simulate():
    """Integrate the ILW equation with the split-step solver."""


@_command("scattering")
def scattering():
    """Modified scattering data and the Weyl law."""


@_command("ensemble")
def ensemble():
    """The N-soliton field from the partition function."""


@_command("equilibrium", [click.option("--x", help="Comma-separated x positions.")])
def equilibrium():
    """Check the variational conditions of the minimizing density."""


@_command("verify", [click.option("--criteria", help="Comma-separated criterion numbers.")])
def verify():
    """Run the acceptance checks."""


@_command("mtp", [click.option("--nu", help="Comma-separated nu values, e.g. -inf,-5/2.")])
def mtp():
    """Compare the turning-point solutions with their Airy asymptotics."""


@_command("compare")
def compare():
    """Ensemble field versus the PDE solution and the Burgers solution."""


@main.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve(host, port):
    """Run the HTTP service (requires the 'serve' extra)."""
    try:
        import uvicorn
    except ImportError:
        sys.exit(_emit_error("UsageError", "uvicorn is not installed", EXIT_USAGE))
    uvicorn.run("ilwsse.service.app:app", host=host, port=port)


def entry() -> int:
    """Console-script entry point; click usage errors exit with code 1."""
    try:
        main.main(standalone_mode=False)
    except click.exceptions.UsageError as exc:
        return _emit_error("UsageError", exc.format_message(), EXIT_USAGE)
    except click.exceptions.Abort:
        return _emit_error("UsageError", "aborted", EXIT_USAGE)
    except SystemExit as exc:
        return int(exc.code or 0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(entry())
