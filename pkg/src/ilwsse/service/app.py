"""FastAPI application: one POST endpoint per command plus ``GET /health``.

Errors are returned as ``{"error": {type, message, exit_code, details}}``.
The exit code is the one the command-line client should terminate with:
1 for bad input, 2 for numerical failure, 3 for a failed verification.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import IlwError, UsageError, ValidationError, VerificationFailure
from ..output import to_jsonable
from .handlers import HANDLERS, dispatch
from .schemas import CommandResponse, ErrorResponse

EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_VERIFY = 3


def error_payload(kind: str, message: str, exit_code: int, details=None) -> dict:
    return {"error": {"type": kind, "message": message, "exit_code": exit_code,
                      "details": to_jsonable(details)}}


def _error(status, kind, message, exit_code, details=None):
    return JSONResponse(status_code=status,
                        content=error_payload(kind, message, exit_code, details))


def _register(app: FastAPI, command: str, model):
    async def endpoint(request):
        return dispatch(command, request)

    endpoint.__annotations__ = {"request": model, "return": CommandResponse}

    endpoint.__name__ = f"post_{command}"
    app.post(f"/{command}", response_model=CommandResponse,
             responses={400: {"model": ErrorResponse}, 422: {"model": ErrorResponse},
                        500: {"model": ErrorResponse}})(endpoint)


def create_app() -> FastAPI:
    app = FastAPI(title="ilwsse", version=__version__)

    @app.get("/health")
    async def health():
        return {"status": "ok", "version": __version__, "commands": sorted(HANDLERS)}

    for command, (model, _) in HANDLERS.items():
        _register(app, command, model)

    @app.exception_handler(RequestValidationError)
    async def _validation(request: Request, exc: RequestValidationError):
        details = [{"loc": list(e.get("loc", ())), "msg": e.get("msg", "")}
                   for e in exc.errors()]
        return _error(400, "UsageError", "invalid request", EXIT_USAGE, details)

    @app.exception_handler(IlwError)
    async def _ilw(request: Request, exc: IlwError):
        if isinstance(exc, UsageError):
            return _error(400, "UsageError", str(exc), EXIT_USAGE)
        if isinstance(exc, ValidationError):
            # invalid input, such as a profile that breaks an admissibility invariant
            return _error(400, "ValidationError", str(exc), EXIT_USAGE)
        if isinstance(exc, VerificationFailure):
            return _error(422, "VerificationFailure", str(exc), EXIT_VERIFY, exc.report)
        return _error(422, type(exc).__name__, str(exc), EXIT_NUMERIC)

    @app.exception_handler(Exception)
    async def _unexpected(request: Request, exc: Exception):
        return _error(500, type(exc).__name__, str(exc), EXIT_NUMERIC)

    return app


app = create_app()
