import json
import logging
import time
import uuid
from typing import Callable, Dict, Optional

from starlette.middleware.base import BaseHTTPMiddleware
from starlette.requests import Request
from starlette.responses import Response

logger = logging.getLogger(__name__)

# Campos del cuerpo que identifican una corrida de planificación
RUN_FIELDS = ("path", "window", "solver", "predictor", "granularity", "preinit")

QUIET_PREFIXES = ("/docs", "/redoc", "/openapi.json", "/favicon.ico")


class LoggingMiddleware(BaseHTTPMiddleware):
    """
    Una línea de log por request, con la corrida que pidió.

    Cada request recibe un id (header X-Request-ID) y el tiempo de servicio
    en milisegundos (header X-Elapsed-Ms). Si el cuerpo trae un escenario,
    la línea incluye ventana, solver y predictor para poder cruzarla con los
    logs de los servicios.
    """

    async def dispatch(self, request: Request, call_next: Callable) -> Response:
        if request.url.path.startswith(QUIET_PREFIXES):
            return await call_next(request)

        request_id = uuid.uuid4().hex
        request.state.request_id = request_id
        run = await self._run_fields(request) if request.method == "POST" else {}
        started = time.perf_counter()

        try:
            response = await call_next(request)
        except Exception:
            elapsed = (time.perf_counter() - started) * 1000
            logger.exception(f"💥 [{request_id[:8]}] {request.method} {request.url.path} falló tras {elapsed:.1f}ms")
            raise

        elapsed = (time.perf_counter() - started) * 1000
        response.headers["X-Request-ID"] = request_id
        response.headers["X-Elapsed-Ms"] = f"{elapsed:.1f}"
        self._report(request, response.status_code, elapsed, request_id, run)
        return response

    @staticmethod
    async def _run_fields(request: Request) -> Dict[str, object]:
        """Extrae del cuerpo JSON los campos de la corrida (vacío si no es JSON)"""
        raw = await request.body()
        if not raw:
            return {}
        try:
            body = json.loads(raw)
        except ValueError:
            logger.debug("Cuerpo no JSON, se omite el resumen de la corrida")
            return {}
        if not isinstance(body, dict):
            return {}
        return {field: body[field] for field in RUN_FIELDS if body.get(field) is not None}

    @staticmethod
    def _report(request: Request, status: int, elapsed: float, request_id: str,
                run: Optional[Dict[str, object]]) -> None:
        line = f"[{request_id[:8]}] {request.method} {request.url.path} → {status} ({elapsed:.1f}ms)"
        if run:
            line += " " + " ".join(f"{key}={value}" for key, value in run.items())

        if status >= 500:
            logger.error(f"❌ {line}")
        elif status >= 400:
            logger.warning(f"⚠️ {line}")
        else:
            logger.info(f"✅ {line}")
