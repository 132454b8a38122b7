import logging
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from app.exceptions import PredictorError
from app.schemas.predictor_schema import ArrivalForecast, PredictorSpec
from app.schemas.workload_schema import InferenceTrace

logger = logging.getLogger(__name__)


def round_half_up(values: np.ndarray) -> np.ndarray:
    """Redondeo al entero más cercano, con .5 hacia arriba"""
    return np.floor(values + 0.5).astype(np.int64)


def predict_arrivals(
        kind: Union[PredictorSpec, str],
        history: InferenceTrace,
        actual_next: Optional[Mapping[str, Sequence[int]]],
        horizon: int
) -> ArrivalForecast:
    """
    Predice las llegadas por segundo de la próxima ventana.

    Args:
        kind: `oracle`, `persistence` o `ewma:<α>` (o un PredictorSpec)
        history: Prefijo de la traza hasta el inicio de la ventana
        actual_next: Llegadas reales de la ventana (solo las usa oracle)
        horizon: Segundos a predecir

    Returns:
        ArrivalForecast con un conteo entero no negativo por segundo

    Raises:
        PredictorError: Historia insuficiente, α fuera de rango o falta actual_next
    """
    spec = PredictorSpec.parse(kind) if isinstance(kind, str) else kind
    if horizon < 1:
        raise PredictorError(f"Horizonte inválido: {horizon}")

    if spec.kind == "oracle":
        if actual_next is None:
            raise PredictorError("El predictor oracle necesita las llegadas reales", code="oracle-without-actual")
        counts = {}
        for model, series in actual_next.items():
            if len(series) < horizon:
                raise PredictorError(f"Llegadas reales de '{model}' más cortas que el horizonte")
            counts[model] = tuple(int(c) for c in series[:horizon])
        return ArrivalForecast(horizon=horizon, counts=counts)

    if spec.kind == "persistence":
        counts = {}
        for model, series in history.counts.items():
            windows = _full_windows(series, horizon, model)
            counts[model] = tuple(int(c) for c in windows[-1])
        return ArrivalForecast(horizon=horizon, counts=counts)

    alpha = spec.alpha if spec.alpha is not None else 0.5
    if not 0 < alpha <= 1:
        raise PredictorError(f"α debe estar en (0, 1] (recibido {alpha})", code="alpha-out-of-range")
    counts = {}
    for model, series in history.counts.items():
        windows = _full_windows(series, horizon, model)
        smoothed = windows[0].astype(float)
        for window in windows[1:]:
            smoothed = alpha * window + (1 - alpha) * smoothed
        forecast = round_half_up(smoothed)
        assert (forecast >= 0).all()
        counts[model] = tuple(int(c) for c in forecast)
    return ArrivalForecast(horizon=horizon, counts=counts)


def _full_windows(series: Sequence[int], horizon: int, model: str) -> np.ndarray:
    """Ventanas completas de la historia, alineadas al final (la más reciente última)"""
    count = len(series) // horizon
    if count < 1:
        raise PredictorError(
            f"Historia insuficiente para '{model}': {len(series)}s < {horizon}s",
            code="insufficient-history"
        )
    data = np.asarray(series[len(series) - count * horizon:], dtype=np.int64)
    return data.reshape(count, horizon)
