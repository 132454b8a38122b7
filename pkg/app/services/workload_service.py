import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from app.config import settings
from app.exceptions import ScenarioError
from app.repositories.scenario_repository import ScenarioRepository, TraceRow
from app.schemas.catalog_schema import Catalog
from app.schemas.document_schema import ModelDocument, ScenarioDocument
from app.schemas.predictor_schema import ArrivalForecast
from app.schemas.workload_schema import (
    InferenceTrace, ModelProfile, ModelWindow, RetrainingSpec, Scenario, WindowProblem, WindowSpec,
    granularity_divides
)
from app.services.catalog_service import CatalogService

logger = logging.getLogger(__name__)

RETRAINING_LATENCY_FACTOR = 3
SLO_FACTOR = 2


# ======================================================================================
# REGLAS DEL PERFIL
# ======================================================================================

def derive_rt_table(
        profile: ModelProfile,
        volume: int,
        sizes: Optional[Sequence[int]] = None
) -> Dict[int, int]:
    """
    Tiempo de reentrenamiento por tamaño: RT[k] = ceil(3 · volume / capability[k]).

    Args:
        profile: Perfil del modelo
        volume: Cantidad de muestras de la ventana
        sizes: Tamaños ofrecidos por el catálogo (None = todos los perfilados)

    Returns:
        Diccionario tamaño → segundos, solo para tamaños ≥ L

    Raises:
        ScenarioError: Si volume ≤ 0
    """
    if volume <= 0:
        raise ScenarioError(f"El volumen de reentrenamiento debe ser > 0 (recibido {volume})",
                            code="volume-invalid")
    table = {}
    for size in sorted(profile.capability):
        if size < profile.min_deploy_gpcs or (sizes is not None and size not in sizes):
            continue
        capability = profile.capability[size]
        if capability <= 0:
            continue
        table[size] = max(1, math.ceil(RETRAINING_LATENCY_FACTOR * volume / capability - 1e-9))
    return table


def slo_target(profile: ModelProfile) -> float:
    """
    Objetivo de latencia del modelo: el doble de su latencia con la GPU completa.

    Raises:
        ScenarioError: Si latency_full ≤ 0
    """
    if profile.latency_full <= 0:
        raise ScenarioError(
            f"latency_full debe ser > 0 para '{profile.name}'",
            code="slo-undefined",
            field_path="latency_full"
        )
    return SLO_FACTOR * profile.latency_full


# ======================================================================================
# CARGA DE ESCENARIOS
# ======================================================================================

class ScenarioService:
    """
    Servicio de escenarios.
    Valida el documento, resuelve catálogo y traza y aplica el arrastre de accuracy.
    """

    def __init__(
            self,
            repository: Optional[ScenarioRepository] = None,
            catalog_service: Optional[CatalogService] = None
    ):
        self.repository = repository or ScenarioRepository()
        self.catalog_service = catalog_service or CatalogService()

    def load(self, path: Union[str, Path]) -> Scenario:
        """
        Carga un escenario completo.

        Raises:
            ScenarioError: Documento inválido (con ruta de campo), traza inconsistente
            CatalogError: Catálogo referenciado inválido
        """
        scenario_path = Path(path)
        raw = self.repository.read_document(scenario_path)
        try:
            doc = ScenarioDocument(**raw)
        except ValidationError as e:
            raise _scenario_error(e)

        base_dir = scenario_path.parent
        catalog_path = (base_dir / doc.catalog) if doc.catalog else Path(settings.DEFAULT_CATALOG)
        catalog = self.catalog_service.load(catalog_path)

        models = self._build_models(doc.models, doc.batch_size, catalog)
        windows = self._build_windows(doc, models, catalog)
        trace_path = base_dir / doc.trace
        trace = build_trace(self.repository.read_trace(trace_path), models, doc.window_size * len(windows))

        try:
            scenario = Scenario(
                name=doc.name,
                catalog=catalog,
                models=tuple(models),
                windows=tuple(windows),
                trace=trace,
                window_size=doc.window_size,
                granularity=doc.granularity,
                batch_size=doc.batch_size,
                catalog_path=str(catalog_path),
                trace_path=str(trace_path)
            )
        except ValidationError as e:
            raise _scenario_error(e)
        validate_granularity(scenario.window_size, scenario.granularity)

        logger.info(
            f"📦 Escenario cargado: {scenario.name} ({len(models)} modelos, "
            f"{scenario.window_count} ventanas de {scenario.window_size}s)"
        )
        return scenario

    @staticmethod
    def _build_models(documents: List[ModelDocument], batch_size: int, catalog: Catalog) -> List[ModelProfile]:
        models = []
        for index, document in enumerate(documents):
            try:
                profile = ModelProfile(**document.model_dump()).with_batch(batch_size)
            except ValidationError as e:
                raise _scenario_error(e, prefix=f"models.{index}")
            for size in catalog.sizes:
                if size >= profile.min_deploy_gpcs and size not in profile.capability:
                    raise ScenarioError(
                        f"Falta capability[{size}] para '{profile.name}'",
                        code="capability-missing",
                        field_path=f"models.{index}.capability"
                    )
            models.append(profile)
        return models

    @staticmethod
    def _build_windows(doc: ScenarioDocument, models: List[ModelProfile], catalog: Catalog) -> List[WindowSpec]:
        if doc.window_count is not None and doc.window_count != len(doc.windows):
            raise ScenarioError(
                f"window_count={doc.window_count} pero hay {len(doc.windows)} ventanas",
                code="window-count-mismatch",
                field_path="windows"
            )
        if not doc.windows:
            raise ScenarioError("El escenario necesita al menos una ventana", field_path="windows")

        names = {m.name for m in models}
        previous_post: Dict[str, float] = {}
        windows = []
        for w, window_doc in enumerate(doc.windows):
            unknown = sorted(set(window_doc.retraining) - names)
            if unknown:
                raise ScenarioError(
                    f"Modelo desconocido '{unknown[0]}'",
                    field_path=f"windows.{w}.retraining.{unknown[0]}"
                )
            specs = {}
            for profile in models:
                path = f"windows.{w}.retraining.{profile.name}"
                entry = window_doc.retraining.get(profile.name)
                if entry is None:
                    raise ScenarioError(f"Falta el reentrenamiento de '{profile.name}'", field_path=path)
                accuracy_pre = entry.accuracy_pre
                if accuracy_pre is None:
                    if profile.name not in previous_post:
                        raise ScenarioError(
                            "accuracy_pre es obligatorio en la primera ventana",
                            field_path=f"{path}.accuracy_pre"
                        )
                    accuracy_pre = previous_post[profile.name]
                try:
                    rt_table = entry.rt_table if entry.rt_table is not None else \
                        derive_rt_table(profile, entry.data_volume, catalog.sizes)
                    specs[profile.name] = RetrainingSpec(
                        data_volume=entry.data_volume,
                        rt_table=rt_table,
                        accuracy_pre=accuracy_pre,
                        accuracy_post=entry.accuracy_post
                    )
                except ValidationError as e:
                    raise _scenario_error(e, prefix=path)
                except ScenarioError as e:
                    e.field_path = f"{path}.data_volume"
                    raise
                previous_post[profile.name] = entry.accuracy_post
            windows.append(WindowSpec(index=w, retraining=specs))
        return windows


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Atajo funcional de ScenarioService().load"""
    return ScenarioService().load(path)


def build_trace(rows: List[TraceRow], models: List[ModelProfile], expected_length: int) -> InferenceTrace:
    """
    Arma la traza por modelo y verifica que cubra exactamente S × ventanas segundos.

    Raises:
        ScenarioError: trace-unknown-model, trace-duplicate-row o trace-length-mismatch
    """
    names = [m.name for m in models]
    seen: Dict[str, Dict[int, int]] = {name: {} for name in names}
    for second, model, count in rows:
        if model not in seen:
            raise ScenarioError(f"Modelo '{model}' desconocido en la traza",
                                code="trace-unknown-model", field_path="trace")
        if second in seen[model]:
            raise ScenarioError(f"Fila repetida ({second}, {model})",
                                code="trace-duplicate-row", field_path="trace")
        if count < 0:
            raise ScenarioError(f"Conteo negativo en ({second}, {model})",
                                code="trace-invalid", field_path="trace")
        seen[model][second] = count

    counts = {}
    for name in names:
        by_second = seen[name]
        if sorted(by_second) != list(range(expected_length)):
            raise ScenarioError(
                f"La traza de '{name}' tiene {len(by_second)} segundos, se esperaban {expected_length}",
                code="trace-length-mismatch",
                field_path="trace"
            )
        counts[name] = tuple(by_second[s] for s in range(expected_length))
    return InferenceTrace(counts=counts)


def _scenario_error(error: ValidationError, prefix: Optional[str] = None) -> ScenarioError:
    first = error.errors()[0]
    loc = ".".join(str(part) for part in first.get("loc", ()))
    field_path = ".".join(p for p in (prefix, loc) if p) or None
    return ScenarioError(str(first.get("msg", error)), field_path=field_path)


# ======================================================================================
# GRANULARIDAD
# ======================================================================================

def validate_granularity(window_size: int, granularity: float) -> None:
    """
    Raises:
        ScenarioError: Si la granularidad no divide S o no es entera ni 1/n
    """
    ok = granularity_divides(window_size, granularity)
    if granularity >= 1:
        ok = ok and abs(granularity - round(granularity)) < 1e-9
    else:
        ok = ok and abs(1 / granularity - round(1 / granularity)) < 1e-9
    if not ok:
        raise ScenarioError(
            f"granularity={granularity} no divide window_size={window_size}",
            code="granularity-invalid",
            field_path="granularity"
        )


def rescale_counts(counts: Sequence[int], granularity: float) -> List[int]:
    """
    Lleva conteos por segundo al eje de pasos.

    g ≥ 1 suma bloques de g segundos; g < 1 reparte cada segundo en 1/g
    pasos y los primeros se quedan con el resto.
    """
    if granularity >= 1:
        width = int(round(granularity))
        return [int(sum(counts[i:i + width])) for i in range(0, len(counts), width)]
    parts = int(round(1 / granularity))
    result = []
    for count in counts:
        base, remainder = divmod(int(count), parts)
        result.extend(base + (1 if i < remainder else 0) for i in range(parts))
    return result


def _arrival_series(arrivals: Any, model: str, length: int) -> List[int]:
    if arrivals is None:
        return [0] * length
    if isinstance(arrivals, ArrivalForecast):
        series = arrivals.series(model)
    else:
        series = arrivals.get(model, (0,) * length)
    series = list(series)[:length]
    if len(series) < length:
        raise ScenarioError(
            f"Llegadas de '{model}' con {len(series)} segundos, se esperaban {length}",
            code="trace-length-mismatch"
        )
    return [int(c) for c in series]


def rescale_window(
        scenario: Scenario,
        window: int = 0,
        arrivals: Union[ArrivalForecast, Mapping[str, Sequence[int]], None] = None,
        granularity: Optional[float] = None
) -> WindowProblem:
    """
    Construye el problema de planificación de una ventana en el eje de pasos.

    Capability se multiplica por g, RT pasa a ceil(RT/g) pasos y Ψ a Ψ/g pasos.

    Args:
        scenario: Escenario validado
        window: Índice de ventana
        arrivals: Llegadas por segundo de la ventana (predicción o traza real)
        granularity: Segundos por paso (None = la del escenario)
    """
    g = float(granularity if granularity is not None else scenario.granularity)
    validate_granularity(scenario.window_size, g)
    if window < 0 or window >= scenario.window_count:
        raise ScenarioError(f"Ventana {window} fuera de rango", code="window-out-of-range")

    steps = int(round(scenario.window_size / g))
    spec = scenario.windows[window]
    models = []
    for profile in scenario.models:
        retraining = spec.retraining[profile.name]
        series = _arrival_series(arrivals, profile.name, scenario.window_size)
        models.append(ModelWindow(
            name=profile.name,
            gflops=profile.gflops,
            min_deploy_gpcs=profile.min_deploy_gpcs,
            capability={k: v * g for k, v in profile.capability.items()},
            overhead_steps=profile.reconfig_overhead / g,
            rt_steps={k: max(1, math.ceil(v / g - 1e-9)) for k, v in retraining.rt_table.items()},
            accuracy_pre=retraining.accuracy_pre,
            accuracy_post=retraining.accuracy_post,
            arrivals=tuple(rescale_counts(series, g))
        ))
    return WindowProblem(
        window=window,
        steps=steps,
        step_seconds=g,
        catalog=scenario.catalog,
        models=tuple(models)
    )


# ======================================================================================
# SERIALIZACIÓN
# ======================================================================================

def serialize_scenario(scenario: Scenario) -> Tuple[Dict[str, Any], Dict[str, Any], List[TraceRow]]:
    """
    Documento del escenario, documento del catálogo y filas de la traza.

    El documento referencia `catalog.yaml` y `trace.csv` en el mismo directorio.
    """
    models = []
    for profile in scenario.models:
        entry = profile.model_dump()
        if not entry["capability_by_batch"]:
            entry.pop("capability_by_batch")
        models.append(entry)

    windows = []
    for spec in scenario.windows:
        windows.append({"retraining": {
            name: {
                "data_volume": r.data_volume,
                "rt_table": dict(r.rt_table),
                "accuracy_pre": r.accuracy_pre,
                "accuracy_post": r.accuracy_post,
            }
            for name, r in spec.retraining.items()
        }})

    document = {
        "name": scenario.name,
        "catalog": "catalog.yaml",
        "trace": "trace.csv",
        "window_size": scenario.window_size,
        "window_count": scenario.window_count,
        "granularity": scenario.granularity,
        "batch_size": scenario.batch_size,
        "models": models,
        "windows": windows,
    }
    catalog = scenario.catalog
    catalog_document = {
        "id": catalog.id,
        "gpc_count": catalog.gpc_count,
        "placement_rules": {size: list(starts) for size, starts in catalog.placement_rules.items()},
        "configurations": [
            {"id": config.id, "slots": [f"{s.size}@{s.slice_start}" for s in config.slots]}
            for config in catalog.configurations
        ],
    }
    rows = [
        (second, name, count)
        for name, series in scenario.trace.counts.items()
        for second, count in enumerate(series)
    ]
    return document, catalog_document, rows


def write_scenario(scenario: Scenario, directory: Union[str, Path]) -> Path:
    """Escribe escenario, catálogo y traza en `directory` y devuelve la ruta del escenario"""
    directory = Path(directory)
    document, catalog_document, rows = serialize_scenario(scenario)
    repository = ScenarioRepository()
    repository.write_document(directory / "catalog.yaml", catalog_document)
    repository.write_trace(directory / "trace.csv", rows)
    return repository.write_document(directory / "scenario.yaml", document)


def write_trace(path: Union[str, Path], counts: Mapping[str, Sequence[int]]) -> Path:
    """Escribe conteos por modelo en el formato `second,model,count`"""
    rows = [(second, name, int(c)) for name, series in counts.items() for second, c in enumerate(series)]
    return ScenarioRepository().write_trace(path, rows)


# ======================================================================================
# GENERADORES DE TRAZAS
# ======================================================================================

def generate_bursty_pair(
        seconds: int,
        period: int = 10,
        high: int = 60,
        low: int = 5,
        names: Tuple[str, str] = ("a", "b"),
        seed: int = 0,
        jitter: bool = False
) -> Dict[str, List[int]]:
    """
    Forma A: dos modelos con ráfagas cuadradas desfasadas media fase.

    Mientras uno recibe `high` req/s el otro recibe `low`. Con `jitter`
    cada segundo se muestrea de una Poisson con esa media.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(seconds)
    first_half = (t % period) < (period // 2)
    a = np.where(first_half, high, low)
    b = np.where(first_half, low, high)
    if jitter:
        a = rng.poisson(a)
        b = rng.poisson(b)
    return {names[0]: [int(v) for v in a], names[1]: [int(v) for v in b]}


def generate_uniform(
        seconds: int,
        rate: int,
        names: Sequence[str] = ("a",),
        seed: int = 0,
        jitter: bool = False
) -> Dict[str, List[int]]:
    """Forma U: tasa constante (o Poisson de media constante con `jitter`)"""
    rng = np.random.default_rng(seed)
    result = {}
    for name in names:
        series = rng.poisson(rate, size=seconds) if jitter else np.full(seconds, rate)
        result[name] = [int(v) for v in series]
    return result
