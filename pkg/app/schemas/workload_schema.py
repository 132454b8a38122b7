from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.schemas.catalog_schema import Catalog

DEFAULT_WINDOW_SIZE = 200


class ModelProfile(BaseModel):
    """Perfil offline de un modelo: capacidad por tamaño de instancia, L y Ψ"""
    name: str
    gflops: float = Field(..., gt=0)
    min_deploy_gpcs: int = Field(..., ge=1)
    capability: Dict[int, float]
    latency_full: float = Field(..., ge=0)
    reconfig_overhead: float = Field(0.0, ge=0)
    capability_by_batch: Dict[int, Dict[int, float]] = Field(default_factory=dict)

    model_config = ConfigDict(frozen=True, extra="forbid")

    @field_validator("name")
    @classmethod
    def validate_name(cls, v):
        if not v or len(v.strip()) == 0 or ":" in v:
            raise ValueError("El nombre del modelo no puede estar vacío ni contener ':'")
        return v.strip()

    @model_validator(mode="after")
    def validate_capability(self):
        _check_capability_table(self.capability, self.min_deploy_gpcs)
        for table in self.capability_by_batch.values():
            _check_capability_table(table, self.min_deploy_gpcs)
        return self

    def capability_for(self, size: int) -> float:
        """Capacidad (req/s) de una instancia de `size` GPCs; 0 si no está perfilada"""
        return float(self.capability.get(size, 0.0))

    def with_batch(self, batch_size: int) -> "ModelProfile":
        """Perfil con la tabla de capacidad del tamaño de batch indicado"""
        if batch_size == 1 or batch_size not in self.capability_by_batch:
            return self
        return self.model_copy(update={"capability": dict(self.capability_by_batch[batch_size])})


def _check_capability_table(table: Dict[int, float], floor: int) -> None:
    previous = None
    for size in sorted(table):
        if size < 1 or size > 7:
            raise ValueError(f"capability: tamaño {size} fuera de 1..7")
        value = table[size]
        if value < 0:
            raise ValueError(f"capability[{size}] negativa")
        if size >= floor and value <= 0:
            raise ValueError(f"capability[{size}] debe ser > 0 para tamaños ≥ L={floor}")
        if previous is not None and value < previous:
            raise ValueError("capability debe ser no decreciente en el tamaño")
        previous = value


class RetrainingSpec(BaseModel):
    """Reentrenamiento de un modelo en una ventana"""
    data_volume: int = Field(..., gt=0)
    rt_table: Dict[int, int]
    accuracy_pre: float = Field(..., ge=0, le=1)
    accuracy_post: float = Field(..., ge=0, le=1)

    model_config = ConfigDict(frozen=True, extra="forbid")

    @field_validator("rt_table")
    @classmethod
    def validate_rt(cls, v):
        previous = None
        for size in sorted(v):
            if v[size] < 1:
                raise ValueError(f"rt_table[{size}] debe ser ≥ 1")
            if previous is not None and v[size] > previous:
                raise ValueError("rt_table debe ser no creciente en el tamaño")
            previous = v[size]
        return v


class InferenceTrace(BaseModel):
    """Llegadas por segundo (Recv) de cada modelo"""
    counts: Dict[str, Tuple[int, ...]]

    model_config = ConfigDict(frozen=True)

    @field_validator("counts")
    @classmethod
    def validate_counts(cls, v):
        for model, series in v.items():
            if any(c < 0 for c in series):
                raise ValueError(f"Conteos negativos en la traza de '{model}'")
        return v

    @property
    def length(self) -> int:
        return max((len(series) for series in self.counts.values()), default=0)

    def window(self, model: str, index: int, window_size: int) -> Tuple[int, ...]:
        start = index * window_size
        return self.counts[model][start:start + window_size]

    def prefix(self, seconds: int) -> "InferenceTrace":
        return InferenceTrace(counts={m: s[:seconds] for m, s in self.counts.items()})


class WindowSpec(BaseModel):
    """Parámetros de reentrenamiento de cada modelo en una ventana"""
    index: int = Field(..., ge=0)
    retraining: Dict[str, RetrainingSpec]

    model_config = ConfigDict(frozen=True)


class Scenario(BaseModel):
    """Escenario completo y validado"""
    name: str = "scenario"
    catalog: Catalog
    models: Tuple[ModelProfile, ...]
    windows: Tuple[WindowSpec, ...]
    trace: InferenceTrace
    window_size: int = Field(DEFAULT_WINDOW_SIZE, ge=2)
    granularity: float = Field(1.0, gt=0)
    batch_size: int = Field(1, ge=1)
    catalog_path: Optional[str] = None
    trace_path: Optional[str] = None

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_structure(self):
        if not self.models:
            raise ValueError("El escenario necesita al menos un modelo")
        names = [m.name for m in self.models]
        if len(set(names)) != len(names):
            raise ValueError("Nombres de modelo duplicados")
        if not granularity_divides(self.window_size, self.granularity):
            raise ValueError("granularity debe dividir window_size")
        return self

    @property
    def window_count(self) -> int:
        return len(self.windows)

    @property
    def model_names(self) -> List[str]:
        return [m.name for m in self.models]

    def model(self, name: str) -> ModelProfile:
        for profile in self.models:
            if profile.name == name:
                return profile
        raise KeyError(name)

    @property
    def steps_per_window(self) -> int:
        return int(round(self.window_size / self.granularity))


def granularity_divides(window_size: int, granularity: float) -> bool:
    """True si window_size / granularity es entero (con tolerancia de coma flotante)"""
    steps = window_size / granularity
    return abs(steps - round(steps)) < 1e-9 and round(steps) >= 1


class ModelWindow(BaseModel):
    """Datos de un modelo ya reescalados al eje de pasos de la ventana"""
    name: str
    gflops: float
    min_deploy_gpcs: int
    capability: Dict[int, float]
    overhead_steps: float
    rt_steps: Dict[int, int]
    accuracy_pre: float
    accuracy_post: float
    arrivals: Tuple[int, ...]

    model_config = ConfigDict(frozen=True)

    @property
    def overhead_fraction(self) -> float:
        """Fracción de capacidad perdida en un paso con reconfiguración: min(Ψ, 1)"""
        return min(self.overhead_steps, 1.0)


class WindowProblem(BaseModel):
    """Problema de planificación de una ventana en el eje de pasos"""
    window: int
    steps: int
    step_seconds: float
    catalog: Catalog
    models: Tuple[ModelWindow, ...]

    model_config = ConfigDict(frozen=True)

    def model(self, name: str) -> ModelWindow:
        for m in self.models:
            if m.name == name:
                return m
        raise KeyError(name)

    @property
    def model_names(self) -> List[str]:
        return [m.name for m in self.models]
