from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.config import settings
from app.schemas.plan_schema import AllocationSequence, PlanScore
from app.schemas.predictor_schema import PredictorSpec
from app.schemas.preinit_schema import EffectivePlan

SOLVERS = ("dp", "bruteforce")
MODES = ("fluid", "requests", "both")


class RunConfig(BaseModel):
    """Configuración de una corrida (flags de la CLI > variables MIGSCHED_* > defaults)"""
    scenario: str
    predictor: PredictorSpec = Field(default_factory=PredictorSpec)
    solver: str = "dp"
    preinit: bool = True
    granularity: Optional[float] = None
    seed: Optional[int] = 0
    out: str = "./Output"
    literal_reconfiguration: bool = False
    workers: int = Field(1, ge=1)
    mode: str = "both"

    model_config = ConfigDict(frozen=True)

    @field_validator("solver")
    @classmethod
    def validate_solver(cls, v):
        if v not in SOLVERS:
            raise ValueError(f"Solver desconocido: '{v}' (opciones: {', '.join(SOLVERS)})")
        return v

    @field_validator("mode")
    @classmethod
    def validate_mode(cls, v):
        if v not in MODES:
            raise ValueError(f"Modo de simulación desconocido: '{v}'")
        return v

    @field_validator("predictor", mode="before")
    @classmethod
    def parse_predictor(cls, v):
        spec = PredictorSpec.parse(v) if isinstance(v, str) else v
        if isinstance(spec, PredictorSpec) and spec.kind == "ewma" and not 0 < (spec.alpha or 0) <= 1:
            raise ValueError(f"α debe estar en (0, 1] (recibido {spec.alpha})")
        return spec

    @property
    def wants_requests(self) -> bool:
        return self.mode in ("requests", "both")

    @classmethod
    def from_settings(cls, **overrides) -> "RunConfig":
        """Construye la configuración desde `settings` aplicando los flags explícitos"""
        values = {
            "scenario": settings.SCENARIO,
            "predictor": settings.PREDICTOR,
            "solver": settings.SOLVER,
            "preinit": settings.PREINIT,
            "granularity": settings.GRANULARITY,
            "seed": settings.SEED,
            "out": settings.OUT,
            "literal_reconfiguration": settings.EQ11_AS_PRINTED,
            "workers": settings.WORKERS,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        if values["scenario"] is None:
            raise ValueError("Falta --scenario (o MIGSCHED_SCENARIO)")
        return cls(**values)


class WindowPlan(BaseModel):
    """Plan de una ventana producido por un planificador"""
    window: int
    planner: str
    forecast: str
    plan: EffectivePlan
    planned_goodput: float
    score: PlanScore

    model_config = ConfigDict(frozen=True)

    @property
    def sequence(self) -> AllocationSequence:
        return self.plan.sequence
