# ======================================================================================
# MODELOS PYDANTIC (API REQUESTS / RESPONSES)
# ======================================================================================
from datetime import datetime
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from app.schemas.catalog_schema import Allocation, Violation
from app.schemas.plan_schema import PlanScore


class StatusResponse(BaseModel):
    """Respuesta del estado de la aplicación"""
    status: str
    timestamp: datetime
    default_catalog: str
    catalog_id: Optional[str] = None
    configurations: int = 0


class DiffRequest(BaseModel):
    """Dos asignaciones consecutivas a comparar"""
    prev: Allocation
    next: Allocation


class ViolationsResponse(BaseModel):
    ok: bool
    violations: List[Violation] = Field(default_factory=list)


class ScenarioValidateRequest(BaseModel):
    path: str
    granularity: Optional[float] = None


class ScenarioValidateResponse(BaseModel):
    ok: bool
    name: Optional[str] = None
    windows: int = 0
    code: Optional[str] = None
    message: Optional[str] = None


class PlanRequest(BaseModel):
    """Pedido de plan para una ventana"""
    path: str
    window: int = Field(0, ge=0)
    solver: str = "dp"
    predictor: str = "oracle"
    preinit: bool = True
    granularity: Optional[float] = None


class PreinitActionResponse(BaseModel):
    fire_second: int
    target: str
    covers_tasks: List[str]


class PlanResponse(BaseModel):
    """Plan de una ventana con su puntaje esperado"""
    window: int
    predictor: str
    allocations: List[Dict]
    score: PlanScore
    preinit_actions: List[PreinitActionResponse]
    hidden: List[Dict]


class CompareRequest(BaseModel):
    """Mismos campos que las flags de `compare`"""
    path: str
    solver: str = "dp"
    predictor: str = "oracle"
    preinit: bool = True
    granularity: Optional[float] = None
    seed: Optional[int] = 0
    literal_reconfiguration: bool = False
    workers: int = Field(1, ge=1)
