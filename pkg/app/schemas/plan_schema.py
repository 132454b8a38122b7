# ======================================================================================
# PLANES Y MODELO ILP
# ======================================================================================
import math
from collections import Counter
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.catalog_schema import Allocation


class AllocationSequence(BaseModel):
    """Φ: una asignación por paso de la ventana"""
    window: int = Field(0, ge=0)
    allocations: Tuple[Allocation, ...]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_seconds(self):
        for i, alloc in enumerate(self.allocations):
            if alloc.second != i:
                raise ValueError(f"sequence-shape: el paso {i} tiene second={alloc.second}")
        return self

    def __len__(self) -> int:
        return len(self.allocations)

    def encoding(self) -> Tuple:
        return tuple(alloc.encoding() for alloc in self.allocations)


class ScoreEntry(BaseModel):
    """Desglose de un paso para una tarea de inferencia"""
    second: int
    task: str
    arrivals: float
    capability: float
    loss: float
    throughput: float
    completion: int
    goodput: float

    model_config = ConfigDict(frozen=True)


class PlanScore(BaseModel):
    """Goodput esperado de un plan y su desglose por paso y tarea"""
    total: float
    entries: List[ScoreEntry] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_total(self):
        if abs(self.total - math.fsum(e.goodput for e in self.entries)) > 1e-9:
            raise ValueError("El total no coincide con la suma del desglose")
        return self

    def by_task(self, task: str) -> List[ScoreEntry]:
        return [e for e in self.entries if e.task == task]


# ==================== MODELO LP ====================

class LpVariable(BaseModel):
    name: str
    family: str
    kind: str = "continuous"
    lower: float = 0.0
    upper: Optional[float] = None


class LpConstraint(BaseModel):
    name: str
    family: str
    terms: List[Tuple[str, float]]
    sense: str
    rhs: float


class PlanModelSummary(BaseModel):
    variables: int
    constraints: int
    variables_by_family: Dict[str, int]
    constraints_by_family: Dict[str, int]
    big_m: int
    literal_reconfiguration: bool


class PlanModel(BaseModel):
    """Modelo ILP de una ventana (variables, restricciones y objetivo)"""
    window: int
    steps: int
    big_m: int
    literal_reconfiguration: bool = False
    variables: List[LpVariable] = Field(default_factory=list)
    constraints: List[LpConstraint] = Field(default_factory=list)
    objective: List[Tuple[str, float]] = Field(default_factory=list)
    task_aliases: Dict[str, str] = Field(default_factory=dict)

    def summary(self) -> PlanModelSummary:
        var_families = Counter(v.family for v in self.variables)
        con_families = Counter(c.family for c in self.constraints)
        return PlanModelSummary(
            variables=len(self.variables),
            constraints=len(self.constraints),
            variables_by_family=dict(sorted(var_families.items())),
            constraints_by_family=dict(sorted(con_families.items())),
            big_m=self.big_m,
            literal_reconfiguration=self.literal_reconfiguration
        )

    def unused_variables(self) -> List[str]:
        """Variables que no aparecen en ninguna restricción"""
        used = {name for c in self.constraints for name, _ in c.terms}
        return [v.name for v in self.variables if v.name not in used]
