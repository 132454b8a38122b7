from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.catalog_schema import InstanceSlot
from app.schemas.plan_schema import AllocationSequence


class PreinitAction(BaseModel):
    """Creación anticipada de una instancia del paso siguiente sobre slices libres"""
    fire_second: int = Field(..., ge=0)
    target: InstanceSlot
    covers_tasks: Tuple[str, ...] = ()

    model_config = ConfigDict(frozen=True)


class HiddenTransition(BaseModel):
    """(tarea, paso) cuyo overhead quedó oculto por pre-inicialización"""
    task: str
    second: int

    model_config = ConfigDict(frozen=True)


class EffectivePlan(BaseModel):
    """Plan con el overhead efectivo Ψ_eff ya ajustado por pre-inicialización"""
    sequence: AllocationSequence
    actions: List[PreinitAction] = Field(default_factory=list)
    hidden: Tuple[HiddenTransition, ...] = ()

    model_config = ConfigDict(frozen=True)

    def overhead(self, task: str, second: int, base: float) -> float:
        """Ψ_eff de la tarea en el paso: 0 si la transición quedó oculta, Ψ en otro caso"""
        for item in self.hidden:
            if item.task == task and item.second == second:
                return 0.0
        return base

    def hidden_set(self) -> set:
        return {(h.task, h.second) for h in self.hidden}

    @classmethod
    def plain(cls, sequence: AllocationSequence, actions: Optional[List[PreinitAction]] = None) -> "EffectivePlan":
        return cls(sequence=sequence, actions=actions or [])
