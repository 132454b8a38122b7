from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

DEFAULT_GPC_COUNT = 7

INFERENCE_SUFFIX = "infer"
RETRAINING_SUFFIX = "retrain"


def inference_task(model: str) -> str:
    """Identificador de la tarea de inferencia del modelo"""
    return f"{model}:{INFERENCE_SUFFIX}"


def retraining_task(model: str) -> str:
    """Identificador de la tarea de reentrenamiento del modelo"""
    return f"{model}:{RETRAINING_SUFFIX}"


def parse_task(task_id: str) -> Tuple[str, str]:
    """
    Separa un identificador de tarea en (modelo, tipo).

    Raises:
        ValueError: Si el identificador no termina en :infer o :retrain
    """
    model, _, kind = task_id.rpartition(":")
    if not model or kind not in (INFERENCE_SUFFIX, RETRAINING_SUFFIX):
        raise ValueError(f"Identificador de tarea inválido: '{task_id}'")
    return model, kind


def is_retraining(task_id: str) -> bool:
    return task_id.endswith(f":{RETRAINING_SUFFIX}")


Placement = Tuple[int, int]


class InstanceSlot(BaseModel):
    """Instancia GPU ubicada: `size` GPCs contiguos desde `slice_start`"""
    id: str
    size: int = Field(..., ge=1, le=DEFAULT_GPC_COUNT)
    slice_start: int = Field(..., ge=0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_range(self):
        if self.slice_start + self.size > DEFAULT_GPC_COUNT:
            raise ValueError(
                f"size-out-of-range: {self.size}@{self.slice_start} excede {DEFAULT_GPC_COUNT} GPCs"
            )
        return self

    @property
    def placement(self) -> Placement:
        """Identidad física de la instancia: (slice_start, size)"""
        return self.slice_start, self.size

    @property
    def slices(self) -> range:
        return range(self.slice_start, self.slice_start + self.size)

    def overlaps(self, other: "InstanceSlot") -> bool:
        return self.slice_start < other.slice_start + other.size and \
            other.slice_start < self.slice_start + self.size


class MigConfiguration(BaseModel):
    """Partición legal de la GPU en instancias disjuntas"""
    id: str
    slots: Tuple[InstanceSlot, ...]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_slots(self):
        ids = [slot.id for slot in self.slots]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate-slot-id: configuración '{self.id}'")
        for i, a in enumerate(self.slots):
            for b in self.slots[i + 1:]:
                if a.overlaps(b):
                    raise ValueError(
                        f"overlapping-slices: '{a.id}' y '{b.id}' en configuración '{self.id}'"
                    )
        if self.total_size > DEFAULT_GPC_COUNT:
            raise ValueError(f"size-out-of-range: configuración '{self.id}' suma {self.total_size} GPCs")
        return self

    @property
    def total_size(self) -> int:
        return sum(slot.size for slot in self.slots)

    @property
    def size_multiset(self) -> Tuple[int, ...]:
        return tuple(sorted((slot.size for slot in self.slots), reverse=True))

    def slot(self, slot_id: str) -> Optional[InstanceSlot]:
        for slot in self.slots:
            if slot.id == slot_id:
                return slot
        return None

    def free_slices(self) -> List[int]:
        """Slices que ninguna instancia de la configuración ocupa"""
        used = {s for slot in self.slots for s in slot.slices}
        return [s for s in range(DEFAULT_GPC_COUNT) if s not in used]


class Catalog(BaseModel):
    """Conjunto de configuraciones MIG soportadas (Λ)"""
    id: str = "custom"
    gpc_count: int = Field(DEFAULT_GPC_COUNT, ge=1, le=DEFAULT_GPC_COUNT)
    configurations: Tuple[MigConfiguration, ...]
    placement_rules: Dict[int, Tuple[int, ...]] = Field(default_factory=dict)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_configurations(self):
        ids = [config.id for config in self.configurations]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate-configuration-id")
        for config in self.configurations:
            if config.total_size > self.gpc_count:
                raise ValueError(f"size-out-of-range: configuración '{config.id}'")
            for slot in config.slots:
                if slot.slice_start + slot.size > self.gpc_count:
                    raise ValueError(f"size-out-of-range: configuración '{config.id}'")
        return self

    def get(self, config_id: str) -> Optional[MigConfiguration]:
        for config in self.configurations:
            if config.id == config_id:
                return config
        return None

    def index_of(self, config_id: str) -> int:
        for i, config in enumerate(self.configurations):
            if config.id == config_id:
                return i
        raise KeyError(config_id)

    @property
    def sizes(self) -> Tuple[int, ...]:
        """Tamaños de instancia ofrecidos por alguna configuración"""
        return tuple(sorted({slot.size for config in self.configurations for slot in config.slots}))

    @property
    def max_instance_size(self) -> int:
        return max((slot.size for config in self.configurations for slot in config.slots), default=0)


class Allocation(BaseModel):
    """Asignación tarea → instancias de una configuración en un segundo"""
    second: int = Field(..., ge=0)
    configuration_id: str
    assignments: Dict[str, FrozenSet[str]] = Field(default_factory=dict)

    model_config = ConfigDict(frozen=True)

    @field_validator("assignments")
    @classmethod
    def drop_empty(cls, v):
        return {task: frozenset(slots) for task, slots in v.items() if slots}

    def slots_of(self, task_id: str) -> FrozenSet[str]:
        return self.assignments.get(task_id, frozenset())

    def used_slot_ids(self) -> FrozenSet[str]:
        return frozenset(s for slots in self.assignments.values() for s in slots)

    def encoding(self) -> Tuple:
        """Codificación canónica usada para desempatar de forma determinista"""
        return allocation_encoding(self.configuration_id, self.assignments)


def allocation_encoding(configuration_id: str, assignments: Mapping[str, Iterable[str]]) -> Tuple:
    """Configuración y luego (tarea, slots ordenados) por tarea; las tareas sin slots no cuentan"""
    return (
        configuration_id,
        tuple(sorted((task, tuple(sorted(slots))) for task, slots in assignments.items() if slots))
    )


class DiffReport(BaseModel):
    """Diferencia entre dos asignaciones consecutivas"""
    flags: Dict[str, bool]
    weak_flags: Dict[str, bool] = Field(default_factory=dict)
    created: List[InstanceSlot] = Field(default_factory=list)
    destroyed: List[InstanceSlot] = Field(default_factory=list)

    @property
    def reconfigured_tasks(self) -> List[str]:
        return sorted(task for task, changed in self.flags.items() if changed)


class Violation(BaseModel):
    """Violación de una restricción; es un dato, no una excepción"""
    code: str
    family: str
    second: Optional[int] = None
    task: Optional[str] = None
    detail: str = ""

    model_config = ConfigDict(frozen=True)
