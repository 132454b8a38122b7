# ======================================================================================
# DOCUMENTOS DE ENTRADA (YAML)
# ======================================================================================
# Estructura literal de los archivos de catálogo y escenario. Las claves
# desconocidas se rechazan (extra="forbid").
import re
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

SLOT_PATTERN = re.compile(r"^\s*(\d+)\s*@\s*(\d+)\s*$")


def parse_slot_token(token: str) -> Tuple[int, int]:
    """
    Parsea un par `size@slice_start`.

    Raises:
        ValueError: Si el token no respeta la gramática
    """
    match = SLOT_PATTERN.match(str(token))
    if not match:
        raise ValueError(f"Instancia inválida '{token}' (se espera size@slice_start)")
    return int(match.group(1)), int(match.group(2))


class ConfigurationDocument(BaseModel):
    id: str
    slots: List[str]

    model_config = ConfigDict(extra="forbid")

    @field_validator("id")
    @classmethod
    def validate_id(cls, v):
        if not v or len(str(v).strip()) == 0:
            raise ValueError("El id de la configuración no puede estar vacío")
        return str(v).strip()

    @field_validator("slots", mode="before")
    @classmethod
    def coerce_slots(cls, v):
        if not isinstance(v, list) or not v:
            raise ValueError("slots debe ser una lista no vacía de size@slice_start")
        return [str(item) for item in v]


class CatalogDocument(BaseModel):
    id: str = "custom"
    gpc_count: int = 7
    placement_rules: Dict[int, List[int]] = Field(default_factory=dict)
    configurations: List[ConfigurationDocument]

    model_config = ConfigDict(extra="forbid")


class ModelDocument(BaseModel):
    name: str
    gflops: float
    min_deploy_gpcs: int
    capability: Dict[int, float]
    latency_full: float
    reconfig_overhead: float = 0.0
    capability_by_batch: Dict[int, Dict[int, float]] = Field(default_factory=dict)

    model_config = ConfigDict(extra="forbid")


class RetrainingDocument(BaseModel):
    data_volume: int
    rt_table: Optional[Dict[int, int]] = None
    accuracy_pre: Optional[float] = None
    accuracy_post: float

    model_config = ConfigDict(extra="forbid")


class WindowDocument(BaseModel):
    retraining: Dict[str, RetrainingDocument]

    model_config = ConfigDict(extra="forbid")


class ScenarioDocument(BaseModel):
    name: str = "scenario"
    catalog: Optional[str] = None
    trace: str
    window_size: int = 200
    window_count: Optional[int] = None
    granularity: float = 1.0
    batch_size: int = 1
    models: List[ModelDocument]
    windows: List[WindowDocument]

    model_config = ConfigDict(extra="forbid")
