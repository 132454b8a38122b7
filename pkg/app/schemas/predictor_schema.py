from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

PREDICTOR_KINDS = ("oracle", "persistence", "ewma")


class PredictorSpec(BaseModel):
    """Predictor elegido con `--predictor oracle|persistence|ewma:<α>`"""
    kind: str = "oracle"
    alpha: Optional[float] = None

    model_config = ConfigDict(frozen=True)

    @field_validator("kind")
    @classmethod
    def validate_kind(cls, v):
        if v not in PREDICTOR_KINDS:
            raise ValueError(f"Predictor desconocido: '{v}' (opciones: {', '.join(PREDICTOR_KINDS)})")
        return v

    @classmethod
    def parse(cls, text: str) -> "PredictorSpec":
        """Parsea `oracle`, `persistence` o `ewma:<α>`"""
        kind, _, arg = text.strip().partition(":")
        if kind == "ewma":
            try:
                alpha = float(arg) if arg else 0.5
            except ValueError:
                raise ValueError(f"α inválido en '{text}'")
            return cls(kind=kind, alpha=alpha)
        if arg:
            raise ValueError(f"El predictor '{kind}' no acepta parámetros")
        return cls(kind=kind)

    def label(self) -> str:
        return f"ewma:{self.alpha:g}" if self.kind == "ewma" else self.kind


class ArrivalForecast(BaseModel):
    """Llegadas predichas por segundo para el horizonte de la próxima ventana"""
    horizon: int = Field(..., ge=1)
    counts: Dict[str, Tuple[int, ...]]

    model_config = ConfigDict(frozen=True)

    @field_validator("counts")
    @classmethod
    def validate_counts(cls, v):
        for model, series in v.items():
            if any(c < 0 for c in series):
                raise ValueError(f"Predicción negativa para '{model}'")
        return v

    def series(self, model: str) -> Tuple[int, ...]:
        return self.counts.get(model, (0,) * self.horizon)
