# ======================================================================================
# MÉTRICAS
# ======================================================================================
from typing import Dict, List, Optional

from pydantic import BaseModel, Field


def _fraction(numerator: float, denominator: float) -> float:
    """Fracción con la convención de verdad vacía (1.0) cuando el denominador es 0"""
    if denominator <= 0:
        return 1.0
    return min(max(numerator / denominator, 0.0), 1.0)


class JobMetrics(BaseModel):
    """Contadores y fracciones de un modelo (job)"""
    model: str
    received: float = 0.0
    served: float = 0.0
    timely: float = 0.0
    correct: float = 0.0
    valid: float = 0.0
    dropped: float = 0.0
    queued_end: float = 0.0
    reconfigurations: int = 0
    overhead_seconds: float = 0.0

    @property
    def goodput(self) -> float:
        return _fraction(self.valid, self.received)

    @property
    def slo_attainment(self) -> float:
        return _fraction(self.timely, self.received)

    @property
    def accuracy(self) -> float:
        return _fraction(self.correct, self.served)

    def merged(self, other: "JobMetrics") -> "JobMetrics":
        """Suma de contadores de dos ventanas del mismo job"""
        return JobMetrics(
            model=self.model,
            received=self.received + other.received,
            served=self.served + other.served,
            timely=self.timely + other.timely,
            correct=self.correct + other.correct,
            valid=self.valid + other.valid,
            dropped=self.dropped + other.dropped,
            queued_end=self.queued_end + other.queued_end,
            reconfigurations=self.reconfigurations + other.reconfigurations,
            overhead_seconds=self.overhead_seconds + other.overhead_seconds
        )

    def report_row(self) -> Dict[str, float]:
        return {
            "model": self.model,
            "received": self.received,
            "served": self.served,
            "timely": self.timely,
            "correct": self.correct,
            "valid": self.valid,
            "dropped": self.dropped,
            "queued_end": self.queued_end,
            "goodput": self.goodput,
            "slo_attainment": self.slo_attainment,
            "accuracy": self.accuracy,
            "reconfigurations": self.reconfigurations,
            "overhead_seconds": self.overhead_seconds,
        }


class WindowMetrics(BaseModel):
    window: int
    jobs: List[JobMetrics]


class Metrics(BaseModel):
    """Resultado de una simulación (fluida o por requests)"""
    mode: str
    jobs: List[JobMetrics]
    windows: List[WindowMetrics] = Field(default_factory=list)

    @property
    def received(self) -> float:
        return sum(job.received for job in self.jobs)

    @property
    def valid(self) -> float:
        return sum(job.valid for job in self.jobs)

    @property
    def system_goodput(self) -> float:
        return _fraction(self.valid, self.received)

    @property
    def reconfigurations(self) -> int:
        return sum(job.reconfigurations for job in self.jobs)

    @property
    def overhead_seconds(self) -> float:
        return sum(job.overhead_seconds for job in self.jobs)

    def job(self, model: str) -> Optional[JobMetrics]:
        for job in self.jobs:
            if job.model == model:
                return job
        return None


class GoodputReport(BaseModel):
    """Reporte estructurado de goodput por job y del sistema"""
    mode: str
    jobs: List[Dict] = Field(default_factory=list)
    system_goodput: float
    received: float
    valid: float
    reconfigurations: int
    overhead_seconds: float
    windows: List[Dict] = Field(default_factory=list)


class PlannerColumn(BaseModel):
    """Una columna de la comparación: un planificador simulado en ambos modos"""
    planner: str
    preinit: bool
    planned_goodput: float
    fluid: GoodputReport
    requests: Optional[GoodputReport] = None
    preinit_actions: int = 0


class ComparisonReport(BaseModel):
    scenario: str
    predictor: str
    solver: str
    granularity: float
    seed: Optional[int] = None
    columns: List[PlannerColumn]
