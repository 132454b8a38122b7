# ======================================================================================
# SIMULADOR
# ======================================================================================
# Dos modos sobre la traza real:
# - fluid: la misma aritmética que evaluate_plan, con overhead > 1 paso
#   arrastrado a los pasos siguientes; cada request servido cuenta como
#   accuracy-valid en esperanza.
# - requests: cola FIFO por modelo, deadline por request y acierto
#   muestreado con un generador con semilla.
import logging
import math
from collections import deque
from typing import Deque, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from app.exceptions import InfeasiblePlanError, MigSchedError
from app.schemas.metrics_schema import GoodputReport, JobMetrics, Metrics, WindowMetrics
from app.schemas.workload_schema import InferenceTrace, Scenario, WindowProblem
from app.services.plan_evaluation_service import PlanLike, PlanTimeline, check_problem_feasible, split_plan
from app.services.workload_service import rescale_window, slo_target

logger = logging.getLogger(__name__)

TraceLike = Union[InferenceTrace, Mapping[str, Sequence[int]], None]
CSV_HEADER = ("window", "model", "goodput", "slo", "acc", "reconfigs")
EPS = 1e-9


# ==================== AUXILIARES ====================

def window_arrivals(trace: TraceLike, scenario: Scenario, window: int) -> Dict[str, Sequence[int]]:
    """Llegadas reales por segundo de la ventana"""
    if trace is None:
        trace = scenario.trace
    if isinstance(trace, InferenceTrace):
        return {name: trace.window(name, window, scenario.window_size) for name in scenario.model_names}
    return dict(trace)


def _prepare(plan: PlanLike, trace: TraceLike, scenario: Scenario, window: Optional[int], granularity):
    sequence, effective = split_plan(plan)
    window = sequence.window if window is None else window
    problem = rescale_window(scenario, window, window_arrivals(trace, scenario, window), granularity)
    violations = check_problem_feasible(sequence, problem)
    if violations:
        raise InfeasiblePlanError(
            f"No se puede simular un plan infactible: {violations[0].code} en el paso {violations[0].second}",
            violations=violations
        )
    return problem, PlanTimeline(problem, sequence, effective)


def overhead_losses(timeline: PlanTimeline, name: str) -> np.ndarray:
    """
    Fracción de capacidad perdida por paso.

    Cada reconfiguración suma Ψ_eff pasos pendientes; cada paso consume
    hasta 1.0 de lo pendiente. Lo pendiente no cruza ventanas.
    """
    flags = timeline.reconfigured[name]
    overhead = timeline.overhead[name]
    fractions = np.zeros(len(flags))
    pending = 0.0
    for s in range(len(flags)):
        if flags[s]:
            pending += float(overhead[s])
        fraction = min(pending, 1.0)
        fractions[s] = fraction
        pending -= fraction
    return fractions


def _accounting(problem: WindowProblem, timeline: PlanTimeline, name: str) -> Tuple[int, float]:
    flags = timeline.reconfigured[name]
    return int(flags.sum()), float(timeline.overhead[name].sum()) * problem.step_seconds


# ==================== MODO FLUIDO ====================

def run_fluid(
        plan: PlanLike,
        trace: TraceLike,
        scenario: Scenario,
        window: Optional[int] = None,
        granularity: Optional[float] = None
) -> Metrics:
    """
    Simulación fluida de una ventana.

    Throughput = min(llegadas, capacidad − pérdida); los requests no
    servidos en el paso se descartan.

    Raises:
        InfeasiblePlanError: Si el plan viola alguna restricción
    """
    problem, timeline = _prepare(plan, trace, scenario, window, granularity)
    jobs = []
    for model in problem.models:
        capacity = timeline.capability[model.name]
        losses = overhead_losses(timeline, model.name) * capacity
        arrivals = np.asarray(model.arrivals, dtype=float)
        throughput = np.maximum(0.0, np.minimum(arrivals, capacity - losses))
        valid = math.fsum(throughput * timeline.accuracy(model))
        served = math.fsum(throughput)
        reconfigurations, overhead_seconds = _accounting(problem, timeline, model.name)
        jobs.append(JobMetrics(
            model=model.name,
            received=math.fsum(arrivals),
            served=served,
            timely=served,
            correct=valid,
            valid=valid,
            dropped=math.fsum(arrivals) - served,
            queued_end=0.0,
            reconfigurations=reconfigurations,
            overhead_seconds=overhead_seconds
        ))
    return Metrics(mode="fluid", jobs=jobs, windows=[WindowMetrics(window=problem.window, jobs=jobs)])


# ==================== MODO REQUESTS ====================

def run_requests(
        plan: PlanLike,
        trace: TraceLike,
        scenario: Scenario,
        seed: int,
        window: Optional[int] = None,
        granularity: Optional[float] = None
) -> Metrics:
    """
    Simulación por request con colas FIFO.

    Los requests llegan al inicio de su paso con deadline = llegada + SLO
    (2 × latencia con la GPU completa). En cada paso se descartan los que
    ya vencieron y se sirven tantos como permita la capacidad efectiva
    (con crédito fraccionario entre pasos); el k-ésimo servido del paso
    termina en inicio + k·g/capacidad. Un request es válido si termina a
    tiempo y su sorteo (semilla, ventana, modelo) cae bajo la accuracy del
    paso en que se sirve.

    Raises:
        InfeasiblePlanError: Si el plan viola alguna restricción
        ScenarioError: slo-undefined si un modelo no tiene latency_full
    """
    if seed is None:
        raise MigSchedError("El modo requests necesita una semilla", code="seed-required")
    problem, timeline = _prepare(plan, trace, scenario, window, granularity)
    g = problem.step_seconds
    jobs = []
    for index, model in enumerate(problem.models):
        slo = slo_target(scenario.model(model.name))
        rng = np.random.default_rng([int(seed), problem.window, index])
        capacity = timeline.capability[model.name]
        effective = np.maximum(0.0, capacity - overhead_losses(timeline, model.name) * capacity)
        accuracy = timeline.accuracy(model)

        queue: Deque[Tuple[float, float]] = deque()
        credit = 0.0
        served = timely = correct = valid = dropped = 0
        for s in range(problem.steps):
            start = s * g
            while queue and queue[0][0] < start - EPS:
                queue.popleft()
                dropped += 1
            arrivals = int(model.arrivals[s])
            if arrivals:
                draws = rng.random(arrivals)
                deadline = start + slo
                queue.extend((deadline, float(d)) for d in draws)

            credit += effective[s]
            available = math.floor(credit + EPS)
            credit -= available
            if credit < 0:
                credit = 0.0
            count = min(available, len(queue))
            for position in range(1, count + 1):
                deadline, draw = queue.popleft()
                completion = start + position * g / effective[s]
                on_time = completion <= deadline + EPS
                hit = draw < accuracy[s]
                served += 1
                timely += on_time
                correct += hit
                valid += on_time and hit

        reconfigurations, overhead_seconds = _accounting(problem, timeline, model.name)
        received = int(sum(model.arrivals))
        assert served + dropped + len(queue) == received
        jobs.append(JobMetrics(
            model=model.name,
            received=float(received),
            served=float(served),
            timely=float(timely),
            correct=float(correct),
            valid=float(valid),
            dropped=float(dropped),
            queued_end=float(len(queue)),
            reconfigurations=reconfigurations,
            overhead_seconds=overhead_seconds
        ))
    return Metrics(mode="requests", jobs=jobs, windows=[WindowMetrics(window=problem.window, jobs=jobs)])


# ==================== AGREGACIÓN Y REPORTES ====================

def combine(results: Iterable[Metrics], mode: str) -> Metrics:
    """Une las métricas de varias ventanas sumando contadores por job"""
    jobs: Dict[str, JobMetrics] = {}
    windows: List[WindowMetrics] = []
    for metrics in results:
        for job in metrics.jobs:
            jobs[job.model] = jobs[job.model].merged(job) if job.model in jobs else job
        windows.extend(metrics.windows)
    return Metrics(mode=mode, jobs=list(jobs.values()), windows=windows)


def goodput_report(metrics: Metrics) -> GoodputReport:
    """
    Reporte de Goodput por job y del sistema, con SLO, accuracy y conteo
    de reconfiguraciones.

    Raises:
        MigSchedError: Si no hay jobs
    """
    if not metrics.jobs:
        raise MigSchedError("El reporte necesita al menos un job", code="no-jobs")
    return GoodputReport(
        mode=metrics.mode,
        jobs=[job.report_row() for job in metrics.jobs],
        system_goodput=metrics.system_goodput,
        received=metrics.received,
        valid=metrics.valid,
        reconfigurations=metrics.reconfigurations,
        overhead_seconds=metrics.overhead_seconds,
        windows=[
            {"window": w.window, "jobs": [job.report_row() for job in w.jobs]}
            for w in metrics.windows
        ]
    )


def metrics_rows(metrics: Metrics, label: Optional[str] = None) -> List[Tuple]:
    """Filas `window,model,goodput,slo,acc,reconfigs` (una por ventana y modelo)"""
    rows = []
    for w in metrics.windows:
        for job in w.jobs:
            row = (w.window, job.model, job.goodput, job.slo_attainment, job.accuracy, job.reconfigurations)
            rows.append(((label,) + row) if label else row)
    return rows
