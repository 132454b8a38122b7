# ======================================================================================
# EVALUACIÓN Y FACTIBILIDAD DE PLANES
# ======================================================================================
import logging
import math
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Union

import numpy as np

from app.exceptions import InfeasibleError, InfeasiblePlanError
from app.schemas.catalog_schema import (
    Placement, Violation, inference_task, retraining_task
)
from app.schemas.plan_schema import AllocationSequence, PlanScore, ScoreEntry
from app.schemas.predictor_schema import ArrivalForecast
from app.schemas.preinit_schema import EffectivePlan
from app.schemas.workload_schema import Scenario, WindowProblem
from app.services.catalog_service import task_placements, validate_allocation
from app.services.layout_service import LayoutSpace
from app.services.workload_service import rescale_window

logger = logging.getLogger(__name__)

PlanLike = Union[AllocationSequence, EffectivePlan]


def split_plan(plan: PlanLike):
    """(secuencia, plan efectivo o None)"""
    if isinstance(plan, EffectivePlan):
        return plan.sequence, plan
    return plan, None


# ==================== PRE-CHEQUEO ====================

def precheck(problem: WindowProblem, space: Optional[LayoutSpace] = None) -> LayoutSpace:
    """
    Detecta escenarios infactibles por construcción antes de resolver.

    Returns:
        El LayoutSpace construido (reutilizable por los solvers)

    Raises:
        InfeasibleError: deployment-floor-unsatisfiable, retraining-exceeds-window,
            no-joint-deployment o no-coexistence-configuration
    """
    catalog = problem.catalog
    for model in problem.models:
        if model.min_deploy_gpcs > catalog.max_instance_size:
            raise InfeasibleError(
                f"deployment-floor unsatisfiable: '{model.name}' necesita una instancia de "
                f"{model.min_deploy_gpcs} GPCs y la mayor del catálogo tiene {catalog.max_instance_size}",
                code="deployment-floor-unsatisfiable"
            )
        if not any(rt <= problem.steps for rt in model.rt_steps.values()):
            raise InfeasibleError(
                f"El reentrenamiento de '{model.name}' no entra en la ventana de {problem.steps} pasos",
                code="retraining-exceeds-window"
            )

    space = space or LayoutSpace(catalog, [m.min_deploy_gpcs for m in problem.models])
    if len(space) == 0:
        raise InfeasibleError(
            "Ninguna configuración aloja la inferencia de todos los modelos a la vez",
            code="no-joint-deployment"
        )
    for m, model in enumerate(problem.models):
        coexists = False
        for size, rt in model.rt_steps.items():
            if rt > problem.steps:
                continue
            retrain = tuple(size if i == m else 0 for i in range(len(problem.models)))
            if space.feasible(retrain).any():
                coexists = True
                break
        if not coexists:
            raise InfeasibleError(
                f"Ninguna configuración permite reentrenar '{model.name}' mientras todos los modelos "
                f"mantienen su inferencia",
                code="no-coexistence-configuration"
            )
    return space


# ==================== FACTIBILIDAD ====================

def check_feasible(
        plan: PlanLike,
        scenario: Scenario,
        window: Optional[int] = None,
        granularity: Optional[float] = None
) -> List[Violation]:
    """
    Verifica todas las familias de restricciones sobre un plan.

    Returns:
        Violaciones con código, familia, paso y tarea (vacía si el plan es factible)
    """
    sequence, _ = split_plan(plan)
    window = sequence.window if window is None else window
    problem = rescale_window(scenario, window, None, granularity)
    return check_problem_feasible(sequence, problem)


def check_problem_feasible(sequence: AllocationSequence, problem: WindowProblem) -> List[Violation]:
    catalog = problem.catalog
    violations: List[Violation] = []
    if len(sequence) != problem.steps or sequence.window != problem.window:
        return [Violation(
            code="sequence-shape", family="sequence",
            detail=f"Se esperaban {problem.steps} pasos de la ventana {problem.window}, "
                   f"hay {len(sequence)} de la ventana {sequence.window}"
        )]

    known = {inference_task(m.name) for m in problem.models} | {retraining_task(m.name) for m in problem.models}
    for alloc in sequence.allocations:
        violations.extend(validate_allocation(catalog, alloc))
        for task in sorted(set(alloc.assignments) - known):
            violations.append(Violation(
                code="unknown-task", family="single-configuration", second=alloc.second, task=task,
                detail=f"La tarea '{task}' no pertenece al escenario"
            ))

    for model in problem.models:
        task = inference_task(model.name)
        for alloc in sequence.allocations:
            held = task_placements(catalog, alloc, task)
            if not any(size >= model.min_deploy_gpcs for _, size in held):
                violations.append(Violation(
                    code="deployment-floor", family="deployment", second=alloc.second, task=task,
                    detail=f"Ninguna instancia de al menos {model.min_deploy_gpcs} GPCs"
                ))
            if sum(size for _, size in held) < model.min_deploy_gpcs:
                violations.append(Violation(
                    code="deployment-floor-sum", family="deployment", second=alloc.second, task=task,
                    detail=f"Suma de GPCs menor a {model.min_deploy_gpcs}"
                ))
        violations.extend(_retraining_violations(sequence, problem, model))
    return violations


def _retraining_violations(sequence: AllocationSequence, problem: WindowProblem, model) -> List[Violation]:
    task = retraining_task(model.name)
    catalog = problem.catalog
    sizes = [sorted(size for _, size in task_placements(catalog, alloc, task)) for alloc in sequence.allocations]
    held = [bool(s) for s in sizes]
    if not any(held):
        return [Violation(
            code="retraining-not-launched", family="completion-in-window", task=task,
            detail="El reentrenamiento nunca se lanza en la ventana"
        )]

    start = held.index(True)
    size = sizes[start][-1]
    if size not in model.rt_steps:
        return [Violation(
            code="retraining-size-unprofiled", family="no-interruption", second=start, task=task,
            detail=f"No hay RT para instancias de {size} GPCs"
        )]

    violations = []
    end = start + model.rt_steps[size]
    if end > problem.steps:
        violations.append(Violation(
            code="retraining-incomplete", family="completion-in-window", second=start, task=task,
            detail=f"Empieza en {start} y necesita {model.rt_steps[size]} pasos"
        ))
    for step in range(start, min(end, problem.steps)):
        if sizes[step] != [size]:
            violations.append(Violation(
                code="retraining-interrupted", family="no-interruption", second=step, task=task,
                detail=f"Se esperaba una instancia de {size} GPCs, hay {sizes[step] or 'ninguna'}"
            ))
    if end < problem.steps and held[end]:
        violations.append(Violation(
            code="retraining-duration", family="no-interruption", second=end, task=task,
            detail=f"Sigue corriendo después de {model.rt_steps[size]} pasos"
        ))
    for step in range(end + 1, problem.steps):
        if held[step] and not held[step - 1]:
            violations.append(Violation(
                code="retraining-restarted", family="completion-in-window", second=step, task=task,
                detail="El reentrenamiento se lanza más de una vez"
            ))
    return violations


# ==================== LÍNEA DE TIEMPO ====================

class PlanTimeline:
    """
    Capacidad, cambios de instancias, Ψ_eff y Completion por modelo y paso.

    Es la aritmética común de evaluate_plan y del simulador.
    """

    def __init__(self, problem: WindowProblem, sequence: AllocationSequence, effective: Optional[EffectivePlan]):
        self.problem = problem
        steps = problem.steps
        hidden = effective.hidden_set() if effective else set()
        self.capability: Dict[str, np.ndarray] = {}
        self.reconfigured: Dict[str, np.ndarray] = {}
        self.overhead: Dict[str, np.ndarray] = {}
        self.completion: Dict[str, np.ndarray] = {}
        catalog = problem.catalog

        for model in problem.models:
            task = inference_task(model.name)
            held: List[FrozenSet[Placement]] = [
                task_placements(catalog, alloc, task) for alloc in sequence.allocations
            ]
            cap = np.array([sum(model.capability.get(size, 0.0) for _, size in h) for h in held], dtype=float)
            flags = np.array([s > 0 and held[s] != held[s - 1] for s in range(steps)], dtype=bool)
            psi = np.array([
                0.0 if (task, s) in hidden else model.overhead_steps for s in range(steps)
            ], dtype=float)
            self.capability[model.name] = cap
            self.reconfigured[model.name] = flags
            self.overhead[model.name] = np.where(flags, psi, 0.0)
            self.completion[model.name] = self._completion(sequence, model, steps)

    def _completion(self, sequence: AllocationSequence, model, steps: int) -> np.ndarray:
        task = retraining_task(model.name)
        catalog = self.problem.catalog
        comp = np.zeros(steps, dtype=np.int64)
        for alloc in sequence.allocations:
            held = task_placements(catalog, alloc, task)
            if held:
                size = max(s for _, s in held)
                finish = alloc.second + model.rt_steps.get(size, steps + 1)
                if finish < steps:
                    comp[finish:] = 1
                break
        return comp

    def accuracy(self, model) -> np.ndarray:
        comp = self.completion[model.name]
        return np.where(comp == 1, model.accuracy_post, model.accuracy_pre)


# ==================== EVALUACIÓN ====================

def evaluate_plan(
        plan: PlanLike,
        arrivals: Union[ArrivalForecast, Mapping[str, Sequence[int]], None],
        scenario: Scenario,
        window: Optional[int] = None,
        granularity: Optional[float] = None
) -> PlanScore:
    """
    Goodput esperado de un plan factible.

    Por paso e inferencia: capacidad agregada de sus instancias; si el
    conjunto de instancias cambió respecto del paso anterior se pierde
    min(Ψ_eff, 1) de esa capacidad; Throughput = min(llegadas, capacidad
    restante); goodput = Throughput × accuracy (post si el reentrenamiento
    terminó antes del paso, pre en otro caso).

    Raises:
        InfeasiblePlanError: Si el plan viola alguna restricción
    """
    sequence, effective = split_plan(plan)
    window = sequence.window if window is None else window
    problem = rescale_window(scenario, window, arrivals, granularity)
    return evaluate_problem(problem, sequence, effective)


def evaluate_problem(
        problem: WindowProblem,
        sequence: AllocationSequence,
        effective: Optional[EffectivePlan] = None
) -> PlanScore:
    violations = check_problem_feasible(sequence, problem)
    if violations:
        raise InfeasiblePlanError(
            f"Plan infactible: {violations[0].code} en el paso {violations[0].second}",
            violations=violations
        )

    timeline = PlanTimeline(problem, sequence, effective)
    entries: List[ScoreEntry] = []
    for s in range(problem.steps):
        for model in problem.models:
            arrivals = float(model.arrivals[s])
            cap = float(timeline.capability[model.name][s])
            fraction = min(float(timeline.overhead[model.name][s]), 1.0)
            loss = fraction * cap
            throughput = max(0.0, min(arrivals, cap - loss))
            completion = int(timeline.completion[model.name][s])
            accuracy = model.accuracy_post if completion else model.accuracy_pre
            entries.append(ScoreEntry(
                second=s,
                task=inference_task(model.name),
                arrivals=arrivals,
                capability=cap,
                loss=loss,
                throughput=throughput,
                completion=completion,
                goodput=throughput * accuracy
            ))
    return PlanScore(total=math.fsum(e.goodput for e in entries), entries=entries)
