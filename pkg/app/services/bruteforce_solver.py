# ======================================================================================
# SOLVER POR BÚSQUEDA EXHAUSTIVA (ORÁCULO)
# ======================================================================================
# Recorre todas las secuencias factibles con memoización sobre
# (paso, fases de reentrenamiento, instancias de inferencia del paso anterior).
# Solo sirve para escenarios chicos: es la referencia contra la que se prueba
# el programa dinámico.
import itertools
import logging
import math
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Tuple

from app.config import settings
from app.exceptions import InfeasibleError, SearchSpaceExceeded
from app.schemas.catalog_schema import Allocation, Placement, inference_task, retraining_task
from app.schemas.plan_schema import AllocationSequence
from app.schemas.predictor_schema import ArrivalForecast
from app.schemas.workload_schema import Scenario, WindowProblem
from app.services.dp_solver import DONE, NOT_STARTED, advance, phase_count
from app.services.plan_evaluation_service import evaluate_problem, precheck
from app.services.workload_service import rescale_window

logger = logging.getLogger(__name__)

TIE = 1e-9


class Candidate(NamedTuple):
    """Asignación de un paso ya descompuesta por modelo"""
    allocation: Allocation
    held: Tuple[FrozenSet[Placement], ...]
    capacity: Tuple[float, ...]
    retrain: Tuple[int, ...]


def enumerate_allocations(problem: WindowProblem) -> List[Candidate]:
    """
    Todas las asignaciones de un paso que respetan las reglas locales.

    Cada slot de cada configuración queda libre o asignado a una tarea; se
    descartan las que dan más de un slot a un reentrenamiento o dejan una
    inferencia sin instancia de al menos L GPCs. El orden es el de
    `Allocation.encoding()`.
    """
    models = problem.models
    tasks = [inference_task(m.name) for m in models] + [retraining_task(m.name) for m in models]
    count = len(models)
    result: List[Candidate] = []
    for config in problem.catalog.configurations:
        slots = config.slots
        for choice in itertools.product(range(len(tasks) + 1), repeat=len(slots)):
            owned: Dict[int, list] = {}
            for slot, owner in zip(slots, choice):
                if owner:
                    owned.setdefault(owner - 1, []).append(slot)
            if any(len(owned.get(count + m, [])) > 1 for m in range(count)):
                continue
            if not all(
                    any(slot.size >= model.min_deploy_gpcs for slot in owned.get(m, []))
                    for m, model in enumerate(models)
            ):
                continue
            assignments = {tasks[t]: frozenset(slot.id for slot in group) for t, group in owned.items()}
            held = tuple(frozenset(slot.placement for slot in owned.get(m, [])) for m in range(count))
            result.append(Candidate(
                allocation=Allocation(second=0, configuration_id=config.id, assignments=assignments),
                held=held,
                capacity=tuple(
                    sum(model.capability.get(slot.size, 0.0) for slot in owned.get(m, []))
                    for m, model in enumerate(models)
                ),
                retrain=tuple(
                    owned[count + m][0].size if count + m in owned else 0 for m in range(count)
                )
            ))
    result.sort(key=lambda c: c.allocation.encoding())
    return result


def search_space(problem: WindowProblem, allocations: int) -> int:
    """Cota del espacio de búsqueda: S · |A|² · Π_m (2 + Σ_k (RT_k − 1))"""
    phases = 1
    for model in problem.models:
        phases *= phase_count(model.rt_steps, problem.steps)
    return problem.steps * allocations * allocations * phases


class BruteForceSolver:
    """
    Máximo exacto por enumeración; entre planes empatados (±1e-9) devuelve el
    de codificación lexicográficamente menor.
    """

    def __init__(self, problem: WindowProblem, max_space: Optional[int] = None):
        self.problem = problem
        self.steps = problem.steps
        self.max_space = max_space or settings.BRUTEFORCE_MAX_SPACE
        self.rt = [{k: v for k, v in m.rt_steps.items() if v <= self.steps} for m in problem.models]
        self.candidates = enumerate_allocations(problem)
        self._memo: Dict[Tuple, Tuple[float, Optional[int]]] = {}

        space = search_space(problem, len(self.candidates))
        if space > self.max_space:
            raise SearchSpaceExceeded(
                f"Espacio de búsqueda {space} supera el límite {self.max_space}",
                space=space,
                cap=self.max_space
            )
        logger.debug(f"🔍 Búsqueda exhaustiva: {len(self.candidates)} asignaciones, espacio {space}")

    def _gain(self, step: int, phases, candidate: Candidate, previous) -> float:
        total = 0.0
        for m, model in enumerate(self.problem.models):
            capacity = candidate.capacity[m]
            if step > 0 and candidate.held[m] != previous[m]:
                capacity *= 1.0 - model.overhead_fraction
            accuracy = model.accuracy_post if phases[m] == DONE else model.accuracy_pre
            total += accuracy * min(float(model.arrivals[step]), capacity)
        return total

    def _next_phases(self, step: int, phases, candidate: Candidate):
        result = []
        for m, phase in enumerate(phases):
            nxt = advance(phase, candidate.retrain[m], step, self.rt[m], self.steps)
            if nxt is None:
                return None
            result.append(nxt)
        return tuple(result)

    def _search(self, step: int, phases, previous) -> Tuple[float, Optional[int]]:
        key = (step, phases, previous)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        if step == self.steps:
            result = (0.0 if all(p == DONE for p in phases) else -math.inf, None)
            self._memo[key] = result
            return result

        best, choice = -math.inf, None
        for index, candidate in enumerate(self.candidates):
            nxt = self._next_phases(step, phases, candidate)
            if nxt is None:
                continue
            tail, _ = self._search(step + 1, nxt, candidate.held)
            if tail == -math.inf:
                continue
            total = self._gain(step, phases, candidate, previous) + tail
            if total > best + TIE:
                best, choice = total, index
        self._memo[key] = (best, choice)
        return best, choice

    def solve(self) -> Tuple[AllocationSequence, float]:
        count = len(self.problem.models)
        phases = (NOT_STARTED,) * count
        previous = (frozenset(),) * count
        value, _ = self._search(0, phases, previous)
        if value == -math.inf:
            raise InfeasibleError(
                "Ningún plan cumple todas las restricciones de la ventana",
                code="no-feasible-plan"
            )

        allocations = []
        for step in range(self.steps):
            _, choice = self._memo[(step, phases, previous)]
            candidate = self.candidates[choice]
            allocations.append(candidate.allocation.model_copy(update={"second": step}))
            phases = self._next_phases(step, phases, candidate)
            previous = candidate.held
        return AllocationSequence(window=self.problem.window, allocations=tuple(allocations)), value


def solve_problem_bruteforce(problem: WindowProblem, max_space: Optional[int] = None) -> Tuple[AllocationSequence, float]:
    precheck(problem)
    sequence, _ = BruteForceSolver(problem, max_space=max_space).solve()
    return sequence, evaluate_problem(problem, sequence).total


def solve_bruteforce(
        scenario: Scenario,
        forecast: ArrivalForecast,
        window: int = 0,
        granularity: Optional[float] = None,
        max_space: Optional[int] = None
) -> AllocationSequence:
    """
    Plan óptimo por enumeración exhaustiva.

    Raises:
        SearchSpaceExceeded: El espacio supera MIGSCHED_BRUTEFORCE_MAX_SPACE
        InfeasibleError: No existe plan factible
    """
    problem = rescale_window(scenario, window, forecast, granularity)
    sequence, value = solve_problem_bruteforce(problem, max_space=max_space)
    logger.info(f"✅ Plan exhaustivo ventana {window}: goodput={value:.4f}")
    return sequence
