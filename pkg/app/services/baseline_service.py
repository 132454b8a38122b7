# ======================================================================================
# PLANIFICADORES DE REFERENCIA
# ======================================================================================
# - Reparto estático proporcional a los GFLOPs de cada modelo.
# - Reconfiguración solo en los bordes: el layout puede cambiar en el paso 0 y
#   cuando termina algún reentrenamiento.
import itertools
import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.exceptions import InfeasibleError
from app.schemas.catalog_schema import Allocation, inference_task, retraining_task
from app.schemas.plan_schema import AllocationSequence
from app.schemas.predictor_schema import ArrivalForecast
from app.schemas.workload_schema import Scenario, WindowProblem
from app.services.dp_solver import best_per_key
from app.services.layout_service import LayoutSpace
from app.services.plan_evaluation_service import evaluate_problem, precheck
from app.services.workload_service import rescale_window

logger = logging.getLogger(__name__)

TIE = 1e-9


# ==================== REPARTO ESTÁTICO ====================

def ideal_split(problem: WindowProblem) -> np.ndarray:
    """GPCs ideales por modelo: gpc_count · gflops_m / Σ gflops"""
    gflops = np.array([m.gflops for m in problem.models], dtype=float)
    return problem.catalog.gpc_count * gflops / gflops.sum()


def plan_static_proportional(
        scenario: Scenario,
        window: int = 0,
        granularity: Optional[float] = None
) -> AllocationSequence:
    """
    Reparto fijo de la GPU proporcional a los GFLOPs.

    Cada modelo recibe un grupo de slots de una única configuración: la
    inferencia conserva el slot más grande (y los demás salvo uno) durante
    toda la ventana y el reentrenamiento corre una vez, desde el paso 0, en
    el slot restante. Se elige el grupo más cercano (distancia euclídea) al
    reparto ideal; empates: configuración con menos instancias, luego más
    GPCs para los primeros modelos, luego orden del catálogo.

    Raises:
        InfeasibleError: Ninguna configuración da a cada modelo una instancia
            de al menos L GPCs más un slot de reentrenamiento
    """
    problem = rescale_window(scenario, window, None, granularity)
    sequence = plan_problem_static(problem)
    logger.info(f"✅ Plan estático ventana {window}: {sequence.allocations[0].configuration_id}")
    return sequence


def plan_problem_static(problem: WindowProblem) -> AllocationSequence:
    ideal = ideal_split(problem)
    models = problem.models
    best_key = None
    best = None
    for config in problem.catalog.configurations:
        slots = config.slots
        for choice in itertools.product(range(len(models) + 1), repeat=len(slots)):
            groups = [[slot for slot, owner in zip(slots, choice) if owner == m + 1] for m in range(len(models))]
            plan = _split_groups(problem, groups)
            if plan is None:
                continue
            shares = np.array([sum(slot.size for slot in group) for group in groups], dtype=float)
            key = (
                round(float(np.linalg.norm(shares - ideal)), 9),
                len(slots),
                tuple(-int(v) for v in shares),
            )
            if best_key is None or key < best_key:
                best_key, best = key, (config, plan)

    if best is None:
        raise InfeasibleError(
            "Ninguna configuración permite un reparto estático con inferencia y reentrenamiento",
            code="no-static-configuration"
        )
    config, plan = best
    logger.debug(f"🔍 Reparto ideal {np.round(ideal, 2).tolist()} → {config.id}")

    allocations = []
    for step in range(problem.steps):
        assignments: Dict[str, frozenset] = {}
        for model, (inference, retrain, duration) in zip(models, plan):
            assignments[inference_task(model.name)] = frozenset(slot.id for slot in inference)
            if step < duration:
                assignments[retraining_task(model.name)] = frozenset({retrain.id})
        allocations.append(Allocation(second=step, configuration_id=config.id, assignments=assignments))
    return AllocationSequence(window=problem.window, allocations=tuple(allocations))


def _split_groups(problem: WindowProblem, groups):
    """(slots de inferencia, slot de reentrenamiento, RT) por modelo, o None"""
    plan = []
    for model, group in zip(problem.models, groups):
        if len(group) < 2:
            return None
        ordered = sorted(group, key=lambda s: (-s.size, s.slice_start))
        anchor = ordered[0]
        if anchor.size < model.min_deploy_gpcs:
            return None
        trainable = [
            s for s in ordered[1:]
            if model.rt_steps.get(s.size, problem.steps + 1) <= problem.steps
        ]
        if not trainable:
            return None
        retrain = trainable[0]
        inference = [s for s in group if s.id != retrain.id]
        plan.append((inference, retrain, model.rt_steps[retrain.size]))
    return plan


# ==================== BORDES DE VENTANA ====================

def plan_window_boundary(
        scenario: Scenario,
        forecast: ArrivalForecast,
        window: int = 0,
        granularity: Optional[float] = None
) -> AllocationSequence:
    """
    Mejor plan que solo reconfigura al inicio y al terminar cada reentrenamiento.

    Todos los reentrenamientos arrancan en el paso 0. Para cada vector de
    tamaños de reentrenamiento se elige un layout por tramo con un DP sobre
    tramos; gana el vector con mayor goodput (empates: el primero enumerado).

    Raises:
        InfeasibleError: Ningún vector de tamaños admite un plan
    """
    problem = rescale_window(scenario, window, forecast, granularity)
    sequence, value = plan_problem_window_boundary(problem)
    logger.info(f"✅ Plan de bordes ventana {window}: goodput={value:.4f}")
    return sequence


def plan_problem_window_boundary(
        problem: WindowProblem,
        space: Optional[LayoutSpace] = None
) -> Tuple[AllocationSequence, float]:
    space = precheck(problem, space)
    planner = _BoundaryPlanner(problem, space)
    best: Optional[Tuple[float, List[Allocation]]] = None
    choices = [sorted(k for k, t in m.rt_steps.items() if t <= problem.steps) for m in problem.models]
    for sizes in itertools.product(*choices):
        result = planner.plan(sizes)
        if result is not None and (best is None or result[0] > best[0] + TIE):
            best = result
    if best is None:
        raise InfeasibleError(
            "Ningún plan con reconfiguración en los bordes es factible",
            code="no-feasible-plan"
        )
    sequence = AllocationSequence(window=problem.window, allocations=tuple(best[1]))
    return sequence, evaluate_problem(problem, sequence).total


class _BoundaryPlanner:

    def __init__(self, problem: WindowProblem, space: LayoutSpace):
        self.problem = problem
        self.space = space
        self.count = len(problem.models)
        self.capacity = [space.capacity(m, model.capability) for m, model in enumerate(problem.models)]
        self.subsets = [
            tuple(m for m in range(self.count) if mask >> m & 1)
            for mask in range(2 ** self.count)
        ]
        self.keys = [space.projection_keys(kept) for kept in self.subsets]
        self.names = problem.model_names

    def _step_gain(self, step: int, layouts: np.ndarray, ends, kept=None) -> np.ndarray:
        total = np.zeros(len(layouts))
        for m, model in enumerate(self.problem.models):
            capacity = self.capacity[m][layouts]
            if kept is not None and m not in kept:
                capacity = capacity * (1.0 - model.overhead_fraction)
            accuracy = model.accuracy_post if step >= ends[m] else model.accuracy_pre
            total += accuracy * np.minimum(float(model.arrivals[step]), capacity)
        return total

    def plan(self, sizes: Tuple[int, ...]) -> Optional[Tuple[float, List[Allocation]]]:
        steps = self.problem.steps
        ends = [model.rt_steps[size] for model, size in zip(self.problem.models, sizes)]
        cuts = sorted({0} | {e for e in ends if e < steps}) + [steps]
        segments = list(zip(cuts[:-1], cuts[1:]))

        previous = None
        backs = []
        for start, stop in segments:
            retrain = tuple(size if start < end else 0 for size, end in zip(sizes, ends))
            layouts = self.space.feasible_indices(retrain)
            if layouts.size == 0:
                return None
            body = np.zeros(len(layouts))
            for step in range(start + 1, stop):
                body += self._step_gain(step, layouts, ends)

            pred = np.full(len(layouts), -1, dtype=np.int64)
            if previous is None:
                values = self._step_gain(start, layouts, ends) + body
            else:
                values = np.full(len(layouts), -np.inf)
                prev_idx, prev_val = previous
                for (key, n_keys), kept in zip(self.keys, self.subsets):
                    best_val, best_arg = best_per_key(key, n_keys, prev_idx, prev_val)
                    base = best_val[key[layouts]]
                    cand = base + self._step_gain(start, layouts, ends, kept) + body
                    better = np.isfinite(base) & (cand > values)
                    values[better] = cand[better]
                    pred[better] = best_arg[key[layouts]][better]
            finite = np.isfinite(values)
            if not finite.any():
                return None
            previous = (layouts[finite], values[finite])
            backs.append((layouts[finite], pred[finite], retrain))

        idx, values = previous
        best = int(np.argmax(values))
        layout = int(idx[best])
        allocations: List[Allocation] = [None] * steps
        for (start, stop), (idx, pred, retrain) in zip(reversed(segments), reversed(backs)):
            pos = int(np.searchsorted(idx, layout))
            config_id, assignments = self.space.realize(layout, retrain, self.names)
            for step in range(start, stop):
                allocations[step] = Allocation(second=step, configuration_id=config_id, assignments=assignments)
            layout = int(pred[pos])
        return float(values[best]), allocations


def score_gap(dp_value: float, baseline_value: float) -> float:
    """Mejora relativa del plan DP sobre una referencia (0 si la referencia es 0)"""
    if baseline_value <= 0:
        return 0.0 if dp_value <= 0 else math.inf
    return dp_value / baseline_value - 1.0
