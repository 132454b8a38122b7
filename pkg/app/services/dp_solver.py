# ======================================================================================
# SOLVER EXACTO POR PROGRAMACIÓN DINÁMICA
# ======================================================================================
# Estado al final de un paso: (fase de reentrenamiento por modelo, layout de
# inferencia). Fases: NS (no empezó), RUN(k, l) (corre en k GPCs, le quedan
# l pasos) y DONE. El layout del paso anterior solo influye en qué modelos
# pagan overhead, así que la transición toma, para cada subconjunto K de
# modelos que conservan sus instancias, el mejor predecesor con la misma
# proyección sobre K.
#
# Empates: cada estado guarda el rango de su prefijo (asignaciones hasta el
# paso) entre todos los estados del paso. A igual valor gana el menor
# (rango del predecesor, rango de la asignación), que es el orden
# lexicográfico de las codificaciones.
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.exceptions import InfeasibleError, StateBudgetExceeded
from app.schemas.catalog_schema import Allocation
from app.schemas.plan_schema import AllocationSequence
from app.schemas.predictor_schema import ArrivalForecast
from app.schemas.workload_schema import Scenario, WindowProblem
from app.services.layout_service import LayoutSpace
from app.services.plan_evaluation_service import evaluate_problem, precheck
from app.services.workload_service import rescale_window

logger = logging.getLogger(__name__)

Phase = Tuple[int, int, int]
PhaseTuple = Tuple[Phase, ...]

NOT_STARTED: Phase = (0, 0, 0)
DONE: Phase = (2, 0, 0)
EPS = 1e-9
# Los valores se comparan redondeados a esta cantidad de decimales
DIGITS = 7
NO_RANK = np.iinfo(np.int64).max


def running(size: int, left: int) -> Phase:
    return 1, size, left


def advance(phase: Phase, size: int, step: int, rt: Dict[int, int], steps: int) -> Optional[Phase]:
    """
    Fase siguiente de un modelo si en `step` reentrena en `size` GPCs (0 = no reentrena).

    Returns:
        Nueva fase o None si la transición viola las reglas de reentrenamiento
    """
    kind, current, left = phase
    if kind == 2:
        return DONE if size == 0 else None
    if kind == 1:
        if size != current:
            return None
        return DONE if left == 1 else running(current, left - 1)
    if size == 0:
        return NOT_STARTED if any(step + 1 + t <= steps for t in rt.values()) else None
    duration = rt.get(size)
    if duration is None or step + duration > steps:
        return None
    return DONE if duration == 1 else running(size, duration - 1)


def phase_count(rt: Dict[int, int], steps: int) -> int:
    """Cantidad de fases distintas de un modelo"""
    return 2 + sum(t - 1 for t in rt.values() if t <= steps)


def level(values: np.ndarray) -> np.ndarray:
    return np.round(values, DIGITS)


def best_per_key(
        key: np.ndarray,
        n_keys: int,
        idx: np.ndarray,
        val: np.ndarray,
        rank: Optional[np.ndarray] = None
):
    """
    Mejor valor por clave entre los estados (idx, val).

    Empates: gana el menor `rank` (o el layout de menor índice si no se da).

    Returns:
        (best_val, best_arg) de largo n_keys; -inf / -1 donde no hay estados
    """
    keys = key[idx]
    order = np.lexsort((idx if rank is None else rank, -level(val), keys))
    sorted_keys = keys[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = sorted_keys[1:] != sorted_keys[:-1]
    best_val = np.full(n_keys, -np.inf)
    best_arg = np.full(n_keys, -1, dtype=np.int64)
    best_val[sorted_keys[first]] = val[order][first]
    best_arg[sorted_keys[first]] = idx[order][first]
    return best_val, best_arg


def preferred(val, prefix, alloc, cur_val, cur_prefix, cur_alloc) -> np.ndarray:
    """Máscara de candidatos que superan a los actuales: valor, luego prefijo, luego asignación"""
    new, old = level(val), level(cur_val)
    earlier = (prefix < cur_prefix) | ((prefix == cur_prefix) & (alloc < cur_alloc))
    return (new > old) | ((new == old) & earlier)


class DpSolver:
    """
    Programa dinámico exacto sobre (fases, layout).

    La poda nunca descarta el plan óptimo de menor codificación:
    - misma fase: se descarta un layout cuyo valor queda más de D por debajo
      del mejor, con D la máxima pérdida por overhead del paso siguiente;
    - mismo layout: si accuracy_post ≥ accuracy_pre, DONE domina a RUN y NS
      y RUN(k, l-1) domina a RUN(k, l) cuando su valor es mayor, o igual con
      un prefijo menor.
    """

    def __init__(
            self,
            problem: WindowProblem,
            space: LayoutSpace,
            max_states: Optional[int] = None,
            workers: Optional[int] = None
    ):
        self.problem = problem
        self.space = space
        self.models = problem.models
        self.model_count = len(problem.models)
        self.steps = problem.steps
        self.max_states = max_states or settings.DP_MAX_STATES
        self.workers = max(1, workers or settings.WORKERS)
        self.names = [m.name for m in self.models]

        self.rt = [{k: v for k, v in m.rt_steps.items() if v <= self.steps} for m in self.models]
        self.capacity = [space.capacity(i, m.capability) for i, m in enumerate(self.models)]
        self.fraction = [m.overhead_fraction for m in self.models]
        self.arrivals = [np.asarray(m.arrivals, dtype=float) for m in self.models]
        self.dominates = [m.accuracy_post >= m.accuracy_pre for m in self.models]

        self.subsets = [
            tuple(m for m in range(self.model_count) if mask >> m & 1)
            for mask in range(2 ** self.model_count)
        ]
        self.keys = [space.projection_keys(kept) for kept in self.subsets]
        self.retrain_vectors: List[Tuple[int, ...]] = []
        self._retrain_index: Dict[Tuple[int, ...], int] = {}
        vectors = itertools.product(*([0] + sorted(rt) for rt in self.rt))
        self.alloc_rank = space.encoding_ranks(vectors, self.names)

    # ==================== AUXILIARES ====================

    def _retrain_id(self, vector: Tuple[int, ...]) -> int:
        index = self._retrain_index.get(vector)
        if index is None:
            index = len(self.retrain_vectors)
            self._retrain_index[vector] = index
            self.retrain_vectors.append(vector)
        return index

    def _options(self, m: int, phase: Phase, step: int) -> List[Tuple[Phase, int]]:
        kind, size, _ = phase
        if kind == 2:
            candidates = [0]
        elif kind == 1:
            candidates = [size]
        else:
            candidates = [0] + sorted(self.rt[m])
        result = []
        for candidate in candidates:
            nxt = advance(phase, candidate, step, self.rt[m], self.steps)
            if nxt is not None:
                result.append((nxt, candidate))
        return result

    def _moves(self, phases: Sequence[PhaseTuple], step: int) -> Dict[PhaseTuple, List[Tuple[int, int]]]:
        """destino → [(índice de fase predecesora, id de vector de reentrenamiento)]"""
        moves: Dict[PhaseTuple, List[Tuple[int, int]]] = {}
        for pred_index, phase in enumerate(phases):
            per_model = [self._options(m, phase[m], step) for m in range(self.model_count)]
            for combo in itertools.product(*per_model):
                target = tuple(nxt for nxt, _ in combo)
                vector = tuple(size for _, size in combo)
                moves.setdefault(target, []).append((pred_index, self._retrain_id(vector)))
        return moves

    def _gains(self, step: int):
        """gains[m][comp][kept] → vector por layout del goodput del modelo en el paso"""
        gains = []
        for m, model in enumerate(self.models):
            arrivals = self.arrivals[m][step]
            keep = np.minimum(arrivals, self.capacity[m])
            change = keep if step == 0 else np.minimum(arrivals, self.capacity[m] * (1.0 - self.fraction[m]))
            gains.append((
                (model.accuracy_pre * change, model.accuracy_pre * keep),
                (model.accuracy_post * change, model.accuracy_post * keep),
            ))
        return gains

    def _margin(self, step: int) -> float:
        """Cota de lo que un cambio de layout puede costar en `step`"""
        if step >= self.steps:
            return 0.0
        return sum(
            self.arrivals[m][step] * self.fraction[m] * max(model.accuracy_pre, model.accuracy_post)
            for m, model in enumerate(self.models)
        )

    def _best_tables(self, idx: np.ndarray, val: np.ndarray, rank: np.ndarray):
        """Para cada subconjunto K: mejor valor y layout predecesor por clave de proyección"""
        return [best_per_key(key, n_keys, idx, val, rank) for key, n_keys in self.keys]

    def _rank_states(self, targets: Sequence[PhaseTuple], dense: Dict) -> Dict[PhaseTuple, np.ndarray]:
        """Rango global del prefijo de cada estado alcanzado en el paso (NO_RANK si no hay estado)"""
        n_layouts = len(self.space)
        found = [(target, np.flatnonzero(np.isfinite(dense[target][0]))) for target in targets]
        prefix = np.concatenate([dense[t][1][idx] for t, idx in found]) if found else np.empty(0, np.int64)
        alloc = np.concatenate([dense[t][2][idx] for t, idx in found]) if found else np.empty(0, np.int64)
        position = np.empty(len(prefix), dtype=np.int64)
        position[np.lexsort((alloc, prefix))] = np.arange(len(prefix))

        ranks = {}
        offset = 0
        for target, idx in found:
            full = np.full(n_layouts, NO_RANK, dtype=np.int64)
            full[idx] = position[offset:offset + len(idx)]
            ranks[target] = full
            offset += len(idx)
        return ranks

    # ==================== RESOLUCIÓN ====================

    def solve(self) -> Tuple[AllocationSequence, float]:
        n_layouts = len(self.space)
        frontier: Dict[PhaseTuple, Tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        ranks: Dict[PhaseTuple, np.ndarray] = {}
        history: List[Tuple[List[PhaseTuple], Dict]] = []
        initial = (NOT_STARTED,) * self.model_count

        for step in range(self.steps):
            gains = self._gains(step)
            gain_cache: Dict[Tuple, np.ndarray] = {}

            def gain_sum(comp: Tuple[int, ...], kept_index: int) -> np.ndarray:
                key = (comp, kept_index)
                if key not in gain_cache:
                    kept = self.subsets[kept_index]
                    gain_cache[key] = sum(
                        gains[m][comp[m]][1 if m in kept else 0] for m in range(self.model_count)
                    )
                return gain_cache[key]

            if step == 0:
                pred_phases = [initial]
                tables = None
                pred_ranks = None
            else:
                pred_phases = sorted(frontier)
                tables = [self._best_tables(*frontier[p]) for p in pred_phases]
                pred_ranks = [ranks[p] for p in pred_phases]
            moves = self._moves(pred_phases, step)
            targets = sorted(moves)

            def evaluate_target(target: PhaseTuple):
                vals = np.full(n_layouts, -np.inf)
                prefix = np.full(n_layouts, NO_RANK, dtype=np.int64)
                alloc = np.full(n_layouts, NO_RANK, dtype=np.int64)
                pred_phase = np.full(n_layouts, -1, dtype=np.int32)
                pred_layout = np.full(n_layouts, -1, dtype=np.int64)
                retrain = np.full(n_layouts, -1, dtype=np.int32)

                def offer(layouts, cand, cand_prefix, cand_alloc, pred_index, cand_pred, retrain_id):
                    better = preferred(cand, cand_prefix, cand_alloc, vals[layouts], prefix[layouts], alloc[layouts])
                    if not better.any():
                        return
                    chosen = layouts[better]
                    vals[chosen] = cand[better]
                    prefix[chosen] = cand_prefix[better]
                    alloc[chosen] = cand_alloc[better]
                    pred_phase[chosen] = pred_index
                    pred_layout[chosen] = cand_pred[better]
                    retrain[chosen] = retrain_id

                for pred_index, retrain_id in moves[target]:
                    vector = self.retrain_vectors[retrain_id]
                    layouts = self.space.feasible_indices(vector)
                    if layouts.size == 0:
                        continue
                    alloc_rank = self.alloc_rank[vector][layouts]
                    if tables is None:
                        cand = gain_sum((0,) * self.model_count, len(self.subsets) - 1)[layouts]
                        none = np.full(len(layouts), -1, dtype=np.int64)
                        offer(layouts, cand, np.zeros(len(layouts), dtype=np.int64), alloc_rank,
                              pred_index, none, retrain_id)
                        continue
                    comp = tuple(1 if p == DONE else 0 for p in pred_phases[pred_index])
                    for kept_index in range(len(self.subsets)):
                        best_val, best_arg = tables[pred_index][kept_index]
                        key = self.keys[kept_index][0][layouts]
                        base = best_val[key]
                        reachable = np.isfinite(base)
                        if not reachable.any():
                            continue
                        chosen = layouts[reachable]
                        args = best_arg[key[reachable]]
                        cand = base[reachable] + gain_sum(comp, kept_index)[chosen]
                        offer(chosen, cand, pred_ranks[pred_index][args], alloc_rank[reachable],
                              pred_index, args, retrain_id)
                return vals, prefix, alloc, pred_phase, pred_layout, retrain

            if self.workers > 1 and len(targets) > 1:
                with ThreadPoolExecutor(max_workers=self.workers) as pool:
                    results = list(pool.map(evaluate_target, targets))
            else:
                results = [evaluate_target(t) for t in targets]
            dense = dict(zip(targets, results))

            ranks = self._rank_states(targets, dense)
            self._prune_dominated(dense, ranks)
            margin = self._margin(step + 1)
            frontier = {}
            back = {}
            total = 0
            for target in targets:
                vals, _, _, pred_phase, pred_layout, retrain = dense[target]
                finite = np.isfinite(vals)
                if not finite.any():
                    continue
                top = vals[finite].max()
                keep = finite & (vals >= top - margin - EPS)
                idx = np.flatnonzero(keep)
                frontier[target] = (idx, vals[idx], ranks[target][idx])
                back[target] = (idx, pred_phase[idx], pred_layout[idx], retrain[idx])
                total += len(idx)
            history.append((pred_phases, back))

            if total > self.max_states:
                raise StateBudgetExceeded(
                    f"El DP superó {self.max_states} estados en el paso {step} (frontera={total})",
                    frontier_size=total,
                    second=step
                )
            if not frontier:
                break
            logger.debug(f"🔍 DP paso {step}: {len(frontier)} fases, {total} estados")

        final = (DONE,) * self.model_count
        if final not in frontier or len(history) < self.steps:
            raise InfeasibleError(
                "Ningún plan cumple todas las restricciones de la ventana",
                code="no-feasible-plan"
            )
        idx, vals, rank = frontier[final]
        best = int(np.lexsort((rank, -level(vals)))[0])
        return self._reconstruct(history, final, int(idx[best])), float(vals[best])

    def _prune_dominated(self, dense: Dict[PhaseTuple, Tuple], ranks: Dict[PhaseTuple, np.ndarray]) -> None:
        snapshot = {phase: level(arrays[0]) for phase, arrays in dense.items()}
        for phase, arrays in dense.items():
            vals = arrays[0]
            own = snapshot[phase]
            own_rank = ranks.get(phase)
            if own_rank is None:
                continue
            for m in range(self.model_count):
                if not self.dominates[m]:
                    continue
                kind, size, left = phase[m]
                dominators = []
                if kind != 2:
                    dominators.append(DONE)
                if kind == 1 and left > 1:
                    dominators.append(running(size, left - 1))
                for better in dominators:
                    other_phase = phase[:m] + (better,) + phase[m + 1:]
                    other = snapshot.get(other_phase)
                    if other is None or other_phase not in ranks:
                        continue
                    beaten = (other > own) | ((other == own) & (ranks[other_phase] < own_rank))
                    vals[np.isfinite(own) & beaten] = -np.inf

    def _reconstruct(self, history, phase: PhaseTuple, layout: int) -> AllocationSequence:
        allocations: List[Optional[Allocation]] = [None] * self.steps
        for step in range(self.steps - 1, -1, -1):
            pred_phases, back = history[step]
            idx, pred_phase, pred_layout, retrain = back[phase]
            pos = int(np.searchsorted(idx, layout))
            vector = self.retrain_vectors[int(retrain[pos])]
            config_id, assignments = self.space.realize(layout, vector, self.names)
            allocations[step] = Allocation(second=step, configuration_id=config_id, assignments=assignments)
            phase = pred_phases[int(pred_phase[pos])]
            layout = int(pred_layout[pos])
        return AllocationSequence(window=self.problem.window, allocations=tuple(allocations))


def solve_problem_dp(
        problem: WindowProblem,
        workers: Optional[int] = None,
        max_states: Optional[int] = None
) -> Tuple[AllocationSequence, float]:
    space = precheck(problem)
    solver = DpSolver(problem, space, max_states=max_states, workers=workers)
    sequence, value = solver.solve()
    score = evaluate_problem(problem, sequence)
    if not math.isclose(score.total, value, rel_tol=1e-9, abs_tol=1e-6):
        logger.warning(f"⚠️ Valor DP {value} difiere de la evaluación {score.total}")
    return sequence, score.total


def solve_dp(
        scenario: Scenario,
        forecast: ArrivalForecast,
        window: int = 0,
        granularity: Optional[float] = None,
        workers: Optional[int] = None,
        max_states: Optional[int] = None
) -> AllocationSequence:
    """
    Plan óptimo de una ventana para la predicción dada; entre planes
    empatados, el de codificación lexicográficamente menor.

    Raises:
        InfeasibleError: El escenario no admite planes factibles
        StateBudgetExceeded: La frontera superó MIGSCHED_DP_MAX_STATES
    """
    problem = rescale_window(scenario, window, forecast, granularity)
    sequence, value = solve_problem_dp(problem, workers=workers, max_states=max_states)
    logger.info(f"✅ Plan DP ventana {window}: goodput={value:.4f}")
    return sequence
