# ======================================================================================
# PRE-INICIALIZACIÓN DE INSTANCIAS
# ======================================================================================
# Una instancia que aparece en el paso s+1 se puede crear durante el paso s
# si todos sus slices están libres en s. Si todas las instancias nuevas de
# una inferencia se crearon así, su reconfiguración no cuesta overhead.
import logging
from typing import Dict, List, Optional, Set, Tuple

from app.exceptions import PreinitError
from app.schemas.catalog_schema import Catalog, Placement, inference_task, is_retraining
from app.schemas.plan_schema import AllocationSequence
from app.schemas.preinit_schema import EffectivePlan, HiddenTransition, PreinitAction
from app.services.catalog_service import occupied_slices, task_placements

logger = logging.getLogger(__name__)


def plan_preinit(sequence: AllocationSequence, catalog: Catalog) -> List[PreinitAction]:
    """
    Recorre pares consecutivos (A_s, A_s+1) y propone crear antes de tiempo
    cada instancia asignada de A_s+1 que no existe en A_s y cuyos slices
    están libres en A_s.

    Returns:
        Acciones ordenadas por paso y posición de la instancia
    """
    actions: List[PreinitAction] = []
    for current, following in zip(sequence.allocations, sequence.allocations[1:]):
        config = catalog.get(current.configuration_id)
        next_config = catalog.get(following.configuration_id)
        if config is None or next_config is None:
            continue
        existing = {slot.placement for slot in config.slots}
        busy = occupied_slices(catalog, current)
        used = following.used_slot_ids()
        for slot in sorted(next_config.slots, key=lambda s: s.placement):
            if slot.id not in used or slot.placement in existing:
                continue
            if busy.intersection(slot.slices):
                continue
            covers = tuple(sorted(
                task for task, slots in following.assignments.items()
                if slot.id in slots and not is_retraining(task)
            ))
            actions.append(PreinitAction(fire_second=current.second, target=slot, covers_tasks=covers))
    logger.debug(f"🔍 Pre-inicialización: {len(actions)} acciones")
    return actions


def _check_action(sequence: AllocationSequence, catalog: Catalog, action: PreinitAction) -> None:
    s = action.fire_second
    if s + 1 >= len(sequence):
        raise PreinitError(f"La acción en el paso {s} no tiene paso siguiente")
    current, following = sequence.allocations[s], sequence.allocations[s + 1]
    config = catalog.get(current.configuration_id)
    next_config = catalog.get(following.configuration_id)
    target = next_config.slot(action.target.id) if next_config else None
    if target is None or target.placement != action.target.placement:
        raise PreinitError(
            f"La instancia {action.target.id} no pertenece a la configuración del paso {s + 1}",
            config_id=following.configuration_id
        )
    if config and any(slot.placement == target.placement for slot in config.slots):
        raise PreinitError(f"La instancia {target.id} ya existe en el paso {s}", config_id=config.id)
    if occupied_slices(catalog, current).intersection(target.slices):
        raise PreinitError(f"La instancia {target.id} pisa slices ocupados en el paso {s}")


def apply_preinit(
        sequence: AllocationSequence,
        actions: Optional[List[PreinitAction]],
        catalog: Catalog
) -> EffectivePlan:
    """
    Plan efectivo: Ψ_eff = 0 para (inferencia, s+1) cuando todas las
    instancias que la tarea adquiere en s+1 fueron pre-creadas en s.
    Una pre-creación parcial no reduce el overhead.

    Raises:
        PreinitError: Acción inconsistente con el plan
    """
    actions = list(actions or [])
    created: Dict[int, Set[Placement]] = {}
    for action in actions:
        _check_action(sequence, catalog, action)
        created.setdefault(action.fire_second, set()).add(action.target.placement)

    hidden: List[HiddenTransition] = []
    tasks = sorted({
        task for alloc in sequence.allocations for task in alloc.assignments if not is_retraining(task)
    })
    for s in range(1, len(sequence)):
        ready = created.get(s - 1)
        if not ready:
            continue
        before, after = sequence.allocations[s - 1], sequence.allocations[s]
        for task in tasks:
            acquired = task_placements(catalog, after, task) - task_placements(catalog, before, task)
            if acquired and acquired <= ready:
                hidden.append(HiddenTransition(task=task, second=s))
    if hidden:
        logger.debug(f"🔍 Transiciones ocultas: {[(h.task, h.second) for h in hidden]}")
    return EffectivePlan(sequence=sequence, actions=actions, hidden=tuple(hidden))


def preinit_plan(sequence: AllocationSequence, catalog: Catalog, enabled: bool = True) -> EffectivePlan:
    """plan_preinit + apply_preinit; sin pre-inicialización devuelve el plan tal cual"""
    if not enabled:
        return EffectivePlan.plain(sequence)
    return apply_preinit(sequence, plan_preinit(sequence, catalog), catalog)


def overhead_summary(plan: EffectivePlan, catalog: Catalog, overhead: Dict[str, float]) -> Tuple[int, float]:
    """
    (reconfiguraciones de inferencia, segundos de overhead efectivo) del plan.

    Args:
        overhead: Ψ en segundos por nombre de modelo
    """
    hidden = plan.hidden_set()
    count, seconds = 0, 0.0
    allocations = plan.sequence.allocations
    for before, after in zip(allocations, allocations[1:]):
        for model, psi in overhead.items():
            task = inference_task(model)
            if task_placements(catalog, before, task) != task_placements(catalog, after, task):
                count += 1
                if (task, after.second) not in hidden:
                    seconds += psi
    return count, seconds
