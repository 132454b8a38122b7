import logging
from pathlib import Path
from typing import Any, Dict, FrozenSet, List, Optional, Set, Tuple, Union

from pydantic import ValidationError

from app.exceptions import CatalogError
from app.repositories.catalog_repository import CatalogRepository
from app.schemas.catalog_schema import (
    Allocation, Catalog, DiffReport, InstanceSlot, MigConfiguration, Placement, Violation,
    is_retraining, DEFAULT_GPC_COUNT
)
from app.schemas.document_schema import CatalogDocument, parse_slot_token

logger = logging.getLogger(__name__)

KNOWN_CODES = ("overlapping-slices", "size-out-of-range", "duplicate-slot-id", "duplicate-configuration-id")


def slot_id_for(size: int, slice_start: int) -> str:
    """Identificador estable de una instancia: `<size>g@<slice_start>`"""
    return f"{size}g@{slice_start}"


# ======================================================================================
# CARGA
# ======================================================================================

class CatalogService:
    """
    Servicio de catálogos MIG.
    Convierte documentos en catálogos validados y mantiene el catálogo por defecto.
    """

    def __init__(self, repository: Optional[CatalogRepository] = None):
        self.repository = repository or CatalogRepository()
        self._cache: Dict[str, Catalog] = {}

    def load(self, path: Union[str, Path]) -> Catalog:
        """
        Carga y valida un catálogo desde archivo (con cache por ruta).

        Raises:
            CatalogError: Documento inválido; el mensaje nombra la configuración
        """
        key = str(Path(path).resolve())
        if key not in self._cache:
            document = self.repository.read_document(path)
            self._cache[key] = parse_catalog(document)
            logger.info(
                f"📦 Catálogo cargado: {self._cache[key].id} "
                f"({len(self._cache[key].configurations)} configuraciones)"
            )
        return self._cache[key]


def load_catalog(source: Union[str, Path, Dict[str, Any]]) -> Catalog:
    """
    Carga un catálogo desde una ruta, un texto YAML o un documento ya parseado.

    Args:
        source: Ruta a un archivo .yaml, texto YAML o diccionario

    Returns:
        Catálogo validado
    """
    if isinstance(source, dict):
        return parse_catalog(source)
    if isinstance(source, Path):
        return CatalogService().load(source)
    text = str(source)
    # una sola línea que no es un mapeo en flujo es una ruta
    if "\n" not in text and not text.lstrip().startswith("{"):
        return CatalogService().load(text)
    return parse_catalog(CatalogRepository.parse_text(text))


def parse_catalog(document: Dict[str, Any]) -> Catalog:
    """Valida el documento y construye el Catalog"""
    try:
        doc = CatalogDocument(**document)
    except ValidationError as e:
        raise _catalog_error(e, document)
    except TypeError as e:
        raise CatalogError(f"Documento de catálogo inválido: {e}", code="parse-failure")

    configurations = []
    for index, config_doc in enumerate(doc.configurations):
        configurations.append(_build_configuration(config_doc.id, config_doc.slots, index, doc.gpc_count))

    rules = {int(size): tuple(sorted(set(starts))) for size, starts in doc.placement_rules.items()}
    for config in configurations:
        _check_placement_rules(config, rules)

    try:
        return Catalog(
            id=doc.id,
            gpc_count=doc.gpc_count,
            configurations=tuple(configurations),
            placement_rules=rules
        )
    except ValidationError as e:
        raise _catalog_error(e, document)


def _build_configuration(config_id: str, tokens: List[str], index: int, gpc_count: int) -> MigConfiguration:
    slots = []
    for position, token in enumerate(tokens):
        try:
            size, start = parse_slot_token(token)
        except ValueError as e:
            raise CatalogError(
                str(e), code="parse-failure", config_id=config_id,
                field_path=f"configurations.{index}.slots.{position}"
            )
        if size < 1 or size > gpc_count or start + size > gpc_count:
            raise CatalogError(
                f"Instancia {size}@{start} fuera de {gpc_count} GPCs",
                code="size-out-of-range", config_id=config_id,
                field_path=f"configurations.{index}.slots.{position}"
            )
        slots.append(InstanceSlot(id=slot_id_for(size, start), size=size, slice_start=start))
    try:
        return MigConfiguration(id=config_id, slots=tuple(sorted(slots, key=lambda s: s.slice_start)))
    except ValidationError as e:
        message = _first_message(e)
        code = next((c for c in KNOWN_CODES if c in message), "catalog-invalid")
        raise CatalogError(message, code=code, config_id=config_id, field_path=f"configurations.{index}")


def _check_placement_rules(config: MigConfiguration, rules: Dict[int, Tuple[int, ...]]) -> None:
    if not rules:
        return
    for slot in config.slots:
        if slot.slice_start not in rules.get(slot.size, ()):
            raise CatalogError(
                f"La instancia {slot.size}@{slot.slice_start} no respeta las reglas de ubicación",
                code="placement-rule-violation",
                config_id=config.id
            )


def _first_message(error: ValidationError) -> str:
    first = error.errors()[0]
    return str(first.get("msg", error))


def _catalog_error(error: ValidationError, document: Dict[str, Any]) -> CatalogError:
    first = error.errors()[0]
    loc = [str(part) for part in first.get("loc", ())]
    config_id = None
    if len(loc) >= 2 and loc[0] == "configurations" and loc[1].isdigit():
        try:
            config_id = str(document["configurations"][int(loc[1])].get("id"))
        except (KeyError, IndexError, AttributeError, TypeError):
            config_id = None
    message = str(first.get("msg", error))
    code = next((c for c in KNOWN_CODES if c in message), "catalog-invalid")
    return CatalogError(message, code=code, field_path=".".join(loc) or None, config_id=config_id)


# ======================================================================================
# ENUMERACIÓN DE CONFIGURACIONES
# ======================================================================================

def enumerate_configurations(
        rules: Dict[int, Tuple[int, ...]],
        gpc_count: int = DEFAULT_GPC_COUNT
) -> List[Tuple[Placement, ...]]:
    """
    Enumera por llenado recursivo de slices todas las ubicaciones maximales.

    En cada slice libre se prueba primero el tamaño mayor permitido y, al
    final, dejar el slice vacío. Una ubicación es maximal si ninguna regla
    cabe en sus slices libres.

    Args:
        rules: tamaño → slices de inicio permitidos
        gpc_count: cantidad de GPCs

    Returns:
        Lista de ubicaciones ((slice_start, size), ...) en orden de descubrimiento
    """
    sizes = sorted(rules, reverse=True)
    found: List[Tuple[Placement, ...]] = []

    def fits(free: Set[int], size: int, start: int) -> bool:
        return start + size <= gpc_count and all(s in free for s in range(start, start + size))

    def fill(position: int, free: Set[int], chosen: List[Placement]) -> None:
        if position >= gpc_count:
            maximal = not any(
                fits(free, size, start) for size in sizes for start in rules[size]
            )
            if maximal and chosen:
                found.append(tuple(chosen))
            return
        if position not in free:
            fill(position + 1, free, chosen)
            return
        for size in sizes:
            if position in rules[size] and fits(free, size, position):
                taken = set(range(position, position + size))
                fill(position + size, free - taken, chosen + [(position, size)])
        fill(position + 1, free, chosen)

    fill(0, set(range(gpc_count)), [])
    return found


def size_multisets(placements: List[Tuple[Placement, ...]]) -> List[Tuple[int, ...]]:
    """Multiconjuntos de tamaños distintos, en orden de primera aparición"""
    seen: List[Tuple[int, ...]] = []
    for placement in placements:
        multiset = tuple(sorted((size for _, size in placement), reverse=True))
        if multiset not in seen:
            seen.append(multiset)
    return seen


def placements(catalog: Catalog) -> List[Placement]:
    """Instancias físicas distintas (slice_start, size) presentes en el catálogo"""
    return sorted({slot.placement for config in catalog.configurations for slot in config.slots})


# ======================================================================================
# VALIDACIÓN Y DIFERENCIAS
# ======================================================================================

def validate_allocation(catalog: Catalog, alloc: Allocation) -> List[Violation]:
    """
    Verifica una asignación aislada: una configuración del catálogo, slots
    existentes, sin compartir instancias y a lo sumo un slot por reentrenamiento.

    Returns:
        Lista de violaciones (vacía si es válida)
    """
    config = catalog.get(alloc.configuration_id)
    if config is None:
        return [Violation(
            code="unknown-configuration",
            family="single-configuration",
            second=alloc.second,
            detail=f"La configuración '{alloc.configuration_id}' no está en el catálogo"
        )]

    violations: List[Violation] = []
    owners: Dict[str, str] = {}
    for task in sorted(alloc.assignments):
        slot_ids = alloc.assignments[task]
        for slot_id in sorted(slot_ids):
            if config.slot(slot_id) is None:
                violations.append(Violation(
                    code="unknown-slot", family="single-configuration", second=alloc.second, task=task,
                    detail=f"El slot '{slot_id}' no existe en '{config.id}'"
                ))
            elif slot_id in owners:
                violations.append(Violation(
                    code="instance-shared", family="instance-sharing", second=alloc.second, task=task,
                    detail=f"El slot '{slot_id}' ya está asignado a '{owners[slot_id]}'"
                ))
            else:
                owners[slot_id] = task
        if is_retraining(task) and len(slot_ids) > 1:
            violations.append(Violation(
                code="retraining-multi-instance", family="no-interruption", second=alloc.second, task=task,
                detail=f"El reentrenamiento ocupa {len(slot_ids)} instancias"
            ))
    return violations


def task_placements(catalog: Catalog, alloc: Allocation, task: str) -> FrozenSet[Placement]:
    """Conjunto de (slice_start, size) que ocupa la tarea en la asignación"""
    config = catalog.get(alloc.configuration_id)
    if config is None:
        return frozenset()
    result = set()
    for slot_id in alloc.slots_of(task):
        slot = config.slot(slot_id)
        if slot is not None:
            result.add(slot.placement)
    return frozenset(result)


def occupied_slices(catalog: Catalog, alloc: Allocation) -> Set[int]:
    """Slices ocupados por instancias asignadas a alguna tarea"""
    config = catalog.get(alloc.configuration_id)
    if config is None:
        return set()
    return {
        s for slot_id in alloc.used_slot_ids()
        for slot in [config.slot(slot_id)] if slot is not None
        for s in slot.slices
    }


def reconfiguration_diff(prev: Allocation, next: Allocation, catalog: Catalog) -> DiffReport:
    """
    Compara dos asignaciones consecutivas por identidad de slices.

    R[t] es verdadero si el conjunto de (slice_start, size) de la tarea
    cambia; created/destroyed comparan las instancias de ambas configuraciones.
    """
    tasks = sorted(set(prev.assignments) | set(next.assignments))
    flags = {
        task: task_placements(catalog, prev, task) != task_placements(catalog, next, task)
        for task in tasks
    }

    prev_config = catalog.get(prev.configuration_id)
    next_config = catalog.get(next.configuration_id)
    prev_slots = {slot.placement: slot for slot in (prev_config.slots if prev_config else ())}
    next_slots = {slot.placement: slot for slot in (next_config.slots if next_config else ())}

    return DiffReport(
        flags=flags,
        weak_flags=weak_reconfiguration_flags(prev, next, catalog),
        created=[next_slots[p] for p in sorted(next_slots) if p not in prev_slots],
        destroyed=[prev_slots[p] for p in sorted(prev_slots) if p not in next_slots]
    )


def weak_reconfiguration_flags(prev: Allocation, next: Allocation, catalog: Catalog) -> Dict[str, bool]:
    """Prueba débil: la tarea cambia su cantidad de instancias (N) o de GPCs (Y)"""
    result = {}
    for task in sorted(set(prev.assignments) | set(next.assignments)):
        before = task_placements(catalog, prev, task)
        after = task_placements(catalog, next, task)
        result[task] = (
            len(before) != len(after)
            or sum(size for _, size in before) != sum(size for _, size in after)
        )
    return result
