# ======================================================================================
# ESPACIO DE LAYOUTS DE INFERENCIA
# ======================================================================================
# Un layout es la tupla (por modelo) de conjuntos de instancias (slice_start, size)
# que sirven inferencia en un paso. Solo importa la identidad física: dos
# configuraciones que contienen las mismas instancias dan el mismo layout.
import itertools
import logging
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.schemas.catalog_schema import Catalog, Placement, allocation_encoding, inference_task, retraining_task

logger = logging.getLogger(__name__)

Layout = Tuple[FrozenSet[Placement], ...]
RetrainVector = Tuple[int, ...]


class LayoutSpace:
    """
    Layouts de inferencia factibles para un catálogo y un conjunto de pisos L.

    Para cada layout guarda qué configuraciones lo contienen y cuántos slots
    libres de cada tamaño le quedan, lo que decide qué vectores de
    reentrenamiento r (tamaño por modelo, 0 = no reentrena) puede alojar.
    """

    def __init__(self, catalog: Catalog, floors: Sequence[int]):
        self.catalog = catalog
        self.floors = tuple(floors)
        self.model_count = len(self.floors)
        self.layouts: List[Layout] = []
        self._index: Dict[Layout, int] = {}
        self._hosts: List[List[int]] = []
        self._host_rows: List[Tuple[int, int]] = []
        self._free_rows: List[List[int]] = []
        self._feasible_cache: Dict[RetrainVector, np.ndarray] = {}
        self._enumerate()
        self._row_layout = np.array([layout for layout, _ in self._host_rows], dtype=np.int64)
        self._free_matrix = np.array(self._free_rows, dtype=np.int64).reshape(-1, catalog.gpc_count + 1)
        self.set_ids = self._set_ids()
        logger.debug(f"🔍 Layouts de inferencia: {len(self.layouts)}")

    def __len__(self) -> int:
        return len(self.layouts)

    # ==================== ENUMERACIÓN ====================

    def _enumerate(self) -> None:
        for c, config in enumerate(self.catalog.configurations):
            slots = config.slots
            for choice in itertools.product(range(self.model_count + 1), repeat=len(slots)):
                groups: List[List[Placement]] = [[] for _ in range(self.model_count)]
                for slot, owner in zip(slots, choice):
                    if owner:
                        groups[owner - 1].append(slot.placement)
                if not all(
                        any(size >= self.floors[m] for _, size in groups[m])
                        for m in range(self.model_count)
                ):
                    continue
                layout = tuple(frozenset(group) for group in groups)
                index = self._index.get(layout)
                if index is None:
                    index = len(self.layouts)
                    self._index[layout] = index
                    self.layouts.append(layout)
                    self._hosts.append([])
                if c in self._hosts[index]:
                    continue
                self._hosts[index].append(c)
                free = [0] * (self.catalog.gpc_count + 1)
                for slot, owner in zip(slots, choice):
                    if not owner:
                        free[slot.size] += 1
                self._host_rows.append((index, c))
                self._free_rows.append(free)
        for hosts in self._hosts:
            hosts.sort(key=lambda c: self.catalog.configurations[c].id)

    def _set_ids(self) -> np.ndarray:
        """Id entero del conjunto de instancias de cada modelo en cada layout (M × L)"""
        ids = np.zeros((self.model_count, len(self.layouts)), dtype=np.int64)
        for m in range(self.model_count):
            seen: Dict[FrozenSet[Placement], int] = {}
            for index, layout in enumerate(self.layouts):
                ids[m, index] = seen.setdefault(layout[m], len(seen))
        return ids

    # ==================== CONSULTAS ====================

    def index_of(self, layout: Layout) -> Optional[int]:
        return self._index.get(layout)

    def capacity(self, model: int, capability: Dict[int, float]) -> np.ndarray:
        """Capacidad agregada del modelo en cada layout (Σ capability[size])"""
        return np.array(
            [sum(capability.get(size, 0.0) for _, size in layout[model]) for layout in self.layouts],
            dtype=float
        )

    def feasible(self, retrain: RetrainVector) -> np.ndarray:
        """Máscara de layouts que pueden alojar además los reentrenamientos `retrain`"""
        mask = self._feasible_cache.get(retrain)
        if mask is None:
            demand = np.zeros(self.catalog.gpc_count + 1, dtype=np.int64)
            for size in retrain:
                if size:
                    demand[size] += 1
            mask = np.zeros(len(self.layouts), dtype=bool)
            if len(self._row_layout):
                ok = (self._free_matrix >= demand).all(axis=1)
                mask[self._row_layout[ok]] = True
            self._feasible_cache[retrain] = mask
        return mask

    def feasible_indices(self, retrain: RetrainVector) -> np.ndarray:
        return np.flatnonzero(self.feasible(retrain))

    def projection_keys(self, kept: Sequence[int]) -> Tuple[np.ndarray, int]:
        """
        Clave entera por layout de la proyección sobre los modelos `kept`.

        Dos layouts comparten clave si y solo si asignan las mismas
        instancias a cada modelo de `kept`.
        """
        if not kept:
            return np.zeros(len(self.layouts), dtype=np.int64), 1
        if len(kept) == self.model_count:
            return np.arange(len(self.layouts), dtype=np.int64), len(self.layouts)
        columns = self.set_ids[list(kept), :].T
        _, inverse = np.unique(columns, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        return inverse.astype(np.int64), int(inverse.max()) + 1 if len(inverse) else 1

    # ==================== REALIZACIÓN ====================

    def realize(
            self,
            index: int,
            retrain: RetrainVector,
            model_names: Sequence[str]
    ) -> Tuple[str, Dict[str, FrozenSet[str]]]:
        """
        Realización de codificación mínima del layout con los reentrenamientos.

        Toma la configuración de menor id que lo aloja; los reentrenamientos,
        en orden de nombre de tarea, toman el slot libre de menor id del
        tamaño pedido.

        Returns:
            (id de configuración, asignaciones tarea → ids de slot)
        """
        layout = self.layouts[index]
        used = set().union(*layout) if layout else set()
        order = sorted(range(len(model_names)), key=lambda m: retraining_task(model_names[m]))
        for c in self._hosts[index]:
            config = self.catalog.configurations[c]
            free = sorted((slot for slot in config.slots if slot.placement not in used), key=lambda s: s.id)
            assignments: Dict[str, FrozenSet[str]] = {}
            for m, name in enumerate(model_names):
                assignments[inference_task(name)] = frozenset(
                    slot.id for slot in config.slots if slot.placement in layout[m]
                )
            ok = True
            for m in order:
                if not retrain[m]:
                    continue
                slot = next((s for s in free if s.size == retrain[m]), None)
                if slot is None:
                    ok = False
                    break
                free.remove(slot)
                assignments[retraining_task(model_names[m])] = frozenset({slot.id})
            if ok:
                return config.id, assignments
        raise ValueError(f"El layout {index} no aloja el reentrenamiento {retrain}")

    def encoding_ranks(
            self,
            vectors: Iterable[RetrainVector],
            model_names: Sequence[str]
    ) -> Dict[RetrainVector, np.ndarray]:
        """
        Posición de cada asignación realizable en el orden global de codificaciones.

        Returns:
            vector → rango por layout (-1 donde el layout no aloja el vector)
        """
        encodings: Dict[Tuple[RetrainVector, int], Tuple] = {}
        for vector in vectors:
            for index in self.feasible_indices(vector):
                config_id, assignments = self.realize(int(index), vector, model_names)
                encodings[(vector, int(index))] = allocation_encoding(config_id, assignments)
        ranks = {vector: np.full(len(self.layouts), -1, dtype=np.int64) for vector, _ in encodings}
        for position, (vector, index) in enumerate(sorted(encodings, key=encodings.__getitem__)):
            ranks[vector][index] = position
        return ranks
