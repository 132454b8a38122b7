import csv
import json
import logging
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Union

from pydantic import BaseModel

logger = logging.getLogger(__name__)

FLOAT_DIGITS = 9


def normalize(value: Any) -> Any:
    """Redondea floats y convierte modelos para que el JSON sea byte-idéntico entre corridas"""
    if isinstance(value, BaseModel):
        return normalize(value.model_dump(mode="json"))
    if isinstance(value, float):
        rounded = round(value, FLOAT_DIGITS)
        return 0.0 if rounded == 0 else rounded
    if isinstance(value, dict):
        return {str(k): normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [normalize(v) for v in value]
    return value


class ReportRepository:
    """
    Repositorio de artefactos de salida (planes, métricas, comparaciones, LP).
    Todo se escribe sin timestamps y con claves ordenadas.
    """

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)

    def _path(self, filename: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / filename

    def write_json(self, filename: str, payload: Any) -> Path:
        path = self._path(filename)
        text = json.dumps(normalize(payload), sort_keys=True, indent=2, ensure_ascii=False)
        path.write_text(text + "\n", encoding="utf-8")
        logger.info(f"📝 Artefacto escrito: {path}")
        return path

    def write_csv(self, filename: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        path = self._path(filename)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([self._cell(value) for value in row])
        logger.info(f"📝 Tabla escrita: {path}")
        return path

    def list_files(self) -> List[str]:
        if not self.out_dir.exists():
            return []
        return sorted(p.name for p in self.out_dir.iterdir() if p.is_file())

    @staticmethod
    def _cell(value: Any) -> Any:
        if isinstance(value, float):
            return f"{value:.6f}"
        return value
