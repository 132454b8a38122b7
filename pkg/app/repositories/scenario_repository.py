import csv
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Tuple, Union

import yaml

from app.exceptions import ScenarioError

logger = logging.getLogger(__name__)

TRACE_HEADER = ("second", "model", "count")

TraceRow = Tuple[int, str, int]


class ScenarioRepository:
    """
    Repositorio de escenarios y trazas.
    Capa de acceso a datos - lee el documento YAML del escenario y el CSV de la traza.
    """

    def read_document(self, path: Union[str, Path]) -> Dict[str, Any]:
        """
        Lee el documento YAML del escenario.

        Raises:
            ScenarioError: Si el archivo no existe o no es YAML válido
        """
        file_path = Path(path)
        if not file_path.exists():
            raise ScenarioError(f"No existe el escenario '{file_path}'", code="missing-file")
        try:
            document = yaml.safe_load(file_path.read_text(encoding="utf-8"))
        except yaml.YAMLError as e:
            raise ScenarioError(f"YAML inválido en {file_path}: {e}", code="parse-failure")
        if not isinstance(document, dict):
            raise ScenarioError(f"El escenario {file_path} debe ser un mapeo", code="parse-failure")
        return document

    def read_trace(self, path: Union[str, Path]) -> List[TraceRow]:
        """
        Lee una traza `second,model,count`.

        Returns:
            Lista de filas (second, model, count) en el orden del archivo

        Raises:
            ScenarioError: Archivo faltante, encabezado o fila inválida
        """
        file_path = Path(path)
        if not file_path.exists():
            raise ScenarioError(f"No existe la traza '{file_path}'", code="missing-file")

        rows: List[TraceRow] = []
        with file_path.open(newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != TRACE_HEADER:
                raise ScenarioError(
                    f"Encabezado inválido en {file_path}: se espera {','.join(TRACE_HEADER)}",
                    code="trace-invalid",
                    field_path="trace"
                )
            for line_number, row in enumerate(reader, start=2):
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) != 3:
                    raise ScenarioError(
                        f"Fila {line_number} de {file_path}: se esperan 3 columnas",
                        code="trace-invalid",
                        field_path="trace"
                    )
                try:
                    second, model, count = int(row[0]), row[1].strip(), int(row[2])
                except ValueError:
                    raise ScenarioError(
                        f"Fila {line_number} de {file_path}: valores no enteros",
                        code="trace-invalid",
                        field_path="trace"
                    )
                rows.append((second, model, count))

        logger.debug(f"📄 Traza leída: {file_path} ({len(rows)} filas)")
        return rows

    def write_trace(self, path: Union[str, Path], rows: Iterable[TraceRow]) -> Path:
        """Escribe la traza ordenada por (second, model)"""
        file_path = Path(path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        with file_path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(TRACE_HEADER)
            for second, model, count in sorted(rows):
                writer.writerow((second, model, count))
        return file_path

    def write_document(self, path: Union[str, Path], document: Dict[str, Any]) -> Path:
        file_path = Path(path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        file_path.write_text(
            yaml.safe_dump(document, sort_keys=False, allow_unicode=True),
            encoding="utf-8"
        )
        return file_path
