import logging
from pathlib import Path
from typing import Any, Dict, Union

import yaml

from app.exceptions import CatalogError

logger = logging.getLogger(__name__)


class CatalogRepository:
    """
    Repositorio de catálogos MIG.
    Capa de acceso a datos - solo lee y escribe documentos YAML.
    """

    def __init__(self, base_path: Union[str, Path, None] = None):
        self.base_path = Path(base_path) if base_path else None

    def resolve(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        if self.base_path and not path.is_absolute():
            return self.base_path / path
        return path

    def read_document(self, path: Union[str, Path]) -> Dict[str, Any]:
        """
        Lee el documento YAML de un catálogo.

        Args:
            path: Ruta del archivo

        Returns:
            Diccionario con el contenido del documento

        Raises:
            CatalogError: Si el archivo no existe o no es YAML válido
        """
        file_path = self.resolve(path)
        if not file_path.exists():
            raise CatalogError(f"No existe el catálogo '{file_path}'", code="missing-file")
        return self.parse_text(file_path.read_text(encoding="utf-8"), source=str(file_path))

    @staticmethod
    def parse_text(text: str, source: str = "<texto>") -> Dict[str, Any]:
        try:
            document = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise CatalogError(f"YAML inválido en {source}: {e}", code="parse-failure")
        if not isinstance(document, dict):
            raise CatalogError(f"El catálogo {source} debe ser un mapeo", code="parse-failure")
        logger.debug(f"📄 Documento de catálogo leído: {source}")
        return document

    def write_document(self, path: Union[str, Path], document: Dict[str, Any]) -> Path:
        file_path = self.resolve(path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        file_path.write_text(
            yaml.safe_dump(document, sort_keys=False, allow_unicode=True),
            encoding="utf-8"
        )
        return file_path
