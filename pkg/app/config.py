# ======================================================================================
# CONFIGURACIÓN
# ======================================================================================
import logging
import sys
from datetime import datetime
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Configuración de la aplicación (variables MIGSCHED_* o archivo .env)"""

    # Archivos
    DEFAULT_CATALOG: str = "./data/catalogs/a100.yaml"
    SCENARIO: Optional[str] = None
    OUT: str = "./Output"

    # Planificación
    SOLVER: str = "dp"
    PREDICTOR: str = "oracle"
    PREINIT: bool = True
    GRANULARITY: Optional[float] = None
    EQ11_AS_PRINTED: bool = False

    # Simulación
    SEED: Optional[int] = 0

    # Límites de los solvers
    DP_MAX_STATES: int = 2_000_000
    BRUTEFORCE_MAX_SPACE: int = 50_000_000
    BIG_M: int = 10000

    # Concurrencia
    WORKERS: int = 1

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: bool = False

    model_config = SettingsConfigDict(
        env_prefix="MIGSCHED_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False
    )


settings = Settings()


def setup_logging(level: Optional[str] = None) -> None:
    """Configurar logging de consola (y archivo diario si LOG_FILE está activo)"""
    handlers: list = [logging.StreamHandler(sys.stderr)]
    if settings.LOG_FILE:
        handlers.append(
            logging.FileHandler(f'migsched_{datetime.now().strftime("%Y%m%d")}.log')
        )

    logging.basicConfig(
        level=(level or settings.LOG_LEVEL).upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True
    )
