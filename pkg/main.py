"""
FastAPI Application for MIG Scheduling
Planifica y simula particiones MIG de una GPU para inferencia y reentrenamiento
"""
import logging
from contextlib import asynccontextmanager
from datetime import datetime

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.api.v1 import api_v1_router
from app.api.v1.catalog_router import default_catalog
from app.config import settings, setup_logging
from app.middleware.logging_middleware import LoggingMiddleware
from app.models.responses import StatusResponse

setup_logging()

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Validar el catálogo por defecto al iniciar la aplicación"""
    logger.info("🚀 Iniciando aplicación FastAPI - MIG Scheduler")
    try:
        catalog = default_catalog()
        logger.info(f"📁 Catálogo por defecto: {catalog.id} ({len(catalog.configurations)} configuraciones)")
    except Exception as e:
        logger.warning(f"⚠️ No se pudo cargar el catálogo por defecto: {str(e)}")

    yield

    logger.info("🛑 Cerrando aplicación")


app = FastAPI(
    title="MIG Scheduler API",
    description="API para planificar particiones MIG con inferencia y reentrenamiento continuo",
    version="1.0.0",
    lifespan=lifespan
)

# Configurar CORS para permitir requests desde cualquier dominio
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)
app.add_middleware(LoggingMiddleware)

# Incluir todos los routers de la API v1
app.include_router(api_v1_router)


@app.get("/", tags=["Health"])
async def root():
    """Endpoint raíz"""
    return {
        "message": "MIG Scheduler API",
        "version": "1.0.0",
        "status": "running"
    }


@app.get("/health", response_model=StatusResponse, tags=["Health"])
async def health_check():
    """Verificar estado de la aplicación y del catálogo por defecto"""
    try:
        catalog = default_catalog()
    except Exception as e:
        logger.warning(f"⚠️ Catálogo por defecto inválido: {str(e)}")
        return StatusResponse(
            status="degraded",
            timestamp=datetime.now(),
            default_catalog=settings.DEFAULT_CATALOG
        )

    return StatusResponse(
        status="healthy",
        timestamp=datetime.now(),
        default_catalog=settings.DEFAULT_CATALOG,
        catalog_id=catalog.id,
        configurations=len(catalog.configurations)
    )


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "main:app",
        host="0.0.0.0",
        port=8000,
        reload=True,
        log_level="info"
    )
