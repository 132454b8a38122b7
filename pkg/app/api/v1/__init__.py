# app/api/v1/__init__.py
"""
Centraliza la exportación de todos los routers de la API v1.
De esta forma main.py solo necesita importar una cosa.
"""

from fastapi import APIRouter

from .catalog_router import catalog_router
from .plan_router import plan_router
from .scenario_router import scenario_router

api_v1_router = APIRouter(
    prefix="/v1",
    tags=["API v1"],
    responses={404: {"description": "Not found"}},
)

api_v1_router.include_router(catalog_router)
api_v1_router.include_router(scenario_router)
api_v1_router.include_router(plan_router)

__all__ = [
    "api_v1_router",
    "catalog_router",
    "scenario_router",
    "plan_router",
]
