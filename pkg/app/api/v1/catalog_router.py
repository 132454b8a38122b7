from fastapi import APIRouter, HTTPException, status

from app.config import settings
from app.models.responses import DiffRequest, ViolationsResponse
from app.schemas.catalog_schema import Allocation, Catalog, DiffReport
from app.services.catalog_service import CatalogService, reconfiguration_diff, validate_allocation

catalog_router = APIRouter(prefix='/catalog', tags=['Catálogo'])

catalog_service = CatalogService()


def default_catalog() -> Catalog:
    return catalog_service.load(settings.DEFAULT_CATALOG)


# ==================== READ ====================

@catalog_router.get(
    "/",
    response_model=Catalog,
    status_code=status.HTTP_200_OK,
    summary="Catálogo por defecto",
    description="Configuraciones MIG legales del catálogo configurado en MIGSCHED_DEFAULT_CATALOG"
)
async def get_catalog():
    """
    Obtiene el catálogo por defecto.

    **Errores:**
    - 400: Catálogo inválido
    - 500: Error interno del servidor
    """
    try:
        return default_catalog()
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    except Exception as e:
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Error al cargar el catálogo: {str(e)}"
        )


# ==================== VALIDACIÓN ====================

@catalog_router.post(
    "/validate-allocation",
    response_model=ViolationsResponse,
    status_code=status.HTTP_200_OK,
    summary="Validar una asignación",
    description="Verifica una asignación aislada contra el catálogo por defecto"
)
async def post_validate_allocation(allocation: Allocation):
    """
    Valida una asignación.

    **Retorna:**
    - ok y la lista de violaciones (configuración desconocida, slot inexistente,
      instancia compartida, reentrenamiento en más de una instancia)
    """
    try:
        violations = validate_allocation(default_catalog(), allocation)
        return ViolationsResponse(ok=not violations, violations=violations)
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    except Exception as e:
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Error al validar la asignación: {str(e)}"
        )


@catalog_router.post(
    "/diff",
    response_model=DiffReport,
    status_code=status.HTTP_200_OK,
    summary="Diferencia entre asignaciones",
    description="Flags de reconfiguración por tarea e instancias creadas/destruidas"
)
async def post_diff(data: DiffRequest):
    try:
        return reconfiguration_diff(data.prev, data.next, default_catalog())
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    except Exception as e:
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Error al comparar asignaciones: {str(e)}"
        )
