import logging

from fastapi import APIRouter, HTTPException, status

from app.exceptions import InfeasibleError
from app.models.responses import CompareRequest, PlanRequest, PlanResponse, PreinitActionResponse
from app.schemas.metrics_schema import ComparisonReport
from app.schemas.run_schema import RunConfig
from app.services.pipeline_service import PipelineService, allocation_document

logger = logging.getLogger(__name__)

plan_router = APIRouter(tags=['Planes'])


# ==================== PLAN ====================

@plan_router.post(
    "/plans",
    response_model=PlanResponse,
    status_code=status.HTTP_200_OK,
    summary="Planificar una ventana",
    description="Predice llegadas, resuelve la ventana y aplica pre-inicialización"
)
def post_plan(data: PlanRequest):
    """
    Plan de la ventana pedida.

    **Errores:**
    - 409: Escenario infactible
    - 400: Escenario, predictor o parámetros inválidos
    - 500: Error interno del servidor
    """
    try:
        config = RunConfig(
            scenario=data.path,
            solver=data.solver,
            predictor=data.predictor,
            preinit=data.preinit,
            granularity=data.granularity
        )
        service = PipelineService(config)
        if data.window >= service.scenario.window_count:
            raise ValueError(f"Ventana {data.window} fuera de rango")
        window_plan = service.plan_window(data.window)
        return PlanResponse(
            window=data.window,
            predictor=window_plan.forecast,
            allocations=[allocation_document(a) for a in window_plan.sequence.allocations],
            score=window_plan.score,
            preinit_actions=[
                PreinitActionResponse(
                    fire_second=a.fire_second, target=a.target.id, covers_tasks=list(a.covers_tasks)
                )
                for a in window_plan.plan.actions
            ],
            hidden=[{"task": h.task, "second": h.second} for h in window_plan.plan.hidden]
        )
    except InfeasibleError as e:
        raise HTTPException(status_code=status.HTTP_409_CONFLICT, detail=str(e))
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    except Exception as e:
        logger.error(f"❌ Error planificando: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Error al planificar: {str(e)}"
        )


# ==================== COMPARACIÓN ====================

@plan_router.post(
    "/compare",
    response_model=ComparisonReport,
    status_code=status.HTTP_200_OK,
    summary="Comparar planificadores",
    description="DP con pre-inicialización contra reparto estático y bordes de ventana"
)
def post_compare(data: CompareRequest):
    try:
        config = RunConfig(scenario=data.path, **data.model_dump(exclude={"path"}))
        report, _ = PipelineService(config).compare()
        return report
    except InfeasibleError as e:
        raise HTTPException(status_code=status.HTTP_409_CONFLICT, detail=str(e))
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    except Exception as e:
        logger.error(f"❌ Error comparando: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Error al comparar: {str(e)}"
        )
