from fastapi import APIRouter, HTTPException, status

from app.exceptions import MigSchedError
from app.models.responses import ScenarioValidateRequest, ScenarioValidateResponse
from app.schemas.run_schema import RunConfig
from app.services.pipeline_service import PipelineService

scenario_router = APIRouter(prefix='/scenarios', tags=['Escenarios'])


@scenario_router.post(
    "/validate",
    response_model=ScenarioValidateResponse,
    status_code=status.HTTP_200_OK,
    summary="Validar un escenario",
    description="Carga el escenario y pre-chequea la factibilidad de cada ventana"
)
def post_validate_scenario(data: ScenarioValidateRequest):
    """
    Valida un escenario del filesystem del servidor.

    **Retorna:**
    - ok=true con la cantidad de ventanas, u ok=false con el código del error
      (mismos códigos que el comando `validate`)
    """
    try:
        service = PipelineService(RunConfig(scenario=data.path, granularity=data.granularity))
        windows = service.validate()
        return ScenarioValidateResponse(ok=True, name=service.scenario.name, windows=len(windows))
    except MigSchedError as e:
        return ScenarioValidateResponse(ok=False, code=e.code, message=str(e))
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    except Exception as e:
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Error al validar el escenario: {str(e)}"
        )
