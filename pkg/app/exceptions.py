# ======================================================================================
# EXCEPCIONES
# ======================================================================================
from typing import Optional


class MigSchedError(ValueError):
    """
    Error de negocio del planificador.

    Cada error lleva un código estable (kebab-case) que usan la CLI,
    la API y los tests para identificar la causa.
    """

    code: str = "error"

    def __init__(
            self,
            message: str,
            code: Optional[str] = None,
            field_path: Optional[str] = None,
            config_id: Optional[str] = None
    ):
        self.code = code or self.code
        self.field_path = field_path
        self.config_id = config_id
        super().__init__(message)

    def __str__(self) -> str:
        base = f"{self.code}: {super().__str__()}"
        if self.config_id:
            base += f" [configuración {self.config_id}]"
        if self.field_path:
            base += f" [campo {self.field_path}]"
        return base


class CatalogError(MigSchedError):
    """Catálogo MIG inválido"""
    code = "catalog-invalid"


class ScenarioError(MigSchedError):
    """Escenario, traza o perfil inválido"""
    code = "scenario-invalid"


class PredictorError(MigSchedError):
    """Predictor mal configurado o con historia insuficiente"""
    code = "predictor-invalid"


class InfeasibleError(MigSchedError):
    """El escenario no admite ningún plan factible"""
    code = "infeasible"


class InfeasiblePlanError(MigSchedError):
    """Se intentó evaluar o simular un plan que viola restricciones"""
    code = "infeasible-plan"

    def __init__(self, message: str, violations: Optional[list] = None, **kwargs):
        self.violations = violations or []
        super().__init__(message, **kwargs)


class StateBudgetExceeded(MigSchedError):
    """El programa dinámico superó el límite de estados"""
    code = "state-budget-exceeded"

    def __init__(self, message: str, frontier_size: int = 0, second: int = 0):
        self.frontier_size = frontier_size
        self.second = second
        super().__init__(message)


class SearchSpaceExceeded(MigSchedError):
    """La búsqueda exhaustiva supera el espacio configurado"""
    code = "search-space-exceeded"

    def __init__(self, message: str, space: int = 0, cap: int = 0):
        self.space = space
        self.cap = cap
        super().__init__(message)


class PreinitError(MigSchedError):
    """Acción de pre-inicialización inconsistente con el plan"""
    code = "preinit-inconsistent"


class LpWriteError(MigSchedError):
    """Fallo al escribir el documento LP"""
    code = "lp-write-failure"
