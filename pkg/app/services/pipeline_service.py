# ======================================================================================
# PIPELINE POR VENTANA
# ======================================================================================
# Al inicio de cada ventana: predecir llegadas con la historia disponible,
# planificar, pre-inicializar y simular contra la traza real. Las ventanas
# son independientes (la accuracy ya viene encadenada desde el escenario).
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from app.exceptions import PredictorError
from app.repositories.report_repository import ReportRepository
from app.schemas.catalog_schema import Allocation
from app.schemas.metrics_schema import ComparisonReport, Metrics, PlannerColumn
from app.schemas.plan_schema import AllocationSequence
from app.schemas.predictor_schema import ArrivalForecast, PredictorSpec
from app.schemas.run_schema import RunConfig, WindowPlan
from app.schemas.workload_schema import Scenario, WindowProblem
from app.services.baseline_service import plan_problem_static, plan_problem_window_boundary, score_gap
from app.services.bruteforce_solver import solve_problem_bruteforce
from app.services.dp_solver import solve_problem_dp
from app.services.plan_evaluation_service import evaluate_problem, precheck
from app.services.plan_model_service import build_plan_model, emit_lp
from app.services.predictor_service import predict_arrivals
from app.services.preinit_service import preinit_plan
from app.services.simulator_service import (
    CSV_HEADER, combine, goodput_report, metrics_rows, run_fluid, run_requests, window_arrivals
)
from app.services.workload_service import load_scenario, rescale_window

logger = logging.getLogger(__name__)

PLANNERS = ("dp", "static", "boundary")


# ==================== DOCUMENTOS ====================

def allocation_document(alloc: Allocation) -> Dict:
    return {
        "second": alloc.second,
        "configuration": alloc.configuration_id,
        "assignments": {task: sorted(slots) for task, slots in sorted(alloc.assignments.items())},
    }


def plan_document(window_plan: WindowPlan, config: RunConfig) -> Dict:
    """Documento JSON de un plan (sin timestamps; listas ordenadas)"""
    plan = window_plan.plan
    return {
        "window": window_plan.window,
        "planner": window_plan.planner,
        "solver": config.solver if window_plan.planner == "dp" else None,
        "predictor": window_plan.forecast,
        "planned_goodput": window_plan.planned_goodput,
        "allocations": [allocation_document(a) for a in plan.sequence.allocations],
        "preinit_actions": [
            {
                "fire_second": action.fire_second,
                "target": action.target.id,
                "covers_tasks": list(action.covers_tasks),
            }
            for action in plan.actions
        ],
        "hidden": [{"task": h.task, "second": h.second} for h in plan.hidden],
    }


# ==================== SERVICIO ====================

class PipelineService:
    """
    Orquesta predictor, planificadores, pre-inicialización y simulador sobre
    todas las ventanas de un escenario.
    """

    def __init__(self, config: RunConfig, scenario: Optional[Scenario] = None):
        self.config = config
        self.scenario = scenario or load_scenario(config.scenario)
        self.granularity = config.granularity if config.granularity is not None else self.scenario.granularity

    # ---------- predicción ----------

    def forecast(self, window: int) -> Tuple[ArrivalForecast, str]:
        """
        Predicción de llegadas de la ventana con la historia previa.

        En la ventana 0 no hay historia: persistence y ewma caen a oracle.
        """
        scenario = self.scenario
        spec = self.config.predictor
        size = scenario.window_size
        actual = window_arrivals(None, scenario, window)
        history = scenario.trace.prefix(window * size)
        try:
            return predict_arrivals(spec, history, actual, size), spec.label()
        except PredictorError as e:
            if e.code != "insufficient-history":
                raise
            logger.warning(f"⚠️ Ventana {window} sin historia para {spec.label()}: se usa oracle")
            return predict_arrivals(PredictorSpec(kind="oracle"), history, actual, size), "oracle"

    def problem(self, window: int, forecast: Optional[ArrivalForecast]) -> WindowProblem:
        return rescale_window(self.scenario, window, forecast, self.granularity)

    # ---------- planificación ----------

    def _solve(self, problem: WindowProblem) -> AllocationSequence:
        if self.config.solver == "bruteforce":
            return solve_problem_bruteforce(problem)[0]
        return solve_problem_dp(problem, workers=self.config.workers)[0]

    def _planner(self, planner: str) -> Callable[[WindowProblem], AllocationSequence]:
        if planner == "dp":
            return self._solve
        if planner == "static":
            return plan_problem_static
        if planner == "boundary":
            return lambda problem: plan_problem_window_boundary(problem)[0]
        raise ValueError(f"Planificador desconocido: '{planner}'")

    def plan_window(self, window: int, planner: str = "dp") -> WindowPlan:
        forecast, label = self.forecast(window)
        problem = self.problem(window, forecast)
        sequence = self._planner(planner)(problem)
        preinit = self.config.preinit and planner == "dp"
        effective = preinit_plan(sequence, problem.catalog, enabled=preinit)
        score = evaluate_problem(problem, sequence, effective)
        logger.info(
            f"✅ Ventana {window} [{planner}]: goodput planificado={score.total:.4f}, "
            f"pre-init={len(effective.actions)} acciones"
        )
        return WindowPlan(
            window=window,
            planner=planner,
            forecast=label,
            plan=effective,
            planned_goodput=score.total,
            score=score
        )

    def plan_all(self, planner: str = "dp") -> List[WindowPlan]:
        return [self.plan_window(w, planner) for w in range(self.scenario.window_count)]

    # ---------- simulación ----------

    def simulate(self, plans: List[WindowPlan], mode: Optional[str] = None) -> Dict[str, Metrics]:
        """Métricas combinadas de todas las ventanas en los modos pedidos"""
        result: Dict[str, Metrics] = {}
        mode = mode or self.config.mode
        if mode in ("fluid", "both"):
            result["fluid"] = combine(
                (run_fluid(p.plan, None, self.scenario, p.window, self.granularity) for p in plans),
                "fluid"
            )
        if mode in ("requests", "both"):
            result["requests"] = combine(
                (
                    run_requests(p.plan, None, self.scenario, self.config.seed, p.window, self.granularity)
                    for p in plans
                ),
                "requests"
            )
        return result

    def column(self, planner: str) -> Tuple[PlannerColumn, List[WindowPlan], Dict[str, Metrics]]:
        plans = self.plan_all(planner)
        metrics = self.simulate(plans, "both" if self.config.wants_requests else "fluid")
        column = PlannerColumn(
            planner=planner,
            preinit=self.config.preinit and planner == "dp",
            planned_goodput=sum(p.planned_goodput for p in plans),
            fluid=goodput_report(metrics["fluid"]),
            requests=goodput_report(metrics["requests"]) if "requests" in metrics else None,
            preinit_actions=sum(len(p.plan.actions) for p in plans)
        )
        return column, plans, metrics

    def compare(self) -> Tuple[ComparisonReport, Dict[str, Dict[str, Metrics]]]:
        """DP (+pre-init), reparto estático y bordes de ventana, en ese orden"""
        workers = max(1, min(self.config.workers, len(PLANNERS)))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(self.column, PLANNERS))
        else:
            results = [self.column(p) for p in PLANNERS]
        report = ComparisonReport(
            scenario=self.scenario.name,
            predictor=self.config.predictor.label(),
            solver=self.config.solver,
            granularity=self.granularity,
            seed=self.config.seed,
            columns=[column for column, _, _ in results]
        )
        return report, {planner: metrics for planner, (_, _, metrics) in zip(PLANNERS, results)}

    # ---------- validación ----------

    def validate(self) -> List[int]:
        """
        Pre-chequeo de factibilidad de cada ventana.

        Raises:
            InfeasibleError: Alguna ventana es infactible por construcción
        """
        for window in range(self.scenario.window_count):
            precheck(self.problem(window, None))
        return list(range(self.scenario.window_count))


# ==================== COMANDOS ====================


def run_plan(config: RunConfig) -> List[Path]:
    """Planifica todas las ventanas y escribe plan_w{n}.json"""
    service = PipelineService(config)
    repository = ReportRepository(config.out)
    return [
        repository.write_json(f"plan_w{p.window}.json", plan_document(p, config))
        for p in service.plan_all("dp")
    ]


def run_simulate(config: RunConfig) -> Dict[str, Metrics]:
    """Planifica, simula y escribe plan_w{n}.json, metrics.json y metrics.csv"""
    service = PipelineService(config)
    repository = ReportRepository(config.out)
    plans = service.plan_all("dp")
    for p in plans:
        repository.write_json(f"plan_w{p.window}.json", plan_document(p, config))
    metrics = service.simulate(plans)
    repository.write_json("metrics.json", {mode: goodput_report(m) for mode, m in metrics.items()})
    if "fluid" in metrics:
        repository.write_csv("metrics.csv", CSV_HEADER, metrics_rows(metrics["fluid"]))
    if "requests" in metrics:
        repository.write_csv("metrics_requests.csv", CSV_HEADER, metrics_rows(metrics["requests"]))
    return metrics


def run_compare(config: RunConfig) -> ComparisonReport:
    """Compara los tres planificadores y escribe compare.json y compare.csv"""
    service = PipelineService(config)
    repository = ReportRepository(config.out)
    report, metrics = service.compare()
    repository.write_json("compare.json", report)
    rows = []
    for planner in PLANNERS:
        for mode, result in metrics[planner].items():
            rows.extend((planner, mode) + row for row in metrics_rows(result))
    repository.write_csv("compare.csv", ("planner", "mode") + CSV_HEADER, rows)
    dp_goodput = report.columns[0].fluid.system_goodput
    for column in report.columns:
        gap = score_gap(dp_goodput, column.fluid.system_goodput)
        logger.info(f"📊 {column.planner}: goodput fluido={column.fluid.system_goodput:.4f} (dp {gap:+.1%})")
    return report


def run_emit_lp(config: RunConfig) -> List[Path]:
    """Escribe model_w{n}.lp para cada ventana con la predicción configurada"""
    service = PipelineService(config)
    paths = []
    for window in range(service.scenario.window_count):
        forecast, _ = service.forecast(window)
        model = build_plan_model(
            service.scenario, forecast, window, service.granularity, config.literal_reconfiguration
        )
        path = Path(config.out) / f"model_w{window}.lp"
        emit_lp(model, path)
        logger.info(f"📝 Modelo LP escrito: {path}")
        paths.append(path)
    return paths


def run_validate(config: RunConfig) -> List[int]:
    return PipelineService(config).validate()
