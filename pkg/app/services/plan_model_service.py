# ======================================================================================
# MODELO ILP Y EMISIÓN EN FORMATO CPLEX-LP
# ======================================================================================
# El modelo no se resuelve acá: el DP es el solver exacto del proyecto. El
# documento LP permite verificar el óptimo con un solver MILP externo.
import logging
import re
from collections import defaultdict
from pathlib import Path
from typing import Dict, IO, Iterable, List, Optional, Sequence, Tuple, Union

from app.config import settings
from app.exceptions import LpWriteError, MigSchedError
from app.schemas.catalog_schema import inference_task, retraining_task
from app.schemas.plan_schema import LpConstraint, LpVariable, PlanModel
from app.schemas.predictor_schema import ArrivalForecast
from app.schemas.workload_schema import Scenario, WindowProblem
from app.services.plan_evaluation_service import precheck
from app.services.workload_service import rescale_window

logger = logging.getLogger(__name__)

Term = Tuple[str, float]

BINARY = "binary"
INTEGER = "integer"
CONTINUOUS = "continuous"
LINE_WIDTH = 200


# ==================== CONSTRUCCIÓN ====================

class PlanModelBuilder:
    """
    Arma las variables y restricciones del ILP de una ventana.

    Los nombres usan índices y no nombres de modelo: `m{i}i` es la
    inferencia del modelo i y `m{i}r` su reentrenamiento (ver task_aliases).
    """

    def __init__(self, problem: WindowProblem, big_m: int, literal_reconfiguration: bool):
        self.problem = problem
        self.H = big_m
        self.printed = literal_reconfiguration
        self.steps = problem.steps
        self.catalog = problem.catalog
        self.variables: List[LpVariable] = []
        self.constraints: List[LpConstraint] = []
        self._names = set()
        self.objective: List[Term] = []
        self.aliases: Dict[str, str] = {}
        for m, model in enumerate(problem.models):
            self.aliases[f"m{m}i"] = inference_task(model.name)
            self.aliases[f"m{m}r"] = retraining_task(model.name)
        self.tasks = list(self.aliases)

    # ---------- auxiliares ----------

    def var(self, name: str, family: str, kind: str = BINARY, upper: Optional[float] = None) -> str:
        if name in self._names:
            raise ValueError(f"Variable duplicada: {name}")
        self._names.add(name)
        if kind == BINARY:
            upper = 1.0
        self.variables.append(LpVariable(name=name, family=family, kind=kind, upper=upper))
        return name

    def add(self, name: str, family: str, terms: Iterable[Term], sense: str, rhs: float) -> None:
        merged: Dict[str, float] = {}
        for var, coef in terms:
            merged[var] = merged.get(var, 0.0) + coef
        cleaned = [(var, coef) for var, coef in merged.items() if coef != 0]
        if not cleaned:
            return
        self.constraints.append(LpConstraint(name=name, family=family, terms=cleaned, sense=sense, rhs=float(rhs)))

    def x(self, task: str, c: int, j: int, s: int) -> str:
        return f"X_{task}_c{c}_j{j}_s{s}"

    def slots_of(self, predicate) -> List[Tuple[int, int, object]]:
        return [
            (c, j, slot)
            for c, config in enumerate(self.catalog.configurations)
            for j, slot in enumerate(config.slots)
            if predicate(slot)
        ]

    def cap_terms(self, m: int, s: int, scale: float = 1.0) -> List[Term]:
        """CapAgg del modelo m en el paso s como expresión lineal sobre X"""
        model = self.problem.models[m]
        return [
            (self.x(f"m{m}i", c, j, s), scale * model.capability.get(slot.size, 0.0))
            for c, j, slot in self.slots_of(lambda _: True)
        ]

    def check_big_m(self) -> None:
        largest = 0.0
        for model in self.problem.models:
            largest = max(largest, max(model.arrivals, default=0))
            for config in self.catalog.configurations:
                largest = max(largest, sum(model.capability.get(slot.size, 0.0) for slot in config.slots))
        if largest > self.H:
            raise MigSchedError(
                f"H={self.H} es menor que las llegadas o capacidades del escenario ({largest})",
                code="big-m-too-small"
            )

    # ---------- familias ----------

    def build(self) -> PlanModel:
        self.check_big_m()
        self._declare()
        self._configuration()
        self._counts()
        self._retraining()
        self._deployment()
        self._reconfiguration()
        self._completion()
        self._goodput()
        model = PlanModel(
            window=self.problem.window,
            steps=self.steps,
            big_m=self.H,
            literal_reconfiguration=self.printed,
            variables=self.variables,
            constraints=self.constraints,
            objective=self.objective,
            task_aliases=self.aliases
        )
        unused = model.unused_variables()
        assert not unused, f"Variables sin restricciones: {unused[:5]}"
        return model

    def _declare(self) -> None:
        S = self.steps
        gpc = self.catalog.gpc_count
        for task in self.tasks:
            for c, j, _ in self.slots_of(lambda _: True):
                for s in range(S):
                    self.var(self.x(task, c, j, s), "X")
        for c in range(len(self.catalog.configurations)):
            for s in range(S):
                self.var(f"F_c{c}_s{s}", "F")
        for task in self.tasks:
            for s in range(S):
                self.var(f"N_{task}_s{s}", "N", INTEGER, upper=gpc)
                self.var(f"Y_{task}_s{s}", "Y", INTEGER, upper=gpc)
        for m, model in enumerate(self.problem.models):
            for s in range(S):
                self.var(f"C_m{m}_s{s}", "C")
            for s in range(S):
                for k in sorted(model.rt_steps):
                    self.var(f"z_m{m}_s{s}_k{k}", "z")
            for s in range(1, S):
                self.var(f"q_m{m}_s{s}", "q")
                self.var(f"uq_m{m}_s{s}", "uq")
                self.var(f"k_m{m}_s{s}", "k")
                self.var(f"eqG_m{m}_s{s}", "eqG")
                self.var(f"eqI_m{m}_s{s}", "eqI")
                self.var(f"uG_m{m}_s{s}", "uG")
                self.var(f"uI_m{m}_s{s}", "uI")
                if not self.printed:
                    self.var(f"mv_m{m}_s{s}", "mv")
                self.var(f"R_m{m}_s{s}", "R")
                self.var(f"loss_m{m}_s{s}", "loss", CONTINUOUS)
            for s in range(S):
                self.var(f"Comp_m{m}_s{s}", "Comp", CONTINUOUS, upper=1.0)
                self.var(f"Thr_m{m}_s{s}", "Thr", CONTINUOUS)
                self.var(f"w_m{m}_s{s}", "w")
                self.var(f"TC_m{m}_s{s}", "TC", CONTINUOUS)

    def _configuration(self) -> None:
        """Una configuración por paso y ninguna instancia compartida"""
        H = self.H
        for s in range(self.steps):
            for c, config in enumerate(self.catalog.configurations):
                assigned = [
                    (self.x(task, c, j, s), 1.0) for task in self.tasks for j in range(len(config.slots))
                ]
                self.add(f"cfg_lo_c{c}_s{s}", "single-configuration", [(f"F_c{c}_s{s}", 1.0)] + [(v, -1.0) for v, _ in assigned], "<=", 0)
                self.add(f"cfg_hi_c{c}_s{s}", "single-configuration", [(f"F_c{c}_s{s}", float(H))] + [(v, -1.0) for v, _ in assigned], ">=", 0)
                for j in range(len(config.slots)):
                    self.add(
                        f"share_c{c}_j{j}_s{s}", "instance-sharing",
                        [(self.x(task, c, j, s), 1.0) for task in self.tasks], "<=", 1
                    )
            self.add(
                f"one_cfg_s{s}", "single-configuration",
                [(f"F_c{c}_s{s}", 1.0) for c in range(len(self.catalog.configurations))], "=", 1
            )

    def _counts(self) -> None:
        """N = instancias y Y = GPCs de cada tarea"""
        every = self.slots_of(lambda _: True)
        for task in self.tasks:
            for s in range(self.steps):
                self.add(
                    f"defN_{task}_s{s}", "counts",
                    [(f"N_{task}_s{s}", 1.0)] + [(self.x(task, c, j, s), -1.0) for c, j, _ in every], "=", 0
                )
                self.add(
                    f"defY_{task}_s{s}", "counts",
                    [(f"Y_{task}_s{s}", 1.0)] + [(self.x(task, c, j, s), -float(slot.size)) for c, j, slot in every],
                    "=", 0
                )

    def _equals(self, name: str, family: str, flag: str, aux: str, diff: List[Term]) -> None:
        """flag = 1 ⇔ diff = 0 (diff entero)"""
        H = float(self.H)
        neg = [(v, -c) for v, c in diff]
        self.add(f"{name}_a", family, diff + [(flag, H)], "<=", H)
        self.add(f"{name}_b", family, neg + [(flag, H)], "<=", H)
        self.add(f"{name}_c", family, diff + [(flag, H), (aux, H)], ">=", 1)
        self.add(f"{name}_d", family, neg + [(flag, H), (aux, -H)], ">=", 1 - H)

    def _retraining(self) -> None:
        S, H = self.steps, float(self.H)
        for m, model in enumerate(self.problem.models):
            r = f"m{m}r"
            for s in range(S):
                self.add(f"single_r_m{m}_s{s}", "no-interruption", [(f"N_{r}_s{s}", 1.0)], "<=", 1)
                self.add(f"run_m{m}_s{s}", "no-interruption", [(f"C_m{m}_s{s}", 1.0), (f"N_{r}_s{s}", -1.0)], "=", 0)
            for s in range(1, S):
                self._equals(
                    f"eq_q_m{m}_s{s}", "no-interruption", f"q_m{m}_s{s}", f"uq_m{m}_s{s}",
                    [(f"Y_{r}_s{s}", 1.0), (f"Y_{r}_s{s - 1}", -1.0)]
                )
            starts = []
            for s in range(S):
                for k in sorted(model.rt_steps):
                    rt = model.rt_steps[k]
                    z = f"z_m{m}_s{s}_k{k}"
                    starts.append((z, float(rt)))
                    same = [(f"q_m{m}_s{t}", 1.0) for t in range(s + 1, min(s + rt, S))]
                    self.add(f"keep_m{m}_s{s}_k{k}", "no-interruption", same + [(z, -H)], ">=", rt - 1 - H)
                    self.add(f"size_hi_m{m}_s{s}_k{k}", "no-interruption", [(f"Y_{r}_s{s}", 1.0), (z, H)], "<=", H + k)
                    self.add(f"size_lo_m{m}_s{s}_k{k}", "no-interruption", [(f"Y_{r}_s{s}", 1.0), (z, -H)], ">=", k - H)
                    span = [(f"C_m{m}_s{t}", 1.0) for t in range(s, min(s + rt, S))]
                    self.add(f"span_m{m}_s{s}_k{k}", "no-interruption", span + [(z, -H)], ">=", rt - H)
                    if s + rt < S:
                        self.add(f"stop_m{m}_s{s}_k{k}", "no-interruption", [(f"C_m{m}_s{s + rt}", 1.0), (z, 1.0)], "<=", 1)
                    self.add(f"fits_m{m}_s{s}_k{k}", "completion-in-window", [(z, float(s + rt))], "<=", S)
            runs = [(f"C_m{m}_s{s}", 1.0) for s in range(S)]
            self.add(f"total_m{m}", "no-interruption", runs + [(z, -c) for z, c in starts], "=", 0)
            self.add(f"launched_m{m}", "completion-in-window", runs, ">=", 1)
            self.add(f"once_m{m}", "completion-in-window", [(z, 1.0) for z, _ in starts], "=", 1)

    def _deployment(self) -> None:
        for m, model in enumerate(self.problem.models):
            task = f"m{m}i"
            floor = model.min_deploy_gpcs
            large = self.slots_of(lambda slot: slot.size >= floor)
            for s in range(self.steps):
                self.add(
                    f"floor_m{m}_s{s}", "deployment",
                    [(self.x(task, c, j, s), 1.0) for c, j, _ in large], ">=", 1
                )
                self.add(f"floor_sum_m{m}_s{s}", "deployment", [(f"Y_{task}_s{s}", 1.0)], ">=", floor)

    def _reconfiguration(self) -> None:
        placements: Dict[Tuple[int, int], List[Tuple[int, int]]] = defaultdict(list)
        for c, j, slot in self.slots_of(lambda _: True):
            placements[slot.placement].append((c, j))
        for m in range(len(self.problem.models)):
            task = f"m{m}i"
            for s in range(1, self.steps):
                R = f"R_m{m}_s{s}"
                eq_g, eq_i = f"eqG_m{m}_s{s}", f"eqI_m{m}_s{s}"
                self._equals(
                    f"eq_g_m{m}_s{s}", "reconfiguration", eq_g, f"uG_m{m}_s{s}",
                    [(f"Y_{task}_s{s}", 1.0), (f"Y_{task}_s{s - 1}", -1.0)]
                )
                self._equals(
                    f"eq_i_m{m}_s{s}", "reconfiguration", eq_i, f"uI_m{m}_s{s}",
                    [(f"N_{task}_s{s}", 1.0), (f"N_{task}_s{s - 1}", -1.0)]
                )
                if self.printed:
                    self.add(f"r_hi_m{m}_s{s}", "reconfiguration", [(R, 1.0), (eq_g, -1.0), (eq_i, -1.0)], "<=", 0)
                    continue
                mv = f"mv_m{m}_s{s}"
                self.add(f"r_g_m{m}_s{s}", "reconfiguration", [(R, 1.0), (eq_g, 1.0)], ">=", 1)
                self.add(f"r_i_m{m}_s{s}", "reconfiguration", [(R, 1.0), (eq_i, 1.0)], ">=", 1)
                self.add(f"r_mv_m{m}_s{s}", "reconfiguration", [(R, 1.0), (mv, -1.0)], ">=", 0)
                self.add(f"r_hi_m{m}_s{s}", "reconfiguration", [(R, 1.0), (eq_g, 1.0), (eq_i, 1.0), (mv, -1.0)], "<=", 2)
                for p, (start, size) in enumerate(sorted(placements)):
                    now = [(self.x(task, c, j, s), 1.0) for c, j in placements[(start, size)]]
                    before = [(self.x(task, c, j, s - 1), -1.0) for c, j in placements[(start, size)]]
                    self.add(f"mv_a_m{m}_s{s}_p{p}", "slice-identity", [(mv, 1.0)] + [(v, -c) for v, c in now + before], ">=", 0)
                    self.add(f"mv_b_m{m}_s{s}_p{p}", "slice-identity", [(mv, 1.0)] + now + before, ">=", 0)

    def _completion(self) -> None:
        for m in range(len(self.problem.models)):
            self.add(f"comp0_m{m}", "completion", [(f"Comp_m{m}_s0", 1.0)], "<=", 0)
            for s in range(1, self.steps):
                k, before, now = f"k_m{m}_s{s}", f"C_m{m}_s{s - 1}", f"C_m{m}_s{s}"
                self.add(f"kfin_a_m{m}_s{s}", "completion", [(k, 1.0), (before, -1.0), (now, 1.0)], ">=", 0)
                self.add(f"kfin_b_m{m}_s{s}", "completion", [(k, 1.0), (before, -1.0)], "<=", 0)
                self.add(f"kfin_c_m{m}_s{s}", "completion", [(k, 1.0), (now, 1.0)], "<=", 1)
                self.add(
                    f"comp_m{m}_s{s}", "completion",
                    [(f"Comp_m{m}_s{s}", 1.0), (f"Comp_m{m}_s{s - 1}", -1.0), (k, -1.0)], "=", 0
                )

    def _goodput(self) -> None:
        H = float(self.H)
        for m, model in enumerate(self.problem.models):
            f = model.overhead_fraction
            for s in range(self.steps):
                recv = float(model.arrivals[s])
                thr, w, tc, comp = f"Thr_m{m}_s{s}", f"w_m{m}_s{s}", f"TC_m{m}_s{s}", f"Comp_m{m}_s{s}"
                loss = [] if s == 0 else [(f"loss_m{m}_s{s}", 1.0)]
                if s > 0:
                    R = f"R_m{m}_s{s}"
                    lv = loss[0][0]
                    self.add(f"loss_a_m{m}_s{s}", "overhead", [(lv, 1.0)] + self.cap_terms(m, s, -f) + [(R, -H)], ">=", -H)
                    self.add(f"loss_b_m{m}_s{s}", "overhead", [(lv, 1.0)] + self.cap_terms(m, s, -f), "<=", 0)
                    self.add(f"loss_c_m{m}_s{s}", "overhead", [(lv, 1.0), (R, -H)], "<=", 0)
                remaining = [(v, -c) for v, c in self.cap_terms(m, s)] + loss
                self.add(f"thr_recv_m{m}_s{s}", "throughput", [(thr, 1.0)], "<=", recv)
                self.add(f"thr_cap_m{m}_s{s}", "throughput", [(thr, 1.0)] + remaining, "<=", 0)
                self.add(f"thr_w0_m{m}_s{s}", "throughput", [(thr, 1.0), (w, H)], ">=", recv)
                self.add(f"thr_w1_m{m}_s{s}", "throughput", [(thr, 1.0), (w, -H)] + remaining, ">=", -H)
                self.add(f"tc_a_m{m}_s{s}", "goodput", [(tc, 1.0), (thr, -1.0)], "<=", 0)
                self.add(f"tc_b_m{m}_s{s}", "goodput", [(tc, 1.0), (comp, -H)], "<=", 0)
                self.add(f"tc_c_m{m}_s{s}", "goodput", [(tc, 1.0), (thr, -1.0), (comp, -H)], ">=", -H)
                self.objective.append((thr, model.accuracy_pre))
                self.objective.append((tc, model.accuracy_post - model.accuracy_pre))
        self.objective = [(v, c) for v, c in self.objective if c != 0]


def build_plan_model(
        scenario: Scenario,
        forecast: Optional[ArrivalForecast] = None,
        window: int = 0,
        granularity: Optional[float] = None,
        literal_reconfiguration: Optional[bool] = None,
        big_m: Optional[int] = None
) -> PlanModel:
    """
    ILP de una ventana: variables, restricciones por familia y objetivo.

    Raises:
        InfeasibleError: Escenario infactible por construcción
        MigSchedError: big-m-too-small si H no acota llegadas y capacidades
    """
    problem = rescale_window(scenario, window, forecast, granularity)
    precheck(problem)
    printed = settings.EQ11_AS_PRINTED if literal_reconfiguration is None else literal_reconfiguration
    model = PlanModelBuilder(problem, big_m or settings.BIG_M, printed).build()
    summary = model.summary()
    logger.info(f"📐 Modelo ventana {window}: {summary.variables} variables, {summary.constraints} restricciones")
    return model


def expected_variable_count(problem: WindowProblem, literal_reconfiguration: bool = False) -> int:
    """
    Cantidad de variables en forma cerrada:
    2M·n_slots·S + |Λ|·S + 4M·S + M·S + S·Σ|K_m| + (9 ó 10)·M·(S−1) + 4M·S
    """
    M, S = len(problem.models), problem.steps
    n_slots = sum(len(c.slots) for c in problem.catalog.configurations)
    sizes = sum(len(m.rt_steps) for m in problem.models)
    per_step = 9 if literal_reconfiguration else 10
    return (
        2 * M * n_slots * S
        + len(problem.catalog.configurations) * S
        + 4 * M * S
        + M * S
        + S * sizes
        + per_step * M * (S - 1)
        + 4 * M * S
    )


# ==================== FORMATO LP ====================

def _number(value: float) -> str:
    return "%.12g" % value


def _expression(terms: Sequence[Term]) -> List[str]:
    tokens = []
    for i, (var, coef) in enumerate(terms):
        sign = "-" if coef < 0 else "+"
        magnitude = abs(coef)
        body = var if magnitude == 1 else f"{_number(magnitude)} {var}"
        tokens.append(f"- {body}" if sign == "-" else (body if i == 0 else f"+ {body}"))
    return tokens


def _wrap(head: str, tokens: List[str]) -> List[str]:
    lines, current = [], head
    for token in tokens:
        if len(current) + len(token) + 1 > LINE_WIDTH:
            lines.append(current)
            current = "   " + token
        else:
            current = f"{current} {token}"
    lines.append(current)
    return lines


def render_lp(model: PlanModel) -> str:
    """Documento CPLEX-LP del modelo (determinista, ver docs/formats.md)"""
    lines = [f"\\ migsched plan model window={model.window} steps={model.steps} H={model.big_m}"]
    for alias, task in sorted(model.task_aliases.items()):
        lines.append(f"\\ {alias} = {task}")
    lines.append("Maximize")
    lines.extend(_wrap(" obj:", _expression(model.objective) or ["0 " + model.variables[0].name]))
    lines.append("Subject To")
    for constraint in model.constraints:
        tokens = _expression(constraint.terms) + [constraint.sense, _number(constraint.rhs)]
        lines.extend(_wrap(f" {constraint.name}:", tokens))
    lines.append("Bounds")
    for variable in model.variables:
        if variable.kind != BINARY and variable.upper is not None:
            lines.append(f" {_number(variable.lower)} <= {variable.name} <= {_number(variable.upper)}")
    integers = [v.name for v in model.variables if v.kind == INTEGER]
    binaries = [v.name for v in model.variables if v.kind == BINARY]
    if integers:
        lines.append("General")
        lines.extend(_wrap("", integers))
    if binaries:
        lines.append("Binary")
        lines.extend(_wrap("", binaries))
    lines.append("End")
    return "\n".join(lines) + "\n"


def emit_lp(model: PlanModel, sink: Union[str, Path, IO[str]]) -> str:
    """
    Escribe el modelo en formato LP en un archivo o stream.

    Raises:
        LpWriteError: Falla de escritura
    """
    text = render_lp(model)
    try:
        if hasattr(sink, "write"):
            sink.write(text)
        else:
            path = Path(sink)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise LpWriteError(f"No se pudo escribir el modelo LP: {e}")
    return text


# ==================== VALIDADOR ====================

NAME = r"[A-Za-z_][A-Za-z0-9_.]*"
NUMBER = r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?"
TERM = re.compile(rf"\s*([+-])?\s*({NUMBER})?\s*({NAME})")
EXPRESSION = re.compile(rf"(?:\s*[+-]?\s*(?:{NUMBER})?\s*{NAME})+\s*")
CONSTRAINT = re.compile(rf"^\s*({NAME})\s*:(.*?)(<=|>=|=)\s*(-?{NUMBER})\s*$")
BOUND = re.compile(rf"^\s*(-?{NUMBER})\s*<=\s*({NAME})\s*<=\s*(-?{NUMBER})\s*$")
SECTIONS = ("Maximize", "Subject To", "Bounds", "General", "Binary", "End")


def _names(expression: str) -> List[str]:
    return [m.group(3) for m in TERM.finditer(expression)]


def _split_sections(text: str) -> Tuple[Dict[str, List[str]], List[str], List[str]]:
    """(sentencias por sección, orden de secciones, errores); une las líneas de continuación"""
    errors: List[str] = []
    sections: Dict[str, List[str]] = {}
    order: List[str] = []
    current = None
    for raw in text.splitlines():
        if not raw.strip() or raw.startswith("\\"):
            continue
        header = raw.strip()
        if header in SECTIONS or header == "Minimize":
            if header in sections:
                errors.append(f"Sección repetida: {header}")
            sections[header] = []
            order.append(header)
            current = header
            continue
        if current is None:
            errors.append(f"Texto fuera de sección: {raw!r}")
            continue
        if raw.startswith("   ") and sections[current]:
            sections[current][-1] += " " + raw.strip()
        else:
            sections[current].append(raw.strip())
    return sections, order, errors


def _objective(sections: Dict[str, List[str]]) -> str:
    objective = " ".join(sections.get("Maximize", sections.get("Minimize", [])))
    return objective.split(":", 1)[1] if ":" in objective else objective


def validate_lp(text: str) -> List[str]:
    """
    Valida la gramática LP que emite `render_lp`: secciones y su orden,
    nombres, términos, operadores y variables declaradas.

    Returns:
        Lista de errores (vacía si el documento es válido)
    """
    sections, order, errors = _split_sections(text)
    if not order or order[0] not in ("Maximize", "Minimize"):
        errors.append("El documento debe empezar con Maximize o Minimize")
    if not order or order[-1] != "End":
        errors.append("El documento debe terminar con End")
    positions = [SECTIONS.index("Maximize" if s == "Minimize" else s) for s in order]
    if positions != sorted(positions):
        errors.append(f"Secciones fuera de orden: {order}")
    if "Subject To" not in sections:
        errors.append("Falta la sección Subject To")

    objective = _objective(sections)
    if not EXPRESSION.fullmatch(objective):
        errors.append("Objetivo mal formado")
    used = set(_names(objective))

    seen = set()
    for line in sections.get("Subject To", []):
        match = CONSTRAINT.match(line)
        if not match:
            errors.append(f"Restricción mal formada: {line[:80]!r}")
            continue
        name, expression = match.group(1), match.group(2)
        if name in seen:
            errors.append(f"Restricción duplicada: {name}")
        seen.add(name)
        if not EXPRESSION.fullmatch(expression):
            errors.append(f"Expresión mal formada en {name}")
        used.update(_names(expression))

    for line in sections.get("Bounds", []):
        match = BOUND.match(line)
        if not match:
            errors.append(f"Cota mal formada: {line!r}")
        elif match.group(2) not in used:
            errors.append(f"Cota sobre variable no usada: {match.group(2)}")

    integers = set(" ".join(sections.get("General", [])).split())
    binaries = set(" ".join(sections.get("Binary", [])).split())
    for name in sorted(integers & binaries):
        errors.append(f"Variable declarada entera y binaria: {name}")
    for name in sorted(integers | binaries):
        if not re.fullmatch(NAME, name):
            errors.append(f"Nombre inválido: {name}")
        elif name not in used:
            errors.append(f"Variable declarada sin uso: {name}")
    return errors


def lp_variable_names(text: str) -> List[str]:
    """Variables distintas del objetivo y las restricciones, en orden de aparición"""
    sections, _, _ = _split_sections(text)
    ordered: Dict[str, None] = dict.fromkeys(_names(_objective(sections)))
    for line in sections.get("Subject To", []):
        match = CONSTRAINT.match(line)
        if match:
            ordered.update(dict.fromkeys(_names(match.group(2))))
    return list(ordered)
