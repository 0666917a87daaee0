from typing import Any, Dict, Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from foonc.config import HEURISTICS
from foonc.errors import FooncError
from foonc.services.foon_graph import resolve_goal, retrieve_task_tree
from foonc.services.foon_parser import parse_kitchen, parse_subgraph
from foonc.services.macro_compiler import compile_foon
from foonc.services.micro_domain import emit_micro_domain
from foonc.services.planner import DEFAULT_NODE_BUDGET
from foonc.services.scene import scene_from_json, scene_kitchen, standard_scene
from foonc.services.sim_exec import plan_recipe

router = APIRouter(prefix="/foon", tags=["foon"])


class ValidateRequest(BaseModel):
    text: str


class CompileRequest(BaseModel):
    foon: str
    kitchen: str
    goal: str


class PlanRequest(BaseModel):
    foon: str
    goal: str
    kitchen: Optional[str] = None
    scene: Optional[Dict[str, Any]] = None
    heuristic: str = "hmax"
    node_budget: int = Field(default=DEFAULT_NODE_BUDGET, ge=1)


def _diagnostics(result):
    return [{"line": d.line, "severity": d.severity, "message": d.message} for d in result.diagnostics]


def _graph(text):
    result = parse_subgraph(text)
    if not result.ok:
        raise HTTPException(status_code=400, detail={"foon": _diagnostics(result)})
    return result.graph


def _kitchen(text):
    result = parse_kitchen(text)
    if not result.ok:
        raise HTTPException(status_code=400, detail={"kitchen": _diagnostics(result)})
    return result.kitchen


@router.post("/validate")
def validate_foon(request: ValidateRequest):
    result = parse_subgraph(request.text)
    units = len(result.graph.units) if result.graph is not None else 0
    return {"ok": result.ok, "units": units, "diagnostics": _diagnostics(result)}


@router.post("/compile")
def compile_request(request: CompileRequest):
    graph = _graph(request.foon)
    kitchen = _kitchen(request.kitchen)
    try:
        goal = resolve_goal(graph, request.goal)
        tree = retrieve_task_tree(graph, goal, kitchen)
        operators, domain, problem = compile_foon(tree, kitchen, goal)
    except FooncError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return {
        "units": [op.name for op in operators],
        "macro_domain": domain.text,
        "macro_problem": problem.text,
        "micro_domain": emit_micro_domain().text,
    }


@router.post("/plan")
def plan_request(request: PlanRequest):
    if request.heuristic not in HEURISTICS:
        raise HTTPException(status_code=400, detail=f"unknown heuristic {request.heuristic!r}")
    graph = _graph(request.foon)
    try:
        scene = scene_from_json(request.scene) if request.scene is not None else standard_scene()
    except (KeyError, TypeError, ValueError) as e:
        raise HTTPException(status_code=400, detail=f"invalid scene: {e}")
    kitchen = _kitchen(request.kitchen) if request.kitchen is not None else scene_kitchen(scene)

    try:
        goal = resolve_goal(graph, request.goal)
        tree = retrieve_task_tree(graph, goal, kitchen)
    except FooncError as e:
        raise HTTPException(status_code=400, detail=str(e))
    try:
        recipe = plan_recipe(tree, scene, request.heuristic, request.node_budget)
    except FooncError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return {
        "goal": str(goal),
        "length": len(recipe),
        "segments": [
            {"macro": s.macro, "steps": [str(step) for step in s.steps], "expanded": s.stats.expanded}
            for s in recipe.segments
        ],
    }
