"""Command-line entry point: validate | merge | retrieve | compile | plan | execute | bench.

Exit codes: 0 ok, 1 parse, 2 retrieval/compile, 3 planning, 4 execution.
"""

import argparse
import logging
import sys
from pathlib import Path

from foonc.config import HEURISTICS, load_settings, validate_paths
from foonc.errors import ConfigError, FooncError, ParseFailed
from foonc.log import configure_logging
from foonc.services.action_context import load_categories, load_library, save_library, synthesize_library
from foonc.services.bench import emit_plot_data, run_comparison
from foonc.services.foon_graph import merge_subgraphs, resolve_goal, retrieve_task_tree
from foonc.services.foon_parser import load_kitchen, load_subgraph, serialize_subgraph
from foonc.services.macro_compiler import compile_foon
from foonc.services.micro_domain import emit_micro_domain
from foonc.services.scene import load_scene, scene_kitchen, standard_scene
from foonc.services.sim_exec import PARTIAL, WHOLE, execute_plan, load_plan, plan_recipe, run_trials, save_plan

logger = logging.getLogger("foonc.cli")


def _settings(args):
    overrides = {
        "foon": args.foon,
        "kitchen": args.kitchen,
        "goal": args.goal,
        "scene": args.scene,
        "library": args.library,
        "categories": args.categories,
        "out_dir": args.out,
        "heuristic": args.heuristic,
        "node_budget": args.node_budget,
        "external_planner_cmd": args.external_planner,
        "seed": args.seed,
        "workers": args.workers,
        "database_url": args.db,
    }
    return load_settings(args.config, overrides)


def _load_foon(settings):
    graphs = []
    for path in settings.foon:
        result = load_subgraph(path)
        if not result.ok:
            raise ParseFailed(result.diagnostics)
        graphs.append(result.graph)
    return merge_subgraphs(graphs)


def _load_scene(settings):
    return load_scene(settings.scene) if settings.scene else standard_scene()


def _load_kitchen(settings, scene):
    if settings.kitchen is None:
        return scene_kitchen(scene)
    result = load_kitchen(settings.kitchen)
    if not result.ok:
        raise ParseFailed(result.diagnostics)
    return result.kitchen


def _retrieve(settings):
    foon = _load_foon(settings)
    scene = _load_scene(settings)
    kitchen = _load_kitchen(settings, scene)
    goal = resolve_goal(foon, settings.goal)
    tree = retrieve_task_tree(foon, goal, kitchen)
    return foon, scene, kitchen, goal, tree


def _out_dir(settings):
    out = Path(settings.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _inside_out_dir(out, name):
    """Resolve a file name against the output directory; nothing may land outside it."""
    relative = Path(name)
    if relative.is_absolute() or ".." in relative.parts:
        raise ConfigError(f"{name}: output files are named relative to the output directory")
    return out / relative


def cmd_validate(args):
    files = args.files or [str(p) for p in _settings(args).foon]
    if not files:
        raise ConfigError("no FOON files given")
    status = 0
    for path in files:
        if not Path(path).is_file():
            raise ConfigError(f"file not found: {path}")
        result = load_subgraph(path)
        for diagnostic in result.diagnostics:
            print(f"{path}: {diagnostic}")
        if result.ok:
            print(f"{path}: ok, {len(result.graph.units)} units")
        else:
            status = ParseFailed.exit_code
    return status


def cmd_merge(args):
    settings = _settings(args)
    validate_paths(settings, required=("foon",))
    text = serialize_subgraph(_load_foon(settings))
    path = _out_dir(settings) / "merged.foon"
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}")
    return 0


def cmd_retrieve(args):
    settings = _settings(args)
    validate_paths(settings, required=("foon", "goal"))
    _, _, _, goal, tree = _retrieve(settings)
    print(f"task tree for {goal}: {len(tree)} units")
    for position, (unit, source) in enumerate(zip(tree.units, tree.provenance)):
        print(f"{position:3d}  [{source}] {unit}")
    return 0


def cmd_compile(args):
    settings = _settings(args)
    validate_paths(settings, required=("foon", "goal"))
    _, _, kitchen, goal, tree = _retrieve(settings)
    operators, domain, problem = compile_foon(tree, kitchen, goal)
    out = _out_dir(settings)
    domain.write(out / "macro_domain.pddl")
    problem.write(out / "macro_problem.pddl")
    emit_micro_domain().write(out / "micro_domain.pddl")
    print(f"compiled {len(operators)} macro operators into {out}")
    return 0


def cmd_plan(args):
    settings = _settings(args)
    validate_paths(settings, required=("foon", "goal"))
    library_path = _inside_out_dir(Path(settings.out_dir), args.library_out) if args.library_out else None
    _, scene, _, goal, tree = _retrieve(settings)
    recipe = plan_recipe(tree, scene, settings.heuristic, settings.node_budget, settings.external_planner_cmd)
    for segment in recipe.segments:
        print(f"{segment.macro}:")
        for step in segment.steps:
            print(f"    {step}")
    print(f"{len(recipe)} micro steps")

    out = _out_dir(settings)
    save_plan(recipe.segments, out / "plan.json", goal.label, settings.heuristic)
    if library_path is not None:
        library_path.parent.mkdir(parents=True, exist_ok=True)
        categories = load_categories(settings.categories) if settings.categories else None
        save_library(synthesize_library([s.steps for s in recipe.segments], categories), library_path)
        print(f"wrote {library_path}")
    return 0


def _report_trials(settings, reports):
    for report in reports:
        print(f"seed {report.seed}: {report.outcome}" + (f" ({report.stage}: {report.reason})" if report.reason else ""))
    solved = sum(1 for r in reports if r.success)
    print(f"{solved}/{len(reports)} trials succeeded")
    if settings.database_url:
        from foonc.database import record_trials

        record_trials(reports, settings.goal, settings.database_url)
    return 0 if solved == len(reports) else 4


def cmd_execute(args):
    settings = _settings(args)
    validate_paths(settings, required=("foon", "goal") if args.plan is None else ())
    library = load_library(settings.library) if settings.library else None

    if args.plan is None:
        foon = _load_foon(settings)
        goal = resolve_goal(foon, settings.goal)
        trials = args.trials or settings.trials
        seeds = range(settings.seed, settings.seed + trials)
        reports = run_trials(
            foon,
            goal,
            seeds,
            args.recipe_mode,
            library,
            settings.heuristic,
            settings.node_budget,
            settings.workers,
            settings.upside_down_probability,
            settings.stack_probability,
        )
        return _report_trials(settings, reports)

    if not Path(args.plan).is_file():
        raise ConfigError(f"file not found: {args.plan}")
    try:
        segments = load_plan(args.plan)
    except (KeyError, ValueError) as e:
        raise ConfigError(f"invalid plan file {args.plan}: {e}")
    report = execute_plan(segments, _load_scene(settings), library)
    print(report.render_table(), end="")
    (_out_dir(settings) / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    return 0 if report.success else 4


def cmd_bench(args):
    settings = _settings(args)
    validate_paths(settings, required=("foon", "goal"))
    foon = _load_foon(settings)
    scene = _load_scene(settings)
    goal = resolve_goal(foon, settings.goal)
    report = run_comparison(
        foon,
        goal,
        scene,
        settings.n_range,
        settings.heuristics,
        settings.trials,
        settings.node_budget,
        settings.workers,
    )
    plot = emit_plot_data(report)
    out = _out_dir(settings)
    (out / "bench.csv").write_text(plot.csv, encoding="utf-8")
    (out / "bench.gp").write_text(plot.script, encoding="utf-8")
    print(f"wrote {len(report.rows)} rows to {out / 'bench.csv'}")
    if settings.database_url:
        from foonc.database import record_bench

        record_bench(report, goal.label, settings.database_url)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (default: $FOONC_CONFIG)")
    common.add_argument("--verbose", "-v", action="store_true")
    common.add_argument("--foon", nargs="+", default=None, help="FOON subgraph files")
    common.add_argument("--kitchen")
    common.add_argument("--goal")
    common.add_argument("--scene")
    common.add_argument("--library")
    common.add_argument("--categories")
    common.add_argument("--out", help="output directory")
    common.add_argument("--heuristic", choices=HEURISTICS)
    common.add_argument("--node-budget", type=int)
    common.add_argument("--external-planner", help="command with {domain} {problem} {plan_out}")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--db", help="database URL for recording results")

    ap = argparse.ArgumentParser(prog="foonc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("validate", parents=[common])
    v.add_argument("files", nargs="*")
    v.set_defaults(func=cmd_validate)

    m = sub.add_parser("merge", parents=[common])
    m.set_defaults(func=cmd_merge)

    r = sub.add_parser("retrieve", parents=[common])
    r.set_defaults(func=cmd_retrieve)

    c = sub.add_parser("compile", parents=[common])
    c.set_defaults(func=cmd_compile)

    p = sub.add_parser("plan", parents=[common])
    p.add_argument("--library-out", help="file name, inside --out, for a synthetic context library covering the plan")
    p.set_defaults(func=cmd_plan)

    e = sub.add_parser("execute", parents=[common])
    e.add_argument("--plan", help="plan JSON written by `plan`; without it seeded trials run")
    e.add_argument("--trials", type=int)
    e.add_argument("--recipe-mode", choices=(WHOLE, PARTIAL), default=WHOLE)
    e.set_defaults(func=cmd_execute)

    b = sub.add_parser("bench", parents=[common])
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(logging.DEBUG if args.verbose else logging.INFO)
    try:
        return args.func(args)
    except ParseFailed as e:
        for diagnostic in e.diagnostics:
            logger.error("%s", diagnostic)
        return e.exit_code
    except FooncError as e:
        logger.error("%s", e)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
