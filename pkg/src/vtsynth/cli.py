"""Command-line frontend: synth, run, eval, and inspect subcommands."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .artifact import (
    build_artifact,
    export_artifact_dot,
    is_artifact_file,
    load_artifact,
    provenance_for,
    save_artifact,
)
from .errors import (
    DomainError,
    ModelError,
    PipelineError,
    TraceError,
    VtsynthError,
)
from .evaluate import (
    DESK_RUNS,
    DESK_STEPS,
    FULL_RUNS,
    FULL_STEPS,
    SimulationConfig,
    simulate_specificity,
    size_report,
    sweep_observability,
    synthesize_projection_monitor,
)
from .model import export_model_dot, load_model
from .pipeline import PRESETS, parse_pipeline, run_pipeline
from .runtime import replay
from .synth import modal_query

EXIT_MODEL_ERROR = 3
EXIT_PIPELINE_ERROR = 4
EXIT_TRACE_ERROR = 5
EXIT_DOMAIN_ERROR = 6


def _split_actions(text: str) -> tuple[str, ...]:
    return tuple(a.strip() for a in text.replace("|", ",").split(",") if a.strip())


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="root seed for all randomness")
    parser.add_argument(
        "--format",
        choices=("text", "structured"),
        default="text",
        help="human-readable text or machine-readable JSON output",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vtsynth",
        description="Synthesize, compile, run, and evaluate verdict-producing monitors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="synthesize a monitor artifact from a model")
    _add_common(p_synth)
    p_synth.add_argument("model", help="model file (structured-object JSON)")
    p_synth.add_argument("-o", "--out", required=True, help="artifact output path")
    group = p_synth.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", choices=sorted(PRESETS), help="named pipeline recipe")
    group.add_argument("--pipeline", help="comma-separated stage list")
    p_synth.add_argument("--obs", help="observable actions (comma-separated), overrides model markers")
    p_synth.add_argument(
        "--backend",
        choices=("auto", "explicit", "symbolic"),
        default="auto",
        help="configuration-set representation",
    )

    p_run = sub.add_parser("run", help="replay a trace through a monitor artifact")
    _add_common(p_run)
    p_run.add_argument("artifact", help="monitor artifact file")
    p_run.add_argument("trace", nargs="?", default="-", help="trace file, '-' for stdin")
    p_run.add_argument("--count", action="store_true", help="append ruled-out percentages")
    p_run.add_argument("--query", help="modal query, e.g. 'necessary: e1|e2'")
    mode = p_run.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="mode", action="store_const", const="strict")
    mode.add_argument("--relaxed", dest="mode", action="store_const", const="relaxed")

    p_eval = sub.add_parser("eval", help="size tables and specificity simulations")
    _add_common(p_eval)
    p_eval.add_argument("model", help="model file")
    p_eval.add_argument("--mode", choices=("sizes", "specificity", "sweep"), required=True)
    p_eval.add_argument("--obs", help="observable actions for specificity mode")
    p_eval.add_argument("--k", help="subset size(s) for sweep mode, e.g. '1' or '1,2,3'")
    p_eval.add_argument("--runs", type=int, help="simulation runs (default 10000)")
    p_eval.add_argument("--steps", type=int, help="steps per run (default 200)")
    p_eval.add_argument("--workers", type=int, default=1, help="parallel workers")
    p_eval.add_argument("--full-scale", action="store_true",
                        help="use the large evaluation profile (160000 runs x 1000 steps)")
    p_eval.add_argument("--resample-dead-ends", action="store_true",
                        help="resample runs that reach a dead end instead of ending early")
    p_eval.add_argument("--budget", type=int, help="max subsets per k in sweep mode")
    p_eval.add_argument("--csv", help="write per-row results as CSV")
    p_eval.add_argument("--plot", help="write a PNG figure next to the report")

    p_inspect = sub.add_parser("inspect", help="print artifact or model statistics")
    _add_common(p_inspect)
    p_inspect.add_argument("path", help="artifact or model file")
    p_inspect.add_argument("--export-graph", help="write a DOT graph description")

    return parser


def cmd_synth(args) -> int:
    model_path = Path(args.model)
    model = load_model(model_path, backend=args.backend)
    stages = parse_pipeline(args.preset if args.preset else args.pipeline)
    observable = _split_actions(args.obs) if args.obs else None
    run = run_pipeline(
        model, stages, observable_override=observable, model_dir=model_path.parent,
        backend=args.backend,
    )
    provenance = provenance_for(model_path.read_bytes(), run.stages)
    artifact = build_artifact(run.monitor, run.domain, run.relaxed, provenance)
    save_artifact(artifact, args.out)
    if args.format == "structured":
        print(json.dumps({
            "artifact": str(args.out),
            "stages": [
                {"stage": stage, "states": s, "transitions": t} for stage, s, t in run.log
            ],
            "provenance": provenance,
        }, indent=2))
    else:
        width = max(len(stage) for stage, _, _ in run.log)
        print(f"{'stage'.ljust(width)}  states  transitions")
        for stage, states, transitions in run.log:
            print(f"{stage.ljust(width)}  {states:6d}  {transitions:11d}")
        mode = "relaxed" if artifact.relaxed else "strict"
        print(f"wrote {args.out} ({run.monitor.num_states} states, default mode {mode})")
    return 0


def _parse_query(text: str):
    if ":" not in text:
        raise DomainError("queries look like 'necessary: <expr>' or 'possible: <expr>'")
    mode, expr = text.split(":", 1)
    mode = mode.strip()
    if mode not in ("necessary", "possible"):
        raise DomainError(f"unknown query mode {mode!r}")
    return mode, expr.strip()


def cmd_run(args) -> int:
    artifact = load_artifact(args.artifact)
    query = _parse_query(args.query) if args.query else None
    if args.trace == "-":
        lines = sys.stdin.readlines()
    else:
        lines = Path(args.trace).read_text(encoding="utf-8").splitlines()
    records = list(replay(artifact, lines, mode=args.mode, with_counts=args.count))
    structured = args.format == "structured"
    final = records[-1]
    for record in records:
        extras = {}
        if record.counts is not None:
            extras["ruled_out_percent"] = round(record.counts.percent_ruled_out, 3)
        if query is not None and not record.out_of_language:
            extras["query"] = modal_query(artifact.domain, record.verdict, query[1], query[0])
        if structured:
            print(json.dumps({
                "step": record.index,
                "action": record.action,
                "verdict": record.canonical,
                "out_of_language": record.out_of_language,
                **extras,
            }))
        else:
            prefix = "init" if record.action is None else record.action
            line = f"{record.index:4d}  {prefix:<12} {record.canonical}"
            if "ruled_out_percent" in extras:
                line += f"  ruled-out {extras['ruled_out_percent']:.1f}%"
            if "query" in extras:
                line += f"  {query[0]}({query[1]}) = {str(extras['query']).lower()}"
            print(line)
    if not structured:
        print(f"final: {final.canonical}")
    return 0


def _simulation_config(args) -> SimulationConfig:
    runs = args.runs if args.runs is not None else (FULL_RUNS if args.full_scale else DESK_RUNS)
    steps = args.steps if args.steps is not None else (FULL_STEPS if args.full_scale else DESK_STEPS)
    return SimulationConfig(
        runs=runs,
        steps=steps,
        seed=args.seed,
        workers=args.workers,
        on_dead_end="resample" if args.resample_dead_ends else "stop",
    )


def cmd_eval(args) -> int:
    model = load_model(args.model)
    name = Path(args.model).stem
    if args.mode == "sizes":
        row = size_report(model, name=name)
        if args.format == "structured":
            print(json.dumps(row.__dict__, indent=2))
        else:
            print(f"{'model':<14} {name}")
            print(f"{'|Conf|':<14} {row.config_count}")
            print(f"{'|Act|':<14} {row.action_count}")
            print(f"{'model size':<14} {row.fts_states}/{row.fts_transitions}")
            print(f"{'monitor':<14} {row.monitor_states}/{row.monitor_transitions}")
            print(f"{'minimized':<14} {row.minimized_states}/{row.minimized_transitions}")
            print(f"{'relaxed':<14} {row.relaxed_states}/{row.relaxed_transitions}")
        if args.csv:
            with open(args.csv, "w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle)
                writer.writerow(list(row.__dict__))
                writer.writerow(list(row.__dict__.values()))
        return 0

    cfg = _simulation_config(args)
    if args.mode == "specificity":
        observable = _split_actions(args.obs) if args.obs else model.observable_actions()
        monitor = synthesize_projection_monitor(model, observable)
        result = simulate_specificity(model, monitor, cfg, tag="|".join(sorted(observable)))
        if args.format == "structured":
            print(json.dumps({
                "model": name,
                "observable": sorted(observable),
                "runs": result.runs,
                "steps": result.steps,
                "mean_ruled_out_percent": round(result.mean, 4),
                "stderr": round(result.stderr, 4),
            }, indent=2))
        else:
            print(
                f"{name}: expected ruled-out {result.mean:.1f}% ± {result.stderr:.2f} "
                f"({result.runs} runs × {result.steps} steps, obs={','.join(sorted(observable))})"
            )
        if args.csv:
            with open(args.csv, "w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle)
                writer.writerow(["run", "ruled_out_percent"])
                for i, value in enumerate(result.per_run):
                    writer.writerow([i, f"{value:.6f}"])
        if args.plot:
            from .report import save_specificity_figure

            save_specificity_figure(result, args.plot, title=name)
        return 0

    # sweep
    if not args.k:
        raise PipelineError("sweep mode needs --k")
    ks = []
    for part in args.k.split(","):
        part = part.strip()
        ks.append(len(model.ts.actions) if part == "all" else int(part))
    results = [sweep_observability(model, k, cfg, budget=args.budget) for k in ks]
    if args.format == "structured":
        print(json.dumps([
            {
                "k": res.k,
                "partial": res.partial,
                "max": {"observable": list(res.best.observable), "mean": round(res.best.mean, 4)},
                "min": {"observable": list(res.worst.observable), "mean": round(res.worst.mean, 4)},
            }
            for res in results
        ], indent=2))
    else:
        print(f"{'k':>3}  {'max%':>6}  {'min%':>6}  witness (max) / witness (min)")
        for res in results:
            flag = "  [partial]" if res.partial else ""
            print(
                f"{res.k:>3}  {res.best.mean:6.1f}  {res.worst.mean:6.1f}  "
                f"{','.join(res.best.observable) or '-'} / "
                f"{','.join(res.worst.observable) or '-'}{flag}"
            )
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["k", "observable", "mean_ruled_out_percent", "stderr"])
            for res in results:
                for row in res.rows:
                    writer.writerow(
                        [res.k, "|".join(row.observable), f"{row.mean:.6f}", f"{row.stderr:.6f}"]
                    )
    if args.plot:
        from .report import save_sweep_figure

        save_sweep_figure(results, args.plot, title=name)
    return 0


def cmd_inspect(args) -> int:
    path = Path(args.path)
    if is_artifact_file(path):
        artifact = load_artifact(path)
        monitor = artifact.monitor
        info = {
            "kind": "artifact",
            "domain": artifact.domain.describe().get("type"),
            "states": monitor.num_states,
            "transitions": monitor.num_transitions,
            "actions": list(monitor.actions),
            "monotonic": artifact.monotonic,
            "default_mode": "relaxed" if artifact.relaxed else "strict",
            "provenance": artifact.provenance,
        }
        graph = export_artifact_dot(artifact) if args.export_graph else None
    else:
        model = load_model(path)
        info = {
            "kind": "model",
            "domain": model.domain_kind,
            "states": len(model.ts.states),
            "transitions": len(model.ts.transitions),
            "actions": list(model.ts.actions),
            "observable": list(model.observable_actions()),
            "deterministic": model.ts.is_deterministic(),
        }
        if model.domain_kind == "config":
            info["configurations"] = model.domain.universe_count()
        graph = export_model_dot(model) if args.export_graph else None
    if args.format == "structured":
        print(json.dumps(info, indent=2))
    else:
        for key, value in info.items():
            if key == "provenance":
                print(f"{key:<14} hash={value.get('hash', '')[:16]}… "
                      f"pipeline={','.join(value.get('pipeline', []))}")
            else:
                print(f"{key:<14} {value}")
    if graph is not None:
        Path(args.export_graph).write_text(graph, encoding="utf-8")
        if args.format == "text":
            print(f"wrote {args.export_graph}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "synth": cmd_synth,
        "run": cmd_run,
        "eval": cmd_eval,
        "inspect": cmd_inspect,
    }
    try:
        return handlers[args.command](args)
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL_ERROR
    except PipelineError as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE_ERROR
    except TraceError as exc:
        print(f"trace error: {exc}", file=sys.stderr)
        return EXIT_TRACE_ERROR
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN_ERROR
    except VtsynthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
