"""Command line entry points: run, serve, eval, watchlist."""

from __future__ import annotations

import argparse
import json
import sys

from .config import load_config
from .errors import RoadwatchError
from .evaluation import render_report, run_eval


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except RoadwatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roadwatch",
        description="Watchlist-driven vehicle surveillance pipeline and evaluation tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="process a frame manifest and write the event log")
    p_run.add_argument("--config", required=True)
    p_run.set_defaults(handler=_cmd_run)

    p_serve = sub.add_parser("serve", help="start the HTTP API")
    p_serve.add_argument("--config", required=True)
    p_serve.set_defaults(handler=_cmd_serve)

    p_eval = sub.add_parser("eval", help="score predictions against ground truth")
    p_eval.add_argument("--gt", required=True)
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument(
        "--iou",
        default="0.5:0.95:0.05",
        help="single threshold '0.5' or range 'start:stop:step' (default 0.5:0.95:0.05)",
    )
    p_eval.add_argument("--conf-floor", type=float, default=0.25)
    p_eval.add_argument("--format", choices=("text", "csv"), default="text")
    p_eval.add_argument("--classes", default=None, help="optional class-name table (JSON)")
    p_eval.set_defaults(handler=_cmd_eval)

    p_watch = sub.add_parser("watchlist", help="manage the watchlist file")
    watch_sub = p_watch.add_subparsers(dest="watchlist_command", required=True)

    w_add_plate = watch_sub.add_parser("add-plate")
    w_add_plate.add_argument("plate")
    w_add_plate.add_argument("--label", default="")
    w_add_plate.add_argument("--file", required=True)
    w_add_plate.add_argument("--dim", type=int, default=128)
    w_add_plate.set_defaults(handler=_cmd_watchlist_add_plate)

    w_add_face = watch_sub.add_parser("add-face")
    w_add_face.add_argument("--name", required=True)
    w_add_face.add_argument(
        "--embedding-file", required=True, help="JSON file holding the embedding array"
    )
    w_add_face.add_argument(
        "--link", action="append", default=[], help="linked plate (repeatable)"
    )
    w_add_face.add_argument("--file", required=True)
    w_add_face.add_argument("--dim", type=int, default=128)
    w_add_face.set_defaults(handler=_cmd_watchlist_add_face)

    w_list = watch_sub.add_parser("list")
    w_list.add_argument("--file", required=True)
    w_list.add_argument("--dim", type=int, default=128)
    w_list.set_defaults(handler=_cmd_watchlist_list)

    w_rm = watch_sub.add_parser("rm")
    w_rm.add_argument("entry_id")
    w_rm.add_argument("--file", required=True)
    w_rm.add_argument("--dim", type=int, default=128)
    w_rm.set_defaults(handler=_cmd_watchlist_rm)

    return parser


def _cmd_run(args) -> int:
    from .pipeline import run_pipeline

    config = load_config(args.config)
    result = run_pipeline(config)
    print(
        json.dumps(
            {
                "event_log_path": result.event_log_path,
                "alert_count": result.alert_count,
                "frames_processed": result.frames_processed,
            }
        )
    )
    return 0


def _cmd_serve(args) -> int:
    from .service import serve_api

    config = load_config(args.config)
    serve_api(config)
    return 0


def parse_iou_spec(spec: str) -> list[float]:
    """'0.5' -> [0.5]; '0.5:0.95:0.05' -> the inclusive range."""
    parts = spec.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"bad --iou spec {spec!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise ValueError(f"bad --iou spec {spec!r}")
    values = []
    k = 0
    while True:
        value = round(start + k * step, 10)
        if value > stop + 1e-9:
            break
        values.append(value)
        k += 1
    return values


def _cmd_eval(args) -> int:
    from .evaluation import load_class_names

    thresholds = parse_iou_spec(args.iou)
    class_names = load_class_names(args.classes) if args.classes else None
    report = run_eval(
        args.gt,
        args.pred,
        iou_thresholds=thresholds,
        confidence_floor=args.conf_floor,
        class_names=class_names,
    )
    sys.stdout.write(render_report(report, args.format))
    return 0


def _watchlist_store(args):
    from .watchlist import WatchlistStore

    return WatchlistStore(args.file, embedding_dim=args.dim)


def _cmd_watchlist_add_plate(args) -> int:
    store = _watchlist_store(args)
    try:
        entry = store.add_plate(args.plate, args.label)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{entry.entry_id} {entry.plate.text}")
    return 0


def _cmd_watchlist_add_face(args) -> int:
    from pathlib import Path

    store = _watchlist_store(args)
    embedding = json.loads(Path(args.embedding_file).read_text(encoding="utf-8"))
    try:
        entry = store.add_face(args.name, embedding, args.link)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{entry.entry_id} {entry.person_name}")
    return 0


def _cmd_watchlist_list(args) -> int:
    store = _watchlist_store(args)
    for entry in store.plates():
        print(f"{entry.entry_id} plate {entry.plate.text} {entry.label}".rstrip())
    for entry in store.faces():
        linked = ",".join(p.text for p in entry.linked_plates) or "-"
        print(f"{entry.entry_id} face {entry.person_name} linked={linked}")
    return 0


def _cmd_watchlist_rm(args) -> int:
    store = _watchlist_store(args)
    if store.remove_plate(args.entry_id) or store.remove_face(args.entry_id):
        print(f"removed {args.entry_id}")
        return 0
    print(f"error: no entry {args.entry_id}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
