"""Command-line pipeline driver plus the embedded HTTP service that serves
the engine to browser clients.

Exit codes: 0 success, 2 contract/format violations, 3 pruning left fewer
than 2 frames, 4 requested port already in use.  Errors are a single line on
stderr; --json-errors switches that line to machine-readable JSON.
"""

from __future__ import annotations

import argparse
import errno
import io
import json
import sys
from dataclasses import dataclass, field, replace
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np
from PIL import Image

from . import jsonio
from .errors import PruneError, ReseqError, ContractError, FitError
from .evalkit import EvalConfig, run_suite, write_report_csv, write_report_json
from .frameset import (
    DistanceMatrix,
    FeatureArchive,
    FrameCollection,
    ingest_images,
    load_archive,
    load_matrix,
    save_matrix,
)
from .graphseq import (
    MstTree,
    SequenceResult,
    SolverConfig,
    build_graph,
    keyframe_path,
    minimum_spanning_tree,
    shortest_hamiltonian_cycle,
    shortest_hamiltonian_path,
)
from .layout import Embedding2D, embed_mst_2d, render_layout
from .metrics import (
    METRICS,
    CalibrationWeights,
    FitConfig,
    JudgmentTriple,
    compute_distance_matrix,
    fit_calibration,
)
from .outliers import PruneReport, prune_outliers

EXIT_OK = 0
EXIT_CONTRACT = 2
EXIT_PRUNED_OUT = 3
EXIT_PORT_IN_USE = 4

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ProjectConfig:
    """Pipeline inputs and knobs; file values are overridden by flags."""

    images: str | None = None
    features: str | None = None
    matrix: str | None = None
    weights: str | None = None
    metric: str = "l2_image"
    k: int = 5
    q: float = 0.9
    solver: SolverConfig = field(default_factory=SolverConfig)
    exclude: tuple[str, ...] = ()


_CONFIG_KEYS = {
    "images", "features", "matrix", "weights", "metric",
    "k", "q", "seed", "exact_threshold", "two_opt_passes", "exclude",
}


def load_project_config(path: str | Path) -> ProjectConfig:
    with open(path, "rb") as f:
        raw = json.load(f)
    if not isinstance(raw, dict):
        raise ContractError("config file must hold a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ContractError(f"unknown config keys: {sorted(unknown)}")
    base = Path(path).parent
    def _resolve(p):
        return None if p is None else str((base / p).resolve())
    return ProjectConfig(
        images=_resolve(raw.get("images")),
        features=_resolve(raw.get("features")),
        matrix=_resolve(raw.get("matrix")),
        weights=_resolve(raw.get("weights")),
        metric=str(raw.get("metric", "l2_image")).replace("-", "_"),
        k=int(raw.get("k", 5)),
        q=float(raw.get("q", 0.9)),
        solver=SolverConfig(
            seed=int(raw.get("seed", 0)),
            exact_threshold=int(raw.get("exact_threshold", 12)),
            two_opt_passes=int(raw.get("two_opt_passes", 0)),
        ),
        exclude=tuple(raw.get("exclude", ())),
    )


def _config_from_args(args: argparse.Namespace) -> ProjectConfig:
    cfg = load_project_config(args.config) if getattr(args, "config", None) else ProjectConfig()
    solver = cfg.solver
    if getattr(args, "seed", None) is not None:
        solver = replace(solver, seed=args.seed)
    if getattr(args, "exact_threshold", None) is not None:
        solver = replace(solver, exact_threshold=args.exact_threshold)
    if getattr(args, "two_opt_passes", None) is not None:
        solver = replace(solver, two_opt_passes=args.two_opt_passes)
    updates = {"solver": solver}
    for name in ("images", "features", "matrix", "weights"):
        v = getattr(args, name, None)
        if v is not None:
            updates[name] = str(Path(v).resolve())
    if getattr(args, "metric", None) is not None:
        updates["metric"] = args.metric.replace("-", "_")
    if getattr(args, "k", None) is not None:
        updates["k"] = args.k
    if getattr(args, "q", None) is not None:
        updates["q"] = args.q
    if getattr(args, "exclude", None):
        updates["exclude"] = tuple(
            x.strip() for x in args.exclude.split(",") if x.strip()
        )
    return replace(cfg, **updates)


# ---------------------------------------------------------------------------
# pipeline assembly


def _list_images(dirpath: str) -> list[Path]:
    d = Path(dirpath)
    if not d.is_dir():
        raise ContractError(f"image directory not found: {dirpath}")
    paths = sorted(
        p for p in d.iterdir() if p.suffix.lower() in IMAGE_EXTENSIONS
    )
    if not paths:
        raise ContractError(f"no images found in {dirpath}")
    return paths


def _load_weights(cfg: ProjectConfig) -> CalibrationWeights | None:
    return CalibrationWeights.from_json(cfg.weights) if cfg.weights else None


def _load_sources(
    cfg: ProjectConfig,
) -> tuple[FrameCollection | None, FeatureArchive | None]:
    frames = ingest_images(_list_images(cfg.images)) if cfg.images else None
    archive = load_archive(cfg.features) if cfg.features else None
    return frames, archive


def _check_excludes(exclude, known_ids) -> None:
    unknown = [x for x in exclude if x not in set(known_ids)]
    if unknown:
        raise ContractError(f"excluded frame ids not found: {unknown}")


def _drop(ids, exclude) -> list[str]:
    excl = set(exclude)
    return [i for i in ids if i not in excl]


def _obtain_matrix(
    cfg: ProjectConfig,
) -> tuple[DistanceMatrix, FrameCollection | None]:
    """Load a stored matrix or compute one from images/features.

    Excluded ids are checked against whichever source defines the frame set
    (the stored matrix if given, else the images/archive being computed on).
    """
    frames, archive = _load_sources(cfg)
    if cfg.matrix:
        m = load_matrix(cfg.matrix)
        if cfg.exclude:
            _check_excludes(cfg.exclude, m.frame_ids)
            m = m.submatrix(_drop(m.frame_ids, cfg.exclude))
            if frames is not None:
                frames = frames.subset(_drop(frames.ids, cfg.exclude))
        return m, frames
    if cfg.metric in ("lpips", "cosine", "l2_feature"):
        if archive is None:
            raise ContractError(
                f"metric {cfg.metric!r} requires a feature archive (--features)"
            )
        if cfg.exclude:
            raise ContractError("--exclude with a feature archive is not supported; "
                                "exclude at extraction time or use a stored matrix")
        m = compute_distance_matrix(archive, cfg.metric, w=_load_weights(cfg))
        return m, frames
    if frames is None:
        raise ContractError("no input given: need --matrix, --images, or --features")
    if cfg.exclude:
        _check_excludes(cfg.exclude, frames.ids)
        frames = frames.subset(_drop(frames.ids, cfg.exclude))
    m = compute_distance_matrix(frames, cfg.metric, w=None)
    return m, frames


def _maybe_prune(
    m: DistanceMatrix, cfg: ProjectConfig, no_prune: bool
) -> tuple[DistanceMatrix, PruneReport | None]:
    if no_prune:
        return m, None
    return prune_outliers(m, k=cfg.k, q=cfg.q)


def _export_sequence(order, frames: FrameCollection | None, out_dir: str) -> None:
    if frames is None:
        raise ContractError("--export-dir requires --images")
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    for n, fid in enumerate(order, start=1):
        rec = frames.get(fid)
        if rec.pixels is None:
            raise ContractError(f"frame {fid!r} has no pixels to export")
        arr = np.clip(np.rint(rec.pixels * 255.0), 0, 255).astype(np.uint8)
        Image.fromarray(arr, "RGB").save(d / f"{n:06d}.png", format="PNG")


# ---------------------------------------------------------------------------
# commands


def cmd_dist(args) -> int:
    cfg = _config_from_args(args)
    if cfg.matrix:
        raise ContractError("dist computes a matrix; --matrix is not an input here")
    m, _ = _obtain_matrix(cfg)
    save_matrix(m, args.out)
    print(f"wrote {len(m)}x{len(m)} distance matrix ({cfg.metric}) to {args.out}")
    return EXIT_OK


def cmd_prune(args) -> int:
    cfg = _config_from_args(args)
    m, _ = _obtain_matrix(cfg)
    pruned, report = prune_outliers(m, k=cfg.k, q=cfg.q)
    if args.report:
        jsonio.dump(report.to_json_dict(), args.report)
    if args.out:
        save_matrix(pruned, args.out)
    print(
        f"kept {len(report.kept_ids)} of {len(m)} frames; "
        f"removed: {', '.join(report.removed_ids) or '(none)'}"
    )
    return EXIT_OK


def _solve_and_write(args, kind: str) -> int:
    cfg = _config_from_args(args)
    m, frames = _obtain_matrix(cfg)
    m, _report = _maybe_prune(m, cfg, args.no_prune)
    if kind == "keyframe":
        wanted = [x.strip() for x in args.frames.split(",") if x.strip()]
        tree = minimum_spanning_tree(build_graph(m))
        seq = keyframe_path(tree, wanted)
    else:
        g = build_graph(m)
        if kind == "path":
            seq = shortest_hamiltonian_path(
                g, start=args.start, end=args.end, config=cfg.solver
            )
        else:
            seq = shortest_hamiltonian_cycle(g, config=cfg.solver)
    if args.out:
        jsonio.dump(seq.to_json_dict(), args.out)
    if args.export_dir:
        _export_sequence(seq.order, frames, args.export_dir)
    print(f"{kind}: {' -> '.join(seq.order)}  (cost {seq.total_cost:.6g}, {seq.solver})")
    return EXIT_OK


def cmd_path(args) -> int:
    return _solve_and_write(args, "path")


def cmd_cycle(args) -> int:
    return _solve_and_write(args, "cycle")


def cmd_keyframes(args) -> int:
    return _solve_and_write(args, "keyframe")


def cmd_eval(args) -> int:
    cfg = _config_from_args(args)
    metrics = [m.strip().replace("-", "_") for m in args.metrics.split(",") if m.strip()]
    for m in metrics:
        if m not in METRICS:
            raise ContractError(f"unknown metric {m!r}, expected one of {METRICS}")
    cases = []
    for d in args.case_dirs:
        frames = ingest_images(_list_images(d))
        cases.append((frames, Path(d).name))
    eval_cfg = EvalConfig(
        seed=cfg.solver.seed, solver=cfg.solver, weights=_load_weights(cfg)
    )
    report = run_suite(cases, metrics, eval_cfg)
    if args.csv:
        write_report_csv(report, args.csv)
    if args.json:
        write_report_json(report, args.json)
    for metric, mean in report.mean_tau().items():
        print(f"mean tau [{metric}]: {mean:.6f} over {sum(1 for c in report.cases if c.metric == metric)} case(s)")
    for name, metric, msg in report.errors:
        print(f"case failed: {name} [{metric}]: {msg}", file=sys.stderr)
    return EXIT_OK


def cmd_layout(args) -> int:
    cfg = _config_from_args(args)
    if cfg.images is None:
        raise ContractError("layout requires --images")
    frames, _ = _load_sources(cfg)
    with open(args.seq, "rb") as f:
        seq_doc = json.load(f)
    seq = SequenceResult(
        kind=seq_doc.get("kind", "path"),
        order=tuple(seq_doc["order"]),
        total_cost=float(seq_doc.get("total_cost", 0.0)),
        solver=str(seq_doc.get("solver", "external")),
        seed=seq_doc.get("seed"),
        constraints=seq_doc.get("constraints") or {},
    )
    render_layout(seq, frames, args.style, args.out)
    print(f"wrote {args.style} layout of {len(seq.order)} frame(s) to {args.out}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = _config_from_args(args)
    if cfg.features is None:
        raise ContractError("calibrate requires --features")
    archive = load_archive(cfg.features)
    with open(args.judgments, "rb") as f:
        doc = json.load(f)
    rows = doc["triples"] if isinstance(doc, dict) else doc
    triples = [
        JudgmentTriple(
            ref_id=r["ref"], distorted0_id=r["d0"], distorted1_id=r["d1"], h=float(r["h"])
        )
        for r in rows
    ]
    fit_cfg = FitConfig(
        learning_rate=args.learning_rate, epochs=args.epochs, seed=cfg.solver.seed
    )
    weights, params, loss = fit_calibration(archive, triples, fit_cfg)
    weights.to_json(args.out)
    print(f"fitted {len(triples)} judgments; final loss {loss:.6f}; "
          f"a={params.a:.6g} b={params.b:.6g}; wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# HTTP service


@dataclass(frozen=True, eq=False)
class EngineSnapshot:
    """Immutable bundle served over HTTP; replaced wholesale on re-ingestion."""

    frames: FrameCollection | None
    full_matrix: DistanceMatrix
    matrix: DistanceMatrix  # surviving frames only
    prune_report: PruneReport | None
    prune_note: str | None
    mst: MstTree
    full_mst: MstTree
    embedding: Embedding2D
    solver: SolverConfig


def build_snapshot(cfg: ProjectConfig) -> EngineSnapshot:
    full, frames = _obtain_matrix(cfg)
    report = None
    note = None
    try:
        pruned, report = prune_outliers(full, k=cfg.k, q=cfg.q)
    except (FitError, PruneError) as exc:
        # a served engine degrades to the unpruned graph rather than dying
        pruned = full
        note = f"pruning skipped: {exc}"
    full_mst = minimum_spanning_tree(build_graph(full))
    mst = full_mst if pruned is full else minimum_spanning_tree(build_graph(pruned))
    embedding = embed_mst_2d(mst, pruned)
    return EngineSnapshot(
        frames=frames,
        full_matrix=full,
        matrix=pruned,
        prune_report=report,
        prune_note=note,
        mst=mst,
        full_mst=full_mst,
        embedding=embedding,
        solver=cfg.solver,
    )


def _frames_payload(snap: EngineSnapshot) -> list[dict]:
    removed = set(snap.prune_report.removed_ids) if snap.prune_report else set()
    return [
        {"id": fid, "outlier": fid in removed} for fid in snap.full_matrix.frame_ids
    ]


def _mst_payload(t: MstTree) -> dict:
    ids = t.frame_ids
    return {
        "edges": [[ids[u], ids[v], w] for u, v, w in t.edges],
        "total_weight": t.total_weight,
    }


def _outliers_payload(snap: EngineSnapshot) -> dict:
    if snap.prune_report is not None:
        return snap.prune_report.to_json_dict()
    return {
        "removed": [],
        "kept": list(snap.matrix.frame_ids),
        "stats": {},
        "fit": None,
        "note": snap.prune_note or "pruning not performed",
    }


def _sequence_payload(snap: EngineSnapshot, body: dict) -> dict:
    kind = body.get("kind")
    if kind not in ("path", "cycle", "keyframe"):
        raise ContractError(f"kind must be path, cycle, or keyframe, got {kind!r}")
    no_prune = bool(body.get("no_prune", False))
    m = snap.full_matrix if no_prune else snap.matrix
    if kind == "keyframe":
        keyframes = body.get("keyframes")
        if not isinstance(keyframes, list) or len(keyframes) < 2:
            raise ContractError("keyframe requests need a list of >= 2 keyframes")
        tree = snap.full_mst if no_prune else snap.mst
        seq = keyframe_path(tree, [str(k) for k in keyframes])
    elif kind == "path":
        seq = shortest_hamiltonian_path(
            build_graph(m),
            start=body.get("start"),
            end=body.get("end"),
            config=snap.solver,
        )
    else:
        seq = shortest_hamiltonian_cycle(build_graph(m), config=snap.solver)
    return seq.to_json_dict()


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # tests parse stdout; keep it quiet
        pass

    def _reply(self, code: int, content_type: str, payload: bytes) -> None:
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(payload)

    def _reply_json(self, obj, code: int = 200) -> None:
        self._reply(code, "application/json", jsonio.dumps(obj).encode("utf-8"))

    def _reply_error(self, message: str, code: int) -> None:
        self._reply_json({"error": message}, code)

    def do_GET(self):  # noqa: N802 - http.server naming
        snap: EngineSnapshot = self.server.engine.snapshot
        path = self.path.split("?", 1)[0]
        if path == "/api/frames":
            self._reply_json(_frames_payload(snap))
        elif path == "/api/mst":
            self._reply_json(_mst_payload(snap.mst))
        elif path == "/api/embedding":
            self._reply_json(snap.embedding.to_json_dict())
        elif path == "/api/outliers":
            self._reply_json(_outliers_payload(snap))
        elif path.startswith("/frames/"):
            self._serve_frame(snap, path[len("/frames/"):])
        else:
            self._reply_error("not found", 404)

    def _serve_frame(self, snap: EngineSnapshot, fid: str) -> None:
        if snap.frames is None:
            self._reply_error("engine has no source images", 404)
            return
        try:
            rec = snap.frames.get(fid)
        except ReseqError:
            self._reply_error(f"unknown frame {fid!r}", 404)
            return
        arr = np.clip(np.rint(rec.pixels * 255.0), 0, 255).astype(np.uint8)
        buf = io.BytesIO()
        Image.fromarray(arr, "RGB").save(buf, format="PNG")
        self._reply(200, "image/png", buf.getvalue())

    def do_POST(self):  # noqa: N802
        snap: EngineSnapshot = self.server.engine.snapshot
        path = self.path.split("?", 1)[0]
        if path != "/api/sequence":
            self._reply_error("not found", 404)
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = json.loads(self.rfile.read(length) or b"{}")
            if not isinstance(body, dict):
                raise ContractError("request body must be a JSON object")
            self._reply_json(_sequence_payload(snap, body))
        except ReseqError as exc:
            self._reply_error(str(exc), 400)
        except (ValueError, KeyError) as exc:
            self._reply_error(f"bad request: {exc}", 400)


class EngineServer:
    """Threaded HTTP server over an immutable snapshot.

    Replacing .snapshot is a single attribute assignment, so in-flight
    requests keep the bundle they started with and new requests see the new
    one; no request ever observes a half-updated engine.
    """

    def __init__(self, snapshot: EngineSnapshot, host: str = "127.0.0.1", port: int = 0):
        self._httpd = ThreadingHTTPServer((host, port), _Handler)
        self._httpd.engine = self
        self.snapshot = snapshot

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    def reload(self, snapshot: EngineSnapshot) -> None:
        self.snapshot = snapshot

    def serve_forever(self) -> None:
        self._httpd.serve_forever()

    def shutdown(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()


def cmd_serve(args) -> int:
    cfg = _config_from_args(args)
    snapshot = build_snapshot(cfg)
    try:
        server = EngineServer(snapshot, host=args.host, port=args.port)
    except OSError as exc:
        if exc.errno == errno.EADDRINUSE:
            _print_error(args, f"port {args.port} is already in use")
            return EXIT_PORT_IN_USE
        raise
    print(f"serving {len(snapshot.matrix)} frame(s) on http://{args.host}:{server.port}")
    sys.stdout.flush()
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing and entry point


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--images", help="directory of input frames")
    p.add_argument("--features", help="feature archive (PFA1)")
    p.add_argument("--matrix", help="stored distance matrix (PDM1)")
    p.add_argument("--weights", help="calibration weights JSON")
    p.add_argument("--metric", choices=[m.replace("_", "-") for m in METRICS])
    p.add_argument("--k", type=int, help="neighbors for the outlier statistic")
    p.add_argument("--q", type=float, help="outlier threshold quantile")
    p.add_argument("--seed", type=int)
    p.add_argument("--exact-threshold", type=int, dest="exact_threshold")
    p.add_argument("--two-opt-passes", type=int, dest="two_opt_passes")
    p.add_argument("--exclude", help="comma-separated frame ids to drop")
    p.add_argument("--json-errors", action="store_true")


def _add_solver_outputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--out", help="write SequenceResult JSON here")
    p.add_argument("--export-dir", help="copy ordered frames as 000001.png, ...")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="reseq", description="perceptual frame resequencing pipeline"
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="compute and store a distance matrix")
    _add_common(p)
    p.add_argument("--out", required=True, help="output PDM1 path")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("prune", help="drop outlier frames")
    _add_common(p)
    p.add_argument("--report", help="write PruneReport JSON here")
    p.add_argument("--out", help="write pruned PDM1 here")
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("path", help="shortest Hamiltonian path")
    _add_common(p)
    _add_solver_outputs(p)
    p.add_argument("--start", help="pin the first frame")
    p.add_argument("--end", help="pin the last frame")
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("cycle", help="shortest Hamiltonian cycle")
    _add_common(p)
    _add_solver_outputs(p)
    p.set_defaults(func=cmd_cycle)

    p = sub.add_parser("keyframes", help="MST path through chosen keyframes")
    _add_common(p)
    _add_solver_outputs(p)
    p.add_argument("--frames", required=True, help="comma-separated keyframe ids")
    p.set_defaults(func=cmd_keyframes)

    p = sub.add_parser("eval", help="shuffled-reconstruction scoring")
    _add_common(p)
    p.add_argument("case_dirs", nargs="+", help="one directory of ordered frames per case")
    p.add_argument("--metrics", default="l2-image", help="comma-separated metric list")
    p.add_argument("--csv", help="write per-case CSV here")
    p.add_argument("--json", help="write full report JSON here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("layout", help="render a sequence to a composite sheet")
    _add_common(p)
    p.add_argument("--seq", required=True, help="SequenceResult JSON")
    p.add_argument("--style", choices=("linear", "radial"), default="linear")
    p.add_argument("--out", required=True, help="output PNG path")
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("calibrate", help="fit calibration weights to judgments")
    _add_common(p)
    p.add_argument("--judgments", required=True, help="judgment triples JSON")
    p.add_argument("--learning-rate", type=float, default=0.1, dest="learning_rate")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--out", required=True, help="output weights JSON")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("serve", help="run the HTTP engine service")
    _add_common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(func=cmd_serve)

    return ap


def _print_error(args, message: str) -> None:
    line = " ; ".join(str(message).splitlines()) or "unknown error"
    if getattr(args, "json_errors", False):
        print(json.dumps({"error": line}), file=sys.stderr)
    else:
        print(f"error: {line}", file=sys.stderr)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PruneError as exc:
        _print_error(args, str(exc))
        return EXIT_PRUNED_OUT
    except ReseqError as exc:
        _print_error(args, str(exc))
        return EXIT_CONTRACT
    except FileNotFoundError as exc:
        _print_error(args, f"file not found: {exc.filename or exc}")
        return EXIT_CONTRACT
    except json.JSONDecodeError as exc:
        _print_error(args, f"invalid JSON input: {exc}")
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
