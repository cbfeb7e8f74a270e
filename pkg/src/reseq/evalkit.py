"""Reconstruction harness: shuffle an ordered animation, resequence it as a
shortest Hamiltonian path with known endpoints, and score the recovered order
with the normalized Kendall tau distance.

Outlier pruning is deliberately bypassed here; dropping a frame would break
the permutation precondition of the tau score.
"""

from __future__ import annotations

import csv
from bisect import bisect_right, insort
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import jsonio
from .errors import ContractError
from .frameset import FrameCollection
from .graphseq import SequenceResult, SolverConfig, build_graph, shortest_hamiltonian_path
from .metrics import CalibrationWeights, compute_distance_matrix


def kendall_tau_normalized(ground: list[str], candidate: list[str]) -> float:
    """Fraction of discordant index pairs, in [0, 1].

    0 means candidate equals ground; 1 means it is the exact reversal.
    """
    m = len(ground)
    if m < 2:
        raise ContractError("need at least 2 items to compare orders")
    if len(candidate) != m:
        raise ContractError(f"length mismatch: {m} vs {len(candidate)}")
    rank = {fid: p for p, fid in enumerate(candidate)}
    if len(rank) != m or len(set(ground)) != m:
        raise ContractError("orders must not contain duplicates")
    if set(ground) != set(rank):
        raise ContractError("candidate is not a permutation of ground")
    # ranks of candidate positions read in ground order; discordant pairs are
    # exactly the inversions of this sequence
    seq = [rank[fid] for fid in ground]
    seen: list[int] = []
    inversions = 0
    for r in seq:
        inversions += len(seen) - bisect_right(seen, r)
        insort(seen, r)
    return 2.0 * inversions / (m * (m - 1))


@dataclass(frozen=True)
class EvalConfig:
    seed: int = 0  # shuffle seed; solver has its own
    metric: str = "l2_image"
    solver: SolverConfig = field(default_factory=SolverConfig)
    weights: CalibrationWeights | None = None
    threads: int | None = None


@dataclass(frozen=True, eq=False)
class ReconstructionCase:
    name: str
    ground_truth_order: tuple[str, ...]
    metric: str
    result: SequenceResult
    kendall_tau: float

    @property
    def m(self) -> int:
        return len(self.ground_truth_order)

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "ground_truth_order": list(self.ground_truth_order),
            "metric": self.metric,
            "m": self.m,
            "tau": self.kendall_tau,
            "result": self.result.to_json_dict(),
        }


@dataclass(frozen=True, eq=False)
class EvalReport:
    cases: tuple[ReconstructionCase, ...]
    errors: tuple[tuple[str, str, str], ...] = ()  # (case name, metric, message)

    def mean_tau(self) -> dict[str, float]:
        sums: dict[str, list[float]] = {}
        for c in self.cases:
            sums.setdefault(c.metric, []).append(c.kendall_tau)
        return {m: float(np.mean(v)) for m, v in sorted(sums.items())}

    def to_json_dict(self) -> dict:
        return {
            "cases": [c.to_json_dict() for c in self.cases],
            "mean_tau": self.mean_tau(),
            "errors": [list(e) for e in self.errors],
        }


def _shuffled(frames: FrameCollection, seed: int) -> FrameCollection:
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(frames))
    return frames.reordered([frames.ids[i] for i in perm])


def run_reconstruction(
    frames: FrameCollection, name: str, config: EvalConfig = EvalConfig()
) -> ReconstructionCase:
    """Score how well resequencing recovers the collection's given order.

    The collection's frame order is the ground truth; the solver sees a
    seeded shuffle of it and the true first/last frames as path endpoints.
    """
    if len(frames) < 3:
        raise ContractError("reconstruction needs at least 3 frames")
    ground = frames.ids
    shuffled = _shuffled(frames, config.seed)
    m = compute_distance_matrix(
        shuffled, config.metric, w=config.weights, threads=config.threads
    )
    g = build_graph(m)
    result = shortest_hamiltonian_path(
        g, start=ground[0], end=ground[-1], config=config.solver
    )
    tau = kendall_tau_normalized(list(ground), list(result.order))
    return ReconstructionCase(
        name=name,
        ground_truth_order=ground,
        metric=config.metric,
        result=result,
        kendall_tau=tau,
    )


def run_suite(
    cases: list[tuple[FrameCollection, str]],
    metrics: list[str],
    config: EvalConfig = EvalConfig(),
) -> EvalReport:
    """Cross product of cases x metrics; per-case failures are recorded and
    the remaining cases still run."""
    if not cases:
        raise ContractError("need at least 1 case")
    done = []
    errors = []
    for frames, name in cases:
        for metric in metrics:
            case_cfg = EvalConfig(
                seed=config.seed,
                metric=metric,
                solver=config.solver,
                weights=config.weights,
                threads=config.threads,
            )
            try:
                done.append(run_reconstruction(frames, name, case_cfg))
            except Exception as exc:  # noqa: BLE001 - suite must keep going
                errors.append((name, metric, str(exc)))
    return EvalReport(cases=tuple(done), errors=tuple(errors))


def write_report_csv(report: EvalReport, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["case", "metric", "m", "tau", "solver", "seed"])
        for c in report.cases:
            w.writerow(
                [
                    c.name,
                    c.metric,
                    c.m,
                    format(c.kendall_tau, ".17g"),
                    c.result.solver,
                    "" if c.result.seed is None else c.result.seed,
                ]
            )


def write_report_json(report: EvalReport, path: str | Path) -> None:
    jsonio.dump(report.to_json_dict(), path)
