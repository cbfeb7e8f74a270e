import numpy as np
import pytest

from reseq.frameset import (
    DistanceMatrix,
    FeatureArchive,
    FrameCollection,
    FrameRecord,
    LayerSpec,
    channel_unit_normalize,
)


def make_monotone_frames(m: int, size: int = 16, seed: int = 0) -> FrameCollection:
    """Frames whose pairwise L2 distance grows strictly with index gap: a
    Gaussian blob sweeping left-to-right over a brightening background."""
    frames = []
    for i in range(m):
        y, x = np.mgrid[0:size, 0:size]
        cx = size * (i + 0.5) / m
        blob = np.exp(-((x - cx) ** 2 + (y - size / 2.0) ** 2) / (2.0 * (size / 8.0) ** 2))
        img = np.clip(0.1 + 0.6 * i / m + 0.3 * blob, 0.0, 1.0).astype(np.float32)
        frames.append(FrameRecord(id=f"f{i:03d}", pixels=np.stack([img] * 3, axis=-1)))
    return FrameCollection(tuple(frames), source_kind="images")


def random_symmetric_matrix(n: int, seed: int, integer: bool = True) -> DistanceMatrix:
    """Random valid distance matrix; integer weights make float sums exact."""
    rng = np.random.default_rng(seed)
    if integer:
        d = rng.integers(1, 100, size=(n, n)).astype(np.float64)
    else:
        d = rng.uniform(0.1, 10.0, size=(n, n))
    d = np.triu(d, 1)
    d = d + d.T
    ids = tuple(f"n{i:02d}" for i in range(n))
    return DistanceMatrix(frame_ids=ids, values=d.astype(np.float32))


def planted_outlier_matrix(
    n: int = 30, seed: int = 0, dim: int = 6, spread: float = 1.0, dist: float = 30.0
) -> DistanceMatrix:
    """Euclidean cluster of n-1 points plus one far point (the last frame),
    so the matrix is a genuine metric with a single extreme row."""
    rng = np.random.default_rng(seed)
    pts = rng.normal(0.0, spread, size=(n, dim))
    pts[-1] = dist / np.sqrt(dim)
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    np.fill_diagonal(d, 0.0)
    ids = tuple(f"f{i:02d}" for i in range(n))
    return DistanceMatrix(frame_ids=ids, values=d.astype(np.float32))


def random_archive(
    seed: int,
    n_frames: int = 3,
    shapes: tuple[tuple[int, int, int], ...] = ((3, 2, 2), (2, 3, 1)),
    normalized: bool = True,
) -> FeatureArchive:
    rng = np.random.default_rng(seed)
    layers = tuple(
        LayerSpec(name=f"layer{li}", c=c, h=h, w=w) for li, (c, h, w) in enumerate(shapes)
    )
    data = tuple(
        tuple(rng.normal(size=s).astype(np.float32) for s in shapes)
        for _ in range(n_frames)
    )
    raw = FeatureArchive(
        frame_ids=tuple(f"f{i}" for i in range(n_frames)),
        layers=layers,
        data=data,
        normalized=False,
    )
    return channel_unit_normalize(raw) if normalized else raw


@pytest.fixture
def image_dir(tmp_path):
    """12 ordered monotone frames written as PNGs; returns the directory."""
    from PIL import Image

    fc = make_monotone_frames(12)
    d = tmp_path / "frames"
    d.mkdir()
    for rec in fc.frames:
        arr = np.clip(np.rint(rec.pixels * 255.0), 0, 255).astype(np.uint8)
        Image.fromarray(arr, "RGB").save(d / f"{rec.id}.png")
    return d


# ---------------------------------------------------------------------------
# acceptance checklist reporting: one visible line per criterion

_ACCEPTANCE = "test_acceptance.py"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for outcome, mark in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call" and outcome == "passed":
                continue
            if _ACCEPTANCE not in rep.nodeid:
                continue
            label = rep.nodeid.split("::")[-1].removeprefix("test_").replace("_", " ")
            rows.append((mark, label, rep.duration))
    if rows:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance checklist:")
        for mark, label, dur in rows:
            terminalreporter.write_line(f"  [{mark}] {label} ({dur:.2f}s)")
