"""On-disk canonical graph format, split generation, and split files.

A dataset ``name`` in a directory consists of UTF-8 text files:

* ``name.meta``  -- ``nodes=N``, ``features=X``, ``classes=C``, ``directed=0|1``
* ``name.edges`` -- one ``src<TAB>dst`` arc per line, 0-based
* ``name.x``     -- N lines of X space-separated reals
* ``name.y``     -- N lines, one class id each
* ``name.ids``   -- optional, N original node identifiers

Split files carry three sections headed ``#train``, ``#val``, ``#test``
with one node index per line.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import SparseGraph

__all__ = [
    "CanonicalDataset",
    "SplitSet",
    "DatasetFormatError",
    "load_dataset",
    "save_dataset",
    "make_splits",
    "load_splits",
    "save_splits",
]

_META_KEYS = ("nodes", "features", "classes", "directed")


class DatasetFormatError(ValueError):
    """A canonical file failed to parse; message carries file and line."""


@dataclass(frozen=True)
class CanonicalDataset:
    graph: SparseGraph
    name: str
    source_checksum: str

    def __post_init__(self):
        if len(np.unique(self.graph.labels)) < 2:
            raise ValueError("a benchmark dataset needs labels from at least two classes")


@dataclass(frozen=True)
class SplitSet:
    """Disjoint train/val/test node index sets.

    ``seed``/``fractions``/``stratified`` are None when the split came from
    a file rather than a generator.
    """

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    seed: int | None = None
    fractions: tuple[float, float, float] | None = None
    stratified: bool | None = None

    def __post_init__(self):
        joined = np.concatenate([self.train, self.val, self.test])
        if len(np.unique(joined)) != len(joined):
            raise ValueError("split sections overlap")
        if len(joined) and joined.min() < 0:
            raise ValueError("split contains a negative node index")


def _fail(path: Path, line_no: int | None, message: str):
    where = f"{path}:{line_no}" if line_no is not None else str(path)
    raise DatasetFormatError(f"{where}: {message}")


def _read_meta(path: Path) -> dict[str, int]:
    meta = {}
    for i, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or key not in _META_KEYS:
            _fail(path, i, f"expected one of {_META_KEYS} as 'key=value', got {line!r}")
        try:
            meta[key] = int(value)
        except ValueError:
            _fail(path, i, f"non-integer value for {key}: {value!r}")
    missing = [k for k in _META_KEYS if k not in meta]
    if missing:
        _fail(path, None, f"missing meta keys: {missing}")
    return meta


def load_dataset(dir_path, name: str) -> CanonicalDataset:
    """Read canonical files for ``name`` under ``dir_path``.

    Header counts are validated against actual row counts; duplicate arcs
    collapse at graph construction. The checksum digests every file read,
    in the fixed order meta, edges, x, y, ids.
    """
    base = Path(dir_path)
    paths = {ext: base / f"{name}.{ext}" for ext in ("meta", "edges", "x", "y", "ids")}
    for ext in ("meta", "edges", "x", "y"):
        if not paths[ext].exists():
            raise DatasetFormatError(f"{paths[ext]}: file not found")

    meta = _read_meta(paths["meta"])
    n, x_dim, classes = meta["nodes"], meta["features"], meta["classes"]
    directed = bool(meta["directed"])

    arcs = []
    for i, line in enumerate(
        paths["edges"].read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = line.strip()
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            _fail(paths["edges"], i, f"expected 'src<TAB>dst', got {line!r}")
        try:
            src, dst = int(parts[0]), int(parts[1])
        except ValueError:
            _fail(paths["edges"], i, f"non-integer endpoint in {line!r}")
        if not (0 <= src < n and 0 <= dst < n):
            _fail(paths["edges"], i, f"endpoint out of range [0, {n})")
        arcs.append((src, dst))

    features = np.zeros((n, x_dim))
    x_rows = paths["x"].read_text(encoding="utf-8").splitlines()
    if len(x_rows) != n:
        _fail(paths["x"], None, f"expected {n} feature rows, found {len(x_rows)}")
    for i, line in enumerate(x_rows, start=1):
        values = line.split()
        if len(values) != x_dim:
            _fail(paths["x"], i, f"expected {x_dim} values, found {len(values)}")
        try:
            features[i - 1] = [float(v) for v in values]
        except ValueError:
            _fail(paths["x"], i, "non-numeric feature value")

    y_rows = paths["y"].read_text(encoding="utf-8").splitlines()
    if len(y_rows) != n:
        _fail(paths["y"], None, f"expected {n} label rows, found {len(y_rows)}")
    labels = np.zeros(n, dtype=np.int64)
    for i, line in enumerate(y_rows, start=1):
        try:
            labels[i - 1] = int(line.strip())
        except ValueError:
            _fail(paths["y"], i, f"non-integer label {line.strip()!r}")
        if not 0 <= labels[i - 1] < classes:
            _fail(paths["y"], i, f"label {labels[i - 1]} outside [0, {classes})")

    node_ids = None
    if paths["ids"].exists():
        id_rows = paths["ids"].read_text(encoding="utf-8").splitlines()
        if len(id_rows) != n:
            _fail(paths["ids"], None, f"expected {n} ids, found {len(id_rows)}")
        node_ids = np.array([int(r.strip()) for r in id_rows], dtype=np.int64)

    digest = hashlib.sha256()
    for ext in ("meta", "edges", "x", "y", "ids"):
        if paths[ext].exists():
            digest.update(paths[ext].read_bytes())

    graph = SparseGraph.from_arcs(
        num_nodes=n,
        arcs=np.array(arcs, dtype=np.int64).reshape(-1, 2),
        directed=directed,
        features=features,
        labels=labels,
        num_classes=classes,
        node_ids=node_ids,
    )
    return CanonicalDataset(graph=graph, name=name, source_checksum=digest.hexdigest())


def save_dataset(dir_path, name: str, g: SparseGraph) -> list[Path]:
    """Write canonical files for ``g``; inverse of load_dataset.

    Features serialize at 17 significant digits so load(save(g)) reproduces
    the array bit-for-bit.
    """
    base = Path(dir_path)
    base.mkdir(parents=True, exist_ok=True)
    written = []

    meta = base / f"{name}.meta"
    meta.write_text(
        f"nodes={g.num_nodes}\nfeatures={g.num_features}\n"
        f"classes={g.num_classes}\ndirected={int(g.directed)}\n",
        encoding="utf-8",
    )
    written.append(meta)

    rows = g._arc_rows()
    edges = base / f"{name}.edges"
    edges.write_text(
        "".join(f"{u}\t{v}\n" for u, v in zip(rows, g.indices)), encoding="utf-8"
    )
    written.append(edges)

    x = base / f"{name}.x"
    x.write_text(
        "".join(" ".join(f"{v:.17g}" for v in row) + "\n" for row in g.features),
        encoding="utf-8",
    )
    written.append(x)

    y = base / f"{name}.y"
    y.write_text("".join(f"{v}\n" for v in g.labels), encoding="utf-8")
    written.append(y)

    ids = base / f"{name}.ids"
    ids.write_text("".join(f"{v}\n" for v in g.node_ids), encoding="utf-8")
    written.append(ids)
    return written


def _largest_remainder(total: int, fractions) -> list[int]:
    """Integer allocation of ``total`` over ``fractions`` (which may sum
    below 1; the shortfall stays unallocated)."""
    exact = [total * f for f in fractions]
    counts = [int(np.floor(e)) for e in exact]
    want = int(round(total * sum(fractions)))
    remainders = [e - c for e, c in zip(exact, counts)]
    order = sorted(range(len(fractions)), key=lambda i: (-remainders[i], i))
    for i in order:
        if sum(counts) >= want:
            break
        counts[i] += 1
    return counts


def make_splits(
    g: SparseGraph,
    fractions: tuple[float, float, float] = (0.6, 0.2, 0.2),
    seed: int = 0,
    stratified: bool = True,
) -> SplitSet:
    """Seeded train/val/test split.

    Stratified mode allocates per class with largest-remainder rounding and
    requires every class to populate each nonempty split.
    """
    if len(fractions) != 3:
        raise ValueError("fractions must be (train, val, test)")
    if any(f < 0 for f in fractions) or sum(fractions) > 1.0 + 1e-12:
        raise ValueError("fractions must be nonnegative and sum to at most 1")
    rng = np.random.default_rng(seed)
    n = g.num_nodes

    if not stratified:
        order = rng.permutation(n)
        counts = _largest_remainder(n, fractions)
        train = order[: counts[0]]
        val = order[counts[0]: counts[0] + counts[1]]
        test = order[counts[0] + counts[1]: counts[0] + counts[1] + counts[2]]
    else:
        active = [i for i, f in enumerate(fractions) if f > 0]
        parts: list[list[np.ndarray]] = [[], [], []]
        for c in range(g.num_classes):
            members = np.flatnonzero(g.labels == c)
            if members.size == 0:
                continue
            if members.size < len(active):
                raise ValueError(
                    f"class {c} has {members.size} nodes; stratified splitting "
                    f"needs at least {len(active)} (one per nonempty split)"
                )
            members = members[rng.permutation(members.size)]
            counts = _largest_remainder(members.size, fractions)
            if sum(counts) < len(active):
                raise ValueError(
                    f"class {c} allocates only {sum(counts)} nodes across "
                    f"{len(active)} nonempty splits; raise the fractions"
                )
            # largest-remainder can starve a small class's later splits;
            # take from the biggest allocation so every active split gets one
            for i in active:
                while counts[i] == 0:
                    donor = int(np.argmax(counts))
                    counts[donor] -= 1
                    counts[i] += 1
            start = 0
            for i in range(3):
                parts[i].append(members[start: start + counts[i]])
                start += counts[i]
        train, val, test = (
            np.sort(np.concatenate(p)) if p else np.array([], dtype=np.int64)
            for p in parts
        )

    return SplitSet(
        train=np.sort(train).astype(np.int64),
        val=np.sort(val).astype(np.int64),
        test=np.sort(test).astype(np.int64),
        seed=seed,
        fractions=tuple(float(f) for f in fractions),
        stratified=stratified,
    )


def load_splits(path, num_nodes: int | None = None) -> SplitSet:
    """Parse a three-section split file; validates disjointness, and range
    when ``num_nodes`` is given."""
    path = Path(path)
    sections: dict[str, list[int]] = {"train": [], "val": [], "test": []}
    current: str | None = None
    for i, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            section = line[1:].strip()
            if section not in sections:
                _fail(path, i, f"unknown section {line!r}")
            current = section
            continue
        if current is None:
            _fail(path, i, "index before any #train/#val/#test header")
        try:
            idx = int(line)
        except ValueError:
            _fail(path, i, f"non-integer index {line!r}")
        if num_nodes is not None and not 0 <= idx < num_nodes:
            _fail(path, i, f"index {idx} outside [0, {num_nodes})")
        sections[current].append(idx)

    try:
        return SplitSet(
            train=np.array(sorted(sections["train"]), dtype=np.int64),
            val=np.array(sorted(sections["val"]), dtype=np.int64),
            test=np.array(sorted(sections["test"]), dtype=np.int64),
        )
    except ValueError as e:
        raise DatasetFormatError(f"{path}: {e}") from None


def save_splits(path, splits: SplitSet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for section, idx in (
            ("train", splits.train), ("val", splits.val), ("test", splits.test)
        ):
            fh.write(f"#{section}\n")
            for i in idx:
                fh.write(f"{i}\n")
