"""Model serialization and CSV input/output.

Model file: a single UTF-8 JSON document,

    {
      "format": "eif-model", "version": 1,
      "variant": "extended" | "standard-equivalent" | "rotated",
      "dimension": N, "t": ..., "psi": ..., "extension_level": ...,
      "seed": ..., "rng_family": "...",
      "trees": [{"height_limit": ..., "nodes": [...], "angle": ...}, ...]
    }

Each tree is a flattened node array with the root at index 0; a node is
either ``{"kind": "internal", "normal": [...], "intercept": [...],
"left_index": i, "right_index": j}`` or ``{"kind": "external", "size": n}``.
Rotated trees additionally carry their angle. Floats are written in
Python's shortest round-trip form, so load(save(f)) scores bit-for-bit
like f. Loading validates structure (bounds, acyclicity, leaf counts)
and reports the first violation.

CSV dialect throughout: comma separator, "." decimal, LF line endings,
UTF-8, one optional header line. Scores are written with 9 significant
digits; dataset values and grid coordinates in shortest round-trip form.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import CsvFormatError, ModelFormatError, UnsupportedVersionError
from .forest import External, Forest, Hyperplane, Internal, IsolationTree, TreeNode, c_factor
from .rng import RNG_FAMILY
from .rotation import RotatedForest, RotatedTree

FORMAT_MAGIC = "eif-model"
FORMAT_VERSION = 1


def _atomic_write_text(path, text: str) -> None:
    """Write whole file or nothing: temp file in the same dir, fsync, rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _flatten_tree(root: TreeNode) -> list[dict]:
    nodes: list[dict] = []
    stack = [(root, None, None)]  # (node, parent slot dict, "left_index"/"right_index")
    while stack:
        node, parent, slot = stack.pop()
        index = len(nodes)
        if parent is not None:
            parent[slot] = index
        if isinstance(node, External):
            nodes.append({"kind": "external", "size": int(node.size)})
        else:
            rec = {
                "kind": "internal",
                "normal": [float(v) for v in node.split.normal],
                "intercept": [float(v) for v in node.split.intercept],
                "left_index": None,
                "right_index": None,
            }
            nodes.append(rec)
            # Right pushed first so the left child lands at index + 1 (preorder).
            stack.append((node.right, rec, "right_index"))
            stack.append((node.left, rec, "left_index"))
    return nodes


def forest_to_document(forest) -> dict:
    """Plain-dict form of a trained forest, ready for JSON."""
    if isinstance(forest, Forest):
        variant = forest.variant
        extension_level = forest.extension_level
        trees = [
            {"height_limit": tr.height_limit, "nodes": _flatten_tree(tr.root)}
            for tr in forest.trees
        ]
    elif isinstance(forest, RotatedForest):
        variant = "rotated"
        extension_level = 0
        trees = [
            {
                "height_limit": rt.tree.height_limit,
                "angle": float(rt.angle),
                "nodes": _flatten_tree(rt.tree.root),
            }
            for rt in forest.trees
        ]
    else:
        raise ValueError(f"cannot serialize {type(forest).__name__}")
    return {
        "format": FORMAT_MAGIC,
        "version": FORMAT_VERSION,
        "variant": variant,
        "dimension": forest.dimension,
        "t": forest.t,
        "psi": forest.psi,
        "extension_level": extension_level,
        "seed": forest.seed,
        "rng_family": RNG_FAMILY,
        "trees": trees,
    }


def save_forest(forest, path) -> None:
    """Write the model document to ``path`` (fsynced, never partial)."""
    try:
        _atomic_write_text(path, json.dumps(forest_to_document(forest), indent=1))
    except OSError as e:
        raise OSError(f"cannot write model to {path}: {e}") from e


def _fail(msg: str) -> ModelFormatError:
    return ModelFormatError(f"invalid model: {msg}")


def _require(doc: dict, key: str, types, where: str):
    if key not in doc:
        raise _fail(f"missing field {key!r} in {where}")
    value = doc[key]
    if not isinstance(value, types):
        raise _fail(f"field {key!r} in {where} has wrong type {type(value).__name__}")
    return value


def _rebuild_tree(nodes: list, dimension: int, where: str) -> tuple[TreeNode, int]:
    """Rebuild node 0's subtree, validating bounds/acyclicity/shape."""
    count = len(nodes)
    if count == 0:
        raise _fail(f"{where} has no nodes")
    built: dict[int, TreeNode] = {}
    visiting: set[int] = set()
    order: list[tuple[int, bool]] = [(0, False)]
    n_leaves = 0
    while order:
        i, expanded = order.pop()
        if expanded:
            rec = nodes[i]
            built[i] = Internal(
                split=Hyperplane(
                    normal=np.asarray(rec["normal"], dtype=np.float64),
                    intercept=np.asarray(rec["intercept"], dtype=np.float64),
                ),
                left=built[rec["left_index"]],
                right=built[rec["right_index"]],
            )
            visiting.discard(i)
            continue
        if i in visiting or i in built:
            raise _fail(f"node {i} in {where} is reached twice (cycle or shared subtree)")
        rec = nodes[i]
        if not isinstance(rec, dict):
            raise _fail(f"node {i} in {where} is not an object")
        kind = _require(rec, "kind", str, f"node {i} of {where}")
        if kind == "external":
            size = _require(rec, "size", int, f"node {i} of {where}")
            if isinstance(size, bool) or size < 0:
                raise _fail(f"node {i} of {where} has negative or non-integer size")
            built[i] = External(size=size)
            n_leaves += 1
        elif kind == "internal":
            normal = _require(rec, "normal", list, f"node {i} of {where}")
            intercept = _require(rec, "intercept", list, f"node {i} of {where}")
            if len(normal) != dimension or len(intercept) != dimension:
                raise _fail(f"node {i} of {where} has vectors of length != dimension {dimension}")
            if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in normal + intercept):
                raise _fail(f"node {i} of {where} has non-finite split coordinates")
            if not any(v != 0 for v in normal):
                raise _fail(f"node {i} of {where} has an all-zero normal")
            left = _require(rec, "left_index", int, f"node {i} of {where}")
            right = _require(rec, "right_index", int, f"node {i} of {where}")
            for child in (left, right):
                if isinstance(child, bool) or not 0 <= child < count:
                    raise _fail(f"node {i} of {where} has child index {child} out of range")
            if left == right:
                raise _fail(f"node {i} of {where} has identical children")
            visiting.add(i)
            order.append((i, True))
            order.append((right, False))
            order.append((left, False))
        else:
            raise _fail(f"node {i} of {where} has unknown kind {kind!r}")
    if len(built) != count:
        raise _fail(f"{where} has {count - len(built)} unreachable node(s)")
    n_internal = count - n_leaves
    if n_leaves != n_internal + 1:
        raise _fail(f"{where} has {n_leaves} leaves for {n_internal} internal nodes")
    return built[0], n_leaves


def load_forest(path):
    """Read and validate a model document; returns a Forest or RotatedForest."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise OSError(f"cannot read model from {path}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise _fail(f"not valid JSON (truncated or corrupt file?): {e}") from e
    if not isinstance(doc, dict):
        raise _fail("top level is not an object")
    magic = _require(doc, "format", str, "document")
    if magic != FORMAT_MAGIC:
        raise _fail(f"format magic is {magic!r}, expected {FORMAT_MAGIC!r}")
    version = _require(doc, "version", int, "document")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"model file has version {version}; this build supports version {FORMAT_VERSION}"
        )
    variant = _require(doc, "variant", str, "document")
    dimension = _require(doc, "dimension", int, "document")
    psi = _require(doc, "psi", int, "document")
    extension_level = _require(doc, "extension_level", int, "document")
    seed = _require(doc, "seed", int, "document")
    _require(doc, "rng_family", str, "document")
    tree_docs = _require(doc, "trees", list, "document")
    if dimension < 1:
        raise _fail(f"dimension must be >= 1, got {dimension}")
    if psi < 1:
        raise _fail(f"psi must be >= 1, got {psi}")
    if not tree_docs:
        raise _fail("document has no trees")
    if not 0 <= extension_level <= dimension - 1:
        raise _fail(f"extension_level {extension_level} out of range for dimension {dimension}")
    if doc.get("t") != len(tree_docs):
        raise _fail(f"t={doc.get('t')} does not match {len(tree_docs)} serialized trees")

    trees = []
    angles = []
    for k, td in enumerate(tree_docs):
        where = f"tree {k}"
        if not isinstance(td, dict):
            raise _fail(f"{where} is not an object")
        height_limit = _require(td, "height_limit", int, where)
        if height_limit < 0:
            raise _fail(f"{where} has negative height_limit")
        nodes = _require(td, "nodes", list, where)
        root, _ = _rebuild_tree(nodes, dimension, where)
        trees.append(IsolationTree(root=root, height_limit=height_limit, psi=psi))
        if variant == "rotated":
            angle = _require(td, "angle", (int, float), where)
            if not math.isfinite(angle):
                raise _fail(f"{where} has non-finite angle")
            angles.append(float(angle))

    if variant == "rotated":
        if dimension != 2:
            raise _fail(f"rotated variant requires dimension 2, got {dimension}")
        return RotatedForest(
            trees=[RotatedTree(tree=tr, angle=a) for tr, a in zip(trees, angles)],
            psi=psi, dimension=2, normalizer=c_factor(psi), seed=seed,
        )
    if variant not in ("extended", "standard-equivalent"):
        raise _fail(f"unknown variant {variant!r}")
    return Forest(
        trees=trees, psi=psi, dimension=dimension, extension_level=extension_level,
        normalizer=c_factor(psi), variant=variant, seed=seed,
    )


# -- CSV ----------------------------------------------------------------


def _parse_cell(cell: str, line_num: int, col: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise CsvFormatError(
            f"non-numeric cell {cell!r} at line {line_num}, column {col + 1}"
        ) from None
    if not math.isfinite(value):
        raise CsvFormatError(f"non-finite value {cell!r} at line {line_num}, column {col + 1}")
    return value


def _looks_numeric(row: list[str]) -> bool:
    try:
        for cell in row:
            float(cell)
    except ValueError:
        return False
    return True


def read_csv(path, has_header: bool | None = None, label_column=None):
    """Parse a dataset CSV into (rows-by-dimension array, labels or None).

    ``has_header=None`` auto-detects: a first line with any non-numeric cell
    is treated as a header. ``label_column`` may be a column name (requires
    a header) or a 0-based index; that column must hold only 0/1 and is
    returned separately.
    """
    import csv as _csv

    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = _csv.reader(f)
            raw = [(reader.line_num, row) for row in reader if row]
    except OSError as e:
        raise OSError(f"cannot read CSV from {path}: {e}") from e
    if not raw:
        raise CsvFormatError(f"{path}: file is empty")

    header: list[str] | None = None
    if has_header is None:
        has_header = not _looks_numeric(raw[0][1])
    if has_header:
        header = [c.strip() for c in raw[0][1]]
        raw = raw[1:]
        if not raw:
            raise CsvFormatError(f"{path}: no data rows after header")

    width = len(raw[0][1])
    label_idx: int | None = None
    if label_column is not None:
        if isinstance(label_column, str):
            if header is None:
                raise CsvFormatError(
                    f"label column {label_column!r} requested but the file has no header"
                )
            if label_column not in header:
                raise CsvFormatError(
                    f"unknown label column {label_column!r}; header has {header}"
                )
            label_idx = header.index(label_column)
        else:
            label_idx = int(label_column)
            if not 0 <= label_idx < width:
                raise CsvFormatError(
                    f"label column index {label_idx} out of range for {width} columns"
                )

    n = len(raw)
    features = np.empty((n, width - (1 if label_idx is not None else 0)))
    labels = np.empty(n, dtype=int) if label_idx is not None else None
    for r, (line_num, row) in enumerate(raw):
        if len(row) != width:
            raise CsvFormatError(
                f"ragged row at line {line_num}: expected {width} cells, got {len(row)}"
            )
        c_out = 0
        for c, cell in enumerate(row):
            value = _parse_cell(cell.strip(), line_num, c)
            if c == label_idx:
                if value not in (0.0, 1.0):
                    raise CsvFormatError(
                        f"label at line {line_num} is {cell!r}, must be 0 or 1"
                    )
                labels[r] = int(value)
            else:
                features[r, c_out] = value
                c_out += 1
    if features.shape[1] < 1:
        raise CsvFormatError(f"{path}: no feature columns")
    return features, labels


def format_score(value: float) -> str:
    """Scores go to disk with 9 significant digits."""
    return f"{value:.9g}"


def write_dataset_csv(path, data: np.ndarray) -> None:
    """Dataset rows under an x0..x{N-1} header, shortest round-trip floats."""
    data = np.asarray(data, dtype=np.float64)
    lines = [",".join(f"x{d}" for d in range(data.shape[1]))]
    lines.extend(",".join(repr(float(v)) for v in row) for row in data)
    _atomic_write_text(path, "\n".join(lines) + "\n")


def write_scores_csv(path, ids, scores) -> None:
    lines = ["index,score"]
    lines.extend(f"{int(i)},{format_score(float(s))}" for i, s in zip(ids, scores))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def write_grid_csv(path, grid) -> None:
    """Row-major, x fastest: one row per grid cell under an x,y,score header."""
    xs = grid.x_min + (np.arange(grid.nx) + 0.5) * (grid.x_max - grid.x_min) / grid.nx
    ys = grid.y_min + (np.arange(grid.ny) + 0.5) * (grid.y_max - grid.y_min) / grid.ny
    lines = ["x,y,score"]
    for j in range(grid.ny):
        for i in range(grid.nx):
            lines.append(
                f"{repr(float(xs[i]))},{repr(float(ys[j]))},{format_score(float(grid.values[j, i]))}"
            )
    _atomic_write_text(path, "\n".join(lines) + "\n")


def write_stats_csv(path, stats) -> None:
    lines = ["level,mean,variance,n_probe"]
    lines.extend(
        f"{repr(s.level)},{format_score(s.mean)},{format_score(s.variance)},{s.n_probe}"
        for s in stats
    )
    _atomic_write_text(path, "\n".join(lines) + "\n")


def write_convergence_csv(path, series) -> None:
    lines = ["t,mean,variance"]
    lines.extend(
        f"{t},{format_score(m)},{format_score(v)}"
        for t, m, v in zip(series.t_values, series.means, series.variances)
    )
    _atomic_write_text(path, "\n".join(lines) + "\n")
