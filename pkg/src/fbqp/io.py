"""Problem files, solution documents, and trace CSV.

A problem file is a JSON object:

    {
      "version": 1,
      "n": 2, "p": 0, "q": 3,
      "H": {"dense": [[...], [...]]},
      "f": [...],
      "G": {"dense": [...]} | {"triplets": [[row, col, value], ...]},
      "h": [...],
      "A": ..., "b": [...],
      "solution": {"z": [...], "lambda": [...], "v": [...]},   # optional
      "metadata": {...}                                        # optional
    }

Matrices accept either a dense row-major list of rows or a triplet list
(duplicate triplets are summed). Serialization always writes dense rows
and round-trips every float exactly via repr. Parsing rejects non-finite
numbers and shape mismatches with the offending field named.
"""

from __future__ import annotations

import io as _io
import json
from typing import Any

import numpy as np

from .problem import Iterate, QpProblem
from .solver import TraceRecord

__all__ = [
    "FORMAT_VERSION",
    "ProblemFormatError",
    "parse_problem",
    "serialize_problem",
    "load_problem",
    "save_problem",
    "parse_solution",
    "trace_csv",
    "write_trace",
]

FORMAT_VERSION = 1

TRACE_HEADER = "outer,inner,sigma,merit,kkt_max,step_len"


class ProblemFormatError(ValueError):
    """A problem document is malformed; the message names the field."""


def _require_finite(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise ProblemFormatError(f"field '{name}' contains non-finite values")


def _parse_vector(doc: Any, length: int, name: str) -> np.ndarray:
    if not isinstance(doc, list):
        raise ProblemFormatError(f"field '{name}' must be a list of numbers")
    try:
        vec = np.array(doc, dtype=float)
    except (TypeError, ValueError):
        raise ProblemFormatError(f"field '{name}' must be a list of numbers") from None
    if vec.shape != (length,):
        raise ProblemFormatError(
            f"field '{name}' must have length {length}, got shape {vec.shape}"
        )
    _require_finite(vec, name)
    return vec


def _parse_matrix(doc: Any, rows: int, cols: int, name: str) -> np.ndarray:
    if not isinstance(doc, dict) or len(doc) != 1:
        raise ProblemFormatError(
            f"field '{name}' must be an object with exactly one of 'dense' or 'triplets'"
        )
    if "dense" in doc:
        try:
            mat = np.array(doc["dense"], dtype=float)
        except (TypeError, ValueError):
            raise ProblemFormatError(f"field '{name}.dense' must be a list of rows") from None
        if mat.shape == (0,) and rows == 0:
            mat = np.zeros((0, cols))
        if mat.shape != (rows, cols):
            raise ProblemFormatError(
                f"field '{name}.dense' must have shape ({rows}, {cols}), got {mat.shape}"
            )
        _require_finite(mat, f"{name}.dense")
        return mat
    if "triplets" in doc:
        mat = np.zeros((rows, cols))
        entries = doc["triplets"]
        if not isinstance(entries, list):
            raise ProblemFormatError(f"field '{name}.triplets' must be a list")
        for k, entry in enumerate(entries):
            if not (isinstance(entry, list) and len(entry) == 3):
                raise ProblemFormatError(
                    f"field '{name}.triplets[{k}]' must be [row, col, value]"
                )
            row, col, value = entry
            if not (isinstance(row, int) and isinstance(col, int)):
                raise ProblemFormatError(
                    f"field '{name}.triplets[{k}]' indices must be integers"
                )
            if not (0 <= row < rows and 0 <= col < cols):
                raise ProblemFormatError(
                    f"field '{name}.triplets[{k}]' index ({row}, {col}) is outside "
                    f"({rows}, {cols})"
                )
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ProblemFormatError(
                    f"field '{name}.triplets[{k}]' value must be a number"
                ) from None
            if not np.isfinite(value):
                raise ProblemFormatError(f"field '{name}.triplets[{k}]' value is non-finite")
            # Duplicates accumulate.
            mat[row, col] += value
        return mat
    raise ProblemFormatError(f"field '{name}' must contain 'dense' or 'triplets'")


def _parse_dim(doc: dict, name: str, minimum: int) -> int:
    value = doc.get(name)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ProblemFormatError(f"field '{name}' must be an integer >= {minimum}")
    return value


def parse_problem(document: str | dict) -> tuple[QpProblem, Iterate | None]:
    """Parse a problem document from JSON text or an already-decoded dict.

    Returns:
        (problem, solution) with solution None when the document carries no
        solution block.

    Raises:
        ProblemFormatError: naming the offending field.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ProblemFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ProblemFormatError("document must be a JSON object")
    version = document.get("version")
    if version != FORMAT_VERSION:
        raise ProblemFormatError(
            f"field 'version' must be {FORMAT_VERSION}, got {version!r}"
        )
    n = _parse_dim(document, "n", 1)
    p = _parse_dim(document, "p", 0)
    q = _parse_dim(document, "q", 0)
    for name in ("H", "f", "G", "h", "A", "b"):
        if name not in document:
            raise ProblemFormatError(f"field '{name}' is missing")
    H = _parse_matrix(document["H"], n, n, "H")
    f = _parse_vector(document["f"], n, "f")
    G = _parse_matrix(document["G"], p, n, "G")
    h = _parse_vector(document["h"], p, "h")
    A = _parse_matrix(document["A"], q, n, "A")
    b = _parse_vector(document["b"], q, "b")
    problem = QpProblem(H, f, G, h, A, b)
    solution = None
    if "solution" in document and document["solution"] is not None:
        solution = parse_solution(document["solution"], n=n, p=p, q=q)
    return problem, solution


def parse_solution(
    document: str | dict, n: int | None = None, p: int | None = None, q: int | None = None
) -> Iterate:
    """Parse a solution block {"z", "lambda", "v"} into an iterate.

    Accepts either a bare solution object or any object carrying one under
    a "solution" key (so a solver's JSON report can be fed back directly).
    Dimensions are checked when given.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ProblemFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ProblemFormatError("solution must be a JSON object")
    if "z" not in document and isinstance(document.get("solution"), dict):
        document = document["solution"]
    if "z" not in document:
        raise ProblemFormatError("field 'solution.z' is missing")

    def _expected(doc, given):
        if given is not None:
            return given
        return len(doc) if isinstance(doc, list) else 0

    z = document["z"]
    lam = document.get("lambda", [])
    v = document.get("v", [])
    z = _parse_vector(z, _expected(z, n), "solution.z")
    lam = _parse_vector(lam, _expected(lam, p), "solution.lambda")
    v = _parse_vector(v, _expected(v, q), "solution.v")
    return Iterate(z, lam, v)


def _matrix_doc(matrix: np.ndarray) -> dict:
    return {"dense": [[float(x) for x in row] for row in matrix]}


def _vector_doc(vector: np.ndarray) -> list[float]:
    return [float(x) for x in vector]


def serialize_problem(
    problem: QpProblem,
    solution: Iterate | None = None,
    metadata: dict | None = None,
) -> str:
    """Serialize a problem (and optionally a solution) to canonical JSON.

    The output is deterministic (sorted keys, repr floats) and parses back
    to bit-identical arrays.
    """
    document: dict[str, Any] = {
        "version": FORMAT_VERSION,
        "n": problem.n,
        "p": problem.p,
        "q": problem.q,
        "H": _matrix_doc(problem.H),
        "f": _vector_doc(problem.f),
        "G": _matrix_doc(problem.G),
        "h": _vector_doc(problem.h),
        "A": _matrix_doc(problem.A),
        "b": _vector_doc(problem.b),
    }
    if solution is not None:
        document["solution"] = {
            "z": _vector_doc(solution.z),
            "lambda": _vector_doc(solution.lam),
            "v": _vector_doc(solution.v),
        }
    if metadata is not None:
        document["metadata"] = metadata
    return json.dumps(document, indent=2, sort_keys=True, allow_nan=False) + "\n"


def load_problem(path) -> tuple[QpProblem, Iterate | None]:
    """Read and parse a problem file."""
    with open(path, "r", encoding="utf-8") as handle:
        return parse_problem(handle.read())


def save_problem(path, problem, solution=None, metadata=None) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(serialize_problem(problem, solution, metadata))


def trace_csv(records) -> str:
    """Render trace records as CSV text with a fixed header."""
    out = _io.StringIO()
    out.write(TRACE_HEADER + "\n")
    for record in records:
        out.write(
            f"{record.outer},{record.inner},{record.sigma!r},{record.merit!r},"
            f"{record.kkt_max!r},{record.step_len!r}\n"
        )
    return out.getvalue()


def write_trace(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(trace_csv(records))
