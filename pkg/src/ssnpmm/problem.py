"""Problem data model, validation, residuals, and file I/O.

The instance is

    min  c^T x + 1/2 x^T Q x + ||D x||_1   s.t.  A x = b,  l <= x <= u

with ``D = diag(d)``, ``d >= 0``.

On disk an instance is a directory holding ``manifest.txt`` (``key = value``
lines), Matrix Market files for ``Q`` and ``A``, and ASCII vector files.
Vectors may also be written inline in the manifest. Infinite bounds are the
tokens ``inf`` and ``-inf``.
"""
import dataclasses
import enum
import json
import logging
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .exceptions import DimensionMismatch, IoError, ParseError, ValidationError
from .prox import BoxSet, project_box, soft_threshold

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.txt"
_REQUIRED_KEYS = ("n", "m", "Q_file", "A_file", "c", "b", "d", "l", "u")


def _frozen_vector(v, name, length):
    a = np.array(v, dtype=np.float64).reshape(-1)
    if a.shape[0] != length:
        raise DimensionMismatch(f"{name} has length {a.shape[0]}, expected {length}")
    a.flags.writeable = False
    return a


def _frozen_csr(M, name, shape):
    M = sp.csr_matrix(M, dtype=np.float64)
    if M.shape != shape:
        raise DimensionMismatch(f"{name} has shape {M.shape}, expected {shape}")
    M = M.copy()
    M.sum_duplicates()
    M.sort_indices()
    for arr in (M.data, M.indices, M.indptr):
        arr.flags.writeable = False
    return M


@dataclasses.dataclass(frozen=True, eq=False)
class Problem:
    """Validated, read-only instance data.

    Arrays are copied on construction and marked non-writeable, so a
    ``Problem`` may be shared between concurrent solves.
    """

    Q: sp.csr_matrix
    A: sp.csr_matrix
    c: np.ndarray
    b: np.ndarray
    d: np.ndarray
    l: np.ndarray
    u: np.ndarray
    name: str = "problem"

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64).reshape(-1)
        n = c.shape[0]
        b = np.asarray(self.b, dtype=np.float64).reshape(-1)
        m = b.shape[0]
        if m > n:
            raise DimensionMismatch(f"m={m} exceeds n={n}")
        Q = _frozen_csr(self.Q, "Q", (n, n))
        A = _frozen_csr(self.A, "A", (m, n))
        fields = {
            "Q": Q,
            "A": A,
            "c": _frozen_vector(c, "c", n),
            "b": _frozen_vector(b, "b", m),
            "d": _frozen_vector(self.d, "d", n),
            "l": _frozen_vector(self.l, "l", n),
            "u": _frozen_vector(self.u, "u", n),
        }
        for key, val in fields.items():
            object.__setattr__(self, key, val)
        self._validate()

    def _validate(self):
        for key in ("c", "b", "d"):
            if not np.all(np.isfinite(getattr(self, key))):
                raise ValidationError(f"{key} must be finite")
        if np.any(np.isnan(self.l)) or np.any(np.isnan(self.u)):
            raise ValidationError("bounds contain NaN")
        if not np.all(np.isfinite(self.Q.data)) or not np.all(np.isfinite(self.A.data)):
            raise ValidationError("matrix entries must be finite")
        if np.any(self.d < 0):
            raise ValidationError("d must be nonnegative")
        if np.any(self.l > self.u):
            i = int(np.argmax(self.l > self.u))
            raise ValidationError(f"l[{i}]={self.l[i]} exceeds u[{i}]={self.u[i]}")
        asym = self.Q - self.Q.T
        if asym.count_nonzero():
            raise ValidationError("Q is not symmetric")

    @property
    def n(self):
        return self.c.shape[0]

    @property
    def m(self):
        return self.b.shape[0]

    @property
    def box(self):
        return BoxSet(self.l, self.u)

    def objective(self, x):
        """``c^T x + 1/2 x^T Q x + ||D x||_1``."""
        x = np.asarray(x, dtype=np.float64)
        return float(self.c @ x + 0.5 * x @ (self.Q @ x) + np.sum(self.d * np.abs(x)))


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    MAX_ITERATIONS = "MaxIterations"
    LINEAR_SOLVER_FAILURE = "LinearSolverFailure"


@dataclasses.dataclass
class SolveReport:
    """Per-layer counters and timings of one solve."""

    pmm_iters: int = 0
    ssn_iters: int = 0
    minres_iters_total: int = 0
    minres_calls: int = 0
    factorizations: int = 0
    wall_time_seconds: float = 0.0
    final_residuals: tuple = (np.inf, np.inf, np.inf)
    warmstart_iters: int = 0
    warmstart_time_seconds: float = 0.0
    linesearch_failures: int = 0
    minres_unconverged: int = 0
    seed: int | None = None
    message: str = ""

    @property
    def minres_avg(self):
        if self.minres_calls == 0:
            return 0.0
        return self.minres_iters_total / self.minres_calls

    def to_dict(self):
        out = dataclasses.asdict(self)
        out["final_residuals"] = [float(r) for r in self.final_residuals]
        out["minres_avg"] = self.minres_avg
        return out

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        kwargs = {k: v for k, v in data.items() if k in names}
        if "final_residuals" in kwargs:
            kwargs["final_residuals"] = tuple(float(r) for r in kwargs["final_residuals"])
        return cls(**kwargs)


@dataclasses.dataclass(frozen=True, eq=False)
class Solution:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    status: Status
    report: SolveReport


def kkt_residuals(p, x, y, z):
    """Scaled dual, primal, and complementarity residuals.

    Returns
    -------
    tuple of float
        ``||x - prox_g(x - c - Qx + A^T y - z)|| / (1 + ||c||)``,
        ``||Ax - b|| / (1 + ||b||)`` and
        ``||x - Pi_K(x + z)|| / (1 + ||x|| + ||z||)``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != (p.n,) or z.shape != (p.n,) or y.shape != (p.m,):
        raise DimensionMismatch(
            f"iterate shapes {x.shape}, {y.shape}, {z.shape} do not match n={p.n}, m={p.m}"
        )
    grad = p.c + p.Q @ x - p.A.T @ y + z
    r_dual = np.linalg.norm(x - soft_threshold(x - grad, 1.0, p.d)) / (1.0 + np.linalg.norm(p.c))
    r_primal = np.linalg.norm(p.A @ x - p.b) / (1.0 + np.linalg.norm(p.b))
    r_compl = np.linalg.norm(x - project_box(x + z, p.box)) / (
        1.0 + np.linalg.norm(x) + np.linalg.norm(z)
    )
    return float(r_dual), float(r_primal), float(r_compl)


# ---------------------------------------------------------------- file I/O


def _parse_float(tok, where):
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"{where}: cannot parse {tok!r} as a number") from None


def _parse_vector_text(text, where):
    return np.array([_parse_float(t, where) for t in text.split()], dtype=np.float64)


def _read_text(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _parse_manifest(text, path):
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in entries:
            raise ParseError(f"{path}:{lineno}: duplicate key {key!r}")
        entries[key] = value
    missing = [k for k in _REQUIRED_KEYS if k not in entries]
    if missing:
        raise ParseError(f"{path}: missing keys {missing}")
    return entries


def _read_matrix(path):
    if not Path(path).is_file():
        raise ParseError(f"matrix file {path} not found")
    try:
        M = scipy.io.mmread(str(path))
    except (ValueError, TypeError, IndexError) as exc:
        raise ParseError(f"{path}: malformed Matrix Market file: {exc}") from exc
    return sp.csr_matrix(M, dtype=np.float64)


def load_problem(manifest_path):
    """Read and validate an instance.

    Parameters
    ----------
    manifest_path : path
        The manifest file, or a directory containing ``manifest.txt``.

    Raises
    ------
    ParseError, ValidationError, DimensionMismatch, IoError
    """
    path = Path(manifest_path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    if not path.exists():
        raise ParseError(f"manifest {path} not found")
    root = path.parent
    entries = _parse_manifest(_read_text(path), path)
    try:
        n = int(entries["n"])
        m = int(entries["m"])
    except ValueError:
        raise ParseError(f"{path}: n and m must be integers") from None

    def vector(key):
        value = entries[key]
        if value.startswith("@"):
            ref = root / value[1:].strip()
            if not ref.is_file():
                raise ParseError(f"{path}: {key} references missing file {ref}")
            return _parse_vector_text(_read_text(ref), str(ref))
        return _parse_vector_text(value, f"{path}:{key}")

    vecs = {k: vector(k) for k in ("c", "b", "d", "l", "u")}
    for k in ("c", "d", "l", "u"):
        if vecs[k].shape[0] != n:
            raise DimensionMismatch(f"{k} has length {vecs[k].shape[0]}, expected n={n}")
    if vecs["b"].shape[0] != m:
        raise DimensionMismatch(f"b has length {vecs['b'].shape[0]}, expected m={m}")
    for k in ("c", "b", "d", "l", "u"):
        if np.any(np.isnan(vecs[k])):
            raise ValidationError(f"{k} contains NaN")
    Q = _read_matrix(root / entries["Q_file"])
    A = _read_matrix(root / entries["A_file"])
    if m == 0 and A.shape[0] == 0:
        A = sp.csr_matrix((0, n))
    return Problem(Q, A, **vecs, name=entries.get("name", path.parent.name))


def _fmt_vector(v):
    return "\n".join("%.17g" % x for x in v) + ("\n" if len(v) else "")


def _write_matrix(path, M):
    M = sp.coo_matrix(M)
    if M.shape[0] == 0 or M.shape[1] == 0:
        # scipy refuses empty shapes; the header alone is valid Matrix Market
        path.write_text(
            "%%MatrixMarket matrix coordinate real general\n"
            f"{M.shape[0]} {M.shape[1]} 0\n",
            encoding="utf-8",
        )
        return
    scipy.io.mmwrite(str(path), M, precision=17, symmetry="general")


def save_problem(p, directory):
    """Write ``p`` as a manifest directory that :func:`load_problem` reads back exactly."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        _write_matrix(directory / "Q.mtx", p.Q)
        _write_matrix(directory / "A.mtx", p.A)
        for key in ("c", "b", "d", "l", "u"):
            (directory / f"{key}.txt").write_text(_fmt_vector(getattr(p, key)), encoding="utf-8")
        lines = [
            f"name = {p.name}",
            f"n = {p.n}",
            f"m = {p.m}",
            "Q_file = Q.mtx",
            "A_file = A.mtx",
        ] + [f"{key} = @{key}.txt" for key in ("c", "b", "d", "l", "u")]
        (directory / MANIFEST_NAME).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write problem to {directory}: {exc}") from exc
    log.debug("saved %s (n=%d, m=%d) to %s", p.name, p.n, p.m, directory)
    return directory


def solution_to_dict(s):
    return {
        "status": s.status.value,
        "x": [float(v) for v in s.x],
        "y": [float(v) for v in s.y],
        "z": [float(v) for v in s.z],
        "report": s.report.to_dict(),
    }


def save_solution(s, path):
    """Write a solution as JSON; floats survive the round trip exactly."""
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(solution_to_dict(s), fh)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write solution to {path}: {exc}") from exc


def load_solution(path):
    text = _read_text(path)
    try:
        data = json.loads(text)
        return Solution(
            x=np.array(data["x"], dtype=np.float64),
            y=np.array(data["y"], dtype=np.float64),
            z=np.array(data["z"], dtype=np.float64),
            status=Status(data["status"]),
            report=SolveReport.from_dict(data.get("report", {})),
        )
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"{path}: malformed solution file: {exc}") from exc


def problem_summary(p):
    """Short human-readable description used by the CLI."""
    finite_l = int(np.sum(np.isfinite(p.l)))
    finite_u = int(np.sum(np.isfinite(p.u)))
    return (
        f"{p.name}: n={p.n} m={p.m} nnz(Q)={p.Q.nnz} nnz(A)={p.A.nnz} "
        f"l1-weighted={int(np.sum(p.d > 0))} finite bounds l/u={finite_l}/{finite_u}"
    )

