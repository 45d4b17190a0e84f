"""Small-scale conic programming: standard form, solver bridge, certification.

Programs are stated in one primal standard form

    minimize    c' z
    subject to  A z = b,
                z restricted slice-by-slice to cones,

where the variable vector ``z`` is partitioned into ordered blocks, each
either free, entrywise nonnegative, a scalarized real symmetric PSD
matrix, or a scalarized complex Hermitian PSD matrix.

Scalarizations (documented, inner-product preserving):

- real symmetric ``n×n``: the upper triangle stacked column-major with
  off-diagonal entries scaled by ``sqrt(2)`` ("svec"), length n(n+1)/2;
- complex Hermitian ``n×n``: real diagonal entries plus, per
  off-diagonal position, the pair ``(sqrt(2)*Re, sqrt(2)*Im)``
  interleaved in the same column-major order ("hvec"), length n².

Both give ``<vec(M1), vec(M2)> = <M1, M2>_F``, so duals and objective
coefficients live in the same coordinates as primal variables.

Hermitian blocks are solved through the standard doubled real embedding
``H = A + jB  ->  [[A, -B], [B, A]]``, which is PSD exactly when ``H``
is; the embedding is applied inside the backend lowering so callers only
ever see Hermitian coordinates.

The backend is the Clarabel interior-point solver; solutions are always
re-certified from scratch (equality residuals, cone eigenvalues, dual
feasibility, duality gap recomputed in original problem data) before a
status of ``optimal`` is reported.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np
import scipy.sparse
from numpy.typing import NDArray

__all__ = [
    "ConeBlock",
    "ConicProgram",
    "ConicSolution",
    "ResidualReport",
    "ProgramBuilder",
    "solve",
    "certify",
    "dump_program",
    "svec",
    "smat",
    "hvec",
    "hmat",
    "lift_hermitian",
]

BlockKind = Literal["free", "nonnegative", "psd", "psd_hermitian"]
SolveStatus = Literal["optimal", "infeasible", "unbounded", "max_iterations"]

_SQRT2 = math.sqrt(2.0)

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 200


# ---------------------------------------------------------------------------
# scalarizations


@functools.lru_cache(maxsize=None)
def _triangle_indices(n: int) -> tuple[NDArray[np.intp], NDArray[np.intp]]:
    """(rows, cols) of the upper triangle in column-major order."""
    cols = np.repeat(np.arange(n), np.arange(1, n + 1))
    rows = np.concatenate([np.arange(j + 1) for j in range(n)]) if n else np.array([], dtype=int)
    return rows, cols


def svec_length(n: int) -> int:
    return n * (n + 1) // 2


def hvec_length(n: int) -> int:
    return n * n


def svec_index(i: int, j: int) -> int:
    """Position of entry (i, j), i <= j, in the svec layout."""
    if i > j:
        i, j = j, i
    return j * (j + 1) // 2 + i


def hvec_indices(i: int, j: int) -> tuple[int, int | None]:
    """(real, imag) positions of entry (i, j), i <= j, in the hvec layout.

    Diagonal entries have no imaginary coordinate (``None``).
    """
    if i > j:
        i, j = j, i
    base = j * j
    if i == j:
        return base + 2 * j, None
    return base + 2 * i, base + 2 * i + 1


def svec(matrix: NDArray[np.float64]) -> NDArray[np.float64]:
    """Scalarize a real symmetric matrix (column-major upper triangle)."""
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    rows, cols = _triangle_indices(n)
    scale = np.where(rows == cols, 1.0, _SQRT2)
    return matrix[rows, cols] * scale


def smat(values: NDArray[np.float64], n: int) -> NDArray[np.float64]:
    """Inverse of :func:`svec`."""
    values = np.asarray(values, dtype=float)
    if values.size != svec_length(n):
        raise ValueError(f"expected {svec_length(n)} entries for order {n}")
    rows, cols = _triangle_indices(n)
    out = np.zeros((n, n))
    vals = values / np.where(rows == cols, 1.0, _SQRT2)
    out[rows, cols] = vals
    out[cols, rows] = vals
    return out


def hvec(matrix: NDArray[np.complex128]) -> NDArray[np.float64]:
    """Scalarize a complex Hermitian matrix into n² reals."""
    matrix = np.asarray(matrix, dtype=complex)
    n = matrix.shape[0]
    out = np.empty(n * n)
    for j in range(n):
        for i in range(j):
            re_idx, im_idx = hvec_indices(i, j)
            out[re_idx] = _SQRT2 * matrix[i, j].real
            out[im_idx] = _SQRT2 * matrix[i, j].imag
        out[hvec_indices(j, j)[0]] = matrix[j, j].real
    return out


def hmat(values: NDArray[np.float64], n: int) -> NDArray[np.complex128]:
    """Inverse of :func:`hvec`."""
    values = np.asarray(values, dtype=float)
    if values.size != hvec_length(n):
        raise ValueError(f"expected {hvec_length(n)} entries for order {n}")
    out = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for i in range(j):
            re_idx, im_idx = hvec_indices(i, j)
            val = (values[re_idx] + 1j * values[im_idx]) / _SQRT2
            out[i, j] = val
            out[j, i] = val.conjugate()
        out[j, j] = values[hvec_indices(j, j)[0]]
    return out


def lift_hermitian(matrix: NDArray[np.complex128]) -> NDArray[np.float64]:
    """Real symmetric embedding ``[[Re, -Im], [Im, Re]]`` of a Hermitian matrix.

    The embedding doubles every eigenvalue's multiplicity and preserves
    positive semidefiniteness, and ``<lift(H1), lift(H2)> = 2 <H1, H2>``.
    """
    matrix = np.asarray(matrix, dtype=complex)
    a = matrix.real
    b = matrix.imag
    return np.block([[a, -b], [b, a]])


@functools.lru_cache(maxsize=None)
def _hermitian_lift_triplets(
    n: int,
) -> tuple[NDArray[np.intp], NDArray[np.intp], NDArray[np.float64]]:
    """Sparse map M with ``svec(lift(H)) = M @ hvec(H)`` as COO triplets."""
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for j in range(n):
        for i in range(j + 1):
            re_idx, im_idx = hvec_indices(i, j)
            # Re-part block appears twice: top-left and bottom-right.
            rows.extend([svec_index(i, j), svec_index(n + i, n + j)])
            cols.extend([re_idx, re_idx])
            vals.extend([1.0, 1.0])
            if im_idx is not None:
                # Top-right block holds -Im, bottom-left holds +Im; only
                # the upper triangle of the lifted matrix is stored.
                rows.extend([svec_index(i, n + j), svec_index(j, n + i)])
                cols.extend([im_idx, im_idx])
                vals.extend([-1.0, 1.0])
    return (
        np.asarray(rows, dtype=np.intp),
        np.asarray(cols, dtype=np.intp),
        np.asarray(vals, dtype=float),
    )


# ---------------------------------------------------------------------------
# program representation


@dataclass(frozen=True)
class ConeBlock:
    """One contiguous slice of the stacked variable vector."""

    kind: BlockKind
    size: int
    offset: int
    name: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ("free", "nonnegative", "psd", "psd_hermitian"):
            raise ValueError(f"unknown block kind {self.kind!r}")
        if self.size < 1:
            raise ValueError("block size must be positive")
        if self.offset < 0:
            raise ValueError("block offset must be nonnegative")

    @property
    def scalar_length(self) -> int:
        """Number of variable-vector entries the block occupies."""
        if self.kind == "psd":
            return svec_length(self.size)
        if self.kind == "psd_hermitian":
            return hvec_length(self.size)
        return self.size

    @property
    def indices(self) -> range:
        return range(self.offset, self.offset + self.scalar_length)


@dataclass(frozen=True)
class ConicProgram:
    """Standard-form program: minimize c'z s.t. Az = b, z in cone slices."""

    objective: NDArray[np.float64]
    eq_matrix: scipy.sparse.csc_matrix
    eq_rhs: NDArray[np.float64]
    blocks: tuple[ConeBlock, ...]

    def __post_init__(self) -> None:
        objective = np.asarray(self.objective, dtype=float)
        eq_rhs = np.asarray(self.eq_rhs, dtype=float)
        eq_matrix = scipy.sparse.csc_matrix(self.eq_matrix)
        expected = 0
        for block in self.blocks:
            if block.offset != expected:
                raise ValueError(
                    f"block {block.name!r} at offset {block.offset}, expected {expected}"
                )
            expected += block.scalar_length
        if objective.ndim != 1 or objective.size != expected:
            raise ValueError(
                f"objective length {objective.size} does not match variable count {expected}"
            )
        if eq_matrix.shape != (eq_rhs.size, expected):
            raise ValueError(
                f"equality map {eq_matrix.shape} inconsistent with "
                f"{eq_rhs.size} rhs entries over {expected} variables"
            )
        object.__setattr__(self, "objective", objective)
        object.__setattr__(self, "eq_rhs", eq_rhs)
        object.__setattr__(self, "eq_matrix", eq_matrix)

    @property
    def n_variables(self) -> int:
        return self.objective.size

    @property
    def n_equalities(self) -> int:
        return self.eq_rhs.size

    def value(self, block: ConeBlock, z: NDArray[np.float64]):
        """Extract a block's value from a stacked solution vector.

        Returns a vector for free/nonnegative blocks, a real symmetric
        matrix for psd blocks, and a complex Hermitian matrix for
        psd_hermitian blocks.
        """
        piece = np.asarray(z, dtype=float)[block.offset : block.offset + block.scalar_length]
        if block.kind == "psd":
            return smat(piece, block.size)
        if block.kind == "psd_hermitian":
            return hmat(piece, block.size)
        return piece.copy()


@dataclass(frozen=True)
class ResidualReport:
    """From-scratch feasibility/optimality measurements for a solution.

    All quantities are relative: the equality residual is scaled by the
    right-hand side, primal cone violations by the block iterate's
    magnitude, dual cone violations by the cost magnitude (a dual
    violation is an error in the lower bound ``b'y``, so cost units are
    the meaningful yardstick), and the gap by the objective values.
    """

    equality_residual: float
    min_cone_eigenvalue: float
    dual_residual: float
    duality_gap: float
    objective_value: float
    dual_objective_value: float

    @property
    def primal(self) -> float:
        return max(self.equality_residual, max(0.0, -self.min_cone_eigenvalue))

    @property
    def dual(self) -> float:
        return self.dual_residual

    @property
    def gap(self) -> float:
        return self.duality_gap

    def within(self, tol: float) -> bool:
        return self.primal <= tol and self.dual <= tol and self.gap <= tol


@dataclass(frozen=True)
class ConicSolution:
    """Solver output: primal/dual iterates, certified residuals, status."""

    primal: NDArray[np.float64]
    dual: NDArray[np.float64]
    status: SolveStatus
    objective_value: float
    residuals: ResidualReport
    iterations: int
    message: str = ""


class ProgramBuilder:
    """Incremental construction of a :class:`ConicProgram`.

    Blocks are appended in order; equality rows and objective terms are
    accumulated as sparse triplets against absolute variable indices.
    Helper methods translate matrix-entry and trace expressions into the
    scalarized coordinates, so callers never handle svec/hvec scaling
    directly.
    """

    def __init__(self) -> None:
        self._blocks: list[ConeBlock] = []
        self._next_offset = 0
        self._obj: dict[int, float] = {}
        self._rows: list[int] = []
        self._cols: list[int] = []
        self._vals: list[float] = []
        self._rhs: list[float] = []

    def add_block(self, kind: BlockKind, size: int, name: str = "") -> ConeBlock:
        block = ConeBlock(kind=kind, size=size, offset=self._next_offset, name=name)
        self._blocks.append(block)
        self._next_offset += block.scalar_length
        return block

    @property
    def n_variables(self) -> int:
        return self._next_offset

    @property
    def n_equalities(self) -> int:
        return len(self._rhs)

    def add_objective(self, indices: Iterable[int], coeffs: Iterable[float]) -> None:
        for idx, coeff in zip(indices, coeffs):
            if coeff != 0.0:
                self._obj[int(idx)] = self._obj.get(int(idx), 0.0) + float(coeff)

    def add_equality(
        self, indices: Iterable[int], coeffs: Iterable[float], rhs: float
    ) -> int:
        """Add one row sum(coeffs * z[indices]) = rhs; returns the row index."""
        row = len(self._rhs)
        merged: dict[int, float] = {}
        for idx, coeff in zip(indices, coeffs):
            if coeff != 0.0:
                merged[int(idx)] = merged.get(int(idx), 0.0) + float(coeff)
        for idx, coeff in merged.items():
            self._rows.append(row)
            self._cols.append(idx)
            self._vals.append(coeff)
        self._rhs.append(float(rhs))
        return row

    # -- coordinate helpers -------------------------------------------------

    @staticmethod
    def entry(block: ConeBlock, i: int, j: int) -> list[tuple[int, float]]:
        """Terms whose weighted sum equals the (real part of) matrix entry (i, j)."""
        if block.kind in ("free", "nonnegative"):
            raise ValueError("matrix entries only exist on psd/psd_hermitian blocks")
        if block.kind == "psd":
            scale = 1.0 if i == j else 1.0 / _SQRT2
            return [(block.offset + svec_index(i, j), scale)]
        re_idx, _ = hvec_indices(i, j)
        scale = 1.0 if i == j else 1.0 / _SQRT2
        return [(block.offset + re_idx, scale)]

    @staticmethod
    def entry_imag(block: ConeBlock, i: int, j: int) -> list[tuple[int, float]]:
        """Terms equal to Im of entry (i, j) of a Hermitian block, i < j."""
        if block.kind != "psd_hermitian":
            raise ValueError("imaginary parts only exist on psd_hermitian blocks")
        if i == j:
            return []
        sign = 1.0 if i < j else -1.0
        _, im_idx = hvec_indices(i, j)
        assert im_idx is not None
        return [(block.offset + im_idx, sign / _SQRT2)]

    @staticmethod
    def trace_entries(
        block: ConeBlock, weight: NDArray
    ) -> tuple[NDArray[np.intp], NDArray[np.float64]]:
        """Coefficients so that coeffs @ z-slice = Re tr(weight @ M).

        ``weight`` may be any square matrix of the block's order; only
        its symmetric (Hermitian) part contributes, mirroring the fact
        that the block variable is symmetric (Hermitian).
        """
        n = block.size
        weight = np.asarray(weight)
        if weight.shape != (n, n):
            raise ValueError(f"weight must be {n}×{n}")
        if block.kind == "psd":
            sym = 0.5 * (weight + weight.T).real
            coeffs = svec(sym)
        elif block.kind == "psd_hermitian":
            herm = 0.5 * (weight + weight.conj().T)
            coeffs = hvec(herm)
        else:
            raise ValueError("trace_entries applies to matrix blocks only")
        indices = np.arange(block.offset, block.offset + block.scalar_length, dtype=np.intp)
        return indices, coeffs

    def add_trace_equality(self, pairs, rhs: float) -> int:
        """Row of stacked trace terms: pairs of (block, weight[, scale])."""
        indices: list[int] = []
        coeffs: list[float] = []
        for pair in pairs:
            block, weight, *rest = pair
            scale = rest[0] if rest else 1.0
            idx, cf = self.trace_entries(block, weight)
            indices.extend(idx.tolist())
            coeffs.extend((scale * cf).tolist())
        return self.add_equality(indices, coeffs, rhs)

    def build(self) -> ConicProgram:
        n = self._next_offset
        objective = np.zeros(n)
        for idx, coeff in self._obj.items():
            objective[idx] = coeff
        eq_matrix = scipy.sparse.csc_matrix(
            (self._vals, (self._rows, self._cols)), shape=(len(self._rhs), n)
        )
        return ConicProgram(
            objective=objective,
            eq_matrix=eq_matrix,
            eq_rhs=np.asarray(self._rhs, dtype=float),
            blocks=tuple(self._blocks),
        )


# ---------------------------------------------------------------------------
# backend lowering


def _lower(program: ConicProgram):
    """Build the backend's (A, b, cones): equalities first, then cone rows."""
    import clarabel

    n = program.n_variables
    mats = [program.eq_matrix]
    rhs = [program.eq_rhs]
    cones = []
    if program.n_equalities:
        cones.append(clarabel.ZeroConeT(program.n_equalities))
    for block in program.blocks:
        if block.kind == "free":
            continue
        length = block.scalar_length
        if block.kind == "nonnegative":
            sel = scipy.sparse.csc_matrix(
                (np.full(length, -1.0), (np.arange(length), np.arange(length) + block.offset)),
                shape=(length, n),
            )
            cones.append(clarabel.NonnegativeConeT(length))
        elif block.kind == "psd":
            sel = scipy.sparse.csc_matrix(
                (np.full(length, -1.0), (np.arange(length), np.arange(length) + block.offset)),
                shape=(length, n),
            )
            cones.append(clarabel.PSDTriangleConeT(block.size))
        else:  # psd_hermitian: lift to a doubled real PSD block
            rows, cols, vals = _hermitian_lift_triplets(block.size)
            lifted = svec_length(2 * block.size)
            sel = scipy.sparse.csc_matrix(
                (-vals, (rows, cols + block.offset)), shape=(lifted, n)
            )
            cones.append(clarabel.PSDTriangleConeT(2 * block.size))
        mats.append(sel)
        rhs.append(np.zeros(sel.shape[0]))
    a = scipy.sparse.vstack(mats, format="csc")
    b = np.concatenate(rhs)
    return a, b, cones


_BACKEND_STATUS = {
    "Solved": "check",
    "AlmostSolved": "check",
    "MaxIterations": "check",
    "MaxTime": "check",
    "InsufficientProgress": "check",
    "NumericalError": "check",
    "Unsolved": "check",
    "CallbackTerminated": "check",
    "PrimalInfeasible": "infeasible",
    "AlmostPrimalInfeasible": "infeasible",
    "DualInfeasible": "unbounded",
    "AlmostDualInfeasible": "unbounded",
}


def solve(
    program: ConicProgram,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    verbose: bool = False,
) -> ConicSolution:
    """Solve the program; a status of ``optimal`` is backed by certification.

    The backend runs at a tolerance one decade tighter than ``tol``; the
    returned iterate is then re-certified from the original data and
    only reported ``optimal`` when every recomputed residual is within
    ``tol``.  Iteration limits or numerical trouble downgrade the status
    to ``max_iterations`` with the best iterate and its residuals
    attached; infeasibility and unboundedness map to their own statuses.
    """
    import clarabel

    if program.n_equalities == 0 and all(b.kind == "free" for b in program.blocks):
        raise ValueError("program has no constraints; nothing to solve")
    a, b, cones = _lower(program)
    settings = clarabel.DefaultSettings()
    settings.verbose = verbose
    settings.max_iter = int(max_iter)
    inner = max(tol / 10.0, 1e-12)
    settings.tol_feas = inner
    settings.tol_gap_abs = inner
    settings.tol_gap_rel = inner
    settings.max_threads = 1
    p = scipy.sparse.csc_matrix((program.n_variables, program.n_variables))
    # The backend sees a unit-scale objective: large cost coefficients blow
    # up the dual iterates, and the static KKT regularization then caps the
    # reachable accuracy.  Scaling the objective leaves the argmin unchanged
    # and the dual scales back exactly.
    cost_scale = float(np.abs(program.objective).max(initial=0.0))
    if not cost_scale > 0.0:
        cost_scale = 1.0
    solver = clarabel.DefaultSolver(
        p, program.objective / cost_scale, a, b, cones, settings
    )
    result = solver.solve()

    primal = np.asarray(result.x, dtype=float)
    z_all = np.asarray(result.z, dtype=float)
    dual = -cost_scale * z_all[: program.n_equalities]
    status_key = _BACKEND_STATUS.get(str(result.status), "check")
    report = certify_vectors(program, primal, dual)

    if status_key == "check":
        status: SolveStatus = "optimal" if report.within(tol) else "max_iterations"
        message = f"backend status {result.status}"
    elif status_key == "infeasible":
        status = "infeasible"
        farkas = float(program.eq_rhs @ dual) if program.n_equalities else 0.0
        message = (
            f"backend status {result.status}; infeasibility certificate with "
            f"b'y = {farkas:.3e} along the returned dual direction"
        )
    else:
        status = "unbounded"
        message = (
            f"backend status {result.status}; objective unbounded along the "
            "returned primal direction"
        )
    return ConicSolution(
        primal=primal,
        dual=dual,
        status=status,
        objective_value=float(program.objective @ primal),
        residuals=report,
        iterations=int(result.iterations),
        message=message,
    )


def certify_vectors(
    program: ConicProgram,
    primal: NDArray[np.float64],
    dual: NDArray[np.float64],
) -> ResidualReport:
    """Recompute all residuals from raw program data and iterates."""
    primal = np.asarray(primal, dtype=float)
    dual = np.asarray(dual, dtype=float)
    c = program.objective
    b_scale = 1.0 + (np.abs(program.eq_rhs).max(initial=0.0))
    c_scale = 1.0 + (np.abs(c).max(initial=0.0))

    if program.n_equalities:
        eq_res = float(
            np.abs(program.eq_matrix @ primal - program.eq_rhs).max(initial=0.0)
        ) / b_scale
    else:
        eq_res = 0.0

    # Cone violations are judged relative to each block's own magnitude; an
    # absolute eigenvalue test would demand precision far past what any
    # interior-point backend delivers on blocks whose entries are large.
    min_eig = math.inf
    for block in program.blocks:
        piece = primal[block.offset : block.offset + block.scalar_length]
        if block.kind == "nonnegative":
            scale = 1.0 + float(np.abs(piece).max(initial=0.0))
            min_eig = min(min_eig, float(piece.min(initial=math.inf)) / scale)
        elif block.kind == "psd":
            eigs = np.linalg.eigvalsh(smat(piece, block.size))
            min_eig = min(min_eig, float(eigs.min()) / (1.0 + float(np.abs(eigs).max())))
        elif block.kind == "psd_hermitian":
            eigs = np.linalg.eigvalsh(hmat(piece, block.size))
            min_eig = min(min_eig, float(eigs.min()) / (1.0 + float(np.abs(eigs).max())))
    if min_eig is math.inf:
        min_eig = 0.0

    # Dual violations are normalized by the cost magnitude: they measure how
    # far b'y can sit from a true lower bound, which is an error in cost
    # units (the usual convention for reporting dual residuals).
    slack = c - (program.eq_matrix.T @ dual if program.n_equalities else 0.0)
    dual_violation = 0.0
    for block in program.blocks:
        piece = slack[block.offset : block.offset + block.scalar_length]
        if block.kind == "free":
            violation = float(np.abs(piece).max(initial=0.0))
        elif block.kind == "nonnegative":
            violation = max(0.0, -float(piece.min(initial=0.0)))
        elif block.kind == "psd":
            violation = max(0.0, -float(np.linalg.eigvalsh(smat(piece, block.size)).min()))
        else:
            violation = max(0.0, -float(np.linalg.eigvalsh(hmat(piece, block.size)).min()))
        dual_violation = max(dual_violation, violation)
    dual_violation /= c_scale

    pobj = float(c @ primal)
    dobj = float(program.eq_rhs @ dual) if program.n_equalities else 0.0
    gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
    return ResidualReport(
        equality_residual=eq_res,
        min_cone_eigenvalue=min_eig,
        dual_residual=dual_violation,
        duality_gap=gap,
        objective_value=pobj,
        dual_objective_value=dobj,
    )


def certify(program: ConicProgram, solution: ConicSolution) -> ResidualReport:
    """Recompute the solution's residual report from scratch."""
    return certify_vectors(program, solution.primal, solution.dual)


def dump_program(program: ConicProgram, path: str) -> None:
    """Write the standard-form data as a plain-text sparse dump.

    Layout: a header with dimensions, one line per block
    (``block <kind> <size> <offset> <name>``), then the objective,
    equality matrix, and right-hand side as sparse ``index value`` /
    ``row col value`` triplets.
    """
    coo = program.eq_matrix.tocoo()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("conic-program v1\n")
        fh.write(
            f"dimensions variables={program.n_variables} "
            f"equalities={program.n_equalities} blocks={len(program.blocks)}\n"
        )
        for block in program.blocks:
            fh.write(
                f"block {block.kind} {block.size} {block.offset} {block.name}\n"
            )
        nz = np.nonzero(program.objective)[0]
        fh.write(f"objective nnz={nz.size}\n")
        for idx in nz:
            fh.write(f"{idx} {program.objective[idx]:.17g}\n")
        fh.write(f"equality-matrix nnz={coo.nnz}\n")
        for r, c_, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r} {c_} {v:.17g}\n")
        nz = np.nonzero(program.eq_rhs)[0]
        fh.write(f"rhs nnz={nz.size}\n")
        for idx in nz:
            fh.write(f"{idx} {program.eq_rhs[idx]:.17g}\n")
