"""Fredholm determinants, resolvents, densities, and the resolvent identity.

All Fredholm objects live on the flattened direct-sum space: a block kernel
right-composed with a weight set w becomes the (sum n_j) x (sum n_j) matrix
whose block column j carries diag(mu_j * w_j). Then

    det(1 - Kc o w)            gap probability for indicator w,
    (1 - Kc o w)^{-1} (Kc o w) Fredholm resolvent,

and the central identity states that the resolvent of the checked kernel
equals the checked kernel of the (1 - w)-dualized construction, composed
with w. ``theorem2_residuals`` measures that identity together with the four
composition identities it factors through; on any consistent discretization
every residual is pure rounding noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .biortho import dual_bases, dual_masses
from .chain import ChainTables, WeightSet, indicator_vector
from .errors import (
    ConditioningError,
    DomainError,
    ResolventSingular,
    ShapeError,
    StateError,
)
from .kernels import BlockKernel, build_K, build_g, check_kernel

_RESOLVENT_DET_FLOOR = 1e-12


@dataclass(frozen=True)
class BigMatrix:
    """Flattened block kernel, optionally right-composed with diag(mu_j w_j)."""

    matrix: np.ndarray
    offsets: tuple[int, ...]

    def block(self, i: int, j: int) -> np.ndarray:
        o = self.offsets
        return self.matrix[o[i - 1]:o[i], o[j - 1]:o[j]]


def flatten(kernel: BlockKernel, weights: WeightSet | None) -> BigMatrix:
    """Assemble the flattened matrix; ``weights=None`` leaves kernel values bare."""
    sizes = [g.size for g in kernel.grids]
    offsets = tuple(np.concatenate([[0], np.cumsum(sizes)]).tolist())
    total = offsets[-1]
    if weights is not None and weights.m != kernel.m:
        raise ShapeError(f"{weights.m} weight vectors for {kernel.m} levels")
    out = np.zeros((total, total))
    for i in range(kernel.m):
        for j in range(kernel.m):
            block = kernel.blocks[i][j]
            if block is None:
                continue
            if weights is None:
                out[offsets[i]:offsets[i + 1], offsets[j]:offsets[j + 1]] = block
            else:
                col = kernel.grids[j].weights * weights.w[j]
                out[offsets[i]:offsets[i + 1], offsets[j]:offsets[j + 1]] = \
                    block * col[None, :]
    return BigMatrix(matrix=out, offsets=offsets)


def _require_checked(kernel: BlockKernel) -> None:
    if not kernel.checked:
        raise StateError("operation requires a checked kernel (transfer part subtracted)")


def fredholm_det(Kc: BlockKernel, weights: WeightSet) -> float:
    """det(1 - Kc o w) via LU with partial pivoting.

    For indicator weights this is the probability of finding no points in the
    chosen subsets; it may legitimately be <= 0 for weights outside [0, 1]
    and is returned as computed.
    """
    _require_checked(Kc)
    M = flatten(Kc, weights).matrix
    return float(np.linalg.det(np.eye(M.shape[0]) - M))


def resolvent(Kc: BlockKernel, weights: WeightSet) -> BlockKernel:
    """Kernel-valued Fredholm resolvent blocks of Kc o w.

    Solves (1 - M) X = Kc with M the flattened weighted kernel, which is
    (1 - M)^{-1} M with the right diag(mu w) factor stripped; right-composing
    the result with w reproduces the resolvent operator exactly.
    """
    _require_checked(Kc)
    big = flatten(Kc, weights)
    M = big.matrix
    eye = np.eye(M.shape[0])
    det = np.linalg.det(eye - M)
    if abs(det) <= _RESOLVENT_DET_FLOOR * max(1.0, float(np.max(np.abs(M)))):
        raise ResolventSingular(
            f"Fredholm determinant {det:.3e} vanishes; no resolvent"
        )
    bare = flatten(Kc, None).matrix
    solved = np.linalg.solve(eye - M, bare)
    o = big.offsets
    m = Kc.m
    blocks = tuple(
        tuple(solved[o[i]:o[i + 1], o[j]:o[j + 1]] for j in range(m))
        for i in range(m)
    )
    return BlockKernel(blocks=blocks, grids=Kc.grids, checked=True, rank=Kc.rank)


def _sample_matrix(kernel: BlockKernel, points) -> np.ndarray:
    """Cross-level sample matrix kernel(x_a^(i), x_b^(j)) over the point lists."""
    m = kernel.m
    if len(points) != m:
        raise ShapeError(f"need one point list per level, got {len(points)} for {m}")
    idx = []
    for level, pts in enumerate(points):
        arr = [int(p) for p in pts]
        for p in arr:
            if not 0 <= p < kernel.grids[level].size:
                raise IndexError(
                    f"node index {p} out of range on level {level + 1}"
                )
        idx.append(arr)
    counts = [len(a) for a in idx]
    total = sum(counts)
    out = np.empty((total, total))
    row = 0
    for i in range(m):
        col = 0
        for j in range(m):
            block = kernel.block(i + 1, j + 1)
            out[row:row + counts[i], col:col + counts[j]] = \
                block[np.ix_(idx[i], idx[j])] if counts[i] and counts[j] else 0.0
            col += counts[j]
        row += counts[i]
    return out


def correlation(Kc: BlockKernel, points) -> float:
    """Correlation function: determinant of the sampled checked kernel.

    ``points`` holds, per level, the node indices of the evaluation points
    (at most the kernel rank per level). The empty point set gives 1.
    """
    _require_checked(Kc)
    if Kc.rank is not None:
        for level, pts in enumerate(points):
            if len(pts) > Kc.rank:
                raise ValueError(
                    f"level {level + 1}: {len(pts)} points exceeds rank {Kc.rank}"
                )
    S = _sample_matrix(Kc, points)
    if S.shape[0] == 0:
        return 1.0
    return float(np.linalg.det(S))


def janossy(Kc: BlockKernel, weights: WeightSet, points) -> float:
    """Density of finding exactly the given points inside the indicator sets.

    ``weights`` must be indicator-type (entries 0 or 1) and every point must
    lie where the level's indicator equals 1. The value is the Fredholm
    determinant times the determinant of the sampled resolvent; with no
    points it reduces to the gap probability itself.
    """
    _require_checked(Kc)
    if not weights.is_indicator():
        raise ValueError("Janossy densities are defined for indicator weight sets")
    for level, pts in enumerate(points):
        for p in pts:
            p = int(p)
            if not 0 <= p < Kc.grids[level].size:
                raise IndexError(f"node index {p} out of range on level {level + 1}")
            if weights.w[level][p] != 1.0:
                raise DomainError(
                    f"point {p} on level {level + 1} lies outside the indicator set"
                )
    const = fredholm_det(Kc, weights)
    R = resolvent(Kc, weights)
    S = _sample_matrix(R, points)
    det = 1.0 if S.shape[0] == 0 else float(np.linalg.det(S))
    return const * det


def joint_density(bases, tables: ChainTables, config) -> tuple[float, float]:
    """Joint density of a full configuration, evaluated along both routes.

    Returns ``(product_form, determinant_form)``: the normalized product of
    endpoint and transfer determinants, and the checked-kernel determinant
    normalized by its own exhaustively measured total mass. The two agree on
    any consistent instance; their difference is the working form of the
    equivalence between the two density formulas.
    """
    from . import oracle  # deferred: oracle builds on this module's types

    if not bases.is_plain():
        raise ValueError("joint_density expects the plain (zero-weight) dual bases")
    m, n = tables.m, tables.N
    cfg = [tuple(int(p) for p in level) for level in config]
    if len(cfg) != m or any(len(level) != n for level in cfg):
        raise ShapeError(f"configuration must hold {n} node indices on each of "
                         f"{m} levels")
    enum = oracle.enumerate_configurations(tables, bases=bases)
    value = float(np.linalg.det(bases.psi[0][:, cfg[0]]))
    value *= float(np.linalg.det(bases.phi[m - 1][:, cfg[m - 1]]))
    for j in range(m - 1):
        value *= float(np.linalg.det(tables.g_values[j][np.ix_(cfg[j + 1], cfg[j])]))
    product_form = value / enum.total_mass

    zeros = WeightSet.zeros(tables.grids)
    Kc = check_kernel(build_K(bases), build_g(tables, zeros))
    det_form = float(np.linalg.det(_sample_matrix(Kc, cfg)))
    det_form /= oracle.probnm_total_mass(enum, Kc)
    return product_form, det_form


@dataclass(frozen=True)
class CountDistribution:
    """Probabilities of per-level point counts inside the chosen sets."""

    probabilities: dict[tuple[int, ...], float]
    total: float

    def probability(self, counts) -> float:
        return self.probabilities.get(tuple(int(c) for c in counts), 0.0)


_MAX_COUNT_DEGREE = 8


def gap_generating_function(Kc: BlockKernel, intervals, max_count: int | None = None) -> CountDistribution:
    """Count distribution from determinant evaluations on a coefficient grid.

    With per-level indicators chi_j and scalars kappa_j, the determinant
    det(1 - Kc o (kappa chi)) is, in the variables xi_j = 1 - kappa_j, the
    generating polynomial sum_k P(counts = k) prod_j xi_j^{k_j}. Evaluating
    it on a per-level Chebyshev grid in xi and inverting the Vandermonde
    systems recovers the probabilities. Per-level counts above 8 are refused
    as ill-conditioned.
    """
    _require_checked(Kc)
    m = Kc.m
    if len(intervals) != m:
        raise ShapeError(f"need one interval list per level, got {len(intervals)}")
    rank = Kc.rank if max_count is None else int(max_count)
    if rank is None:
        raise ValueError("max_count is required when the kernel rank is unknown")
    chi = [indicator_vector(g, ivs) for g, ivs in zip(Kc.grids, intervals)]
    degrees = [min(rank, int(round(c.sum()))) for c in chi]
    if any(d > _MAX_COUNT_DEGREE for d in degrees):
        raise ConditioningError(
            f"count extraction beyond {_MAX_COUNT_DEGREE} per level is refused"
        )
    xi_grids = [
        0.5 * (np.cos(np.pi * (2 * np.arange(d + 1) + 1) / (2 * (d + 1))) + 1.0)
        for d in degrees
    ]
    shape = tuple(d + 1 for d in degrees)
    dets = np.empty(shape)
    for idx in np.ndindex(shape):
        ws = WeightSet(tuple(
            (1.0 - xi_grids[j][idx[j]]) * chi[j] for j in range(m)
        ))
        dets[idx] = fredholm_det(Kc, ws)
    coeffs = dets
    for axis in range(m):
        vander = np.vander(xi_grids[axis], increasing=True)
        moved = np.moveaxis(coeffs, axis, 0)
        solved = np.linalg.solve(vander, moved.reshape(shape[axis], -1))
        coeffs = np.moveaxis(solved.reshape(moved.shape), 0, axis)
    probabilities = {
        tuple(int(k) for k in idx): float(coeffs[idx]) for idx in np.ndindex(shape)
    }
    return CountDistribution(probabilities=probabilities, total=float(coeffs.sum()))


@dataclass(frozen=True)
class IdentityResiduals:
    """Max-norm residuals of the resolvent identity and its building blocks.

    ``resolvent``         (1 - Kc^w)^{-1} Kc^w  vs  checked dualized kernel o w
    ``checked_product``   Kc o_w dual-Kc - (dual-Kc - Kc)
    ``transfer_transfer`` g o_w dual-g + dual-g - g
    ``kernel_kernel``     K o_w dual-K vs its endpoint form
    ``transfer_kernel``   g o_w dual-K vs its endpoint form
    ``kernel_transfer``   K o_w dual-g vs its endpoint form

    ``scale`` is max(1, |Kc|_inf, |dual-Kc|_inf); identity-class bounds are
    stated relative to it.
    """

    resolvent: float
    checked_product: float
    transfer_transfer: float
    kernel_kernel: float
    transfer_kernel: float
    kernel_transfer: float
    scale: float

    def as_dict(self) -> dict[str, float]:
        return {
            "resolvent": self.resolvent,
            "checked_product": self.checked_product,
            "transfer_transfer": self.transfer_transfer,
            "kernel_kernel": self.kernel_kernel,
            "transfer_kernel": self.transfer_kernel,
            "kernel_transfer": self.kernel_transfer,
        }

    def max_residual(self) -> float:
        return max(self.as_dict().values())


def _block_maxabs_diff(a: BlockKernel, b) -> float:
    out = 0.0
    for i in range(1, a.m + 1):
        for j in range(1, a.m + 1):
            out = max(out, float(np.max(np.abs(a.block(i, j) - b(i, j)))))
    return out


def theorem2_residuals(tables: ChainTables, weights: WeightSet) -> IdentityResiduals:
    """Residuals of the resolvent identity and the four composition identities.

    Builds the plain (w = 0) and (1 - w)-dualized kernel families from the
    same tables and transcribes each identity blockwise. All six residuals
    vanish up to rounding on every nonsingular instance, for arbitrary real
    weights.
    """
    zeros = WeightSet.zeros(tables.grids)
    plain = dual_bases(tables, zeros)
    tilde = dual_bases(tables, weights)
    K = build_K(plain)
    g = build_g(tables, zeros)
    Kc = check_kernel(K, g)
    Kt = build_K(tilde)
    gt = build_g(tables, weights)
    Ktc = check_kernel(Kt, gt)
    m = tables.m
    d1 = tables.grids[0].weights
    em = dual_masses(tables, weights)[m - 1]
    scale = max(1.0, Kc.max_abs(), Ktc.max_abs())

    big = flatten(Kc, weights).matrix
    target = flatten(Ktc, weights).matrix
    eye = np.eye(big.shape[0])
    r_resolvent = float(np.max(np.abs(np.linalg.solve(eye - big, big) - target)))

    from .kernels import compose_w

    prod = compose_w(Kc, weights, Ktc)
    r_checked = _block_maxabs_diff(
        prod, lambda i, j: Ktc.block(i, j) - Kc.block(i, j)
    )

    prod = compose_w(g, weights, gt)
    r_gg = _block_maxabs_diff(
        prod, lambda i, j: g.block(i, j) - gt.block(i, j)
    )

    def left_term(i, j):
        if i == 1:
            return Kt.block(1, j)
        return g.block(i, 1) @ (d1[:, None] * Kt.block(1, j))

    def right_term(i, j):
        if j == m:
            return K.block(i, m)
        return (K.block(i, m) * em[None, :]) @ gt.block(m, j)

    prod = compose_w(K, weights, Kt)
    r_kk = _block_maxabs_diff(prod, lambda i, j: left_term(i, j) - right_term(i, j))

    prod = compose_w(g, weights, Kt)
    r_gk = _block_maxabs_diff(prod, lambda i, j: left_term(i, j) - Kt.block(i, j))

    prod = compose_w(K, weights, gt)
    r_kg = _block_maxabs_diff(prod, lambda i, j: K.block(i, j) - right_term(i, j))

    return IdentityResiduals(
        resolvent=r_resolvent,
        checked_product=r_checked,
        transfer_transfer=r_gg,
        kernel_kernel=r_kk,
        transfer_kernel=r_gk,
        kernel_transfer=r_kg,
        scale=scale,
    )


def g_resolvent_residual(tables: ChainTables, weights: WeightSet) -> float:
    """Residual of: the plain transfer kernel o w is the resolvent of the dualized one.

    Measures (1 - dual-g^w)^{-1} dual-g^w - g^w in max norm; both operators
    are strictly lower block triangular, so the inverse always exists.
    """
    g = build_g(tables, WeightSet.zeros(tables.grids))
    gt = build_g(tables, weights)
    plain = flatten(g, weights).matrix
    dualized = flatten(gt, weights).matrix
    eye = np.eye(plain.shape[0])
    solved = np.linalg.solve(eye - dualized, dualized)
    return float(np.max(np.abs(solved - plain)))
