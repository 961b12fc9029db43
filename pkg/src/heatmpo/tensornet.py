"""Dense tensors, tensor trains, and singular-value truncation.

Dense tensors are plain numpy arrays in row-major (C) order; that
linearization is part of the on-disk format written by the CLI.  A
TensorTrain stores one 3-leg core per time slot, ordered oldest first, with
physical extent 4 (the super-index of a two-level system) and boundary
bonds of extent 1.

Truncation keeps singular values above lambda_max * 10^(-p/10); an optional
hard bond cap may tighten (never loosen) that rank.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NumericalBlowupError


@dataclass(frozen=True)
class TruncationPolicy:
    """Relative singular-value cutoff 10^(-p/10); p = inf disables truncation.
    When both the cutoff and `max_bond` apply, the smaller rank wins."""

    p_exponent: float
    max_bond: int | None = None

    def __post_init__(self):
        if not self.p_exponent > 0:
            raise ValueError("p_exponent must be > 0")
        if self.max_bond is not None and self.max_bond < 1:
            raise ValueError("max_bond must be >= 1")

    @property
    def rel_cutoff(self) -> float:
        if math.isinf(self.p_exponent):
            return 0.0
        return 10.0 ** (-self.p_exponent / 10.0)


NO_TRUNCATION = TruncationPolicy(p_exponent=math.inf)


def _svd(mat: np.ndarray):
    try:
        return sla.svd(mat, full_matrices=False, lapack_driver="gesdd",
                       check_finite=False)
    except (np.linalg.LinAlgError, sla.LinAlgError):
        try:
            return sla.svd(mat, full_matrices=False, lapack_driver="gesvd",
                           check_finite=False)
        except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
            raise NumericalBlowupError(
                f"SVD failed to converge for shape {mat.shape}, "
                f"norm {np.linalg.norm(mat):.3e}") from exc


def _apply_policy(u, s, vh, policy: TruncationPolicy):
    total = float(np.sum(s * s))
    if total == 0.0:
        return u[:, :1], s[:1], vh[:1], 0.0
    cutoff = s[0] * policy.rel_cutoff
    keep = int(np.sum(s >= cutoff)) if cutoff > 0.0 else s.size
    keep = max(1, keep)
    if policy.max_bond is not None:
        keep = min(keep, policy.max_bond)
    discarded = float(np.sum(s[keep:] ** 2)) / total
    return u[:, :keep], s[:keep], vh[:keep], discarded


def _svd_shape_adaptive(mat: np.ndarray):
    """Exact SVD routed through QR on the long side; LAPACK gesdd on tall or
    wide inputs is much slower than QR plus a square SVD here."""
    m, n = mat.shape
    if m >= 2 * n:
        q, r = np.linalg.qr(mat)
        u, s, vh = _svd(r)
        return q @ u, s, vh
    if n >= 2 * m:
        q, r = np.linalg.qr(mat.conj().T)
        u, s, vh = _svd(r.conj().T)
        return u, s, (q @ vh.conj().T).conj().T
    return _svd(mat)


def svd_truncate(matrix: np.ndarray, policy: TruncationPolicy):
    """Truncated SVD of a rank-2 tensor.

    Returns (U, S, Vh, discarded_weight) keeping exactly the singular values
    lambda >= lambda_max * 10^(-p/10), capped by max_bond; at least one value
    is always kept.  discarded_weight is the dropped fraction of the squared
    Frobenius norm.
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError(f"svd_truncate expects a rank-2 tensor, got rank {matrix.ndim}")
    return _apply_policy(*_svd_shape_adaptive(matrix), policy)


def _truncated_factor(mat: np.ndarray, policy: TruncationPolicy, guess: int):
    """Policy-truncated exact factorization for the sweep hot loop."""
    return _apply_policy(*_svd_shape_adaptive(mat), policy)


class TensorTrain:
    """Matrix-product container for the augmented path-sum state.

    cores[i] has legs (left bond, physical extent 4, right bond); index 0 is
    the oldest time slot and the last core the newest.  Cores are treated as
    immutable: operations return new trains.
    """

    def __init__(self, cores: list[np.ndarray]):
        if not cores:
            raise ValueError("a tensor train needs at least one core")
        for i, c in enumerate(cores):
            if c.ndim != 3:
                raise ValueError(f"core {i} must have 3 legs, got {c.ndim}")
        if cores[0].shape[0] != 1 or cores[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have extent 1")
        for a, b in zip(cores[:-1], cores[1:]):
            if a.shape[2] != b.shape[0]:
                raise ValueError("adjacent bond extents do not match")
        self.cores = cores

    def __len__(self) -> int:
        return len(self.cores)

    @property
    def n_sites(self) -> int:
        return len(self.cores)

    @property
    def bond_dims(self) -> list[int]:
        return [c.shape[2] for c in self.cores[:-1]]

    @property
    def max_bond(self) -> int:
        dims = self.bond_dims
        return max(dims) if dims else 1

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "TensorTrain":
        return cls([np.asarray(vec, dtype=complex).reshape(1, -1, 1)])

    @classmethod
    def from_dense(cls, tensor: np.ndarray) -> "TensorTrain":
        """Exact train decomposition of a dense (4,)*n tensor whose axes are
        ordered oldest slot first, matching the core list."""
        tensor = np.asarray(tensor, dtype=complex)
        n = tensor.ndim
        phys = tensor.shape[0]
        cores = []
        # peel sites from the newest (rightmost core) backwards
        right = 1
        work = tensor.reshape(-1)
        for site in range(n - 1, 0, -1):
            work = work.reshape(phys ** site, phys * right)
            u, s, vh = _svd(work)
            keep = int(np.sum(s > s[0] * 1e-15)) if s.size and s[0] > 0 else 1
            keep = max(1, keep)
            cores.append(vh[:keep].reshape(keep, phys, right))
            work = u[:, :keep] * s[:keep]
            right = keep
        cores.append(work.reshape(1, phys, right))
        return cls(cores[::-1])

    def to_dense(self) -> np.ndarray:
        """Full contraction to a dense tensor with axes ordered like the
        core list (oldest first)."""
        out = self.cores[0]
        for core in self.cores[1:]:
            out = np.tensordot(out, core, axes=([-1], [0]))
        return out[0, ..., 0]

    def contract_all(self, site_vectors) -> complex:
        """Contract every physical leg with the given per-site vectors."""
        env = np.ones((1,), dtype=complex)
        for core, vec in zip(self.cores, site_vectors):
            mat = np.tensordot(core, vec, axes=([1], [0]))  # (l, r)
            env = env @ mat
        return complex(env[0])

    def reduced_newest(self) -> np.ndarray:
        """Sum all physical legs but the newest with ones; returns the
        length-4 vector carried by the newest site."""
        env = np.ones((1,), dtype=complex)
        for core in self.cores[:-1]:
            env = env @ core.sum(axis=1)
        last = np.tensordot(env, self.cores[-1], axes=([0], [0]))  # (4, 1)
        return last[:, 0]

    def sum_out_oldest(self) -> "TensorTrain":
        """Contract the oldest site's physical leg with ones and absorb the
        result into its neighbour (sliding the memory window)."""
        if len(self.cores) < 2:
            raise ValueError("cannot sum out the only site")
        v = self.cores[0].sum(axis=1)[0]  # (r,)
        merged = np.tensordot(v, self.cores[1], axes=([0], [0]))[None, :, :]
        return TensorTrain([merged] + self.cores[2:])

    def canonical_defects(self) -> list[float]:
        """Deviation from isometry of every core but the last, assuming the
        orthogonality center sits at the newest site."""
        defects = []
        for core in self.cores[:-1]:
            l, p, r = core.shape
            mat = core.reshape(l * p, r)
            defects.append(float(np.max(np.abs(mat.conj().T @ mat - np.eye(r)))))
        return defects


def truncation_sweep(cores: list[np.ndarray], policy: TruncationPolicy):
    """One right-to-left then one left-to-right truncation sweep.

    Leaves the orthogonality center at the newest (last) site, where the
    next step operator attaches.  Returns (cores, discarded_weight_sum).
    """
    discarded = 0.0
    # right -> left: right-canonicalize with truncation
    for i in range(len(cores) - 1, 0, -1):
        l, p, r = cores[i].shape
        u, s, vh, d = svd_truncate(cores[i].reshape(l, p * r), policy)
        discarded += d
        k = s.size
        cores[i] = vh.reshape(k, p, r)
        cores[i - 1] = np.tensordot(cores[i - 1], u * s, axes=([2], [0]))
    # left -> right: left-canonicalize with truncation
    for i in range(len(cores) - 1):
        l, p, r = cores[i].shape
        u, s, vh, d = svd_truncate(cores[i].reshape(l * p, r), policy)
        discarded += d
        k = s.size
        cores[i] = u.reshape(l, p, k)
        cores[i + 1] = np.tensordot(s[:, None] * vh, cores[i + 1], axes=([1], [0]))
    return cores, discarded


def tt_apply_step_mpo(adt: TensorTrain, step, policy: TruncationPolicy) -> "StepResult":
    """Contract one step operator into the train and compress.

    `step` provides lag weight matrices W_dk[sig_new, sig_old] (diagonal in
    the site's own physical index), the self weight diagonal I_0, and the
    free pair propagator; see the dense engine's StepPropagator.  The
    operator couples a new physical site (appended at the newest end) to
    every existing site: the site at lag dk is multiplied by W_dk, the
    newest existing site additionally by the free propagator, and the
    internal extent-4 bond carrying the new super-index terminates at the
    oldest site.

    The contraction is fused with the right-to-left truncation sweep; a
    left-to-right truncation sweep then returns the orthogonality center to
    the newest site.
    """
    cores = adt.cores
    s = len(cores)
    if s > step.depth:
        raise ValueError(
            f"step operator holds lags up to {step.depth} but the train has {s} sites")

    head = step.free_full * step.lag_matrix(1)      # G(sig_new, sig_1) I_1
    tail = np.zeros((4, 4, 1), dtype=complex)
    tail[np.arange(4), np.arange(4), 0] = step.self_diagonal

    new_cores: list[np.ndarray] = [None] * (s + 1)
    discarded = 0.0

    # seed the zip-up with the new tail site
    u, sing, vh, d = svd_truncate(tail.reshape(4, 4), policy)
    discarded += d
    new_cores[s] = vh.reshape(sing.size, 4, 1)
    carry = (u * sing).reshape(4, 1, sing.size)     # (bond, old right bond, new)

    for j in range(s - 1, -1, -1):
        weight = head if j == s - 1 else step.lag_matrix(s - j)
        core = cores[j]
        l, p, r = core.shape
        k = carry.shape[2]
        # D[b, (l, o), k] = sum_r core[l, o, r] carry[b, r, k], batched over b
        d_mat = np.matmul(core.reshape(1, l * p, r), carry)
        d_blok = d_mat.reshape(4, l, p, k)
        d_blok *= weight[:, None, :, None]
        if j > 0:
            u, sing, vh, d = _truncated_factor(
                d_blok.reshape(4 * l, p * k), policy, guess=l)
            discarded += d
            new_cores[j] = vh.reshape(sing.size, p, k)
            carry = (u * sing).reshape(4, l, sing.size)
        else:
            # the new-index bond terminates here; no left inflation
            new_cores[j] = d_blok.sum(axis=0)

    # left -> right truncation sweep returns the center to the newest site;
    # with everything right of the working site right-canonical, these
    # truncations are the globally justified ones
    for i in range(s):
        l, p, r = new_cores[i].shape
        u, sing, vh, d = _truncated_factor(
            new_cores[i].reshape(l * p, r), policy, guess=min(l * p, r))
        discarded += d
        new_cores[i] = u.reshape(l, p, sing.size)
        new_cores[i + 1] = np.tensordot(sing[:, None] * vh, new_cores[i + 1],
                                        axes=([1], [0]))

    return StepResult(train=TensorTrain(new_cores), discarded_weight=discarded)


@dataclass(frozen=True)
class StepResult:
    train: TensorTrain
    discarded_weight: float
