"""Complex tensor trains (matrix product states) with open boundaries.

A tensor train stores a ``d``-index complex array through a chain of order-3
cores, core ``k`` shaped ``(D_{k-1}, n_k, D_k)`` with boundary bonds
``D_0 = D_d = 1``.  An entry is the product of the matrices selected by the
physical indices.  Only what inner-product pricing needs is implemented:
entry evaluation, inner products by transfer contraction, dense
materialization of small instances, sampled error estimates against a
black-box oracle, and a JSON container for caching cross results.

Oracle convention used throughout the package: an oracle is a callable that
receives an ``(m, d)`` integer index array and returns ``m`` complex values.
Wrap a scalar function of a single index tuple with :func:`pointwise_oracle`.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import CapacityError

__all__ = [
    "TensorTrain",
    "tt_evaluate",
    "tt_evaluate_many",
    "tt_inner",
    "tt_to_dense",
    "tt_rand_sample_diff",
    "tt_save_json",
    "tt_load_json",
    "pointwise_oracle",
]

DENSE_CAP_DEFAULT = 10_000_000


class TensorTrain:
    """Immutable chain of complex order-3 cores.

    Parameters
    ----------
    cores : sequence of array_like
        Core ``k`` must have shape ``(D_{k-1}, n_k, D_k)``; adjacent bond
        dimensions must match and the boundary bonds must equal 1.
    """

    __slots__ = ("cores",)

    def __init__(self, cores):
        if len(cores) == 0:
            raise ValueError("a tensor train needs at least one core")
        converted = []
        for k, core in enumerate(cores):
            arr = np.array(core, dtype=np.complex128, copy=True)
            if arr.ndim != 3:
                raise ValueError(f"core {k} has {arr.ndim} axes, expected 3")
            if min(arr.shape) < 1:
                raise ValueError(f"core {k} has an empty axis: shape {arr.shape}")
            arr.flags.writeable = False
            converted.append(arr)
        if converted[0].shape[0] != 1 or converted[-1].shape[2] != 1:
            raise ValueError(
                "boundary bond dimensions must be 1, got "
                f"{converted[0].shape[0]} and {converted[-1].shape[2]}"
            )
        for k in range(len(converted) - 1):
            right, left = converted[k].shape[2], converted[k + 1].shape[0]
            if right != left:
                raise ValueError(
                    f"bond mismatch between cores {k} and {k + 1}: {right} vs {left}"
                )
        self.cores = tuple(converted)

    @property
    def d(self):
        """Number of sites (tensor order)."""
        return len(self.cores)

    @property
    def phys_dims(self):
        """Per-site physical sizes ``(n_1, ..., n_d)``."""
        return tuple(core.shape[1] for core in self.cores)

    @property
    def bond_dims(self):
        """Bond dimensions ``(D_0, D_1, ..., D_d)`` including boundaries."""
        return (1,) + tuple(core.shape[2] for core in self.cores)

    @property
    def n_entries(self):
        """Number of entries of the represented dense tensor (exact int)."""
        return math.prod(self.phys_dims)

    def __repr__(self):
        return (
            f"TensorTrain(d={self.d}, phys_dims={self.phys_dims}, "
            f"bond_dims={self.bond_dims})"
        )


def _check_index(tt, idx):
    idx = tuple(int(i) for i in idx)
    if len(idx) != tt.d:
        raise IndexError(f"index has {len(idx)} entries for a {tt.d}-site train")
    for axis, (i, n) in enumerate(zip(idx, tt.phys_dims)):
        if not 0 <= i < n:
            raise IndexError(f"axis {axis}: index {i} out of range [0, {n})")
    return idx


def tt_evaluate(tt, idx):
    """Entry of the represented tensor at a single multi-index.

    Contracts the selected matrices left to right; pure in ``(tt, idx)``.
    """
    idx = _check_index(tt, idx)
    vec = tt.cores[0][0, idx[0], :]
    for k in range(1, tt.d):
        vec = vec @ tt.cores[k][:, idx[k], :]
    return complex(vec[0])


def tt_evaluate_many(tt, idx):
    """Vectorized :func:`tt_evaluate` over an ``(m, d)`` integer index array."""
    idx = np.asarray(idx, dtype=np.int64)
    if idx.ndim != 2 or idx.shape[1] != tt.d:
        raise IndexError(f"index array must have shape (m, {tt.d}), got {idx.shape}")
    for axis, n in enumerate(tt.phys_dims):
        col = idx[:, axis]
        if col.size and (col.min() < 0 or col.max() >= n):
            bad = col[(col < 0) | (col >= n)][0]
            raise IndexError(f"axis {axis}: index {bad} out of range [0, {n})")
    vec = tt.cores[0][0, idx[:, 0], :]
    for k in range(1, tt.d):
        slices = tt.cores[k][:, idx[:, k], :]
        vec = np.einsum("mi,imj->mj", vec, slices)
    return vec[:, 0]


def tt_inner(bra, ket):
    """Inner product ``sum_idx conj(bra[idx]) * ket[idx]``.

    Computed by sequential transfer-matrix contraction; never expands either
    train to its dense form.  Conjugation applies to the bra coefficients.
    """
    if bra.phys_dims != ket.phys_dims:
        raise ValueError(
            "physical shape mismatch: "
            f"bra {list(bra.phys_dims)} vs ket {list(ket.phys_dims)}"
        )
    env = np.ones((1, 1), dtype=np.complex128)
    for bcore, kcore in zip(bra.cores, ket.cores):
        # env (Db, Dk) -> (Db', Dk') through one site
        tmp = np.tensordot(env, kcore, axes=(1, 0))
        env = np.tensordot(bcore.conj(), tmp, axes=([0, 1], [0, 1]))
    return complex(env[0, 0])


def tt_to_dense(tt, max_entries=DENSE_CAP_DEFAULT):
    """Materialize the full tensor; small instances only.

    Raises
    ------
    CapacityError
        If the dense tensor would exceed ``max_entries`` entries.
    """
    required = tt.n_entries
    if required > max_entries:
        raise CapacityError(
            f"dense tensor needs {required} entries, cap is {max_entries}"
        )
    out = tt.cores[0][0]  # (n_1, D_1)
    for k in range(1, tt.d):
        out = np.tensordot(out, tt.cores[k], axes=(out.ndim - 1, 0))
    return out[..., 0]


def tt_rand_sample_diff(tt, oracle, m, seed):
    """Normalized one-norm difference between ``tt`` and an oracle on samples.

    Draws ``m`` index tuples uniformly (with replacement) using the seeded
    RNG and returns ``sum |oracle - tt| / sum |oracle|``.  Indices are
    generated up front and both sums run in fixed order, so the result is
    determined by the seed alone.
    """
    if m < 1:
        raise ValueError("sample count must be >= 1")
    rng = np.random.default_rng(seed)
    idx = np.empty((m, tt.d), dtype=np.int64)
    for axis, n in enumerate(tt.phys_dims):
        idx[:, axis] = rng.integers(0, n, size=m)
    approx = tt_evaluate_many(tt, idx)
    exact = np.asarray(oracle(idx), dtype=np.complex128)
    if exact.shape != (m,):
        raise ValueError(f"oracle returned shape {exact.shape}, expected ({m},)")
    num = float(np.sum(np.abs(exact - approx)))
    den = float(np.sum(np.abs(exact)))
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def pointwise_oracle(fn):
    """Adapt a scalar function of one index tuple to the batched convention.

    On failure the original exception propagates with the offending index
    tuple appended to its arguments.
    """

    def batched(idx):
        idx = np.asarray(idx, dtype=np.int64)
        out = np.empty(idx.shape[0], dtype=np.complex128)
        for row in range(idx.shape[0]):
            tup = tuple(int(v) for v in idx[row])
            try:
                out[row] = fn(tup)
            except Exception as exc:
                exc.args = exc.args + (f"oracle failed at index {tup}",)
                raise
        return out

    return batched


def tt_save_json(tt, path):
    """Write a self-describing JSON container.

    Cores are stored row-major as interleaved ``[re, im, re, im, ...]``
    lists, one list per core, with the shape header alongside.
    """
    payload = {
        "format": "tensor-train",
        "version": 1,
        "phys_dims": list(tt.phys_dims),
        "bond_dims": list(tt.bond_dims),
        "cores": [
            np.stack([core.real, core.imag], axis=-1).ravel().tolist()
            for core in tt.cores
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def tt_load_json(path):
    """Read a container written by :func:`tt_save_json`."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != "tensor-train":
        raise ValueError(f"not a tensor-train container: {path}")
    phys = payload["phys_dims"]
    bonds = payload["bond_dims"]
    cores = []
    for k, flat in enumerate(payload["cores"]):
        shape = (bonds[k], phys[k], bonds[k + 1])
        data = np.asarray(flat, dtype=np.float64).reshape(shape + (2,))
        cores.append(data[..., 0] + 1j * data[..., 1])
    return TensorTrain(cores)
