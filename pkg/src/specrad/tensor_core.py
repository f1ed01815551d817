"""Sparse nonnegative tensors, shape partitions, and multilinear contractions.

A tensor of order ``m`` is stored in coordinate (COO) form.  A *shape
partition* groups the modes into contiguous blocks of equal dimension, and a
:class:`BlockVector` holds one vector per block.  The contraction kernels in
this module evaluate the multilinear form, its blockwise partial gradients,
and the dense Jacobian of the gradient map; everything downstream (ratio
maps, Newton systems, structure checks) is built on top of them.

Indices are zero-based everywhere in memory.  The one-based convention used
by tensor files and the command line is translated at the I/O boundary only
(see :mod:`specrad.tensor_io`).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadIndex,
    BadModeIndex,
    DimensionMismatch,
    NegativeValue,
    NonContiguousBlocks,
    NonMonotoneBlockSizes,
    NotAPartition,
    ShapeMismatch,
    UnequalDimsInBlock,
)

__all__ = [
    "CooTensor",
    "ShapePartition",
    "BlockVector",
    "validate_partition",
    "multilinear_form",
    "grad_component",
    "lift",
    "gradient_map",
    "gradient_map_jacobian",
]


class CooTensor:
    """Nonnegative tensor of order ``m`` in coordinate storage.

    Parameters
    ----------
    dims:
        Dimension of each mode, ``m`` positive integers.
    indices:
        Integer array of shape ``(nnz, m)``; zero-based multi-indices.
    values:
        Nonnegative entry values, shape ``(nnz,)``.

    Entries are canonicalized at construction: multi-indices are sorted
    lexicographically and duplicate coordinates are merged by summation, so
    two tensors with the same nonzero pattern compare equal regardless of the
    order the entries were supplied in.  Negative values are rejected.
    """

    __slots__ = ("dims", "indices", "values")

    def __init__(self, dims, indices, values) -> None:
        dims = tuple(int(n) for n in dims)
        if not dims or any(n <= 0 for n in dims):
            raise DimensionMismatch(f"mode dimensions must be positive, got {dims}")
        m = len(dims)
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size == 0:
            idx = idx.reshape(0, m)
        idx = np.atleast_2d(idx)
        vals = np.asarray(values, dtype=np.float64).ravel()
        if idx.shape != (vals.size, m):
            raise DimensionMismatch(
                f"expected indices of shape ({vals.size}, {m}), got {idx.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("tensor entries must be finite")
        if np.any(vals < 0.0):
            bad = float(vals[vals < 0.0][0])
            raise NegativeValue(f"tensor entries must be nonnegative, got {bad}")
        for k, n in enumerate(dims):
            col = idx[:, k]
            if col.size and (col.min() < 0 or col.max() >= n):
                raise BadIndex(
                    f"mode-{k} index out of range [0, {n}) in entry list"
                )
        if vals.size:
            uniq, inverse = np.unique(idx, axis=0, return_inverse=True)
            merged = np.bincount(inverse.ravel(), weights=vals, minlength=uniq.shape[0])
            idx, vals = uniq, merged
        idx.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)

    def __setattr__(self, name, value):
        raise AttributeError("CooTensor is immutable")

    @property
    def order(self) -> int:
        return len(self.dims)

    @property
    def nnz(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, CooTensor):
            return NotImplemented
        return (
            self.dims == other.dims
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.dims, self.indices.tobytes(), self.values.tobytes()))

    def __repr__(self) -> str:
        return f"CooTensor(dims={self.dims}, nnz={self.nnz})"


@dataclass(frozen=True)
class ShapePartition:
    """Grouping of the modes of a tensor into ordered blocks of equal dimension.

    Use :func:`validate_partition` to construct one from raw block lists; the
    constructor itself performs no validation.

    Attributes
    ----------
    blocks:
        Tuple of blocks; each block is a sorted tuple of zero-based modes.
    nu:
        Block sizes ``len(blocks[i])`` (nondecreasing).
    starts:
        First mode of each block.
    block_dims:
        Common dimension of the modes in each block.
    """

    blocks: tuple[tuple[int, ...], ...]
    nu: tuple[int, ...]
    starts: tuple[int, ...]
    block_dims: tuple[int, ...]

    @property
    def d(self) -> int:
        """Number of blocks."""
        return len(self.blocks)

    @property
    def order(self) -> int:
        """Total number of modes."""
        return sum(self.nu)

    @property
    def total_dim(self) -> int:
        """Dimension of the concatenated block-vector space."""
        return sum(self.block_dims)

    @property
    def offsets(self) -> tuple[int, ...]:
        """Start offset of each block inside a flat concatenated vector."""
        out, acc = [], 0
        for n in self.block_dims:
            out.append(acc)
            acc += n
        return tuple(out)

    @property
    def mode_block(self) -> tuple[int, ...]:
        """Block index owning each mode, listed in mode order."""
        out = [0] * self.order
        for i, blk in enumerate(self.blocks):
            for q in blk:
                out[q] = i
        return tuple(out)


def validate_partition(dims, blocks) -> ShapePartition:
    """Check and canonicalize a shape partition for a tensor with ``dims``.

    The blocks must partition ``{0, ..., m-1}``; modes in one block must share
    a dimension; block sizes must be nondecreasing; and each block must be a
    contiguous run of modes occurring in increasing order.  The first failed
    rule determines the exception raised.
    """
    dims = tuple(int(n) for n in dims)
    m = len(dims)
    try:
        blocks = tuple(tuple(sorted(int(q) for q in blk)) for blk in blocks)
    except TypeError as e:
        raise NotAPartition(f"blocks must be iterables of mode indices: {e}") from e
    if not blocks or any(len(blk) == 0 for blk in blocks):
        raise NotAPartition("every block must be a nonempty set of modes")
    flat = [q for blk in blocks for q in blk]
    if len(set(flat)) != len(flat):
        raise NotAPartition("blocks must be pairwise disjoint")
    if set(flat) != set(range(m)):
        raise NotAPartition(
            f"blocks must cover exactly the modes 0..{m - 1}, got {sorted(set(flat))}"
        )
    for i, blk in enumerate(blocks):
        sizes = {dims[q] for q in blk}
        if len(sizes) > 1:
            raise UnequalDimsInBlock(
                f"block {i} mixes dimensions {sorted(sizes)}; all modes in a "
                "block must have equal dimension"
            )
    nu = tuple(len(blk) for blk in blocks)
    for i in range(len(nu) - 1):
        if nu[i] > nu[i + 1]:
            raise NonMonotoneBlockSizes(
                f"block sizes {nu} must be nondecreasing"
            )
    pos = 0
    for i, blk in enumerate(blocks):
        if blk != tuple(range(pos, pos + len(blk))):
            raise NonContiguousBlocks(
                f"block {i} must be the contiguous run {pos}..{pos + len(blk) - 1}, "
                f"got {blk}"
            )
        pos += len(blk)
    starts = tuple(blk[0] for blk in blocks)
    block_dims = tuple(dims[s] for s in starts)
    return ShapePartition(blocks=blocks, nu=nu, starts=starts, block_dims=block_dims)


class BlockVector:
    """Element of a product of coordinate spaces, stored as one flat array.

    Immutable; arithmetic returns new instances.  ``block(i)`` gives a
    read-only view of block ``i``; ``flat`` is the concatenation.
    """

    __slots__ = ("flat", "lengths", "_offsets")

    def __init__(self, blocks) -> None:
        arrs = [np.asarray(b, dtype=np.float64).ravel() for b in blocks]
        if not arrs:
            raise ShapeMismatch("a block vector needs at least one block")
        flat = np.concatenate(arrs)
        flat.setflags(write=False)
        object.__setattr__(self, "flat", flat)
        object.__setattr__(self, "lengths", tuple(a.size for a in arrs))
        offs = np.concatenate([[0], np.cumsum([a.size for a in arrs])])
        object.__setattr__(self, "_offsets", offs)

    def __setattr__(self, name, value):
        raise AttributeError("BlockVector is immutable")

    @classmethod
    def from_flat(cls, flat, lengths) -> "BlockVector":
        flat = np.asarray(flat, dtype=np.float64).ravel()
        if flat.size != sum(lengths):
            raise ShapeMismatch(
                f"flat vector of size {flat.size} cannot split into blocks {lengths}"
            )
        out = cls.__new__(cls)
        frozen = flat.copy()
        frozen.setflags(write=False)
        object.__setattr__(out, "flat", frozen)
        object.__setattr__(out, "lengths", tuple(int(n) for n in lengths))
        offs = np.concatenate([[0], np.cumsum(lengths)])
        object.__setattr__(out, "_offsets", offs)
        return out

    @property
    def d(self) -> int:
        return len(self.lengths)

    def block(self, i: int) -> np.ndarray:
        return self.flat[self._offsets[i]:self._offsets[i + 1]]

    @property
    def blocks(self) -> list[np.ndarray]:
        return [self.block(i) for i in range(self.d)]

    def map_blocks(self, fn) -> "BlockVector":
        """Apply ``fn(i, block_i)`` to every block and repack the results."""
        return BlockVector([fn(i, self.block(i)) for i in range(self.d)])

    def __add__(self, other):
        if not isinstance(other, BlockVector) or other.lengths != self.lengths:
            return NotImplemented
        return BlockVector.from_flat(self.flat + other.flat, self.lengths)

    def __sub__(self, other):
        if not isinstance(other, BlockVector) or other.lengths != self.lengths:
            return NotImplemented
        return BlockVector.from_flat(self.flat - other.flat, self.lengths)

    def __mul__(self, scalar):
        return BlockVector.from_flat(self.flat * float(scalar), self.lengths)

    __rmul__ = __mul__

    def __neg__(self):
        return BlockVector.from_flat(-self.flat, self.lengths)

    def __repr__(self) -> str:
        return f"BlockVector(lengths={self.lengths})"


def conform(part: ShapePartition, x: BlockVector) -> None:
    """Raise ``ShapeMismatch`` unless ``x`` matches the partition's block dims."""
    if tuple(x.lengths) != tuple(part.block_dims):
        raise ShapeMismatch(
            f"block vector with lengths {x.lengths} does not conform to "
            f"partition block dims {part.block_dims}"
        )


def lift(x: BlockVector, part: ShapePartition) -> tuple[np.ndarray, ...]:
    """Expand a block vector to one vector per mode (block ``i`` repeated
    ``nu[i]`` times, in mode order)."""
    conform(part, x)
    mb = part.mode_block
    return tuple(x.block(mb[q]) for q in range(part.order))


def _check_mode_vectors(tensor: CooTensor, zs, skip: int | None = None) -> list:
    if len(zs) != tensor.order:
        raise DimensionMismatch(
            f"need one vector per mode ({tensor.order}), got {len(zs)}"
        )
    out = []
    for k, z in enumerate(zs):
        if k == skip:
            out.append(None)
            continue
        z = np.asarray(z, dtype=np.float64).ravel()
        if z.size != tensor.dims[k]:
            raise DimensionMismatch(
                f"mode-{k} vector has length {z.size}, expected {tensor.dims[k]}"
            )
        out.append(z)
    return out


def multilinear_form(tensor: CooTensor, zs) -> float:
    """Evaluate ``sum_e a_e * prod_k zs[k][e_k]`` over the stored entries."""
    zs = _check_mode_vectors(tensor, zs)
    if tensor.nnz == 0:
        return 0.0
    w = tensor.values.copy()
    for q in range(tensor.order):
        w *= zs[q][tensor.indices[:, q]]
    return float(w.sum())


def grad_component(tensor: CooTensor, mode: int, zs) -> np.ndarray:
    """Partial gradient of the multilinear form with respect to slot ``mode``.

    Returns the length-``dims[mode]`` vector whose ``t``-th component sums
    ``a_e * prod_{k != mode} zs[k][e_k]`` over entries with ``e_mode == t``.
    The vector supplied in slot ``mode`` is ignored (it may be ``None``).
    """
    if not 0 <= mode < tensor.order:
        raise BadModeIndex(f"mode {mode} out of range [0, {tensor.order})")
    zs = _check_mode_vectors(tensor, zs, skip=mode)
    n = tensor.dims[mode]
    if tensor.nnz == 0:
        return np.zeros(n)
    w = tensor.values.copy()
    for q in range(tensor.order):
        if q == mode:
            continue
        w *= zs[q][tensor.indices[:, q]]
    return np.bincount(tensor.indices[:, mode], weights=w, minlength=n)


def gradient_map(prob, x: BlockVector) -> BlockVector:
    """Blockwise gradient map: block ``i`` is the partial gradient of the
    multilinear form at the lifted vector, taken at the leading mode of block
    ``i``.  Defined for every ``x`` (no positivity required)."""
    part = prob.partition
    zs = lift(x, part)
    return BlockVector([grad_component(prob.tensor, s, zs) for s in part.starts])


def gradient_map_jacobian(prob, x: BlockVector) -> np.ndarray:
    """Dense Jacobian of :func:`gradient_map` at ``x``.

    Row block ``i`` / column block ``l`` holds the derivative of gradient
    block ``i`` with respect to the variables of block ``l``.  Cost is
    ``O(nnz * m^2)`` plus the dense accumulation.
    """
    part = prob.partition
    tensor = prob.tensor
    conform(part, x)
    n = part.total_dim
    DG = np.zeros((n, n))
    if tensor.nnz == 0:
        return DG
    idx = tensor.indices
    vals = tensor.values
    m = part.order
    zs = lift(x, part)
    fac = [zs[q][idx[:, q]] for q in range(m)]
    offs = part.offsets
    mb = part.mode_block
    nnz = tensor.nnz
    for i, s in enumerate(part.starts):
        rows = offs[i] + idx[:, s]
        others = [q for q in range(m) if q != s]
        k = len(others)
        # prefix[j] = prod of fac[others[:j]], suffix[j] = prod of fac[others[j:]]
        prefix = np.ones((k + 1, nnz))
        for j, q in enumerate(others):
            prefix[j + 1] = prefix[j] * fac[q]
        suffix = np.ones((k + 1, nnz))
        for j in range(k - 1, -1, -1):
            suffix[j] = suffix[j + 1] * fac[others[j]]
        for j, q in enumerate(others):
            w = vals * prefix[j] * suffix[j + 1]
            cols = offs[mb[q]] + idx[:, q]
            np.add.at(DG, (rows, cols), w)
    return DG
