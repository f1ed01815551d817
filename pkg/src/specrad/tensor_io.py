"""Plain-text tensor files and the random instance generator.

File format (whitespace separated, ``#`` starts a comment anywhere)::

    m                     # order
    N_1 N_2 ... N_m       # dimensions
    i_1 i_2 ... i_m v     # one entry per line, indices ONE-based

Indices are one-based on disk and on the command line; the in-memory
representation is zero-based, converted exactly here.  ``write_tensor``
emits values through ``repr``, so a write/parse round trip reproduces the
tensor bit for bit.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import (
    BadDensity,
    BadHeader,
    BadIndex,
    NegativeValue,
    ParseError,
)
from .tensor_core import CooTensor

__all__ = [
    "parse_tensor",
    "write_tensor",
    "parse_partition",
    "parse_p",
    "random_tensor",
]


def _significant_lines(text: str):
    """Yield ``(lineno, tokens)`` for lines that carry content."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield lineno, body.split()


def parse_tensor(source) -> CooTensor:
    """Parse a tensor from a string or a readable file object.

    Raises :class:`~specrad.errors.BadHeader` for a malformed order or
    dimension line, :class:`~specrad.errors.BadIndex` for out-of-range
    (one-based) indices, :class:`~specrad.errors.NegativeValue` for negative
    entries, and :class:`~specrad.errors.ParseError` for anything else, all
    tagged with the offending line number.
    """
    text = source.read() if hasattr(source, "read") else source
    lines = _significant_lines(text)

    try:
        lineno, tokens = next(lines)
    except StopIteration:
        raise BadHeader("empty tensor file") from None
    if len(tokens) != 1:
        raise BadHeader(f"line {lineno}: order line must hold a single integer")
    try:
        m = int(tokens[0])
    except ValueError:
        raise BadHeader(f"line {lineno}: order {tokens[0]!r} is not an integer") from None
    if m < 1:
        raise BadHeader(f"line {lineno}: order must be positive, got {m}")

    try:
        lineno, tokens = next(lines)
    except StopIteration:
        raise BadHeader("missing dimension line") from None
    if len(tokens) != m:
        raise BadHeader(
            f"line {lineno}: expected {m} dimensions, got {len(tokens)}"
        )
    try:
        dims = tuple(int(t) for t in tokens)
    except ValueError:
        raise BadHeader(f"line {lineno}: dimensions must be integers") from None
    if any(n < 1 for n in dims):
        raise BadHeader(f"line {lineno}: dimensions must be positive, got {dims}")

    idx_rows: list[list[int]] = []
    vals: list[float] = []
    for lineno, tokens in lines:
        if len(tokens) != m + 1:
            raise ParseError(
                f"line {lineno}: expected {m} indices and a value, "
                f"got {len(tokens)} fields"
            )
        try:
            coord = [int(t) for t in tokens[:m]]
        except ValueError:
            raise ParseError(f"line {lineno}: indices must be integers") from None
        for k, (i, n) in enumerate(zip(coord, dims)):
            if not 1 <= i <= n:
                raise BadIndex(
                    f"line {lineno}: mode-{k + 1} index {i} outside 1..{n}"
                )
        try:
            v = float(tokens[m])
        except ValueError:
            raise ParseError(
                f"line {lineno}: value {tokens[m]!r} is not a number"
            ) from None
        if not math.isfinite(v):
            raise ParseError(f"line {lineno}: value must be finite, got {v}")
        if v < 0.0:
            raise NegativeValue(f"line {lineno}: negative entry {v}")
        idx_rows.append([i - 1 for i in coord])
        vals.append(v)

    return CooTensor(dims, idx_rows, vals)


def write_tensor(tensor: CooTensor, stream=None) -> str:
    """Serialize a tensor to the text format (one-based indices, canonical
    entry order, ``repr`` values for exact round trips).  Returns the text;
    also writes it to ``stream`` when given."""
    out = [str(tensor.order), " ".join(str(n) for n in tensor.dims)]
    for row, v in zip(tensor.indices, tensor.values):
        out.append(" ".join(str(int(i) + 1) for i in row) + " " + repr(float(v)))
    text = "\n".join(out) + "\n"
    if stream is not None:
        stream.write(text)
    return text


def parse_partition(text: str) -> list[list[int]]:
    """Parse a partition spec like ``"1;2,3"`` (one-based modes, blocks
    separated by ``;``) into zero-based block lists."""
    blocks: list[list[int]] = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            raise ParseError(f"empty block in partition spec {text!r}")
        try:
            modes = [int(t) for t in part.split(",")]
        except ValueError:
            raise ParseError(
                f"partition spec {text!r} has a non-integer mode"
            ) from None
        if any(q < 1 for q in modes):
            raise ParseError(f"partition modes are one-based, got {modes}")
        blocks.append([q - 1 for q in modes])
    return blocks


def parse_p(text: str) -> tuple[tuple[float, ...], tuple[Fraction, ...]]:
    """Parse exponents like ``"2,4"`` or ``"5/2,3"``; every entry is kept as
    an exact rational alongside its float value."""
    floats: list[float] = []
    exact: list[Fraction] = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            raise ParseError(f"empty exponent in {text!r}")
        try:
            fr = Fraction(tok)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"exponent {tok!r} is not a number or ratio") from None
        floats.append(float(fr))
        exact.append(fr)
    return tuple(floats), tuple(exact)


#: Guard against enumerating astronomically many cells in random_tensor.
MAX_RANDOM_CELLS = 2_000_000


def random_tensor(dims, density: float, seed: int) -> CooTensor:
    """Deterministic random nonnegative tensor.

    Fills ``round(density * prod(dims))`` distinct cells (at least one) with
    values uniform in ``(0, 1]``, then tops up so every slice of the first
    mode holds at least one entry.  The same seed always produces the same
    tensor, entry for entry.
    """
    dims = tuple(int(n) for n in dims)
    if not dims or any(n < 1 for n in dims):
        raise ValueError(f"dims must be positive integers, got {dims}")
    if not 0.0 < density <= 1.0:
        raise BadDensity(f"density must lie in (0, 1], got {density}")
    total = int(np.prod([np.int64(n) for n in dims]))
    if total > MAX_RANDOM_CELLS:
        raise ValueError(
            f"random generation supports up to {MAX_RANDOM_CELLS} cells, "
            f"got {total}"
        )
    rng = np.random.default_rng(seed)
    k = max(1, int(round(density * total)))
    flat = np.sort(rng.choice(total, size=k, replace=False))
    idx = np.stack(np.unravel_index(flat, dims), axis=1)
    vals = 1.0 - rng.random(k)
    present = set(idx[:, 0].tolist())
    extra_rows = []
    extra_vals = []
    for j in range(dims[0]):
        if j not in present:
            coord = [j] + [int(rng.integers(0, n)) for n in dims[1:]]
            extra_rows.append(coord)
            extra_vals.append(1.0 - rng.random())
    if extra_rows:
        idx = np.vstack([idx, np.asarray(extra_rows, dtype=np.int64)])
        vals = np.concatenate([vals, extra_vals])
    return CooTensor(dims, idx, vals)
