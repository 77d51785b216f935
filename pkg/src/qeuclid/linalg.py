"""Exact sparse Gaussian elimination over FieldElem.

Rows are ``dict[column, FieldElem]`` with zero entries omitted.
"""

from __future__ import annotations

from typing import Hashable, Iterable, Sequence

from .coeff import ONE, FieldElem

Row = dict


def _axpy(target: Row, factor: FieldElem, source: Row) -> None:
    """target += factor * source, pruning zeros."""
    for col, val in source.items():
        new = target.get(col)
        new = factor * val if new is None else new + factor * val
        if new.is_zero():
            target.pop(col, None)
        else:
            target[col] = new


def rref(rows: Iterable[Row], column_order: Sequence[Hashable]) -> tuple[list[Row], list[Hashable]]:
    """Reduced row echelon form with pivots chosen in ``column_order``.

    Returns the nonzero reduced rows (pivot entry 1) and their pivot columns.
    Columns absent from ``column_order`` are never pivots.
    """
    work = [dict(r) for r in rows if r]
    pivots: list[Hashable] = []
    reduced: list[Row] = []
    for col in column_order:
        pick = next((k for k, r in enumerate(work) if col in r), None)
        if pick is None:
            continue
        row = work.pop(pick)
        inv = row[col].inverse()
        row = {c: v * inv for c, v in row.items()}
        for other in work:
            if col in other:
                _axpy(other, -other[col], row)
        for other in reduced:
            if col in other:
                _axpy(other, -other[col], row)
        work = [r for r in work if r]
        reduced.append(row)
        pivots.append(col)
    return reduced, pivots


def rank(rows: Iterable[Row], columns: Sequence[Hashable]) -> int:
    return len(rref(rows, columns)[1])


def nullspace(rows: Iterable[Row], columns: Sequence[Hashable]) -> list[Row]:
    """Basis of ``{v : sum_c row[c] v[c] = 0 for every row}``, one vector per free column."""
    reduced, pivots = rref(rows, columns)
    pivot_set = set(pivots)
    basis = []
    for free in columns:
        if free in pivot_set:
            continue
        vec = {free: ONE}
        for row, p in zip(reduced, pivots):
            if free in row:
                vec[p] = -row[free]
        basis.append(vec)
    return basis


def solve(rows: Sequence[Row], rhs: Sequence[FieldElem], columns: Sequence[Hashable]) -> Row | None:
    """One solution of ``A v = rhs`` (free variables zero) or ``None`` if inconsistent."""
    marker = object()
    aug = []
    for row, b in zip(rows, rhs):
        r = dict(row)
        if not b.is_zero():
            r[marker] = -b
        aug.append(r)
    reduced, pivots = rref(aug, list(columns) + [marker])
    if marker in pivots:
        return None
    return {p: -row[marker] for row, p in zip(reduced, pivots) if marker in row}
