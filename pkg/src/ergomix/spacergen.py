"""Spacer sequences and the exact checks on their partial sums.

Sequences are stored 0-based: ``seq.s[i - 1]`` is the spacer count above
column i. Partial sums follow the same convention, ``table.values[i - 1]``
is S(i, n) for i = 1 .. r - n - 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ergomix.errors import WindowTooLarge
from ergomix.numtheory import minimal_primitive_root, residue_sequence
from ergomix.prng import SplitMix64


@dataclass(frozen=True)
class Stochastic:
    H: int
    seed: int

    def __post_init__(self) -> None:
        if self.H < 1:
            raise ValueError(f"stochastic scheme needs H >= 1, got {self.H}")

    name = "stochastic"


@dataclass(frozen=True)
class Algebraic:
    r: int
    q: int
    H: int

    def __post_init__(self) -> None:
        if self.H < self.r:
            raise ValueError(f"algebraic scheme needs H >= r, got H={self.H}, r={self.r}")

    name = "algebraic"

    @classmethod
    def minimal(cls, r: int, H: Optional[int] = None) -> "Algebraic":
        return cls(r=r, q=minimal_primitive_root(r), H=r if H is None else H)


SpacerScheme = Union[Stochastic, Algebraic]


@dataclass(frozen=True, eq=False)
class SpacerSequence:
    """One stage's spacers.

    ``provenance`` holds the draws a(1..r+1) for stochastic sequences and
    the residues rho[1..r] for algebraic ones, again 0-based.
    """

    r: int
    H: int
    s: np.ndarray
    scheme: str
    provenance: np.ndarray

    def __post_init__(self) -> None:
        if self.s.shape != (self.r,):
            raise ValueError(f"expected {self.r} spacers, got {self.s.shape}")
        if (self.s < 0).any():
            raise ValueError("spacer counts must be nonnegative")
        self.s.setflags(write=False)
        self.provenance.setflags(write=False)

    @property
    def total(self) -> int:
        return int(self.s.sum())

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "H": self.H,
            "scheme": self.scheme,
            "s": [int(x) for x in self.s],
            "provenance": [int(x) for x in self.provenance],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpacerSequence":
        return cls(
            r=int(d["r"]),
            H=int(d["H"]),
            s=np.asarray(d["s"], dtype=np.int64),
            scheme=str(d["scheme"]),
            provenance=np.asarray(d["provenance"], dtype=np.int64),
        )

    @classmethod
    def constant(cls, r: int, H: int) -> "SpacerSequence":
        """All spacers equal to H; the degenerate case with zero partial sums."""
        return cls(r=r, H=H, s=np.full(r, H, dtype=np.int64), scheme="constant",
                   provenance=np.zeros(0, dtype=np.int64))


def algebraic_spacers(scheme: Algebraic) -> SpacerSequence:
    rs = residue_sequence(scheme.q, scheme.r)
    rho = rs.rho.astype(np.int64)
    s = np.empty(scheme.r, dtype=np.int64)
    s[:-1] = scheme.H + rho[1:-1] - rho[2:]
    # the last column gets the neutral count H
    s[-1] = scheme.H
    return SpacerSequence(r=scheme.r, H=scheme.H, s=s, scheme=scheme.name, provenance=rho[1:].copy())


def stochastic_spacers(scheme: Stochastic, r: int) -> SpacerSequence:
    if r < 2:
        raise ValueError(f"need r >= 2 columns, got {r}")
    a = SplitMix64(scheme.seed).uniform_array(scheme.H, r + 1)
    s = scheme.H + a[:-1] - a[1:]
    return SpacerSequence(r=r, H=scheme.H, s=s, scheme=scheme.name, provenance=a)


def make_spacers(scheme: SpacerScheme, r: int) -> SpacerSequence:
    if isinstance(scheme, Algebraic):
        if scheme.r != r:
            raise ValueError(f"algebraic scheme is for r={scheme.r}, stage cuts {r}")
        return algebraic_spacers(scheme)
    return stochastic_spacers(scheme, r)


@dataclass(frozen=True, eq=False)
class PartialSumTable:
    n: int
    values: np.ndarray

    def S(self, i: int) -> int:
        return int(self.values[i - 1])


def partial_sums(seq: SpacerSequence, n: int) -> PartialSumTable:
    """S(i, n) = sum_{k=1..n} s(i+k) - n*H for i = 1 .. r-n-1."""
    if not 1 <= n <= seq.r - 2:
        raise WindowTooLarge(f"window n={n} outside [1, {seq.r - 2}]")
    # prefix[j] = sum_{t=1..j} (s(t) - H)
    prefix = np.concatenate(([0], np.cumsum(seq.s - seq.H)))
    count = seq.r - n - 1
    values = prefix[1 + n : 1 + n + count] - prefix[1 : 1 + count]
    return PartialSumTable(n=n, values=values)


@dataclass(frozen=True)
class RangeCheck:
    ok: bool
    max_abs: int
    worst_i: int  # 1-based index attaining max_abs


def verify_range_property(table: PartialSumTable, r: int) -> RangeCheck:
    if table.values.size == 0:
        return RangeCheck(True, 0, 0)
    absval = np.abs(table.values)
    k = int(np.argmax(absval))
    worst = int(absval[k])
    return RangeCheck(ok=worst <= r, max_abs=worst, worst_i=k + 1)


@dataclass(frozen=True)
class InjectivityCheck:
    ok: bool
    collision: Optional[tuple[int, int]] = None  # (i, j), i < j, 1-based


def verify_injectivity(table: PartialSumTable) -> InjectivityCheck:
    v = table.values
    if np.unique(v).size == v.size:
        return InjectivityCheck(True)
    seen: dict[int, int] = {}
    for j, x in enumerate(v.tolist(), start=1):
        if x in seen:
            return InjectivityCheck(False, (seen[x], j))
        seen[x] = j
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class DiffHistogram:
    counts: dict[int, int]
    total: int

    def to_dict(self) -> dict:
        return {"total": self.total, "counts": {str(k): v for k, v in sorted(self.counts.items())}}


def difference_histogram(seq: SpacerSequence, n: int) -> DiffHistogram:
    table = partial_sums(seq, n)
    keys, counts = np.unique(table.values, return_counts=True)
    return DiffHistogram(
        counts={int(k): int(c) for k, c in zip(keys, counts)},
        total=int(table.values.size),
    )
