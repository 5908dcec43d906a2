"""Cutting and stacking on the symbolic level.

The stage-j tower is encoded by a word B_j over {0, 1}: bit t is 1 when
position t descends from the initial tower and 0 when it is a spacer.
Stacking r copies with spacer counts s(1..r) gives

    B_{j+1} = B_j 0^{s(1)} B_j 0^{s(2)} ... B_j 0^{s(r)}.

Words are held as Python integers with position t at bit t, so shifts,
ANDs and ``int.bit_count`` do the heavy lifting and a 10**8 symbol word
costs about 12 MB.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Union

import numpy as np

from ergomix.errors import ConstructionTooLarge
from ergomix.numtheory import is_prime, minimal_primitive_root
from ergomix.prng import stage_seed
from ergomix.spacergen import Algebraic, SpacerSequence, Stochastic, make_spacers

DEFAULT_GUARD = 10**8

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class StageSpec:
    """Cut count and spacer recipe for one stage.

    ``q=None`` selects the minimal primitive root and ``H=None`` selects
    H = r. Stochastic stages take their seed from the master seed.
    """

    r: int
    scheme: str = "algebraic"
    H: Optional[int] = None
    q: Optional[int] = None

    def __post_init__(self) -> None:
        if self.r < 2:
            raise ValueError(f"cut count must be >= 2, got {self.r}")
        if self.scheme not in ("algebraic", "stochastic"):
            raise ValueError(f"unknown spacer scheme {self.scheme!r}")
        if self.scheme == "algebraic" and not (self.r >= 3 and is_prime(self.r)):
            raise ValueError(f"r must be prime for an algebraic stage, got {self.r}")

    def instantiate(self, stage: int, master_seed: int) -> Union[Algebraic, Stochastic]:
        H = self.r if self.H is None else self.H
        if self.scheme == "algebraic":
            q = minimal_primitive_root(self.r) if self.q is None else self.q
            return Algebraic(r=self.r, q=q, H=H)
        return Stochastic(H=H, seed=stage_seed(master_seed, stage))


@dataclass(frozen=True)
class ConstructionParams:
    h1: int
    stages: tuple[StageSpec, ...]
    seed: int = 0
    guard: int = DEFAULT_GUARD

    def __post_init__(self) -> None:
        if self.h1 < 0:
            raise ValueError("h1 must be >= 0")
        object.__setattr__(self, "stages", tuple(self.stages))

    @property
    def J(self) -> int:
        return len(self.stages)


@dataclass(frozen=True)
class StageSummary:
    j: int
    h: int

    @property
    def levels(self) -> int:
        return self.h + 1


def advance_stage(
    summary: StageSummary, r: int, s: Union[SpacerSequence, Iterable[int]], guard: Optional[int] = None
) -> StageSummary:
    """h_{j+1} + 1 = (h_j + 1) r + sum(s)."""
    if r < 2:
        raise ValueError(f"cut count must be >= 2, got {r}")
    counts = [int(x) for x in (s.s if isinstance(s, SpacerSequence) else s)]
    if len(counts) != r:
        raise ValueError(f"expected {r} spacer counts, got {len(counts)}")
    if min(counts) < 0:
        raise ValueError("spacer counts must be nonnegative")
    length = summary.levels * r + sum(counts)
    if guard is not None and length > guard:
        raise ConstructionTooLarge(length, guard)
    return StageSummary(j=summary.j + 1, h=length - 1)


@dataclass(frozen=True)
class Level:
    level: int
    path: tuple[int, ...]  # 1-based column per stacking step, outermost first


@dataclass(frozen=True)
class Spacer:
    stage: int  # the spacer was added while stacking stage `stage` into `stage + 1`
    column: int  # 1-based
    offset: int  # position inside the spacer run
    path: tuple[int, ...]


PositionAddress = Union[Level, Spacer]


@dataclass(frozen=True, eq=False)
class RankOneWord:
    bits: int
    length: int
    summaries: tuple[StageSummary, ...]  # stages 1 .. J+1
    spacers: tuple[SpacerSequence, ...]  # transitions 1 .. J
    offsets: tuple[np.ndarray, ...] = field(repr=False)  # column starts per transition

    @property
    def J(self) -> int:
        return len(self.spacers)

    @property
    def h(self) -> int:
        return self.length - 1

    def height(self, j: int) -> int:
        return self.summaries[j - 1].h

    def copies(self, j0: int) -> int:
        """How many copies of B_{j0} the final word contains."""
        n = 1
        for seq in self.spacers[j0 - 1 :]:
            n *= seq.r
        return n

    @property
    def tower_count(self) -> int:
        return self.bits.bit_count()

    def to_bytes(self) -> bytes:
        return self.bits.to_bytes((self.length + 7) // 8, "little")

    def to_array(self) -> np.ndarray:
        raw = np.frombuffer(self.to_bytes(), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.length]

    def checksum(self) -> int:
        return fnv1a64(self.to_bytes())

    def manifest(self) -> dict:
        stages = []
        for k, summ in enumerate(self.summaries):
            row: dict = {"j": summ.j, "h": summ.h}
            if k < self.J:
                seq = self.spacers[k]
                row.update(r=seq.r, scheme=seq.scheme, H=seq.H, spacer_total=seq.total)
            stages.append(row)
        return {
            "stages": stages,
            "word_length": self.length,
            "tower_symbols": self.tower_count,
            "checksum": f"{self.checksum():016x}",
        }


def _stack(block: int, block_len: int, spacer_counts: np.ndarray) -> tuple[int, int]:
    # balanced pairwise concatenation: O(L log r) instead of O(L r)
    segs = [(block, block_len + int(s)) for s in spacer_counts]
    while len(segs) > 1:
        merged = [(x | (y << a), a + b) for (x, a), (y, b) in zip(segs[::2], segs[1::2])]
        if len(segs) % 2:
            merged.append(segs[-1])
        segs = merged
    return segs[0]


def _offsets(block_len: int, spacer_counts: np.ndarray) -> np.ndarray:
    widths = block_len + spacer_counts.astype(np.int64)
    return np.concatenate(([0], np.cumsum(widths)[:-1]))


def plan(params: ConstructionParams) -> tuple[list[StageSummary], list[SpacerSequence]]:
    """Spacers and heights for every stage, without building the word.

    Raises ConstructionTooLarge as soon as a stage would exceed the guard,
    before generating that stage's spacers.
    """
    summaries = [StageSummary(1, params.h1)]
    if params.h1 + 1 > params.guard:
        raise ConstructionTooLarge(params.h1 + 1, params.guard)
    spacers = []
    for j, spec in enumerate(params.stages, start=1):
        lower = summaries[-1].levels * spec.r
        if lower > params.guard:
            raise ConstructionTooLarge(lower, params.guard)
        seq = make_spacers(spec.instantiate(j, params.seed), spec.r)
        summaries.append(advance_stage(summaries[-1], spec.r, seq, guard=params.guard))
        spacers.append(seq)
    return summaries, spacers


def build_word(params: ConstructionParams) -> RankOneWord:
    summaries, spacers = plan(params)
    bits, length = (1 << (params.h1 + 1)) - 1, params.h1 + 1
    offsets = []
    for summ, nxt, seq in zip(summaries, summaries[1:], spacers):
        offsets.append(_offsets(length, seq.s))
        bits, length = _stack(bits, length, seq.s)
        if length != nxt.levels:
            raise AssertionError(f"stage {nxt.j}: word length {length} != recurrence {nxt.levels}")
    return RankOneWord(
        bits=bits,
        length=length,
        summaries=tuple(summaries),
        spacers=tuple(spacers),
        offsets=tuple(offsets),
    )


def _check_stage(word: RankOneWord, j0: int) -> None:
    if not 1 <= j0 <= word.J + 1:
        raise ValueError(f"reference stage must be in [1, {word.J + 1}], got {j0}")


def decode_position(word: RankOneWord, t: int, j0: int) -> PositionAddress:
    _check_stage(word, j0)
    if not 0 <= t < word.length:
        raise IndexError(f"position {t} outside [0, {word.h}]")
    path = []
    for k in range(word.J, j0 - 1, -1):  # transition k builds B_{k+1} from B_k
        offs = word.offsets[k - 1]
        col = bisect.bisect_right(offs, t) - 1
        t -= int(offs[col])
        inner = word.summaries[k - 1].levels
        if t >= inner:
            return Spacer(stage=k, column=col + 1, offset=t - inner, path=tuple(path))
        path.append(col + 1)
    return Level(level=t, path=tuple(path))


def encode_position(word: RankOneWord, addr: PositionAddress) -> int:
    """Inverse of decode_position."""
    if isinstance(addr, Spacer):
        k = addr.stage
        t = word.summaries[k - 1].levels + addr.offset + int(word.offsets[k - 1][addr.column - 1])
    else:
        t = addr.level
    # path[d] is the column chosen at transition J - d
    for d in range(len(addr.path) - 1, -1, -1):
        t += int(word.offsets[word.J - d - 1][addr.path[d] - 1])
    return t


def level_set_indicator(word: RankOneWord, j0: int, levels: Iterable[int]) -> int:
    """Bit vector (as an int) marking stage-j0 tower levels in ``levels``."""
    _check_stage(word, j0)
    levels = set(levels)
    top = word.height(j0)
    bad = [lv for lv in levels if not 0 <= lv <= top]
    if bad:
        raise ValueError(f"levels {sorted(bad)} outside [0, {top}]")
    bits = sum(1 << lv for lv in levels)
    length = top + 1
    for seq in word.spacers[j0 - 1 :]:
        bits, length = _stack(bits, length, seq.s)
    return bits


def level_measure(word: RankOneWord, j0: int, levels: Iterable[int]) -> Fraction:
    """Measure of a union of stage-j0 levels, the final tower having mass 1."""
    _check_stage(word, j0)
    levels = set(levels)
    top = word.height(j0)
    if any(not 0 <= lv <= top for lv in levels):
        raise ValueError(f"levels outside [0, {top}]")
    return Fraction(len(levels) * word.copies(j0), word.length)
