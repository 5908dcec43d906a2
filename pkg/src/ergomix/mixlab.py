"""Statistics on spacer sequences and rank-one words.

All quantities that are ratios of counts are returned as exact
``Fraction`` values; floats only appear when a report is serialised.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from ergomix.numtheory import ResidueSequence
from ergomix.spacergen import DiffHistogram, PartialSumTable
from ergomix.tower import RankOneWord


def triangular_mass(H: int, n: int) -> Fraction:
    """Law of the difference of two independent uniforms on {0..H}."""
    if abs(n) > H:
        return Fraction(0)
    return Fraction(H + 1 - abs(n), (H + 1) ** 2)


@dataclass(frozen=True)
class TriangularLaw:
    H: int

    def mass(self, n: int) -> Fraction:
        return triangular_mass(self.H, n)

    @property
    def support(self) -> range:
        return range(-self.H, self.H + 1)

    def total(self) -> Fraction:
        return sum((self.mass(n) for n in self.support), Fraction(0))


def tv_distance(hist: DiffHistogram, law: TriangularLaw) -> Fraction:
    if hist.total <= 0:
        raise ValueError("empty histogram")
    keys = set(hist.counts) | set(law.support)
    acc = Fraction(0)
    for n in keys:
        acc += abs(Fraction(hist.counts.get(n, 0), hist.total) - law.mass(n))
    return acc / 2


def _popcount(x: int) -> int:
    return x.bit_count()


def correlation(word: RankOneWord, a: int, b: int, m: int) -> Fraction:
    """Fraction of valid t with A(t) = 1 and B(t + m) = 1.

    Estimates mu(A & T^-m B); dividing by the number of valid positions
    (length - m) rather than the length leaves a boundary bias of at most
    m / length.
    """
    if not 0 <= m <= word.h:
        raise ValueError(f"shift {m} outside [0, {word.h}]")
    # b >> m only has bits below length - m, so the AND is already windowed
    return Fraction(_popcount(a & (b >> m)), word.length - m)


@dataclass
class MixReport:
    a_desc: dict
    b_desc: dict
    shifts: list[int]
    estimates: list[Fraction]
    mu_a: Fraction
    mu_b: Fraction
    word_length: int
    deviations: list[Fraction] = field(init=False)

    def __post_init__(self) -> None:
        self.deviations = [abs(e - self.baseline) for e in self.estimates]

    @property
    def baseline(self) -> Fraction:
        return self.mu_a * self.mu_b

    @property
    def max_deviation(self) -> Fraction:
        return max(self.deviations, default=Fraction(0))

    @property
    def argmax_shift(self) -> Optional[int]:
        if not self.shifts:
            return None
        return self.shifts[self.deviations.index(self.max_deviation)]

    @property
    def bias_bound(self) -> Fraction:
        return Fraction(max(self.shifts, default=0), self.word_length)

    def to_dict(self) -> dict:
        return {
            "A": self.a_desc,
            "B": self.b_desc,
            "word_length": self.word_length,
            "mu_A": str(self.mu_a),
            "mu_B": str(self.mu_b),
            "baseline": str(self.baseline),
            "max_deviation": str(self.max_deviation),
            "max_deviation_float": float(self.max_deviation),
            "argmax_m": self.argmax_shift,
            "boundary_bias_bound": str(self.bias_bound),
            "rows": [
                {"m": m, "estimate": str(e), "deviation": str(d)}
                for m, e, d in zip(self.shifts, self.estimates, self.deviations)
            ],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "estimate", "baseline", "deviation"])
        base = float(self.baseline)
        for m, e, d in zip(self.shifts, self.estimates, self.deviations):
            w.writerow([m, repr(float(e)), repr(base), repr(float(d))])
        return buf.getvalue()


def correlation_sweep(
    word: RankOneWord,
    a: int,
    b: int,
    shifts: Iterable[int],
    a_desc: Optional[dict] = None,
    b_desc: Optional[dict] = None,
) -> MixReport:
    """Correlations over a set of shifts, each at most half the final height."""
    shifts = sorted(set(shifts))
    limit = word.h // 2
    bad = [m for m in shifts if not 0 <= m <= limit]
    if bad:
        raise ValueError(f"shifts {bad[:5]} outside [0, {limit}]")
    return MixReport(
        a_desc=a_desc or {},
        b_desc=b_desc or {},
        shifts=shifts,
        estimates=[correlation(word, a, b, m) for m in shifts],
        mu_a=Fraction(_popcount(a), word.length),
        mu_b=Fraction(_popcount(b), word.length),
        word_length=word.length,
    )


def shift_range(lo: int, hi: int, stride: int) -> list[int]:
    if stride < 1:
        raise ValueError("stride must be >= 1")
    return list(range(lo, hi + 1, stride))


@dataclass(frozen=True, eq=False)
class ParityReport:
    r: int
    q: int
    sigma: np.ndarray  # sigma[i - 1] for i = 1..r-1
    m0: int
    m1: int
    agreement: int

    @property
    def bound(self) -> Fraction:
        if self.q % 2:
            return Fraction(self.r, self.q) + self.q - 1
        return Fraction(self.q - 1)

    @property
    def displacement(self) -> int:
        return abs(self.m0 - self.m1)

    @property
    def characterization_ok(self) -> bool:
        return self.agreement == self.r - 1

    def to_row(self) -> dict:
        return {
            "r": self.r,
            "q": self.q,
            "m0": self.m0,
            "m1": self.m1,
            "bound": str(self.bound),
            "ok": parity_bound_check(self),
        }


def parity_counts(rs: ResidueSequence) -> ParityReport:
    r, q = rs.r, rs.q
    rho = rs.rho.astype(np.int64)
    cur, nxt = rho[1:r], rho[2 : r + 1]
    sigma = (cur - nxt) % 2
    m0 = int(np.count_nonzero(sigma == 0))
    # rho[i] lies in I_k = [k r/q, (k+1) r/q) exactly when k = floor(q rho[i] / r)
    k = (q * cur) // r
    if q % 2:
        predicted_zero = k % 2 == 0
    else:
        predicted_zero = cur % 2 == k % 2
    agreement = int(np.count_nonzero(predicted_zero == (sigma == 0)))
    return ParityReport(r=r, q=q, sigma=sigma, m0=m0, m1=(r - 1) - m0, agreement=agreement)


def parity_bound_check(report: ParityReport) -> bool:
    return report.displacement <= report.bound


def s1_distinct_density(table: PartialSumTable, r: int) -> Fraction:
    """Share of [-r, r] hit by the values S(i, 1)."""
    if table.n != 1:
        raise ValueError(f"expected a window-1 table, got n={table.n}")
    return Fraction(int(np.unique(table.values).size), 2 * r + 1)


def parity_obstruction_fraction(table: PartialSumTable, h: int) -> Fraction:
    """Fraction of i with (-1)**S(i, 1) == (-1)**h.

    Values near 1 mean the eigenvalue -1 obstruction is present.
    """
    if table.n != 1:
        raise ValueError(f"expected a window-1 table, got n={table.n}")
    v = table.values
    return Fraction(int(np.count_nonzero(v % 2 == h % 2)), int(v.size))


def parity_rows_csv(reports: Sequence[ParityReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "q", "m0", "m1", "bound", "ok"])
    for rep in reports:
        row = rep.to_row()
        w.writerow([row["r"], row["q"], row["m0"], row["m1"], row["bound"], int(row["ok"])])
    return buf.getvalue()
