"""``ergomix`` command line.

Exit codes: 0 success, 1 a property check failed (the witness is printed
on stderr and recorded in the report), 2 config, resource or I/O error.

CSV schemas, one row per sweep point:

    primroot  prime,q_min,sqrt_ok,ratio4
    spacers   r,q,H,n,max_abs_S,injective
    dist      n_value,count,empirical,theoretical
    build     j,h,r,scheme,H,spacer_total
    mix       m,estimate,baseline,deviation
    parity    r,q,m0,m1,bound,ok
    density   r,density
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

from ergomix import __version__
from ergomix.config import RunConfig, parse_config
from ergomix.errors import ConfigError, ConstructionTooLarge
from ergomix.mixlab import (
    TriangularLaw,
    correlation,
    correlation_sweep,
    parity_bound_check,
    parity_counts,
    parity_obstruction_fraction,
    s1_distinct_density,
    shift_range,
    tv_distance,
)
from ergomix.numtheory import burgess_scan, minimal_primitive_root, primes_in_range, residue_sequence
from ergomix.spacergen import (
    Algebraic,
    Stochastic,
    algebraic_spacers,
    difference_histogram,
    partial_sums,
    stochastic_spacers,
    verify_injectivity,
    verify_range_property,
)
from ergomix.tower import (
    ConstructionParams,
    RankOneWord,
    StageSpec,
    build_word,
    fnv1a64,
    level_measure,
    level_set_indicator,
)

log = logging.getLogger("ergomix")

COMMANDS = ("primroot", "spacers", "dist", "build", "mix", "parity", "density")


@dataclass
class Report:
    command: str
    config: dict
    payload: dict
    rows: list[list] = field(default_factory=list)
    header: list[str] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)
    elapsed: float = 0.0
    version: str = __version__

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0

    def payload_checksum(self) -> str:
        blob = json.dumps(self.payload, sort_keys=True, separators=(",", ":")).encode()
        return f"{fnv1a64(blob):016x}"

    def to_json(self) -> str:
        doc = {
            "command": self.command,
            "version": self.version,
            "config": self.config,
            "payload": self.payload,
            "failures": self.failures,
            "checksum": self.payload_checksum(),
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        w.writerows(self.rows)
        return buf.getvalue()


def _frac(x: Fraction) -> dict:
    return {"exact": str(x), "value": float(x)}


def _require(cfg: RunConfig, section: str):
    value = getattr(cfg, section)
    if value is None:
        raise ConfigError(f"{section}: section required by this command")
    return value


def cmd_primroot(cfg: RunConfig) -> Report:
    sc = _require(cfg, "primroot")
    rep = burgess_scan(sc.lo, sc.hi)
    rows = [[row.prime, row.q_min, int(row.sqrt_bound_ok), repr(row.ratio_fourth_root)] for row in rep]
    payload = {
        "lo": sc.lo,
        "hi": sc.hi,
        "n_primes": rep.n_primes,
        "n_below_sqrt": rep.n_below_sqrt,
        "fraction_below_sqrt": rep.fraction_below_sqrt if rep.rows else None,
        "max_ratio_fourth_root": rep.max_ratio_fourth_root if rep.rows else None,
        "exceptions": [row.prime for row in rep if not row.sqrt_bound_ok],
    }
    return Report("primroot", cfg.echo(), payload, rows, ["prime", "q_min", "sqrt_ok", "ratio4"])


def cmd_spacers(cfg: RunConfig) -> Report:
    sc = _require(cfg, "spacers")
    seq = algebraic_spacers(Algebraic(r=sc.r, q=sc.q, H=sc.H))
    failures = []
    telescoped = int(seq.s[:-1].sum())
    if telescoped != (sc.r - 1) * sc.H:
        failures.append(f"telescoping: sum s(1..r-1) = {telescoped} != {(sc.r - 1) * sc.H}")
    rows = []
    for n in range(1, min(sc.r - 2, sc.n_max) + 1):
        table = partial_sums(seq, n)
        rng = verify_range_property(table, sc.r)
        inj = verify_injectivity(table)
        if not rng.ok:
            failures.append(f"range: n={n}, i={rng.worst_i}, |S|={rng.max_abs} > r={sc.r}")
        if not inj.ok:
            failures.append(f"injectivity: n={n}, S({inj.collision[0]},n) = S({inj.collision[1]},n)")
        rows.append([sc.r, sc.q, sc.H, n, rng.max_abs, int(inj.ok)])
    t1 = partial_sums(seq, 1)
    payload = {
        "r": sc.r,
        "q": sc.q,
        "H": sc.H,
        "windows_checked": len(rows),
        "range_ok": all(row[4] <= sc.r for row in rows),
        "injective": all(row[5] for row in rows),
        "min_spacer": int(seq.s.min()),
        "s1_density": _frac(s1_distinct_density(t1, sc.r)),
        "sequence": seq.to_dict(),
    }
    return Report("spacers", cfg.echo(), payload, rows, ["r", "q", "H", "n", "max_abs_S", "injective"], failures)


def cmd_dist(cfg: RunConfig) -> Report:
    dc = _require(cfg, "dist")
    seq = stochastic_spacers(Stochastic(H=dc.H, seed=cfg.seed), dc.r)
    hist = difference_histogram(seq, dc.N)
    law = TriangularLaw(dc.H)
    tv = tv_distance(hist, law)
    rows = []
    for n in sorted(set(hist.counts) | set(law.support)):
        c = hist.counts.get(n, 0)
        rows.append([n, c, repr(c / hist.total), repr(float(law.mass(n)))])
    failures = []
    if dc.tv_max is not None and tv > Fraction(dc.tv_max):
        failures.append(f"tv distance {float(tv)} > tv_max {dc.tv_max}")
    payload = {
        "H": dc.H,
        "r": dc.r,
        "N": dc.N,
        "seed": cfg.seed,
        "total": hist.total,
        "tv_distance": _frac(tv),
        "histogram": hist.to_dict()["counts"],
    }
    return Report("dist", cfg.echo(), payload, rows, ["n_value", "count", "empirical", "theoretical"], failures)


def _word_rows(word: RankOneWord) -> list[list]:
    rows = []
    for st in word.manifest()["stages"]:
        rows.append([st["j"], st["h"], st.get("r", ""), st.get("scheme", ""), st.get("H", ""), st.get("spacer_total", "")])
    return rows


def cmd_build(cfg: RunConfig) -> Report:
    params = _require(cfg, "construction")
    word = build_word(params)
    manifest = word.manifest()
    manifest["obstruction"] = []
    for summ, seq in zip(word.summaries, word.spacers):
        if seq.scheme == "algebraic":
            frac = parity_obstruction_fraction(partial_sums(seq, 1), summ.h)
            manifest["obstruction"].append({"j": summ.j, "fraction": _frac(frac)})
    return Report("build", cfg.echo(), manifest, _word_rows(word), ["j", "h", "r", "scheme", "H", "spacer_total"])


def _stochastic_twin(params: ConstructionParams) -> ConstructionParams:
    stages = tuple(StageSpec(r=s.r, scheme="stochastic", H=s.r if s.H is None else s.H) for s in params.stages)
    return replace(params, stages=stages)


def _sweep(word: RankOneWord, mc, shifts: list[int]):
    a = level_set_indicator(word, mc.j0, mc.A)
    b = level_set_indicator(word, mc.j0, mc.B)
    desc_a = {"j0": mc.j0, "levels": list(mc.A)}
    desc_b = {"j0": mc.j0, "levels": list(mc.B)}
    rep = correlation_sweep(word, a, b, shifts, desc_a, desc_b)
    failures = []
    mu_a = level_measure(word, mc.j0, mc.A)
    if rep.mu_a != mu_a:
        failures.append(f"indicator measure {rep.mu_a} != level measure {mu_a}")
    if mc.A == mc.B and correlation(word, a, a, 0) != mu_a:
        failures.append("correlation at m=0 differs from mu(A)")
    for m, e in zip(rep.shifts, rep.estimates):
        if not 0 <= e <= 1:
            failures.append(f"estimate outside [0,1] at m={m}")
    out = rep.to_dict()
    out["word_length"] = word.length
    out["checksum"] = f"{word.checksum():016x}"
    return out, failures, rep


def cmd_mix(cfg: RunConfig) -> Report:
    params = _require(cfg, "construction")
    mc = _require(cfg, "mix")
    word = build_word(params)
    if mc.j0 > word.J:
        raise ConfigError(f"mix.j0: reference stage must be <= {word.J}")
    top = word.height(mc.j0 + 1)
    m_min = top if mc.m_min is None else mc.m_min
    m_max = 2 * top if mc.m_max is None else mc.m_max
    stride = max(1, top // 100) if mc.stride is None else mc.stride
    if m_max > word.h // 2:
        raise ConfigError(f"mix.m_max: {m_max} exceeds half the final height ({word.h // 2})")
    for levels, name in ((mc.A, "A"), (mc.B, "B")):
        if any(not 0 <= lv <= word.height(mc.j0) for lv in levels):
            raise ConfigError(f"mix.{name}: levels must lie in [0, {word.height(mc.j0)}]")
    shifts = shift_range(m_min, m_max, stride)
    primary, failures, rep = _sweep(word, mc, shifts)
    payload = {"shifts": {"min": m_min, "max": m_max, "stride": stride}, "primary": primary}
    if mc.compare_stochastic:
        twin = build_word(_stochastic_twin(params))
        if twin.h // 2 >= m_max:
            payload["stochastic"], twin_fail, _ = _sweep(twin, mc, shifts)
            failures += [f"stochastic: {f}" for f in twin_fail]
        else:
            payload["stochastic"] = None
    rows = [line.split(",") for line in rep.to_csv().splitlines()[1:]]
    return Report("mix", cfg.echo(), payload, rows, ["m", "estimate", "baseline", "deviation"], failures)


def cmd_parity(cfg: RunConfig) -> Report:
    sc = _require(cfg, "parity")
    rows, failures = [], []
    n_even = n_odd = 0
    for p in primes_in_range(sc.lo, sc.hi):
        rep = parity_counts(residue_sequence(minimal_primitive_root(p), p))
        ok = parity_bound_check(rep)
        if rep.q % 2:
            n_odd += 1
        else:
            n_even += 1
        if not ok:
            failures.append(f"bound: r={p}, q={rep.q}, ||M0|-|M1|| = {rep.displacement} > {rep.bound}")
        if not rep.characterization_ok:
            failures.append(f"interval characterization: r={p}, agreement {rep.agreement}/{p - 1}")
        rows.append([p, rep.q, rep.m0, rep.m1, str(rep.bound), int(ok)])
    payload = {
        "lo": sc.lo,
        "hi": sc.hi,
        "n_primes": len(rows),
        "n_odd_q": n_odd,
        "n_even_q": n_even,
        "n_bound_ok": sum(row[5] for row in rows),
        "n_failures": len(failures),
    }
    return Report("parity", cfg.echo(), payload, rows, ["r", "q", "m0", "m1", "bound", "ok"], failures)


def cmd_density(cfg: RunConfig) -> Report:
    dc = _require(cfg, "density")
    rows, failures, values = [], [], []
    for r in dc.primes:
        seq = algebraic_spacers(Algebraic.minimal(r))
        d = s1_distinct_density(partial_sums(seq, 1), r)
        if d != Fraction(r - 2, 2 * r + 1):
            failures.append(f"density at r={r} is {d}, expected {r - 2}/{2 * r + 1}")
        if values and d <= values[-1]:
            failures.append(f"density not increasing at r={r}")
        values.append(d)
        rows.append([r, repr(float(d))])
    payload = {"ladder": [{"r": r, "density": _frac(d)} for r, d in zip(dc.primes, values)]}
    return Report("density", cfg.echo(), payload, rows, ["r", "density"], failures)


DISPATCH: dict[str, Callable[[RunConfig], Report]] = {
    "primroot": cmd_primroot,
    "spacers": cmd_spacers,
    "dist": cmd_dist,
    "build": cmd_build,
    "mix": cmd_mix,
    "parity": cmd_parity,
    "density": cmd_density,
}


def run_command(command: str, cfg: RunConfig) -> Report:
    if command not in DISPATCH:
        raise ConfigError(f"unknown command {command!r}")
    start = time.perf_counter()
    report = DISPATCH[command](cfg)
    report.elapsed = time.perf_counter() - start
    return report


def emit_report(report: Report, fmt: str = "json", path: Optional[Path] = None) -> None:
    text = report.to_json() if fmt == "json" else report.to_csv()
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ergomix", description="Rank-one constructions with algebraic spacers.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path, help="JSON config file")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry, e.g. --set parity.hi=1000")
    p.add_argument("--out", type=Path, help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = parse_config(args.config, overrides=args.set, seed=args.seed)
        report = run_command(args.command, cfg)
    except (ConfigError, ConstructionTooLarge, MemoryError) as exc:
        print(f"ergomix: error: {exc}", file=sys.stderr)
        return 2
    log.info("%s finished in %.3f s", args.command, report.elapsed)
    try:
        emit_report(report, args.format, args.out)
    except OSError as exc:
        print(f"ergomix: error: cannot write report: {exc}", file=sys.stderr)
        return 2
    for msg in report.failures[:20]:
        print(f"ergomix: check failed: {msg}", file=sys.stderr)
    if len(report.failures) > 20:
        print(f"ergomix: ... {len(report.failures) - 20} more failures", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
