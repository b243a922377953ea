"""
Command-line front end: ``polarrabi <verb> [--preset NAME | --config FILE] [--out PATH]``.

Verbs: ``spectrum``, ``rates``, ``sweep``, ``crossings``, ``validate``.
Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 validity breach (only with ``--strict`` or ``"strict": true``).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__, tables
from .config import MODES, PRESETS, RunConfig, build_config, load_config
from .emission import (GROUPS, candidate_finals, enumerate_channels, group_of, group_rates, lamb_shift,
                       spectrum, total_rate)
from .errors import (AmbiguousMatch, ConfigError, CutoffTooSmall, DegenerateChannelsWarning, DivergentShift,
                     NearDegeneracy, NoCrossingFound, PolarRabiError, SolverFailure)
from .model import ModelParams, StateLabel, canonical, jc_crossing_scan, jc_energy, labels_between
from .oracle import build_hamiltonian, exact_eigensystem, match_and_compare
from .perturbation import state_norm_or_inf
from .units import coupling_from_dipole  # noqa: F401  (re-exported helper)

log = logging.getLogger("polarrabi")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_BREACH = 0, 1, 2, 3
NUMERICAL_ERRORS = (NearDegeneracy, SolverFailure, CutoffTooSmall, AmbiguousMatch, DivergentShift, NoCrossingFound)


@dataclass
class RunResult:
    paths: List[Path] = field(default_factory=list)
    breach: bool = False
    notes: List[str] = field(default_factory=list)


def _label_tag(label: StateLabel) -> str:
    return f"{label.n}{'p' if label.s > 0 else 'm'}"


def _out_paths(out: Path, initials: Sequence[StateLabel]) -> List[Path]:
    if len(initials) == 1:
        return [out]
    return [out.with_name(f"{out.stem}_{_label_tag(lab)}{out.suffix}") for lab in initials]


def _base_metadata(cfg: RunConfig, **extra) -> Dict:
    meta = {"generator": f"polarrabi {__version__}", "mode": cfg.mode}
    if cfg.preset:
        meta["preset"] = cfg.preset
    meta["config"] = cfg.to_dict()
    meta.update(extra)
    return meta


def _channel_key(final: StateLabel) -> str:
    return f"{final.n}_{'+' if final.s > 0 else '-'}"


def _channels_with_warnings(initial, p, ff, gamma):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateChannelsWarning)
        channels = enumerate_channels(initial, p, ff, gamma)
    notes = [str(w.message) for w in caught if issubclass(w.category, DegenerateChannelsWarning)]
    for n in notes:
        log.warning(n)
    return channels, notes


def _shift(cfg: RunConfig, channels, ff) -> tuple:
    """Line shift and a note on how it was chosen."""
    if not cfg.lamb_shift:
        return 0.0, "Delta = 0 (line shift not requested)"
    try:
        return lamb_shift(channels, ff, cfg.base_rate), "Delta from principal-value integral"
    except DivergentShift as exc:
        log.warning("line shift set to 0: %s", exc)
        return 0.0, f"Delta = 0 ({exc})"


def _norm_breach(cfg: RunConfig, label: StateLabel, p: ModelParams) -> tuple:
    norm, broken = state_norm_or_inf(label, p)
    tol = float(cfg.sweep.get("norm_tolerance", 0.01))
    return norm, broken or abs(norm - 1.0) > tol


def run_spectrum(cfg: RunConfig, out: Path, fmt: str = "table") -> RunResult:
    """Emission spectrum table per initial state: omega, S_total, S_norm, one column per channel."""
    res = RunResult()
    grid = cfg.grid_array()
    p = cfg.params
    for initial, path in zip(cfg.initial, _out_paths(out, cfg.initial)):
        ff = cfg.form_factor_for(p, initial)
        channels, notes = _channels_with_warnings(initial, p, ff, cfg.base_rate)
        shift, shift_note = _shift(cfg, channels, ff)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateChannelsWarning)
            spec = spectrum(initial, p, ff, cfg.base_rate, grid)
        if shift:
            from .emission import lorentzian_lines
            lines = lorentzian_lines(grid, channels, ff, cfg.base_rate, shift)
            spec.values = lines.sum(axis=0)
            spec.per_channel = {c.key: lines[j] for j, c in enumerate(channels)}
            spec.shift = shift
        norm, breach = _norm_breach(cfg, initial, p)
        res.breach |= breach or bool(notes)
        keys = [c.key for c in channels]
        columns = ["omega", "S_total", "S_norm"] + [f"S_{k}" for k in keys]
        norm_vals = spec.normalized
        rows = [[grid[i], spec.values[i], norm_vals[i]] + [spec.per_channel[k][i] for k in keys]
                for i in range(grid.size)]
        meta = _base_metadata(
            cfg, initial=str(canonical(initial, p)), form_factor=ff.describe(), base_rate=cfg.base_rate,
            delta=spec.shift, delta_choice=shift_note, total_rate=spec.total_rate, state_norm=norm,
            channels=[{"final": str(c.final), "group": c.group, "frequency": c.frequency, "a_sq": c.a_sq,
                       "rate": c.rate} for c in channels],
            warnings=notes)
        res.paths.append(tables.write(path, columns, rows, meta, fmt))
    return res


def run_rates(cfg: RunConfig, out: Path, fmt: str = "table") -> RunResult:
    """Channel table per initial state: final, group, frequency, a_sq, rate, branching ratio."""
    res = RunResult()
    p = cfg.params
    for initial, path in zip(cfg.initial, _out_paths(out, cfg.initial)):
        ff = cfg.form_factor_for(p, initial)
        channels, notes = _channels_with_warnings(initial, p, ff, cfg.base_rate)
        shift, shift_note = _shift(cfg, channels, ff)
        tot = total_rate(channels)
        norm, breach = _norm_breach(cfg, initial, p)
        res.breach |= breach or bool(notes)
        columns = ["initial", "final", "group", "frequency", "a_sq", "form_factor", "rate", "branching"]
        rows = [[str(c.initial), str(c.final), c.group, c.frequency, c.a_sq, float(ff(c.frequency)), c.rate,
                 c.rate / tot if tot > 0 else 0.0] for c in channels]
        groups = group_rates(channels)
        meta = _base_metadata(cfg, initial=str(canonical(initial, p)), form_factor=ff.describe(),
                              base_rate=cfg.base_rate, total_rate=tot,
                              **{f"rate_{g}": groups[g] for g in GROUPS},
                              delta=shift, delta_choice=shift_note, state_norm=norm, warnings=notes)
        res.paths.append(tables.write(path, columns, rows, meta, fmt))
    return res


def _sweep_row(args):
    cfg, initial, finals, g_R, g_S = args
    p = cfg.params.with_couplings(g_R=g_R, g_S=g_S)
    norm, broken = state_norm_or_inf(initial, p)
    nan = float("nan")
    if broken:
        return [g_R, g_S] + [nan] * len(finals) + [nan] * (len(GROUPS) + 1) + [norm, 1]
    try:
        ff = cfg.form_factor_for(p, initial)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateChannelsWarning)
            channels = enumerate_channels(initial, p, ff, cfg.base_rate)
    except NearDegeneracy:
        return [g_R, g_S] + [nan] * len(finals) + [nan] * (len(GROUPS) + 1) + [math.inf, 1]
    by_final = {c.final: c.rate for c in channels}
    groups = group_rates(channels)
    flag = int(abs(norm - 1.0) > float(cfg.sweep.get("norm_tolerance", 0.01)))
    return ([g_R, g_S] + [by_final.get(f, 0.0) for f in finals] + [groups[g] for g in GROUPS]
            + [total_rate(channels), norm, flag])


def _pool_map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def run_sweep(cfg: RunConfig, out: Path, fmt: str = "table") -> RunResult:
    """Per-channel and per-group rates over a coupling grid, for each g_S/g_R ratio."""
    res = RunResult()
    values = cfg.sweep_values()
    variable = cfg.sweep.get("variable", "g_R")
    if variable not in ("g_R", "g_S"):
        raise ConfigError("sweep.variable must be 'g_R' or 'g_S'")
    warn_above = float(cfg.sweep.get("warn_above", 0.1))
    if variable == "g_R" and values.max() > warn_above * cfg.params.omega_c:
        msg = f"sweep extends above g_R = {warn_above} omega_c, outside the perturbative regime"
        log.warning(msg)
        res.notes.append(msg)
    for initial, path in zip(cfg.initial, _out_paths(out, cfg.initial)):
        initial = canonical(initial, cfg.params)
        finals = candidate_finals(initial, cfg.params)
        if variable == "g_R":
            points = [(float(g), float(r) * float(g)) for r in cfg.sweep["ratios"] for g in values]
        else:
            points = [(cfg.params.g_R, float(g)) for g in values]
        rows = _pool_map(_sweep_row, [(cfg, initial, finals, gr, gs) for gr, gs in points], cfg.jobs)
        res.breach |= any(r[-1] for r in rows)
        columns = (["g_R", "g_S"] + [f"Gamma_{_channel_key(f)}" for f in finals]
                   + [f"Gamma_{g}" for g in GROUPS] + ["Gamma_total", "state_norm", "breakdown_flag"])
        meta = _base_metadata(cfg, initial=str(initial), base_rate=cfg.base_rate,
                              channel_groups={_channel_key(f): group_of(initial, f) for f in finals},
                              form_factor=cfg.form_factor, warnings=res.notes)
        res.paths.append(tables.write(path, columns, rows, meta, fmt))
    return res


def run_crossings(cfg: RunConfig, out: Path, fmt: str = "table") -> RunResult:
    """JC ladder energies versus g_R and the first level crossing."""
    res = RunResult()
    c = cfg.crossings
    p = cfg.params
    n_min, n_max = int(c["n_min"]), int(c["n_max"])
    try:
        first = jc_crossing_scan(p, (float(c["g_min"]), float(c["g_max"])), n_max=n_max, n_min=n_min,
                                 points=int(c["points"]))
    except NoCrossingFound as exc:
        first = None
        res.notes.append(str(exc))
    labels = list(labels_between(n_min, n_max, p))
    g = np.linspace(float(c["g_min"]), float(c["g_max"]), int(c["table_points"]))
    rows = [[x] + [jc_energy(lab, p.with_couplings(g_R=float(x))) for lab in labels] for x in g]
    columns = ["g_R"] + [f"E_{lab.n}_{'+' if lab.s > 0 else '-'}" for lab in labels]
    meta = _base_metadata(cfg, first_crossing="none" if first is None else first, warnings=res.notes)
    res.paths.append(tables.write(out, columns, rows, meta, fmt))
    return res


def _fit_slope(x, y) -> float:
    x, y = np.asarray(x, float), np.abs(np.asarray(y, float))
    ok = (x > 0) & (y > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def run_validate(cfg: RunConfig, out: Path, fmt: str = "table") -> RunResult:
    """
    State-norm curve plus oracle comparisons.

    Writes the norm curve to ``out`` and the exact-vs-perturbative comparison to
    ``<stem>_oracle<suffix>``.
    """
    res = RunResult()
    v = cfg.validate
    p0 = cfg.params
    ratio = p0.g_S / p0.g_R if p0.g_R > 0 else 1.0
    tol = float(cfg.sweep.get("norm_tolerance", 0.01))
    warn_above = float(cfg.sweep.get("warn_above", 0.1))
    norm_labels = [StateLabel.parse(x) for x in v["norm_labels"]]
    g_norm = np.linspace(float(v["norm_max"]) / int(v["norm_points"]), float(v["norm_max"]), int(v["norm_points"]))
    norm_rows = []
    first_breakdown = {}
    for g in g_norm:
        p = p0.with_couplings(g_R=float(g), g_S=ratio * float(g))
        row = [float(g), ratio * float(g)]
        for lab in norm_labels:
            norm, broken = state_norm_or_inf(lab, p)
            flag = broken or abs(norm - 1.0) > tol
            if flag and lab not in first_breakdown:
                first_breakdown[lab] = float(g)
            row += [norm, int(flag)]
        norm_rows.append(row)
    norm_cols = ["g_R", "g_S"]
    for lab in norm_labels:
        norm_cols += [f"norm_{_label_tag(lab)}", f"breakdown_{_label_tag(lab)}"]
    res.breach |= any(g < warn_above for g in first_breakdown.values())

    cutoff = int(v["fock_cutoff"])
    finals = [StateLabel.parse(x) for x in v["finals"]]
    comp_rows = []
    errors: Dict[StateLabel, List[tuple]] = {}
    for g in v["g_values"]:
        p = p0.with_couplings(g_R=float(g), g_S=ratio * float(g))
        eigs = exact_eigensystem(build_hamiltonian(p, cutoff, max_manifold=max(l.n for l in cfg.initial)))
        eigs2 = exact_eigensystem(build_hamiltonian(p, 2 * cutoff))
        reports = match_and_compare(eigs, p, cfg.initial, cutoff, finals={canonical(l, p): finals for l in cfg.initial})
        reports2 = match_and_compare(eigs2, p, cfg.initial, 2 * cutoff,
                                     finals={canonical(l, p): [] for l in cfg.initial})
        for rep, rep2 in zip(reports, reports2):
            conv = abs(rep.exact_energy - rep2.exact_energy)
            if conv > 1e-8:
                res.breach = True
                res.notes.append(f"cutoff not converged at g={g}: shift {conv:.2e}")
            errors.setdefault(rep.label, []).append((float(g), rep.energy_error))
            for f in finals:
                ex, pt = rep.a_sq.get(canonical(f, p), (float("nan"), float("nan")))
                comp_rows.append([float(g), ratio * float(g), str(rep.label), str(canonical(f, p)), rep.exact_energy,
                                  rep.perturbative_energy, rep.energy_error, rep.overlap_deficit, conv, ex, pt,
                                  (pt - ex) / ex if ex else float("nan")])
    slopes = {str(lab): _fit_slope(*zip(*pts)) for lab, pts in errors.items()}
    comp_cols = ["g_R", "g_S", "initial", "final", "E_exact", "E_perturbative", "dE", "overlap_deficit",
                 "cutoff_shift", "a_sq_exact", "a_sq_perturbative", "a_sq_rel_diff"]
    meta = _base_metadata(cfg, first_breakdown={str(k): val for k, val in first_breakdown.items()},
                          energy_error_slope=slopes, fock_cutoff=cutoff, warnings=res.notes)
    res.paths.append(tables.write(out, norm_cols, norm_rows, meta, fmt))
    oracle_path = out.with_name(f"{out.stem}_oracle{out.suffix}")
    res.paths.append(tables.write(oracle_path, comp_cols, comp_rows, meta, fmt))
    return res


RUNNERS = {"spectrum": run_spectrum, "rates": run_rates, "sweep": run_sweep, "crossings": run_crossings,
           "validate": run_validate}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polarrabi", description=__doc__.split("\n\n")[0])
    ap.add_argument("verb", choices=MODES)
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--preset", help=f"one of: {', '.join(sorted(PRESETS))}")
    src.add_argument("--config", type=Path, help="JSON run configuration")
    ap.add_argument("--out", type=Path, help="output path (default: <preset or verb>.<tsv|json>)")
    ap.add_argument("--format", choices=("table", "json"), default="table")
    ap.add_argument("--strict", action="store_true", help="exit 3 on validity breaches")
    ap.add_argument("--jobs", type=int, help="worker processes for sweeps")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format="[%(name)s] %(levelname)s %(message)s",
                        level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.config is not None:
            cfg = load_config(args.config)
        else:
            cfg = build_config({}, preset=args.preset)
        if cfg.mode != args.verb:
            # spectrum and rates read the same inputs; other presets are verb-specific
            interchangeable = {cfg.mode, args.verb} <= {"spectrum", "rates"}
            if cfg.preset and not interchangeable:
                raise ConfigError(f"preset {cfg.preset!r} is a {cfg.mode!r} run, not {args.verb!r}")
            cfg = build_config({**{k: val for k, val in cfg.raw.items() if k != "preset"}, "mode": args.verb},
                               preset=cfg.preset)
        if args.strict:
            cfg.strict = True
        if args.jobs:
            cfg.jobs = args.jobs
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    suffix = ".json" if args.format == "json" else ".tsv"
    out = args.out or Path(f"{cfg.preset or cfg.mode}{suffix}")
    try:
        result = RUNNERS[cfg.mode](cfg, out, args.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PolarRabiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in result.paths:
        print(path)
    if cfg.strict and result.breach:
        print("validity breach (strict mode)", file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
