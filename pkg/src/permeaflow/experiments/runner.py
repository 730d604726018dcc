"""Time loops for the catalogued cases and the refinement batteries."""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ..energy import ConservationTracker, EnergyReport, total_energy
from ..grid import Grid, make_grid
from ..io import append_energy_log, write_manifest, write_snapshot
from ..scheme import SolverConfig, State, StepStats, advance, initial_state
from . import reports as rp
from .cases import CaseKind, CaseSpec, build_case, initial_fields, start_time
from .convergence import RateTable, rate_table
from .exact import exact_sharp_limit_1d, exact_two_interface, gaussian_seed

log = logging.getLogger(__name__)

#: per-step tolerance on the modified energy increase
ENERGY_TOL = 1e-10
#: divergence bound after every projection
DIV_TOL = 1e-8
#: relative drift bound on the phi volume and the c mass
DRIFT_TOL = 1e-8


@dataclass
class RunResult:
    spec: CaseSpec
    cfg: SolverConfig
    grid: Grid
    state: State
    energies: list[tuple[int, float, EnergyReport]] = field(default_factory=list)
    report: dict = field(default_factory=dict)
    artifacts: list[Path] = field(default_factory=list)

    @property
    def checks(self) -> dict[str, bool]:
        return self.report.get("checks", {})

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def e_mod(self) -> np.ndarray:
        return np.array([e.e_mod for _, _, e in self.energies])


class _DropletWatch:
    """Component count, merge time and per-droplet plateaus of a two-drop run."""

    def __init__(self, grid: Grid, spec: CaseSpec):
        self.grid = grid
        self.spec = spec
        self.merge_time: float | None = None
        self.merge_step: int | None = None
        self.pre_merge: list[float] = []
        self.counts: list[int] = []

    def update(self, state: State) -> None:
        labels, n = rp.label_droplets(self.grid, state.phi, self.spec.bc)
        self.counts.append(n)
        if n >= 2 and self.merge_time is None:
            self.pre_merge = [rp.interior_stats(state.phi, state.c, labels == k)[0] for k in range(1, n + 1)]
        if n == 1 and self.merge_time is None and self.pre_merge:
            self.merge_time, self.merge_step = state.t, state.n


def run_case(spec: CaseSpec, cfg: SolverConfig | None = None, out_dir=None,
             progress: Callable[[State, StepStats], None] | None = None) -> RunResult:
    """Run ``spec`` to its end time and compute the case report.

    The time step is ``spec.dt`` (``cfg.dt`` is replaced).  With ``out_dir``
    the energy log, snapshots every ``spec.output_every`` steps (and at the
    end), ``report.json`` and the manifest are written there.
    """
    cfg = (cfg or SolverConfig()).with_(dt=spec.dt)
    grid = make_grid(spec.grid)
    bc, params = spec.bc, spec.params
    phi0, c0, vel0 = initial_fields(spec, grid)
    state = initial_state(grid, phi0, c0, vel0, params, bc)
    state.t = start_time(spec)
    out = Path(out_dir) if out_dir is not None else None
    result = RunResult(spec, cfg, grid, state)
    energy_path = out / "energy.csv" if out else None

    def record(s: State):
        rep = total_energy(grid, s, params, cfg.dt, bc)
        result.energies.append((s.n, s.t, rep))
        if energy_path is not None:
            append_energy_log(rep, s.t, s.n, energy_path)

    def snapshot(s: State):
        if out is not None:
            result.artifacts.extend(write_snapshot(grid, s, out / f"snapshot_{s.n:06d}"))

    if energy_path is not None and energy_path.exists():
        energy_path.unlink()
    record(state)
    if spec.output_every:
        snapshot(state)
    tracker = ConservationTracker(grid, state)
    steady = rp.SteadyMonitor()
    watch = _DropletWatch(grid, spec) if spec.kind is CaseKind.TWO_DROPLETS else None
    if watch:
        watch.update(state)
    max_div = max_gauss = 0.0
    max_increase = -math.inf
    neg_c = 0
    t0 = time.perf_counter()
    for _ in range(spec.n_steps):
        stats = StepStats()
        new = advance(grid, state, params, cfg, bc, frozen_interface=spec.frozen_interface, stats=stats)
        steady.update(state.c, new.c, cfg.dt)
        state = new
        tracker.update(state)
        record(state)
        max_increase = max(max_increase, result.energies[-1][2].e_mod - result.energies[-2][2].e_mod)
        if not spec.frozen_interface:
            max_div = max(max_div, stats.div_next)
            max_gauss = max(max_gauss, stats.gauss_iters)
        neg_c += stats.negative_c
        if watch:
            watch.update(state)
        if spec.output_every and state.n % spec.output_every == 0:
            snapshot(state)
        if progress is not None:
            progress(state, stats)
    if out is not None and not (spec.output_every and state.n % spec.output_every == 0):
        snapshot(state)
    result.state = state
    dv, dm = tracker.relative()
    report = {
        "case": spec.kind.value,
        "steps": state.n,
        "t_end": state.t,
        "dt": cfg.dt,
        "wall_time": time.perf_counter() - t0,
        "volume_drift": dv,
        "mass_drift": dm,
        "max_energy_increase": max_increase,
        "steady_rate": steady.rate,
        "steady": steady.steady,
        "negative_c_cells": neg_c,
    }
    if not spec.frozen_interface:
        report.update(max_div=max_div, max_gauss_iters=int(max_gauss))
    report["checks"] = {}
    if not spec.frozen_interface:
        report["checks"]["projection"] = max_div <= DIV_TOL
    _case_report(result, report, steady, watch)
    result.report = report
    if out is not None:
        path = out / "report.json"
        path.write_text(json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        result.artifacts.append(path)
        if energy_path is not None:
            result.artifacts.append(energy_path)
        result.artifacts.append(write_manifest(out, list(out.iterdir())))
    return result


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _case_report(result: RunResult, report: dict, steady: rp.SteadyMonitor, watch: _DropletWatch | None) -> None:
    spec, grid, state = result.spec, result.grid, result.state
    params, bc = spec.params, spec.bc
    checks = report["checks"]
    kind = spec.kind
    if kind is CaseKind.SHARP_LIMIT_1D:
        x = grid.xc
        x0 = float(spec.option("x0"))
        mask = rp.bulk_mask(x, [x0], params.epsilon)
        err = np.abs(state.c[:, 0] - exact_sharp_limit_1d(x))
        report.update(epsilon=params.epsilon, nx=grid.nx, bulk_linf_error=float(np.max(err[mask])))
        checks["steady"] = steady.steady
    elif kind is CaseKind.TWO_INTERFACE_1D:
        x = grid.xc
        xs = [float(spec.option("x1")), float(spec.option("x2"))]
        mask = rp.bulk_mask(x, xs, params.epsilon)
        err = np.abs(state.c[:, 0] - exact_two_interface(x))
        laws = rp.membrane_laws(grid, state, params, bc, xs)
        spreads = rp.bulk_flux_spread(grid, state, params, bc, xs)
        report.update(
            bulk_linf_error=float(np.max(err[mask])),
            flux_law=[{"x": m.position, "jump": m.jump, "flux": m.flux, "ratio": m.ratio} for m in laws],
            bulk_flux_spread=spreads,
        )
        checks["steady"] = steady.steady
        checks["bulk_error"] = report["bulk_linf_error"] <= 0.02
        checks["flux_law"] = all(abs(m.ratio - 1.0) <= 0.05 for m in laws)
        checks["bulk_flux_constant"] = max(spreads) <= 0.01
    elif kind is CaseKind.GAUSSIAN_2D:
        X, Y = grid.cell_centers()
        center = tuple(spec.option("center"))
        ref = gaussian_seed(X, Y, state.t, 1.0 / params.Pe, center)
        inside = np.hypot(X - center[0], Y - center[1]) < float(spec.option("radius")) - rp.BULK_BAND * params.epsilon
        report.update(
            peak=float(state.c.max()),
            kernel_rel_linf=float(np.max(np.abs(state.c - ref)[inside]) / np.max(ref)),
        )
        checks["mass"] = report["mass_drift"] <= DRIFT_TOL
    elif kind in (CaseKind.CONVERGENCE_2D, CaseKind.ENERGY_STABILITY):
        checks["energy"] = report["max_energy_increase"] <= ENERGY_TOL
        checks["volume"] = report["volume_drift"] <= DRIFT_TOL
        checks["mass"] = report["mass_drift"] <= DRIFT_TOL
    elif kind is CaseKind.SHEAR_DROP:
        mean, peak = rp.interface_flux(grid, state, params, bc)
        im, isd, irange = rp.interior_stats(state.phi, state.c)
        report.update(
            K=params.K,
            interface_flux_mean=mean,
            interface_flux_peak=peak,
            interior_mean=im,
            interior_std=isd,
            interior_range=irange,
        )
        if spec.option("c_bc") == "dirichlet":
            report["linear_profile_deviation"] = rp.linear_profile_deviation(
                grid, state.c, float(spec.option("c_bottom")), float(spec.option("c_top")))
        else:
            checks["mass"] = report["mass_drift"] <= DRIFT_TOL
        checks["volume"] = report["volume_drift"] <= DRIFT_TOL
    elif kind is CaseKind.TWO_DROPLETS:
        im, isd, irange = rp.interior_stats(state.phi, state.c)
        pre = watch.pre_merge if watch else []
        report.update(
            merge_time=watch.merge_time,
            merge_step=watch.merge_step,
            droplets_final=watch.counts[-1],
            pre_merge_plateaus=pre,
            interior_mean=im,
            interior_std=isd,
            interior_range=irange,
        )
        gap = abs(pre[0] - pre[1]) if len(pre) >= 2 else math.nan
        report["pre_merge_gap"] = gap
        checks["merge_window"] = watch.merge_time is not None and 1.0 <= watch.merge_time <= 1.5
        checks["single_droplet"] = watch.counts[-1] == 1
        checks["single_plateau"] = bool(np.isfinite(gap) and isd <= 0.1 * gap)
        checks["volume"] = report["volume_drift"] <= DRIFT_TOL


# ---------------------------------------------------------------------------
# batteries


CONVERGENCE_VARIABLES = ("phi", "c", "u", "v", "p")


def _fields(state: State) -> dict:
    from ..grid import FaceVectorField

    return {"phi": state.phi, "c": state.c, "p": state.p,
            "u": FaceVectorField(state.vel.u, np.zeros_like(state.vel.v)),
            "v": FaceVectorField(np.zeros_like(state.vel.u), state.vel.v)}


def run_convergence(levels: Sequence[int] = (16, 32, 64, 128), cfg: SolverConfig | None = None,
                    base: CaseSpec | None = None,
                    progress: Callable[[int, RunResult], None] | None = None) -> tuple[RateTable, list[RunResult]]:
    """Cauchy-error battery over successively halved grids."""
    levels = list(levels)
    for a, b in zip(levels, levels[1:]):
        if b != 2 * a:
            from ..grid import ConfigurationError

            raise ConfigurationError(f"grid levels must double: {a} -> {b}")
    base = base or build_case(CaseKind.CONVERGENCE_2D)
    results = []
    for n in levels:
        spec = base.with_(grid=base.grid.__class__(n, n, base.grid.x_min, base.grid.x_max,
                                                   base.grid.y_min, base.grid.y_max))
        res = run_case(spec, cfg)
        results.append(res)
        if progress is not None:
            progress(n, res)
    table = rate_table([(r.grid, _fields(r.state)) for r in results], CONVERGENCE_VARIABLES)
    return table, results


def energy_dts(ks: Sequence[int] = range(9), dt0: float = 0.1) -> list[float]:
    return [dt0 / 2**k for k in ks]


def run_energy_battery(dts: Sequence[float], base: CaseSpec | None = None, cfg: SolverConfig | None = None,
                       min_steps: int = 10,
                       progress: Callable[[float, RunResult], None] | None = None) -> list[RunResult]:
    """One EnergyStability run per ``dt`` over ``max(t_end, min_steps * dt)``."""
    base = base or build_case(CaseKind.ENERGY_STABILITY)
    out = []
    for dt in dts:
        spec = base.with_(dt=dt, t_end=max(base.t_end, min_steps * dt))
        res = run_case(spec, cfg)
        out.append(res)
        if progress is not None:
            progress(dt, res)
    return out


def run_limits(epsilons: Sequence[float] = (0.04, 0.02, 0.01), base: CaseSpec | None = None,
               cfg: SolverConfig | None = None, refine: bool = True) -> list[RunResult]:
    """Sharp-limit sweep.

    With ``refine`` each epsilon runs on :func:`~.cases.grid_for_epsilon`
    cells; otherwise every run keeps ``base.grid``.
    """
    from .cases import grid_for_epsilon

    base = base or build_case(CaseKind.SHARP_LIMIT_1D)
    out = []
    for eps in epsilons:
        grid = base.grid.__class__(grid_for_epsilon(eps), 1) if refine else base.grid
        spec = base.with_(params=base.params.with_(epsilon=eps), grid=grid)
        out.append(run_case(spec, cfg))
    return out
