"""INI run configuration: parsing, validation and the effective-config echo.

One section named after a case kind (``[ShearDrop]``, ``[Convergence2D]``,
...) holds case, physical and solver keys.  Optional ``[solver]`` and
``[run]`` sections hold solver knobs and driver settings.  Numbers accept
fractions (``h = 1/64``).
"""

from __future__ import annotations

import configparser
import enum
import re
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from typing import Any

from .experiments.cases import _DEFAULT_OPTIONS, CaseKind, CaseSpec, build_case
from .grid import ConfigurationError
from .model import FluxLaw, PhysicalParams
from .scheme import SolverConfig


class ParseError(ConfigurationError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass(frozen=True)
class RunConfig:
    case: CaseSpec
    solver: SolverConfig = SolverConfig()
    out_dir: str | None = None
    seed: int = 0
    levels: tuple[int, ...] = (16, 32, 64, 128)
    ks: tuple[int, ...] = tuple(range(9))
    epsilons: tuple[float, ...] = (0.04, 0.02, 0.01)
    min_steps: int = 10

    @property
    def snapshot_every(self) -> int:
        return self.case.output_every


_CASE_KEYS = ("n", "nx", "ny", "h", "dt", "t_end", "output_every", "frozen_interface")
_PARAM_KEYS = tuple(f.name for f in fields(PhysicalParams))
_SOLVER_KEYS = tuple(f.name for f in fields(SolverConfig) if f.name != "dt")
_RUN_KEYS = ("out", "seed", "levels", "ks", "epsilons", "min_steps")
_ALIASES = {"m": "mobility", "d+": "D_plus", "d-": "D_minus"}
_INT_KEYS = {"n", "nx", "ny", "output_every", "seed", "min_steps", "gauss_max_iters", "lin_max_iters",
             "newton_max_iters"}


def _canonical(key: str, allowed) -> str | None:
    low = key.strip().lower()
    low = _ALIASES.get(low, low).lower()
    for name in allowed:
        if name.lower() == low:
            return name
    return None


def _number(text: str) -> float:
    text = text.strip()
    if "/" in text:
        return float(Fraction(text.replace(" ", "")))
    return float(text)


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _int(text: str) -> int:
    val = _number(text)
    if val != int(val):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(val)


def _coerce_option(text: str, default: Any):
    if isinstance(default, str):
        return text.strip()
    if isinstance(default, tuple) and default and isinstance(default[0], tuple):
        return tuple(tuple(_number(v) for v in part.split(",")) for part in text.split(";"))
    if isinstance(default, tuple):
        return tuple(_number(v) for v in text.split(","))
    return _number(text)


def _line_numbers(text: str) -> dict[tuple[str, str], int]:
    """``(section, lowercased key) -> line`` by a plain scan of the document."""
    out = {}
    section = None
    for k, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"\[(.+)\]$", line)
        if m:
            section = m.group(1).strip()
            out[(section, "")] = k
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            out.setdefault((section, m.group(1).strip().lower()), k)
    return out


def parse_config(text: str) -> RunConfig:
    """Parse and validate a run configuration document.

    Raises :class:`ParseError` naming the line and key for unknown keys,
    malformed values and parameter invariant violations.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",), strict=True)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ParseError(str(exc).splitlines()[0], line=line) from exc
    lines = _line_numbers(text)
    kinds = {k.value.lower(): k for k in CaseKind}
    case_sections = [s for s in cp.sections() if s.lower() in kinds]
    for s in cp.sections():
        if s.lower() not in kinds and s.lower() not in ("solver", "run"):
            raise ParseError(f"unknown section [{s}]; expected a case kind, [solver] or [run]",
                             line=lines.get((s, "")))
    if len(case_sections) != 1:
        raise ParseError(f"exactly one case section is required, found {len(case_sections)}")
    section = case_sections[0]
    kind = kinds[section.lower()]
    opt_defaults = _DEFAULT_OPTIONS[kind]

    case_kw: dict[str, Any] = {}
    param_kw: dict[str, Any] = {}
    solver_kw: dict[str, Any] = {}
    run_kw: dict[str, Any] = {}
    grid_kw: dict[str, Any] = {}

    def where(sec, key):
        return lines.get((sec, key.lower()))

    for sec in cp.sections():
        scope = "case" if sec == section else sec.lower()
        for raw_key, raw_val in cp.items(sec):
            line = where(sec, raw_key)
            try:
                if scope == "case" and (name := _canonical(raw_key, _CASE_KEYS)):
                    if name in ("n", "nx", "ny", "output_every"):
                        val = _int(raw_val)
                    elif name == "frozen_interface":
                        val = _bool(raw_val)
                    else:
                        val = _number(raw_val)
                    (grid_kw if name in ("n", "nx", "ny", "h") else case_kw)[name] = val
                elif scope == "case" and (name := _canonical(raw_key, _PARAM_KEYS)):
                    param_kw[name] = raw_val.strip() if name == "q_law" else _number(raw_val)
                elif scope == "case" and (name := _canonical(raw_key, tuple(opt_defaults))):
                    case_kw[name] = _coerce_option(raw_val, opt_defaults[name])
                elif scope in ("case", "solver") and (name := _canonical(raw_key, _SOLVER_KEYS)):
                    if name in _INT_KEYS:
                        solver_kw[name] = _int(raw_val)
                    elif name in ("linear_solver", "step3_mode"):
                        solver_kw[name] = raw_val.strip()
                    else:
                        solver_kw[name] = _number(raw_val)
                elif scope == "run" and (name := _canonical(raw_key, _RUN_KEYS)):
                    if name == "out":
                        run_kw["out_dir"] = raw_val.strip() or None
                    elif name in ("seed", "min_steps"):
                        run_kw[name] = _int(raw_val)
                    elif name in ("levels", "ks"):
                        run_kw[name] = tuple(_int(v) for v in raw_val.split(","))
                    else:
                        run_kw[name] = tuple(_number(v) for v in raw_val.split(","))
                else:
                    raise ParseError(f"unknown key in [{sec}]", key=raw_key, line=line)
            except ParseError:
                raise
            except (ValueError, ZeroDivisionError) as exc:
                raise ParseError(f"malformed value {raw_val!r} ({exc})", key=raw_key, line=line) from exc

    # physical invariants first, before anything is allocated
    for name, val in param_kw.items():
        try:
            if name == "q_law":
                FluxLaw(val)
            else:
                PhysicalParams(**{name: val})
        except ValueError as exc:
            raise ParseError(str(exc), key=name, line=where(section, name)) from exc
    try:
        solver = SolverConfig(**solver_kw)
    except ValueError as exc:
        key = next(iter(solver_kw), None)
        for k in solver_kw:
            try:
                SolverConfig(**{k: solver_kw[k]})
            except ValueError:
                key = k
                break
        raise ParseError(str(exc), key=key, line=where("solver", key) or where(section, key)) from exc

    try:
        spec = build_case(kind, **param_kw, **{k: v for k, v in case_kw.items()},
                          **{k: grid_kw[k] for k in ("n", "h") if k in grid_kw})
        if "nx" in grid_kw or "ny" in grid_kw:
            g = spec.grid
            spec = spec.with_(grid=replace(g, nx=grid_kw.get("nx", g.nx), ny=grid_kw.get("ny", g.ny)))
    except ConfigurationError as exc:
        raise ParseError(str(exc), line=lines.get((section, ""))) from exc
    except ValueError as exc:
        raise ParseError(str(exc), line=lines.get((section, ""))) from exc

    try:
        rc = RunConfig(spec, solver.with_(dt=spec.dt), **run_kw)
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from exc
    for a, b in zip(rc.levels, rc.levels[1:]):
        if b != 2 * a:
            raise ParseError("grid levels must double", key="levels", line=where("run", "levels"))
    return rc


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(val) -> str:
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, enum.Enum):
        return str(val.value)
    if isinstance(val, float):
        return repr(val)
    if isinstance(val, tuple) and val and isinstance(val[0], tuple):
        return "; ".join(", ".join(_fmt(float(v)) for v in part) for part in val)
    if isinstance(val, tuple):
        return ", ".join(_fmt(v) for v in val)
    return str(val)


def dump_config(rc: RunConfig) -> str:
    """Effective configuration with every default spelled out."""
    spec = rc.case
    out = [f"[{spec.kind.value}]"]
    out += [f"nx = {spec.grid.nx}", f"ny = {spec.grid.ny}", f"dt = {_fmt(float(spec.dt))}",
            f"t_end = {_fmt(float(spec.t_end))}", f"output_every = {spec.output_every}",
            f"frozen_interface = {_fmt(spec.frozen_interface)}"]
    for name in _PARAM_KEYS:
        val = getattr(spec.params, name)
        out.append(f"{name} = {_fmt(float(val) if isinstance(val, (int, float)) else val)}")
    for name in _DEFAULT_OPTIONS[spec.kind]:
        val = spec.option(name)
        if isinstance(val, (int, float)) and not isinstance(val, bool):
            val = float(val)
        out.append(f"{name} = {_fmt(val)}")
    out += ["", "[solver]"]
    for name in _SOLVER_KEYS:
        val = getattr(rc.solver, name)
        out.append(f"{name} = {_fmt(float(val) if isinstance(val, float) else val)}")
    out += ["", "[run]"]
    if rc.out_dir:
        out.append(f"out = {rc.out_dir}")
    out += [f"seed = {rc.seed}", f"levels = {_fmt(rc.levels)}", f"ks = {_fmt(rc.ks)}",
            f"epsilons = {_fmt(tuple(float(e) for e in rc.epsilons))}", f"min_steps = {rc.min_steps}"]
    return "\n".join(out) + "\n"


__all__ = ["ParseError", "RunConfig", "dump_config", "load_config", "parse_config"]
