"""
Scenario configuration and the experiments the CLI can run.

A config file is TOML.  ``[defaults]`` holds keys shared by every
scenario and ``[scenario.<name>]`` sections override them; ``kind``
selects the experiment.  The builtin file below is always loaded first,
so ``collapse-sim run fig1`` needs no config at all.
"""
from __future__ import annotations

import ast
import csv
import io
import json
import math
import operator
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from .bath import (build_ohmic_bath, sigma_xi_sq_asymptotic, sigma_xi_sq_sum)
from .bell import bell_check, classical_bound_monte_carlo, planar_setting
from .errors import CollapseSimError
from .oscillator import ModelParams
from .wavepacket import (BlochVector, GridSpec, density_grid, grid_branch_masses,
                         width_curves)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "BUILTIN_CONFIG",
    "KINDS",
    "ConfigError",
    "UnknownExperimentError",
    "Scenario",
    "Artifact",
    "load_config",
    "resolve_scenario",
    "run_scenario",
    "grid_csv",
    "parse_grid_csv",
]

BUILTIN_CONFIG = """
[defaults]
M = 1.0
omega0 = "2*pi"
eta = 2.0
d = 3.0
hbar = 1.0
theta = "pi/4"
phi = 0.0
brownian = "sum"
n_bath = 4096
cutoff_factor = 50.0
temperature = 0.0
q_min = -8.0
q_max = 8.0
q_num = 641
t_min = 0.0
t_max = 6.0
t_num = 301
sampling = "cell"

[scenario.fig1]
kind = "fig1"

[scenario.fig2a]
kind = "widths"
output = "fig2a_widths"
t_num = 601

[scenario.fig2b]
kind = "probabilities"
output = "fig2b_probabilities"

[scenario.fig3]
kind = "profiles"
q_num = 3201
sampling = "point"
times_a = [0.0, 0.05]
times_b = [0.0, 2.0]

[scenario.widths]
kind = "widths"
output = "widths"

[scenario.bath-convergence]
kind = "bath-convergence"
ns = [256, 512, 1024, 2048, 4096, 8192, 16384]

[scenario.bell]
kind = "bell"
angle_a = 0.0
angle_b = "pi/2"
angle_c = "pi/4"
mc_n = 1000000
seed = 20230406
"""

KINDS = ("fig1", "widths", "probabilities", "profiles", "bath-convergence", "bell")


class ConfigError(CollapseSimError, ValueError):
    pass


class UnknownExperimentError(CollapseSimError, KeyError):
    pass


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def _eval_number(text: str) -> float:
    """Evaluate arithmetic over numbers and ``pi``, e.g. "2*pi" or "pi/4"."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(text)

    return ev(ast.parse(text.strip(), mode="eval"))


@dataclass
class Scenario:
    name: str
    kind: str
    M: float = 1.0
    omega0: float = 2 * math.pi
    eta: float = 2.0
    d: float | None = 3.0
    B: float | None = None
    hbar: float = 1.0
    theta: float = math.pi / 4
    phi: float = 0.0
    brownian: str = "sum"
    n_bath: int = 4096
    cutoff_factor: float = 50.0
    temperature: float = 0.0
    q_min: float = -8.0
    q_max: float = 8.0
    q_num: int = 641
    t_min: float = 0.0
    t_max: float = 6.0
    t_num: int = 301
    sampling: str = "cell"
    include_brownian: bool = True
    output: str | None = None
    times_a: list = field(default_factory=lambda: [0.0, 0.05])
    times_b: list = field(default_factory=lambda: [0.0, 2.0])
    ns: list = field(default_factory=lambda: [512, 1024, 2048, 4096, 8192])
    t_probe: float | None = None
    angle_a: float = 0.0
    angle_b: float = math.pi / 2
    angle_c: float = math.pi / 4
    mc_n: int = 1_000_000
    seed: int = 0

    @property
    def params(self) -> ModelParams:
        if self.B is not None:
            return ModelParams(M=self.M, omega0=self.omega0, eta=self.eta, B=self.B,
                               hbar=self.hbar)
        return ModelParams.from_displacement(self.d or 0.0, M=self.M, omega0=self.omega0,
                                             eta=self.eta, hbar=self.hbar)

    @property
    def spin(self) -> BlochVector:
        return BlochVector(self.theta, self.phi)

    @property
    def q_spec(self) -> GridSpec:
        return GridSpec(self.q_min, self.q_max, self.q_num)

    @property
    def t_spec(self) -> GridSpec:
        return GridSpec(self.t_min, self.t_max, self.t_num)

    def brownian_source(self, params: ModelParams):
        if self.brownian == "sum":
            return build_ohmic_bath(params, self.n_bath, self.cutoff_factor * params.omega0)
        if self.brownian == "asymptotic":
            return "asymptotic"
        if self.brownian == "none":
            return None
        raise ConfigError(f"brownian must be sum, asymptotic or none, got {self.brownian!r}")


_FIELD_TYPES = {f.name: f.type for f in fields(Scenario)}


def _coerce(key: str, value):
    kind = _FIELD_TYPES[key]
    try:
        if kind in ("float", "float | None"):
            if value is None:
                return None
            return _eval_number(value) if isinstance(value, str) else float(value)
        if kind == "int":
            if isinstance(value, str):
                value = _eval_number(value)
            if float(value) != int(value):
                raise ValueError(value)
            return int(value)
        if kind == "bool":
            if isinstance(value, str):
                if value.lower() not in ("true", "false", "1", "0"):
                    raise ValueError(value)
                return value.lower() in ("true", "1")
            return bool(value)
        if kind == "list":
            items = value.split(",") if isinstance(value, str) else list(value)
            return [_eval_number(v) if isinstance(v, str) else float(v) for v in items]
    except (ValueError, SyntaxError, TypeError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return str(value)


def load_config(text: str | None) -> dict:
    """Parse TOML config text; returns {"defaults": {...}, "scenario": {...}}."""
    if not text:
        return {"defaults": {}, "scenario": {}}
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    extra = set(data) - {"defaults", "scenario"}
    if extra:
        raise ConfigError(f"unknown top-level config tables: {sorted(extra)}")
    return {"defaults": data.get("defaults", {}), "scenario": data.get("scenario", {})}


def resolve_scenario(name: str, user_config: dict | None = None,
                     overrides: dict | None = None) -> Scenario:
    """Merge builtin config, user config and overrides into a Scenario."""
    builtin = load_config(BUILTIN_CONFIG)
    user = user_config or {"defaults": {}, "scenario": {}}
    sections = {**builtin["scenario"]}
    for key, section in user["scenario"].items():
        sections[key] = {**sections.get(key, {}), **section}
    if name not in sections:
        raise UnknownExperimentError(name)
    layers = [builtin["defaults"], user["defaults"], sections[name], overrides or {}]
    merged = {k: v for layer in layers for k, v in layer.items()}
    # the field may be given as B or as d; the most specific layer decides
    for layer in reversed(layers):
        if "B" in layer and "d" in layer:
            raise ConfigError("give either B or d, not both")
        if "B" in layer or "d" in layer:
            merged.pop("d" if "B" in layer else "B", None)
            break
    merged.setdefault("kind", name)
    if merged["kind"] not in KINDS:
        raise UnknownExperimentError(merged["kind"])
    unknown = set(merged) - set(_FIELD_TYPES)
    if unknown or "name" in merged:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown | ({'name'} & set(merged)))}")
    values = {k: _coerce(k, v) for k, v in merged.items() if k != "kind"}
    return Scenario(name=name, kind=merged["kind"], **values)


@dataclass(frozen=True)
class Artifact:
    filename: str
    content: bytes
    rows: int


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _csv(header, rows) -> tuple[bytes, int]:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    n = 0
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
        n += 1
    return buf.getvalue().encode("ascii"), n


GRID_HEADER = ("t", "q", "rho_plus", "rho_minus", "rho_total")
WIDTH_HEADER = ("t", "sigma_Q", "sigma_xi", "sigma_Qxi")


def grid_csv(grid) -> tuple[bytes, int]:
    """Serialize a DensityGrid, one row per (t, q) cell in t-major order."""
    total = grid.rho_total

    def rows():
        for i, t in enumerate(grid.t_axis):
            for j, q in enumerate(grid.q_axis):
                yield t, q, grid.rho_plus[i, j], grid.rho_minus[i, j], total[i, j]

    return _csv(GRID_HEADER, rows())


def parse_grid_csv(data: bytes):
    """Inverse of grid_csv: returns (t_axis, q_axis, rho_plus, rho_minus, rho_total)."""
    reader = csv.reader(io.StringIO(data.decode("ascii")))
    header = next(reader)
    if tuple(header) != GRID_HEADER:
        raise ValueError(f"unexpected header {header}")
    arr = np.array([[float(v) for v in row] for row in reader])
    t_axis = np.unique(arr[:, 0])
    q_axis = arr[: len(arr) // len(t_axis), 1]
    shape = (len(t_axis), len(q_axis))
    return (t_axis, q_axis, arr[:, 2].reshape(shape), arr[:, 3].reshape(shape),
            arr[:, 4].reshape(shape))


def _run_fig1(sc: Scenario, workers: int):
    p = sc.params
    source = sc.brownian_source(p)
    out = []
    for fname, include in (("fig1a_no_brownian.csv", False), ("fig1b_brownian.csv", True)):
        grid = density_grid(p, sc.spin, source, sc.q_spec, sc.t_spec, include_brownian=include,
                            sampling=sc.sampling, temperature=sc.temperature, workers=workers)
        out.append(Artifact(fname, *grid_csv(grid)))
    return out


def _run_widths(sc: Scenario, workers: int):
    p = sc.params
    source = sc.brownian_source(p) if sc.include_brownian else None
    table = width_curves(p, source, sc.t_spec, sc.temperature)
    rows = zip(table.t, table.sigma_Q, table.sigma_xi, table.sigma_Qxi)
    return [Artifact(f"{sc.output or sc.name}.csv", *_csv(WIDTH_HEADER, rows))]


def _run_probabilities(sc: Scenario, workers: int):
    p = sc.params
    grid = density_grid(p, sc.spin, sc.brownian_source(p), sc.q_spec, sc.t_spec,
                        include_brownian=sc.include_brownian, sampling=sc.sampling,
                        temperature=sc.temperature, workers=workers)
    mp, mm, mt = grid_branch_masses(grid)
    rows = zip(grid.t_axis, mp, mm, mt)
    header = ("t", "p_plus", "p_minus", "p_total")
    return [Artifact(f"{sc.output or sc.name}.csv", *_csv(header, rows))]


def _run_profiles(sc: Scenario, workers: int):
    p = sc.params
    source = sc.brownian_source(p)
    out = []
    plans = (("fig3a.csv", sc.times_a, sc.include_brownian),
             ("fig3b_no_brownian.csv", sc.times_b, False),
             ("fig3b_brownian.csv", sc.times_b, True))
    for fname, times, include in plans:
        grid = density_grid(p, sc.spin, source, sc.q_spec, times, include_brownian=include,
                            sampling=sc.sampling, temperature=sc.temperature, workers=workers)
        out.append(Artifact(fname, *grid_csv(grid)))
    return out


def _run_bath_convergence(sc: Scenario, workers: int):
    p = sc.params
    cutoff = sc.cutoff_factor * p.omega0
    t = sc.t_probe if sc.t_probe is not None else 20.0 / p.eta
    s_inf = sigma_xi_sq_asymptotic(p).sigma_xi_sq
    s_cut = sigma_xi_sq_asymptotic(p, omega_cutoff=cutoff).sigma_xi_sq
    rows = []
    prev = None
    for n in sc.ns:
        s = sigma_xi_sq_sum(p, build_ohmic_bath(p, int(n), cutoff), t, sc.temperature).sigma_xi_sq
        change = math.nan if prev is None else abs(s - prev) / s
        rows.append((n, s, s / s_inf - 1, s / s_cut - 1, change))
        prev = s
    header = ("n", "sigma_xi_sq", "rel_err_asymptote", "rel_err_cutoff_matched",
              "rel_change_from_previous")
    return [Artifact("bath_convergence.csv", *_csv(header, rows))]


def _run_bell(sc: Scenario, workers: int):
    a, b, c = (planar_setting(x) for x in (sc.angle_a, sc.angle_b, sc.angle_c))
    report = {
        "angles": {"a": sc.angle_a, "b": sc.angle_b, "c": sc.angle_c},
        "quantum": bell_check(a, b, c).to_dict(),
        "classical_sign_model": classical_bound_monte_carlo(a, b, c, sc.mc_n, sc.seed).to_dict(),
    }
    data = (json.dumps(report, indent=2, sort_keys=True) + "\n").encode("ascii")
    return [Artifact("bell.json", data, 1)]


_RUNNERS = {
    "fig1": _run_fig1,
    "widths": _run_widths,
    "probabilities": _run_probabilities,
    "profiles": _run_profiles,
    "bath-convergence": _run_bath_convergence,
    "bell": _run_bell,
}


def run_scenario(sc: Scenario, workers: int = 1) -> list[Artifact]:
    return _RUNNERS[sc.kind](sc, workers)
