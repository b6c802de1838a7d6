"""Flat ``key = value`` configuration files.

Blank lines and ``#`` comments are ignored. Unknown keys are an error so
that typos do not silently fall back to defaults.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from ..errors import ContainerError, InvalidParameterError
from ..keymat import DEFAULT_LEVELS, DEFAULT_MAC_SEED, SystemParams
from ..solver import SolverConfig


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int_list(text: str) -> tuple:
    return tuple(int(v) for v in text.replace(",", " ").split())


@dataclass(frozen=True)
class PipelineConfig:
    N: int = 256
    L: int = 2
    m: int = 31
    n: int = 128
    f: int = DEFAULT_LEVELS
    tau: float = 0.125
    mac_seed: int = DEFAULT_MAC_SEED
    basis: str = "dct"
    test_mode: bool = False
    # cloud solver
    solver: str = "greedy"
    K: int = 0                  # OMP atom budget; 0 means M // 2
    epsilon_rel: float = 1e-6   # stopping tolerance relative to ||y||
    lam_rel: float = 0.01       # bpdn weight relative to ||A^T y||_inf
    max_iters: int = 5000
    tol: float = 1e-10
    # evaluation harness
    seed: int = 0
    trials: int = 100
    L_list: tuple = (2, 4, 8)
    sparsity: int = 0           # 0 means max(1, M // 16)
    snr_db: float = 30.0
    pollution: float = 0.2
    ap_N: int = 512
    ap_trials: int = 1000
    energy_trials: int = 200
    keyspace_N: tuple = (4, 64, 256)

    def __post_init__(self):
        self.params.validate()
        if not 0 <= self.tau <= 1:
            raise InvalidParameterError("tau must lie in [0, 1]")
        if not 0 <= self.pollution <= 1:
            raise InvalidParameterError("pollution fraction must lie in [0, 1]")
        if self.K < 0 or self.sparsity < 0:
            raise InvalidParameterError("K and sparsity must be >= 0")
        if not self.L_list:
            raise InvalidParameterError("L_list must not be empty")
        SolverConfig(mode=self.solver_mode, max_iters=self.max_iters)

    @property
    def solver_mode(self) -> str:
        return {"omp": "greedy", "greedy": "greedy", "bpdn": "bpdn"}.get(self.solver, self.solver)

    @property
    def params(self) -> SystemParams:
        return self.params_for(self.L)

    def params_for(self, L: int, N: int | None = None) -> SystemParams:
        return SystemParams(N=self.N if N is None else N, L=L, m=self.m, f=self.f, n=self.n,
                            mac_seed=self.mac_seed, basis=self.basis,
                            production=not self.test_mode)

    def solver_config(self, y_norm: float, M: int, aty_inf: float = 0.0,
                      epsilon_rel: float | None = None) -> SolverConfig:
        rel = self.epsilon_rel if epsilon_rel is None else epsilon_rel
        return SolverConfig(mode=self.solver_mode, K=self.K or max(1, M // 2),
                            epsilon=rel * y_norm, lam=(self.lam_rel * aty_inf) or None,
                            max_iters=self.max_iters, tol=self.tol)

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)

    def dumps(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(i) for i in v)
            elif isinstance(v, bool):
                v = str(v).lower()
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}


def parse_config(text: str, **overrides) -> PipelineConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ContainerError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _FIELDS:
            raise ContainerError(f"config line {lineno}: unknown key {key!r}")
        default = _FIELDS[key].default
        try:
            if isinstance(default, bool):
                values[key] = _parse_bool(value)
            elif isinstance(default, tuple):
                values[key] = _parse_int_list(value)
            elif isinstance(default, int):
                values[key] = int(value, 0)
            elif isinstance(default, float):
                values[key] = float(value)
            else:
                values[key] = value
        except ValueError as exc:
            raise ContainerError(f"config line {lineno}: {exc}") from exc
    values.update(overrides)
    return PipelineConfig(**values)


def load_config(path: str | Path | None = None, **overrides) -> PipelineConfig:
    text = "" if path is None else Path(path).read_text()
    return parse_config(text, **overrides)
