"""Cloud-side sparse recovery: OMP, l1-regularized least squares and an RIP probe."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDimensionError, InvalidParameterError, RankDeficiencyError

POWER_ITERS = 50
POWER_SEED = 20240617
STEP_SAFETY = 1.05


@dataclass(frozen=True)
class SsrTask:
    A: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if A.ndim != 2 or y.shape != (A.shape[0],):
            raise InvalidDimensionError(f"A {A.shape} and y {y.shape} disagree")
        if A.shape[0] > A.shape[1]:
            raise InvalidDimensionError("task must not be overdetermined (M <= N)")
        if np.any(np.linalg.norm(A, axis=0) == 0):
            raise InvalidDimensionError("A has an all-zero column")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class SolverConfig:
    mode: str = "greedy"
    K: int | None = None
    epsilon: float | None = None
    lam: float | None = None
    max_iters: int = 5000
    tol: float = 1e-10

    def __post_init__(self):
        if self.mode not in ("greedy", "bpdn"):
            raise InvalidParameterError(f"unknown solver mode {self.mode!r}")
        if self.epsilon is not None and self.epsilon < 0:
            raise InvalidParameterError("epsilon must be >= 0")
        if self.mode == "bpdn" and self.lam is not None and self.lam <= 0:
            raise InvalidParameterError("lambda must be > 0")
        if self.max_iters < 1:
            raise InvalidParameterError("max_iters must be >= 1")


@dataclass
class ReconstructionResult:
    s_hat: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    support: tuple = ()
    history: list = field(default_factory=list, repr=False)


@dataclass(frozen=True)
class RipEstimate:
    delta_hat: float
    K: int
    trials: int


def solve(task: SsrTask, cfg: SolverConfig) -> ReconstructionResult:
    return omp(task, cfg) if cfg.mode == "greedy" else bpdn(task, cfg)


def _finish(task, s, iterations, converged, history, support=()):
    r = float(np.linalg.norm(task.y - task.A @ s))
    return ReconstructionResult(s, r, iterations, converged, tuple(support), history)


def omp(task: SsrTask, cfg: SolverConfig) -> ReconstructionResult:
    """Orthogonal matching pursuit.

    Stops once ``||y - A s|| <= epsilon`` (default ``1e-6 ||y||``) or when
    ``K`` atoms (default ``M``) are active. ``history`` holds the residual
    norm after each step, starting with ``||y||``.
    """
    A, y = task.A, task.y
    M, N = A.shape
    K = M if cfg.K is None else int(cfg.K)
    if not 1 <= K <= M:
        raise InvalidParameterError(f"sparsity budget K={K} must lie in [1, M={M}]")
    eps = 1e-6 * np.linalg.norm(y) if cfg.epsilon is None else cfg.epsilon
    norms = np.linalg.norm(A, axis=0)

    active: list[int] = []
    coef = np.zeros(0)
    residual = y.copy()
    rnorm = float(np.linalg.norm(residual))
    history = [rnorm]
    available = np.ones(N, dtype=bool)
    while rnorm > eps and len(active) < K:
        score = np.abs(A.T @ residual) / norms
        score[~available] = -1.0
        j = int(np.argmax(score))
        active.append(j)
        available[j] = False
        sub = A[:, active]
        sv = np.linalg.svd(sub, compute_uv=False)
        if sv[-1] <= 1e-10 * sv[0]:
            raise RankDeficiencyError(active)
        coef = np.linalg.lstsq(sub, y, rcond=None)[0]
        residual = y - sub @ coef
        rnorm = float(np.linalg.norm(residual))
        history.append(rnorm)

    s = np.zeros(N)
    s[active] = coef
    return _finish(task, s, len(active), rnorm <= eps or len(active) == K, history, active)


def spectral_norm_sq(A: np.ndarray, iters: int = POWER_ITERS, seed: int = POWER_SEED) -> float:
    v = np.random.default_rng(seed).standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = A.T @ (A @ v)
        est = float(np.linalg.norm(w))
        if est == 0.0:
            return 0.0
        v = w / est
    return est


def soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def bpdn_objective(A, y, s, lam) -> float:
    r = y - A @ s
    return 0.5 * float(r @ r) + lam * float(np.abs(s).sum())


def bpdn(task: SsrTask, cfg: SolverConfig) -> ReconstructionResult:
    """Minimize ``0.5 ||y - A s||^2 + lam ||s||_1`` by monotone FISTA.

    A candidate iterate is accepted only if it does not raise the
    objective, so the accepted sequence is non-increasing. ``lam``
    defaults to ``0.01 ||A^T y||_inf``.
    """
    A, y = task.A, task.y
    N = A.shape[1]
    lam = cfg.lam
    if lam is None:
        lam = 0.01 * float(np.max(np.abs(A.T @ y))) or 1e-12
    step = 1.0 / (STEP_SAFETY * spectral_norm_sq(A))

    s = np.zeros(N)
    v = s.copy()
    t = 1.0
    obj = bpdn_objective(A, y, s, lam)
    history = [obj]
    converged = obj == 0.0
    it = 0
    while not converged and it < cfg.max_iters:
        it += 1
        z = soft_threshold(v + step * (A.T @ (y - A @ v)), step * lam)
        z_obj = bpdn_objective(A, y, z, lam)
        accepted = z_obj <= obj
        s_new, new_obj = (z, z_obj) if accepted else (s, obj)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        v = s_new + (t / t_new) * (z - s_new) + ((t - 1.0) / t_new) * (s_new - s)
        rel = (obj - new_obj) / max(obj, np.finfo(float).tiny)
        s, obj, t = s_new, new_obj, t_new
        history.append(obj)
        if accepted and rel < cfg.tol:
            converged = True
    return _finish(task, s, it, converged, history, np.flatnonzero(s))


def debias(task: SsrTask, result: ReconstructionResult, threshold: float = 0.0) -> np.ndarray:
    """Least-squares refit restricted to the support of ``result``."""
    support = np.flatnonzero(np.abs(result.s_hat) > threshold)
    out = np.zeros(task.A.shape[1])
    if support.size:
        out[support] = np.linalg.lstsq(task.A[:, support], task.y, rcond=None)[0]
    return out


def empirical_rip_check(A, K: int, trials: int,
                        rng: np.random.Generator | int | None = 0) -> RipEstimate:
    """Worst observed ``| ||A s||^2 - 1 |`` over random K-sparse unit vectors.

    A lower bound on the true restricted isometry constant.
    """
    A = np.asarray(A, dtype=np.float64)
    M, N = A.shape
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    if not 1 <= K <= min(M, N):
        raise InvalidParameterError(f"K={K} must lie in [1, min(M, N)]")
    rng = np.random.default_rng(rng)
    worst = 0.0
    for _ in range(trials):
        support = rng.choice(N, size=K, replace=False)
        vals = rng.standard_normal(K)
        vals /= np.linalg.norm(vals)
        energy = float(np.sum((A[:, support] @ vals) ** 2))
        worst = max(worst, abs(energy - 1.0))
    return RipEstimate(worst, K, trials)
