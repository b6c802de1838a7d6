"""Security experiments: MAC bit error rates, password avalanche, key
space, energy leakage and the plaintext attack.

Every trial seeds its own generator from ``(seed, experiment tag,
trial index, ...)`` so results do not depend on execution order.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..decoder import verify_integrity
from ..encoder import AccessPassword, acquire, ap_chains, gen_mac
from ..keymat import (KeyedMatrices, ScaleDiag, SecretKeys, derive_sign_diag,
                      log2_keyspace)
from ..solver import SsrTask, solve
from .config import PipelineConfig

SCENARIOS = ("no-noise", "normal-noise", "malicious-pollution", "fake-data")
MANIPULATIONS = ("none", "invert-first", "invert-middle", "invert-last", "permute-two",
                 "key-perturbation")
_TAGS = {"ber": 1, "ap": 2, "energy": 3, "attack": 4}


def trial_rng(seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, path)]))


def write_csv(path, rows, columns=None) -> None:
    rows = [r if isinstance(r, dict) else asdict(r) for r in rows]
    columns = columns or (list(rows[0]) if rows else [])
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row[k]) for k in columns})


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


# ------------------------------------------------------------------ BER


@dataclass
class ExperimentRecord:
    scenario: str
    cr: float
    L: int
    trial: int
    ber: float
    rel_error: float
    verdict: str
    runtime_ms: str = ""


def random_sparse(rng: np.random.Generator, N: int, K: int) -> np.ndarray:
    s = np.zeros(N)
    s[rng.choice(N, size=K, replace=False)] = rng.choice([-1.0, 1.0], size=K)
    return s


def ber_trial(cfg: PipelineConfig, scenario: str, L: int, trial: int,
              timing: bool = False) -> ExperimentRecord:
    """One sensor -> channel -> cloud -> user round for a scenario.

    The cloud cannot tell scenarios apart, so it always solves with the
    same noise-aware tolerance derived from ``cfg.snr_db``.
    """
    rng = trial_rng(cfg.seed, _TAGS["ber"], SCENARIOS.index(scenario), L, trial)
    params = cfg.params_for(L)
    keys = SecretKeys.generate(rng)
    mats = KeyedMatrices.derive(keys, params)
    M = params.M
    K = cfg.sparsity or max(1, M // 16)
    s = random_sparse(rng, params.N, K)
    x = mats.basis.apply(s)
    package, y_mac = acquire(x, None, params, matrices=mats)
    mac = gen_mac(y_mac)

    A = mats.sensing.matrix
    y = package.y.copy()
    noise_rel = 10.0 ** (-cfg.snr_db / 20.0)
    if scenario == "normal-noise":
        sigma = noise_rel * np.linalg.norm(y) / np.sqrt(M)
        y = y + sigma * rng.standard_normal(M)
    elif scenario == "malicious-pollution":
        idx = rng.choice(M, size=int(round(cfg.pollution * M)), replace=False)
        scale = np.max(np.abs(y))
        y[idx] = rng.uniform(-scale, scale, size=idx.size)
    elif scenario == "fake-data":
        y = A @ random_sparse(rng, params.N, K)
    elif scenario != "no-noise":
        raise ValueError(f"unknown scenario {scenario!r}")

    task = SsrTask(A, y)
    solver_cfg = cfg.solver_config(float(np.linalg.norm(y)), M,
                                   float(np.max(np.abs(A.T @ y))),
                                   epsilon_rel=1.1 * noise_rel)
    start = time.perf_counter()
    result = solve(task, solver_cfg)
    elapsed = (time.perf_counter() - start) * 1e3
    report = verify_integrity(result.s_hat, mac, mats.mac, cfg.tau)
    x_rec = mats.basis.apply(result.s_hat)
    rel = float(np.linalg.norm(x_rec - x) / np.linalg.norm(x))
    return ExperimentRecord(scenario, params.cr, L, trial, report.ber, rel, report.verdict,
                            f"{elapsed:.3f}" if timing else "")


def summarize_ber(records) -> list:
    groups: dict = {}
    for r in records:
        groups.setdefault((r.scenario, r.L), []).append(r)
    rows = []
    for (scenario, L), recs in groups.items():
        bers = np.array([r.ber for r in recs])
        expect_accept = scenario in ("no-noise", "normal-noise")
        correct = [(r.verdict == "accepted") == expect_accept for r in recs]
        rows.append({"scenario": scenario, "cr": 1.0 / L, "L": L, "trials": len(recs),
                     "mean_ber": float(bers.mean()), "std_ber": float(bers.std()),
                     "correct_rate": float(np.mean(correct))})
    return rows


def eval_ber_curve(cfg: PipelineConfig, scenarios=SCENARIOS, L_list=None, trials=None,
                   timing: bool = False):
    """Per-trial records and a per-(scenario, CR) summary of MAC bit error rates."""
    L_list = tuple(L_list or cfg.L_list)
    trials = cfg.trials if trials is None else trials
    if trials < 30:
        raise ValueError("BER curves need at least 30 trials per point")
    for L in L_list:
        cfg.params_for(L).validate()
    records = [ber_trial(cfg, sc, L, t, timing)
               for sc in scenarios for L in L_list for t in range(trials)]
    return records, summarize_ber(records)


# ------------------------------------------------------------------- AP


def hex_change_rate(a: AccessPassword, b: AccessPassword) -> float:
    ha, hb = a.hex(), b.hex()
    return sum(x != y for x, y in zip(ha, hb)) / len(ha)


def _flip_key_bit(key: bytes, bit: int) -> bytes:
    out = bytearray(key)
    out[bit // 8] ^= 1 << (bit % 8)
    return bytes(out)


def manipulate(w: np.ndarray, k3: bytes, kind: str, rng: np.random.Generator, N: int):
    """The manipulated bit sequence for one of :data:`MANIPULATIONS`."""
    w = w.copy()
    if kind == "none":
        return w
    if kind == "invert-first":
        w[0] ^= 1
    elif kind == "invert-middle":
        w[N // 2] ^= 1
    elif kind == "invert-last":
        w[-1] ^= 1
    elif kind == "permute-two":
        i, j = rng.choice(N, size=2, replace=False)
        w[[i, j]] = w[[j, i]]
    elif kind == "key-perturbation":
        w = derive_sign_diag(_flip_key_bit(k3, int(rng.integers(128))), N).bits
    else:
        raise ValueError(f"unknown manipulation {kind!r}")
    return w


def eval_ap_sensitivity(cfg: PipelineConfig, trials=None, N=None, n=None,
                        manipulations=MANIPULATIONS) -> list:
    """Mean hex-character change rate of the access password per manipulation."""
    N = cfg.ap_N if N is None else N
    n = cfg.n if n is None else n
    trials = cfg.ap_trials if trials is None else trials
    rows = []
    for kind in manipulations:
        rates = []
        for t in range(trials):
            rng = trial_rng(cfg.seed, _TAGS["ap"], MANIPULATIONS.index(kind), t)
            k3 = rng.bytes(16)
            w = derive_sign_diag(k3, N).bits
            base = AccessPassword(ap_chains(w, n)[2])
            changed = AccessPassword(ap_chains(manipulate(w, k3, kind, rng, N), n)[2])
            rates.append(hex_change_rate(base, changed))
        rates = np.array(rates)
        rows.append({"manipulation": kind, "N": N, "n": n, "trials": trials,
                     "mean_change_rate": float(rates.mean()),
                     "std_change_rate": float(rates.std()),
                     "theory_random": 1.0 - 2.0 ** -4})
    return rows


# ------------------------------------------------------------- keyspace


def eval_keyspace(N_list, f: int) -> list:
    return [log2_keyspace(int(N), f) for N in N_list]


# --------------------------------------------------------------- energy


def _pearson(a, b) -> float:
    return float(np.corrcoef(a, b)[0, 1])


def eval_energy_leak(cfg: PipelineConfig, trials=None) -> dict:
    """Correlation between plaintext and ciphertext energies.

    Plaintexts are DCT-sparse with a random overall gain. Condition
    ``identity-scale`` encrypts with ``D = I``; ``keyed-scale`` uses a fresh
    keyed ``D`` per trial. Both share the permutation and sign keys.
    """
    trials = cfg.energy_trials if trials is None else trials
    if trials < 100:
        raise ValueError("energy experiment needs at least 100 trials")
    params = cfg.params
    K = cfg.sparsity or max(1, params.M // 16)
    ex, ey_id, ey_key = [], [], []
    for t in range(trials):
        rng = trial_rng(cfg.seed, _TAGS["energy"], t)
        keys = SecretKeys.generate(rng)
        mats = KeyedMatrices.derive(keys, params)
        flat = KeyedMatrices.from_parts(params, mats.basis.perm,
                                        ScaleDiag.identity(params.N), mats.signs)
        u = np.zeros(params.N)
        u[rng.choice(params.N, size=K, replace=False)] = rng.standard_normal(K)
        x = rng.uniform(0.5, 2.0) * mats.basis.psi @ u
        ex.append(float(x @ x))
        for bucket, m in ((ey_id, flat), (ey_key, mats)):
            y = acquire(x, None, params, matrices=m)[0].y
            bucket.append(float(y @ y))
    return {"trials": trials, "N": params.N, "L": params.L,
            "corr_identity_scale": _pearson(ex, ey_id),
            "corr_keyed_scale": _pearson(ex, ey_key)}


# --------------------------------------------------------------- attack


def measurement_operator(mats: KeyedMatrices) -> np.ndarray:
    """End-to-end linear map ``x -> y``."""
    return mats.sensing.matrix @ mats.basis.inverse()


def eval_plaintext_attack(cfg: PipelineConfig, pairs=None, cond_limit: float = 1e12) -> dict:
    """Estimate the measurement operator from known plaintext/ciphertext pairs.

    Under a fixed key the estimate is exact (multi-time sensing is linear);
    when keys rotate per message the same estimate is meaningless.
    """
    params = cfg.params
    N = params.N
    pairs = N if pairs is None else int(pairs)
    if pairs < N:
        raise ValueError(f"need at least N={N} pairs")
    rng = trial_rng(cfg.seed, _TAGS["attack"])
    X = rng.standard_normal((N, pairs))
    report = {"N": N, "M": params.M, "pairs": pairs,
              "operator_entries": params.M * N,
              "unknowns_scale": N, "unknowns_sign": N,
              "log2_candidates_perm": math.lgamma(N + 1) / math.log(2)}
    cond = float(np.linalg.cond(X[:, :N]))
    report["cond_plaintexts"] = cond
    if not np.isfinite(cond) or cond > cond_limit:
        report.update(status="inconclusive", fixed_key_rel_error=float("nan"),
                      rotated_key_rel_error=float("nan"))
        return report

    def estimate(Y):
        # least-squares solve of Y = phi_hat X
        return np.linalg.lstsq(X.T, Y.T, rcond=None)[0].T

    fixed = KeyedMatrices.derive(SecretKeys.generate(rng), params)
    phi = measurement_operator(fixed)
    fixed_err = np.linalg.norm(estimate(phi @ X) - phi) / np.linalg.norm(phi)

    Y = np.empty((params.M, pairs))
    for j in range(pairs):
        key_j = fixed if j == 0 else KeyedMatrices.derive(SecretKeys.generate(rng), params)
        Y[:, j] = measurement_operator(key_j) @ X[:, j]
    rotated_err = np.linalg.norm(estimate(Y) - phi) / np.linalg.norm(phi)
    report.update(status="ok", fixed_key_rel_error=float(fixed_err),
                  rotated_key_rel_error=float(rotated_err))
    return report


def write_rows(out_dir, name: str, rows) -> Path:
    path = Path(out_dir) / name
    write_csv(path, rows if isinstance(rows, list) else [rows])
    return path
