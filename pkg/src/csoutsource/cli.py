"""Command line front end.

Roles are kept apart by file wiring: ``sense`` needs all three keys,
``reconstruct`` (cloud) reads only ``k3`` and the measurement package, and
``request`` gates release on the access password before the user side
verifies and decrypts with ``k1, k2``.

Exit codes: 0 success, 2 bad input, 3 access rejected, 4 integrity
check failed (output still written, flagged).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .decoder import check_access, recover, verify_integrity
from .encoder import access_password_from_signs, acquire, gen_mac
from .errors import CSError, InvalidParameterError
from .keymat import KeyedMatrices, SecretKeys, build_mac_matrix, build_sensing_matrix, public_basis
from .pipeline import containers as io
from .pipeline import evaluation as ev
from .pipeline.config import load_config
from .solver import SsrTask, solve

EXIT_OK, EXIT_INPUT, EXIT_REJECTED, EXIT_TAMPERED = 0, 2, 3, 4


def _emit(record: dict, stream=None) -> None:
    print(json.dumps(record, sort_keys=True), file=stream or sys.stdout)


def _fail(exc: Exception) -> int:
    kind = getattr(exc, "kind", type(exc).__name__)
    _emit({"error": str(exc), "kind": kind}, sys.stderr)
    return EXIT_INPUT


def package_id(seed: int, index: int) -> int:
    digest = hashlib.blake2b(f"{seed}:{index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _image_shape(text):
    if text is None:
        return None
    h, _, w = text.lower().partition("x")
    return int(h), int(w)


# --------------------------------------------------------------- roles


def cmd_sense(args, cfg) -> int:
    keys = io.read_keys(args.keys)
    missing = {"k1", "k2", "k3"} - keys.keys()
    if missing:
        raise InvalidParameterError(f"sensor keys file lacks {sorted(missing)}")
    keys = SecretKeys(**keys)
    params = cfg.params
    signals = io.read_signal(args.input, _image_shape(args.image_shape))
    if signals.shape[0] != params.N:
        raise InvalidParameterError(
            f"signals have {signals.shape[0]} samples per column, config N={params.N}")
    mats = KeyedMatrices.derive(keys, params)
    ap = access_password_from_signs(mats.signs, params.n)
    packages, auth = [], []
    for col in range(signals.shape[1]):
        pid = package_id(args.seed, col)
        package, y_mac = acquire(signals[:, col], None, params, pid, matrices=mats)
        packages.append(package)
        auth.append((ap, gen_mac(y_mac), pid))
    out = _out_dir(args)
    io.write_packages(out / "measurements.csmp", packages)
    io.write_auth(out / "auth.csab", auth)
    # handed to the user out of band; the cloud never stores it
    (out / "access_password.txt").write_text(ap.hex() + "\n")
    _emit({"command": "sense", "packages": len(packages),
           "measurements": int(sum(p.M for p in packages)),
           "samples": int(signals.size), "access_password": ap.hex()})
    return EXIT_OK


def cmd_reconstruct(args, cfg) -> int:
    keys = io.read_keys(args.cloud_key)
    if set(keys) != {"k3"}:
        raise InvalidParameterError("the cloud key file must contain k3 and nothing else")
    packages = io.read_packages(args.package)
    if not packages:
        raise InvalidParameterError("package file holds no measurements")
    coeffs, diagnostics = [], []
    for idx, package in enumerate(packages):
        if (package.N, package.L, package.m) != (cfg.N, cfg.L, cfg.m):
            raise InvalidParameterError(
                f"package {idx} dimensions (N={package.N}, L={package.L}, m={package.m}) "
                "disagree with config")
        A = build_sensing_matrix(keys["k3"], package.N, package.L,
                                 public_basis(package.N, cfg.basis)).matrix
        y = package.y
        solver_cfg = cfg.solver_config(float(np.linalg.norm(y)), package.M,
                                       float(np.max(np.abs(A.T @ y))))
        result = solve(SsrTask(A, y), solver_cfg)
        coeffs.append(result.s_hat)
        diagnostics.append({"column": idx, "package_id": package.package_id,
                            "residual_norm": result.residual_norm,
                            "iterations": result.iterations,
                            "converged": int(result.converged),
                            "support_size": int(np.count_nonzero(result.s_hat))})
    out = _out_dir(args)
    io.write_matrix(out / "coeffs.csvm", np.column_stack(coeffs), io.Role.COEFFICIENTS)
    ev.write_csv(out / "diagnostics.csv", diagnostics)
    unconverged = [d["column"] for d in diagnostics if not d["converged"]]
    if unconverged:
        _emit({"warning": "solver did not converge", "columns": unconverged}, sys.stderr)
    _emit({"command": "reconstruct", "columns": len(coeffs), "unconverged": len(unconverged)})
    return EXIT_OK


def cmd_request(args, cfg) -> int:
    cloud = io.read_keys(args.cloud_key)
    if "k3" not in cloud:
        raise InvalidParameterError("cloud key file lacks k3")
    submitted = args.ap if args.ap is not None else Path(args.ap_file).read_text().strip()
    decision = check_access(submitted, cloud["k3"], cfg.N, cfg.n, not cfg.test_mode)
    _emit(json.loads(decision.to_json()))
    if not decision.granted:
        return EXIT_REJECTED

    user = io.read_keys(args.user_keys)
    if not {"k1", "k2"} <= user.keys():
        raise InvalidParameterError("user keys file needs k1 and k2")
    coeffs = io.read_matrix(args.coeffs, io.Role.COEFFICIENTS)
    auth = io.read_auth(args.auth)
    if len(auth) != coeffs.shape[1]:
        raise InvalidParameterError(
            f"{len(auth)} auth records for {coeffs.shape[1]} coefficient columns")
    mac_matrix = build_mac_matrix(cfg.N, cfg.m, cfg.mac_seed, cfg.L, cfg.basis)
    reports, recovered = [], []
    for col, (_, mac, pid) in enumerate(auth):
        report = verify_integrity(coeffs[:, col], mac, mac_matrix, cfg.tau)
        record = json.loads(report.to_json())
        record.update(column=col, package_id=pid)
        reports.append(record)
        recovered.append(recover(coeffs[:, col], user["k1"], user["k2"], cfg.N, cfg.f,
                                 cfg.basis))
    out = _out_dir(args)
    io.write_signal(out / "recovered.txt", np.column_stack(recovered))
    (out / "integrity.jsonl").write_text(
        "".join(json.dumps(r, sort_keys=True) + "\n" for r in reports))
    tampered = [r["column"] for r in reports if r["verdict"] != "accepted"]
    _emit({"command": "request", "columns": len(reports), "tampered": tampered,
           "max_ber": max(r["ber"] for r in reports)})
    return EXIT_TAMPERED if tampered else EXIT_OK


# ------------------------------------------------------------ evaluation


def cmd_eval_ber(args, cfg) -> int:
    trials = args.trials or cfg.trials
    records, summary = ev.eval_ber_curve(cfg, trials=trials, timing=args.timing)
    out = _out_dir(args)
    ev.write_rows(out, "ber_records.csv", records)
    ev.write_rows(out, "ber_summary.csv", summary)
    for row in summary:
        _emit(row)
    return EXIT_OK


def cmd_eval_ap(args, cfg) -> int:
    rows = ev.eval_ap_sensitivity(cfg, trials=args.trials or cfg.ap_trials)
    ev.write_rows(_out_dir(args), "ap_sensitivity.csv", rows)
    for row in rows:
        _emit(row)
    return EXIT_OK


def cmd_eval_keyspace(args, cfg) -> int:
    rows = ev.eval_keyspace(cfg.keyspace_N, cfg.f)
    ev.write_rows(_out_dir(args), "keyspace.csv", rows)
    for row in rows:
        _emit(row)
    return EXIT_OK


def cmd_eval_energy(args, cfg) -> int:
    report = ev.eval_energy_leak(cfg, trials=args.trials or cfg.energy_trials)
    ev.write_rows(_out_dir(args), "energy.csv", report)
    _emit(report)
    return EXIT_OK


def cmd_eval_attack(args, cfg) -> int:
    report = ev.eval_plaintext_attack(cfg, pairs=args.pairs)
    ev.write_rows(_out_dir(args), "attack.csv", report)
    _emit(report)
    return EXIT_OK


def cmd_keygen(args, cfg) -> int:
    """Write fresh sensor, cloud and user key files (a convenience, not a protocol)."""
    rng = np.random.default_rng(args.seed) if args.deterministic else None
    keys = SecretKeys.generate(rng)
    out = _out_dir(args)
    io.write_keys(out / "sensor.keys", k1=keys.k1, k2=keys.k2, k3=keys.k3)
    io.write_keys(out / "cloud.keys", k3=keys.k3)
    io.write_keys(out / "user.keys", k1=keys.k1, k2=keys.k2)
    _emit({"command": "keygen", "files": ["sensor.keys", "cloud.keys", "user.keys"]})
    return EXIT_OK


COMMANDS = {
    "sense": cmd_sense, "reconstruct": cmd_reconstruct, "request": cmd_request,
    "eval-ber": cmd_eval_ber, "eval-ap": cmd_eval_ap, "eval-keyspace": cmd_eval_keyspace,
    "eval-energy": cmd_eval_energy, "eval-attack": cmd_eval_attack, "keygen": cmd_keygen,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="key = value config file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (u64)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")

    parser = argparse.ArgumentParser(prog="csoutsource", parents=[common],
                                     description="Outsourced compressed-sensing toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sense", parents=[common], help="sensor: encode signals")
    p.add_argument("--keys", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--image-shape", help="HxW for headerless .raw images")

    p = sub.add_parser("reconstruct", parents=[common], help="cloud: solve the sparse recovery")
    p.add_argument("--cloud-key", required=True, help="keys file holding only k3")
    p.add_argument("--package", required=True)

    p = sub.add_parser("request", parents=[common], help="user: access, verify, decrypt")
    p.add_argument("--coeffs", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--ap", help="access password in hex")
    group.add_argument("--ap-file")
    p.add_argument("--auth", required=True)
    p.add_argument("--cloud-key", required=True)
    p.add_argument("--user-keys", required=True)

    p = sub.add_parser("eval-ber", parents=[common], help="MAC BER vs CR per scenario")
    p.add_argument("--trials", type=int)
    p.add_argument("--timing", action="store_true", help="record solver wall time")
    p = sub.add_parser("eval-ap", parents=[common], help="access-password sensitivity")
    p.add_argument("--trials", type=int)
    sub.add_parser("eval-keyspace", parents=[common], help="brute-force key space")
    p = sub.add_parser("eval-energy", parents=[common], help="energy leakage correlation")
    p.add_argument("--trials", type=int)
    p = sub.add_parser("eval-attack", parents=[common], help="known-plaintext attack")
    p.add_argument("--pairs", type=int)
    p = sub.add_parser("keygen", parents=[common], help="write role key files")
    p.add_argument("--deterministic", action="store_true", help="derive keys from --seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for name, default in (("config", None), ("seed", None), ("out", ".")):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        overrides = {} if args.seed is None else {"seed": args.seed}
        cfg = load_config(args.config, **overrides)
        if args.seed is None:
            args.seed = cfg.seed
        if not 0 <= args.seed < 1 << 64:
            raise InvalidParameterError("seed must be an unsigned 64-bit integer")
        return COMMANDS[args.command](args, cfg)
    except (CSError, OSError, ValueError) as exc:
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
