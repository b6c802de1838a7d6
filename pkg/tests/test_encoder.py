import numpy as np
import pytest

from csoutsource.encoder import (AccessPassword, MeasurementPackage, acquire, ap_chains,
                                 gen_access_password, gen_mac)
from csoutsource.errors import InvalidDimensionError, InvalidParameterError
from csoutsource.keymat import (KeyedMatrices, Permutation, ScaleDiag, SecretKeys, SignDiag,
                                SystemParams, derive_sign_diag, public_basis)
from csoutsource.solver import SolverConfig, SsrTask, omp

from helpers import sparse_spikes


def identity_matrices(N=4, L=2, m=1, basis="identity"):
    params = SystemParams(N=N, L=L, m=m, n=2, production=False, basis=basis)
    return params, KeyedMatrices.from_parts(params, Permutation.identity(N),
                                            ScaleDiag.identity(N), SignDiag.all_positive(N))


def test_identity_keys_collapse_to_block_sum():
    params, mats = identity_matrices()
    x = public_basis(4, "identity") @ np.array([1.0, 2.0, 3.0, 4.0])
    package, _ = acquire(x, None, params, matrices=mats)
    np.testing.assert_allclose(package.y, [3.0, 7.0])


def test_identity_keys_with_dct_measure_block_sums_of_signal():
    params, mats = identity_matrices(basis="dct")
    s = np.array([1.0, 2.0, 3.0, 4.0])
    x = public_basis(4) @ s
    package, _ = acquire(x, None, params, matrices=mats)
    np.testing.assert_allclose(package.y, [x[0] + x[1], x[2] + x[3]], atol=1e-14)


def test_zero_signal(keys, params):
    package, y_mac = acquire(np.zeros(256), keys, params)
    assert not package.y.any() and not y_mac.any()
    assert package.M == 128 and y_mac.shape == (16,)


def test_acquire_matches_separate_projections(keys, params, rng):
    mats = KeyedMatrices.derive(keys, params)
    x = rng.standard_normal(256)
    package, y_mac = acquire(x, keys, params)
    s = mats.basis.apply_inverse(x)
    np.testing.assert_allclose(package.y, mats.sensing.matrix @ s, atol=1e-10)
    np.testing.assert_allclose(y_mac, mats.mac.matrix @ s, atol=1e-10)


def test_acquire_is_linear(keys, params, rng):
    mats = KeyedMatrices.derive(keys, params)
    x1, x2 = rng.standard_normal((2, 256))
    a, b = 1.7, -0.3
    y1, m1 = acquire(x1, None, params, matrices=mats)
    y2, m2 = acquire(x2, None, params, matrices=mats)
    y, mm = acquire(a * x1 + b * x2, None, params, matrices=mats)
    np.testing.assert_allclose(y.y, a * y1.y + b * y2.y, atol=1e-8)
    np.testing.assert_allclose(mm, a * m1 + b * m2, atol=1e-8)


def test_package_carries_no_mac_material(keys, params):
    package, y_mac = acquire(np.ones(256), keys, params)
    assert set(vars(package)) == {"y", "N", "L", "m", "package_id"}
    assert package.y.size == params.N // params.L


def test_acquire_rejects_bad_input(keys, params):
    with pytest.raises(InvalidDimensionError):
        acquire(np.zeros(255), keys, params)
    bad = np.zeros(256)
    bad[3] = np.inf
    with pytest.raises(InvalidParameterError):
        acquire(bad, keys, params)


def test_round_trip_support_recovery(params):
    rng = np.random.default_rng(2024)
    hits = 0
    for _ in range(100):
        mats = KeyedMatrices.derive(SecretKeys.generate(rng), params)
        s, support = sparse_spikes(rng, 256, 8)
        package, _ = acquire(mats.basis.apply(s), None, params, matrices=mats)
        result = omp(SsrTask(mats.sensing.matrix, package.y), SolverConfig(K=8))
        hits += np.array_equal(np.sort(result.support), support)
    assert hits >= 95


def test_package_validates_length():
    with pytest.raises(InvalidDimensionError):
        MeasurementPackage(np.zeros(3), 8, 2, 1)


# ---------------------------------------------------------------- MAC


def test_mac_sign_convention():
    assert gen_mac([0.5, -0.2, 0.0]).bits.tolist() == [1, 0, 1]
    assert not gen_mac(-np.arange(1, 6)).bits.any()


def test_mac_rejects_non_finite():
    with pytest.raises(InvalidParameterError):
        gen_mac([1.0, np.nan])


def test_mac_bits_are_balanced(params):
    rng = np.random.default_rng(77)
    mats = KeyedMatrices.derive(SecretKeys.generate(rng), params)
    ones = total = 0
    for _ in range(1000):
        s, _ = sparse_spikes(rng, 256, 8)
        bits = gen_mac(mats.mac.matrix @ s).bits
        ones += int(bits.sum())
        total += bits.size
    assert 0.45 <= ones / total <= 0.55


# ----------------------------------------------------- access password


def test_w_from_signs():
    assert SignDiag(np.array([1, -1, 1, 1])).bits.tolist() == [1, 0, 1, 1]


def test_chains_hand_evaluated():
    p, q, ap = ap_chains(np.array([1, 0, 1, 1]), 2)
    assert (p.tolist(), q.tolist(), ap.tolist()) == ([1, 1], [0, 1], [1, 0])


def test_password_length_and_hex():
    ap = gen_access_password(bytes(16), 512, 128)
    assert ap.n == 128 and len(ap.hex()) == 32
    assert ap.hex() == ap.hex().upper()
    assert AccessPassword.from_hex(ap.hex()) == ap


def test_password_deterministic():
    assert gen_access_password(bytes(16), 256, 128) == gen_access_password(bytes(16), 256, 128)


def test_password_divisibility_and_production_floor():
    with pytest.raises(InvalidDimensionError):
        gen_access_password(bytes(16), 250, 128)
    with pytest.raises(InvalidParameterError):
        gen_access_password(bytes(16), 256, 64)
    assert gen_access_password(bytes(16), 256, 64, production=False).n == 64


def test_password_collisions_exist_when_n_below_N():
    """AP keeps only n bits of the N-bit w, so distinct w collide."""
    rng = np.random.default_rng(5)
    seen = {}
    for _ in range(200):
        w = rng.integers(0, 2, 16).astype(np.uint8)
        ap = tuple(ap_chains(w, 4)[2])
        if ap in seen and not np.array_equal(seen[ap], w):
            return
        seen[ap] = w
    pytest.fail("no collision among 200 random w")


def test_single_w_flip_avalanche():
    """Flip one random element of w (N=512, n=128): hex change rate near 0.94.

    The chains are linear, so this measures ~0.5 rather than the tabulated rate.
    """
    rng = np.random.default_rng(11)
    rates = []
    for _ in range(100):
        w = derive_sign_diag(rng.bytes(16), 512).bits
        base = AccessPassword(ap_chains(w, 128)[2]).hex()
        w2 = w.copy()
        w2[rng.integers(512)] ^= 1
        other = AccessPassword(ap_chains(w2, 128)[2]).hex()
        rates.append(np.mean([a != b for a, b in zip(base, other)]))
    assert 0.90 <= np.mean(rates) <= 0.97
