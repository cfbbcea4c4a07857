import numpy as np
import pytest

from biofilm1d.dissipativity import (
    coefficient_crosscheck,
    dissipation_matrix,
    equilibrium,
    is_totally_dissipative,
    param_family,
    rh_check,
    rh_coefficients,
    sweep,
    symmetrized_A0D,
)
from biofilm1d.errors import InvalidParameter, NoPositiveEquilibrium
from biofilm1d.model import TABLE1, ModelParams, reaction

from conftest import random_params

# larger root of -3.366175e10 a^2 + 4.1829869e10 a - 8.303370950e9 (quadratic formula)
_QA, _QB, _QC = -3.366175e10, 4.1829869e10, -8.303370950e9
QUADRATIC_UPPER_ROOT = (-_QB - np.sqrt(_QB**2 - 4 * _QA * _QC)) / (2 * _QA)


def test_equilibrium_table1(table1):
    ub = equilibrium(table1)
    # closed form by hand: Bbar = 0.975 / (1 + 0.05 + 2.4)
    assert ub.Bbar == pytest.approx(0.975 / 3.45, rel=1e-14)
    assert ub.Bbar == pytest.approx(0.2826087, rel=1e-6)
    assert ub.Ebar == pytest.approx(0.6782609, rel=1e-6)
    assert ub.Dbar == pytest.approx(0.0141304, rel=1e-5)
    assert ub.vbar == 0.0
    assert ub.Lbar == pytest.approx(table1.kD / table1.kB, rel=1e-14)


def test_equilibrium_limits():
    p = ModelParams(1.0, 1.0, 1.0 - 1e-9, 1.0, 1.0, 0.5)
    assert equilibrium(p).Bbar < 1e-8
    with pytest.raises(NoPositiveEquilibrium):
        equilibrium(ModelParams(1.0, 1.0, 1.0, 1.0, 1.0, 0.5))
    with pytest.raises(NoPositiveEquilibrium):
        equilibrium(ModelParams(1.0, 1.0, 2.0, 1.0, 1.0, 0.5))


def test_equilibrium_residual_random_params(rng):
    for _ in range(100):
        p = random_params(rng)
        ub = equilibrium(p)
        assert 0 < ub.Bbar < 1 and 0 < ub.Ebar < 1 and 0 < ub.Dbar < 1 and 0 < ub.Lbar < 1
        g = reaction(ub.state, p).as_array()
        assert np.max(np.abs(g)) <= 1e-12 * max(p.kB, p.kE, p.kD, p.kN, p.eps)
        assert ub.Lbar == pytest.approx(p.kD / p.kB, rel=1e-12)


def test_dissipation_matrix_at_equilibrium(table1):
    ub = equilibrium(table1)
    D = dissipation_matrix(ub.state, ub, table1)
    kB, kE, kD, kN, eps, al, M = (table1.kB, table1.kE, table1.kD, table1.kN, table1.eps,
                                 table1.alpha, table1.M)
    np.testing.assert_allclose(D[0], [-ub.Bbar * kB] * 3 + [0], rtol=1e-14)
    np.testing.assert_allclose(D[1, :3], [kE * (ub.Lbar - ub.Bbar), -eps - ub.Bbar * kE, -ub.Bbar * kE],
                               rtol=1e-12)
    np.testing.assert_allclose(D[2], [al * kD, 0, -kN, 0], rtol=1e-12)
    friction = -(kB**2) * M / (kD * (kB - kD))
    assert D[3, 3] == pytest.approx(friction, rel=1e-12)
    assert D[3, 3] == pytest.approx(-M / (ub.Lbar * (1 - ub.Lbar)), rel=1e-12)


def test_factorization_near_equilibrium(table1, rng):
    ub = equilibrium(table1)
    for _ in range(100):
        u = ub.as_array() + rng.uniform(-0.01, 0.01, 4)
        G = reaction(u, table1).as_array()
        DG = dissipation_matrix(u, ub, table1) @ (u - ub.as_array())
        assert np.linalg.norm(G - DG) <= 1e-12 * np.linalg.norm(G) + 1e-18


def test_factorization_far_from_equilibrium(rng):
    p = TABLE1
    ub = equilibrium(p)
    n = 0
    while n < 1000:
        u = rng.uniform(0.01, 0.9, 4)
        if not 0 < 1 - u[:3].sum() < 1:
            continue
        n += 1
        G = reaction(u, p).as_array()
        DG = dissipation_matrix(u, ub, p) @ (u - ub.as_array())
        assert np.linalg.norm(G - DG) <= 1e-12 * np.linalg.norm(G)


def test_symmetrized_matrix_structure(table1):
    S = symmetrized_A0D(table1)
    np.testing.assert_array_equal(S, S.T)
    assert np.all(S[3, :3] == 0) and np.all(S[:3, 3] == 0)
    ub = equilibrium(table1)
    expected = -table1.kB**2 * table1.M * ub.Bbar / (table1.kD * (table1.kB - table1.kD))
    assert S[3, 3] == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("M", [1e-12, 1e-6, 1.0, 1e3])
def test_friction_entry_negative(M):
    p = ModelParams(**{**TABLE1.as_dict(), "M": M})
    assert symmetrized_A0D(p)[3, 3] < 0


def test_symmetrized_block_matches_published_matrix(table1):
    # the published entries carry the positive factor (kB - kD)/gamma
    ub = equilibrium(table1)
    kB, kE, kD, kN, eps, al = (table1.kB, table1.kE, table1.kD, table1.kN, table1.eps, table1.alpha)
    Bb, Lb = ub.Bbar, ub.Lbar
    published = np.array([
        [-Bb * kB * kD, kB / 2 * (eps * (Lb - Bb) - kD * Bb), kD / 2 * (kN - Bb * kB)],
        [kB / 2 * (eps * (Lb - Bb) - kD * Bb), -eps * kB * (eps + kE * Bb) / kE, -eps * kB * Bb / 2],
        [kD / 2 * (kN - Bb * kB), -eps * kB * Bb / 2, -(kN**2) / al],
    ])
    S = symmetrized_A0D(table1)[:3, :3] * (kB - kD) / table1.gamma
    np.testing.assert_allclose(S, published, rtol=1e-12)


def test_rh_coefficients_from_eigenvalues(table1):
    a1, a2, a3 = rh_coefficients(table1)
    S = symmetrized_A0D(table1)[:3, :3] * (table1.kB - table1.kD) / table1.gamma
    # independent route: polynomial coefficients from the eigenvalues
    coeffs = np.poly(np.linalg.eigvalsh(S))
    np.testing.assert_allclose([a1, a2, a3], coeffs[1:], rtol=1e-9)
    assert a1 > 0


def test_rh_scaling_homogeneity():
    p = param_family(0.8)
    a = rh_coefficients(p)
    b = rh_coefficients(p.scaled(10.0))
    np.testing.assert_allclose(b, [a[0] * 1e2, a[1] * 1e4, a[2] * 1e6], rtol=1e-10)
    assert rh_check(*a) == rh_check(*b)


def test_closed_form_a3_agrees(table1):
    cc = coefficient_crosscheck(table1)
    assert cc["a3"]["rel_diff"] < 1e-10
    assert cc["a1"]["rel_diff"] > 1  # printed eps*Bbar term lacks a factor kB


@pytest.mark.parametrize(
    "coeffs, expected",
    [((1, 1, 1), (True, True, False)), ((1, 3, 1), (True, True, True)), ((-1, 1, 1), (False, True, False))],
)
def test_rh_check(coeffs, expected):
    assert rh_check(*coeffs) == expected


def test_table1_totally_dissipative(table1):
    rep = is_totally_dissipative(table1)
    assert rep.verdict and all(rep.rh_ok) and rep.block44_negative and rep.a1 > 0
    assert rep.max_eigenvalue < 0


@pytest.mark.parametrize("a, verdict", [(0.5, True), (0.7, True), (0.98, True), (1.01, False), (1.2, False)])
def test_family_verdicts(a, verdict):
    rep = is_totally_dissipative(param_family(a))
    assert rep.verdict is verdict
    assert rep.rh_ok[0]


def test_param_family_values():
    p = param_family(1.0)
    assert (p.kN, p.kE, p.kD, p.kB) == pytest.approx((1.25e-6, 1.25e-5, 2.5e-7, 8.75e-6), rel=1e-14)
    p = param_family(0.5)
    assert (p.kN, p.kE, p.kD, p.kB) == pytest.approx((6.25e-7, 6.25e-6, 1.25e-7, 4.375e-6), rel=1e-14)
    for a in (0.3, 1.0, 1.7):
        p = param_family(a)
        assert p.kB / p.kD == pytest.approx(35.0, rel=1e-14)
    with pytest.raises(InvalidParameter):
        param_family(0.0)
    with pytest.raises(InvalidParameter):
        param_family(-1.0)


def test_sweep_interval_and_transition():
    res = sweep(0.5, 1.5, 0.01)
    assert len(res.rows) == 101
    for r in res.rows:
        if r.a <= 0.99:
            assert r.verdict, r.a
        if r.a >= 1.0:
            assert not r.verdict, r.a
    assert len(res.transitions) == 1
    lo, hi = res.transitions[0]
    assert hi - lo <= 1e-4
    assert 0.99 < res.a_star[0] < 1.0
    assert res.a_star[0] == pytest.approx(QUADRATIC_UPPER_ROOT, abs=1e-4)


def test_sweep_single_point():
    res = sweep(0.7, 0.7, 0.01)
    assert len(res.rows) == 1 and res.transitions == []
    assert res.rows[0].verdict == is_totally_dissipative(param_family(0.7)).verdict


@pytest.mark.parametrize("args", [(0.5, 1.5, 0.0), (0.5, 1.5, -0.1), (1.5, 0.5, 0.01), (0.0, 1.0, 0.1)])
def test_sweep_rejects_bad_range(args):
    with pytest.raises(InvalidParameter):
        sweep(*args)


def test_verdict_equals_eigenvalue_sign_over_sweep():
    for r in sweep(0.5, 1.5, 0.01).rows:
        S = symmetrized_A0D(param_family(r.a))
        lam = np.linalg.eigvalsh(S).max()
        if abs(lam) > 1e-12 * np.abs(S).max():
            assert r.verdict == (lam < 0)


@pytest.mark.parametrize("factor", [1e-3, 1.0, 1e3])
def test_verdict_scale_invariance(rng, factor):
    for _ in range(20):
        p = random_params(rng)
        assert is_totally_dissipative(p).verdict == is_totally_dissipative(p.scaled(factor)).verdict


def test_a1_positive_random(rng):
    for _ in range(200):
        assert rh_coefficients(random_params(rng))[0] > 0
