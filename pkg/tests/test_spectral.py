import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edbeam import (
    InvalidConfigurationError,
    ModalState,
    analyze,
    build_model,
    frac_norm,
    phase_norm,
    synthesize,
)


def test_eigenvalues_unit_domain():
    m = build_model(4, math.pi, 0.0, 64)
    assert np.allclose(m.mu, [1.0, 4.0, 9.0, 16.0], atol=1e-14)
    assert np.allclose(m.sigma, [1.0, 16.0, 81.0, 256.0], atol=1e-12)


def test_single_mode_embedding_constant():
    m = build_model(1, math.pi, 0.0, 8)
    assert m.sigma[0] == pytest.approx(1.0, abs=1e-15)


def test_eigenvalues_high_precision_cross_check():
    # independent evaluation of (j pi / L)^2 at 50 digits
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 50
    m = build_model(8, 2.0, 0.5, 32)
    for j in range(1, 9):
        ref = float((j * mpmath.pi / 2) ** 2)
        assert m.mu[j - 1] == pytest.approx(ref, rel=1e-15)
        assert m.sigma[j - 1] == pytest.approx(ref**2, rel=1e-14)
    assert m.mu[0] == pytest.approx(2.4674011002723395, rel=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_modes=0, length=1.0),
        dict(n_modes=4, length=0.0),
        dict(n_modes=4, length=-2.0),
        dict(n_modes=4, length=1.0, kappa=-0.1),
        dict(n_modes=4, length=1.0, quad_points=7),
    ],
)
def test_invalid_configuration(kwargs):
    with pytest.raises(InvalidConfigurationError):
        build_model(**kwargs)


def test_discrete_orthonormality():
    m = build_model(6, 2.5, 0.0, 12)
    gram = m.quad_weight * (m.basis_table @ m.basis_table.T)
    assert np.max(np.abs(gram - np.eye(6))) < 1e-12


def test_synthesize_zero_and_basis():
    m = build_model(5, math.pi, 0.0, 40)
    assert np.all(synthesize(m, np.zeros(5)) == 0.0)
    e1 = np.eye(5)[0]
    field = synthesize(m, e1)
    ref = math.sqrt(2.0 / math.pi) * np.sin(m.quad_nodes)
    assert np.max(np.abs(field - ref)) < 1e-14


def test_analyze_zero_and_basis_row():
    m = build_model(5, math.pi, 0.0, 40)
    assert np.all(analyze(m, np.zeros(40)) == 0.0)
    c = analyze(m, m.basis_table[1])
    assert np.max(np.abs(c - np.eye(5)[1])) < 1e-12


def test_analyze_cubed_sine_closed_form():
    # sin^3 x = (3 sin x - sin 3x) / 4, so the modal content is exactly
    # two coefficients after undoing the sqrt(2/pi) normalization.
    m = build_model(4, math.pi, 0.0, 64)
    field = np.sin(m.quad_nodes) ** 3
    c = analyze(m, field)
    scale = math.sqrt(math.pi / 2.0)
    expect = np.array([0.75 * scale, 0.0, -0.25 * scale, 0.0])
    assert np.max(np.abs(c - expect)) < 1e-12


def test_round_trip_random_coefficients():
    m = build_model(8, 1.7, 0.0, 16)
    rng = np.random.default_rng(0)
    for _ in range(5):
        c = rng.standard_normal(8)
        assert np.max(np.abs(analyze(m, synthesize(m, c)) - c)) < 1e-12


def test_length_mismatch_errors():
    m = build_model(4, 1.0, 0.0, 16)
    with pytest.raises(ValueError):
        synthesize(m, np.zeros(5))
    with pytest.raises(ValueError):
        analyze(m, np.zeros(15))
    with pytest.raises(ValueError):
        frac_norm(m, np.zeros(3), "A", 0.5)


def test_frac_norm_examples():
    m = build_model(3, math.pi, 0.0, 24)
    e1 = np.eye(3)[0]
    assert frac_norm(m, e1, "A1", 0.5) == pytest.approx(1.0, abs=1e-15)
    c = np.array([0.3, -1.2, 0.7])
    assert frac_norm(m, c, "A", 0.0) == pytest.approx(np.linalg.norm(c), rel=1e-15)
    with pytest.raises(ValueError):
        frac_norm(m, c, "A2", 0.5)


def test_commutativity_single_mode():
    m = build_model(3, math.pi, 0.0, 24)
    e1 = np.eye(3)[0]
    for alpha in (0.0, 0.25, 0.5, 1.0):
        assert frac_norm(m, e1, "A", alpha) == pytest.approx(
            frac_norm(m, e1, "A1", alpha / 2.0), rel=1e-14
        )


@settings(max_examples=100, deadline=None)
@given(
    s=st.floats(min_value=0.0, max_value=1.0),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_commutativity_property(s, seed):
    m = build_model(6, 2.2, 0.0, 12)
    c = np.random.default_rng(seed).standard_normal(6)
    na = frac_norm(m, c, "A", s)
    n1 = frac_norm(m, c, "A1", s / 2.0)
    assert abs(na - n1) <= 1e-12 * max(na, 1e-300)


def test_embedding_chain_constant_attained_at_first_mode():
    m = build_model(10, 3.0, 0.0, 40)
    ratios = np.sqrt(m.mu) / np.sqrt(m.sigma)
    assert int(np.argmax(ratios)) == 0
    const = float(ratios[0])
    assert const == pytest.approx(m.mu[0] ** -0.5, rel=1e-14)
    rng = np.random.default_rng(1)
    for _ in range(10):
        c = rng.standard_normal(10)
        assert frac_norm(m, c, "A", 0.5) <= const * frac_norm(m, c, "A1", 0.5) * (
            1.0 + 1e-12
        )


def test_discrete_parseval():
    m = build_model(7, math.pi, 0.0, 14)
    rng = np.random.default_rng(2)
    c = rng.standard_normal(7)
    field = synthesize(m, c)
    quad_norm = math.sqrt(m.quad_weight * float(field @ field))
    assert quad_norm == pytest.approx(np.linalg.norm(c), abs=1e-12)


def test_phase_norm_examples():
    m = build_model(4, math.pi, 0.0, 32)
    e1 = np.eye(4)[0]
    assert phase_norm(m, ModalState(e1, np.zeros(4))) == pytest.approx(1.0, abs=1e-15)
    assert phase_norm(m, ModalState(np.zeros(4), e1)) == pytest.approx(1.0, abs=1e-15)
    rng = np.random.default_rng(3)
    st_ = ModalState(rng.standard_normal(4), rng.standard_normal(4))
    recomputed = math.sqrt(
        frac_norm(m, st_.a, "A1", 0.5) ** 2 + frac_norm(m, st_.b, "A1", 0.0) ** 2
    )
    assert phase_norm(m, st_) == pytest.approx(recomputed, rel=1e-13)


def test_modal_state_rejects_nonfinite():
    with pytest.raises(ValueError):
        ModalState(np.array([1.0, np.nan]), np.zeros(2))
    with pytest.raises(ValueError):
        ModalState(np.array([1.0, np.inf]), np.zeros(2))
