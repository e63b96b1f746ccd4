"""Transfer-matrix layer: cosines, Fresnel, composition, calibration."""

import cmath
import math

import numpy as np
import pytest

from homsensor.errors import (
    CalibrationError, StackDefinitionError, UnphysicalPointError,
)
from homsensor.materials import constant_material
from homsensor.tmm import (
    Layer, LayerStack, boundary_matrix, calibrate_stack, fresnel,
    layer_cosines, load_stack, make_sensor_stack, propagation_matrix,
    response_derivatives, reversed_stack, save_stack, stack_from_dict,
    stack_response, stack_to_dict, stack_transfer,
)

from oracles import airy_response


def two_layer(n_a, n_b):
    return LayerStack(layers=(Layer(constant_material("a", n_a), None),
                              Layer(constant_material("b", n_b), None)))


def slab_stack(n_out, n_mid, d_nm):
    return LayerStack(layers=(Layer(constant_material("out", n_out), None),
                              Layer(constant_material("mid", n_mid), d_nm),
                              Layer(constant_material("out", n_out), None)))


def lossless_sensor(d_metal_nm=50.0, d_sample_nm=500.0, n_film=2.0):
    film = constant_material("film", n_film)
    prism = constant_material("prism", 1.5)
    sample = constant_material("sample", 1.31)
    return LayerStack(layers=(Layer(prism, None), Layer(film, d_metal_nm),
                              Layer(sample, d_sample_nm),
                              Layer(film, d_metal_nm), Layer(prism, None)),
                      sample_layer=2, sample_n=1.31)


# ---------------------------------------------------------------------------
# propagation cosines
# ---------------------------------------------------------------------------

def test_cosines_equal_for_equal_indices():
    cos = layer_cosines(slab_stack(1.5, 1.5, 100.0), 800.0, 35.0)
    assert cos[0] == pytest.approx(cos[1], abs=1e-15)
    assert cos[1] == pytest.approx(cos[2], abs=1e-15)


def test_cosines_total_internal_reflection_branch():
    cos = layer_cosines(slab_stack(1.5, 1.0, 100.0), 800.0, 70.0)
    inner = cos[1]
    assert inner.real == pytest.approx(0.0, abs=1e-12)
    assert inner.imag > 0.0


def test_cosines_normal_incidence():
    cos = layer_cosines(slab_stack(1.5, 1.2, 50.0), 800.0, 0.0)
    for c in cos:
        assert c == pytest.approx(1.0, abs=1e-15)


# ---------------------------------------------------------------------------
# single interface
# ---------------------------------------------------------------------------

def test_fresnel_no_interface():
    for pol in ("tm", "te"):
        r, t = fresnel(1.5, 1.5, 1.0, 1.0, pol)
        assert r == pytest.approx(0.0, abs=1e-15)
        assert t == pytest.approx(1.0, abs=1e-15)


def test_fresnel_normal_incidence_reflectance():
    for pol in ("tm", "te"):
        r, _ = fresnel(1.5, 1.0, 1.0, 1.0, pol)
        assert abs(r) == pytest.approx(0.2, abs=1e-12)


def test_fresnel_flux_conservation_below_critical():
    """Poynting-flux check: n cos(theta) weighted powers sum to one."""
    n_a, n_b = 1.5, 1.0
    theta_a = math.radians(30.0)  # below the 41.8 deg critical angle
    sin_b = n_a * math.sin(theta_a) / n_b
    cos_a = math.cos(theta_a)
    cos_b = math.sqrt(1.0 - sin_b ** 2)
    for pol in ("tm", "te"):
        r, t = fresnel(n_a, n_b, cos_a, cos_b, pol)
        flux = (n_b * cos_b) / (n_a * cos_a)
        total = abs(r) ** 2 + flux * abs(t) ** 2
        assert total == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# propagation matrix
# ---------------------------------------------------------------------------

def test_propagation_zero_thickness_identity():
    P = propagation_matrix(1.5, 0.0, 800.0, 0.8)
    assert np.allclose(P, np.eye(2), atol=1e-15)


def test_propagation_lossless_unit_modulus():
    P = propagation_matrix(1.5, 320.0, 800.0, 0.77)
    assert abs(P[0, 0]) == pytest.approx(1.0, abs=1e-12)
    assert abs(P[1, 1]) == pytest.approx(1.0, abs=1e-12)


def test_propagation_evanescent_real_decay():
    kappa = 0.6
    d, lam, n = 150.0, 800.0, 1.0
    P = propagation_matrix(n, d, lam, 1j * kappa)
    decay = math.exp(-2.0 * math.pi / lam * n * kappa * d)
    entries = sorted((P[0, 0], P[1, 1]), key=abs)
    for e in entries:
        assert e.imag == pytest.approx(0.0, abs=1e-15)
    assert entries[0].real == pytest.approx(decay, rel=1e-12)
    assert entries[1].real == pytest.approx(1.0 / decay, rel=1e-12)


def test_propagation_negative_thickness_rejected():
    with pytest.raises(StackDefinitionError):
        propagation_matrix(1.5, -1.0, 800.0, 1.0)


# ---------------------------------------------------------------------------
# stack composition
# ---------------------------------------------------------------------------

def test_single_interface_transfer_equals_boundary():
    stack = two_layer(1.5, 1.2)
    for pol in ("tm", "te"):
        M = stack_transfer(stack, 800.0, 25.0, polarization=pol)
        cos = layer_cosines(stack, 800.0, 25.0)
        B = boundary_matrix(1.5, 1.2, cos[0], cos[1], pol)
        assert np.allclose(M, B, atol=1e-15)


def test_zero_thickness_insertion_invariant():
    base = slab_stack(1.5, 2.0, 120.0)
    padded = LayerStack(layers=(
        base.layers[0],
        Layer(constant_material("ghost", 3.3 + 0.2j), 0.0),
        base.layers[1],
        base.layers[2],
    ))
    for pol in ("tm", "te"):
        a = stack_response(base, 800.0, 40.0, polarization=pol)
        b = stack_response(padded, 800.0, 40.0, polarization=pol)
        assert b.t == pytest.approx(a.t, abs=1e-14)
        assert b.r == pytest.approx(a.r, abs=1e-14)


def test_default_stack_matches_airy_oracle(stack):
    lam, theta, n_s = 800.0, 70.0, 1.31
    resp = stack_response(stack, lam, theta, n_s)
    indices = [layer.material.index(lam) for layer in stack.layers]
    indices[2] = complex(n_s)
    thick = [layer.thickness_nm for layer in stack.layers[1:-1]]
    t_ref, r_ref = airy_response(indices, thick, lam, theta, "tm")
    assert abs(resp.t - t_ref) <= 1e-10 * max(1.0, abs(t_ref))
    assert abs(resp.r - r_ref) <= 1e-10 * max(1.0, abs(r_ref))


def test_oracle_equivalence_random_points(stack, rng):
    lo, hi = stack.wavelength_window_nm()
    for _ in range(100):
        lam = rng.uniform(max(lo, 400.0), min(hi, 1500.0))
        theta = rng.uniform(0.0, 89.0)
        n_s = rng.uniform(1.0, 2.0)
        pol = "tm" if rng.integers(2) else "te"
        resp = stack_response(stack, lam, theta, n_s, pol)
        indices = [layer.material.index(lam) for layer in stack.layers]
        indices[2] = complex(n_s)
        thick = [layer.thickness_nm for layer in stack.layers[1:-1]]
        t_ref, r_ref = airy_response(indices, thick, lam, theta, pol)
        assert abs(resp.t - t_ref) <= 1e-10 * max(1.0, abs(t_ref))
        assert abs(resp.r - r_ref) <= 1e-10 * max(1.0, abs(r_ref))


# ---------------------------------------------------------------------------
# derived response
# ---------------------------------------------------------------------------

def test_index_matched_stack_transmits_fully():
    glass = constant_material("glass", 1.5)
    stack = LayerStack(layers=(Layer(glass, None), Layer(glass, 50.0),
                               Layer(glass, 500.0), Layer(glass, 50.0),
                               Layer(glass, None)),
                       sample_layer=2, sample_n=1.5)
    resp = stack_response(stack, 800.0, 70.0, 1.5)
    assert resp.T == pytest.approx(1.0, abs=1e-12)
    assert resp.R == pytest.approx(0.0, abs=1e-12)
    assert 1.0 - resp.T - resp.R == pytest.approx(0.0, abs=1e-12)


def test_lossless_energy_conservation_sweep():
    stack = lossless_sensor()
    theta = np.linspace(0.0, 85.0, 171)
    for pol in ("tm", "te"):
        resp = stack_response(stack, 800.0, theta, 1.31, pol)
        total = np.asarray(resp.T) + np.asarray(resp.R)
        assert np.max(np.abs(total - 1.0)) < 1e-9


def test_calibrated_stack_balanced(stack):
    resp = stack_response(stack, 800.0, 70.0, 1.31)
    assert abs(resp.T - resp.R) < 0.01


def test_passivity_random_points(stack, rng):
    for _ in range(200):
        lam = rng.uniform(400.0, 1500.0)
        theta = rng.uniform(0.0, 89.0)
        n_s = rng.uniform(1.0, 2.0)
        resp = stack_response(stack, lam, theta, n_s)
        assert 1.0 - resp.T - resp.R >= -1e-9
        t_flux = math.sqrt(max(resp.T, 0.0)) * cmath.exp(1j * cmath.phase(resp.t))
        for sign in (+1.0, -1.0):
            assert abs(t_flux + sign * resp.r) <= 1.0 + 1e-9


def test_reversal_symmetry(stack):
    rev = reversed_stack(stack)
    for pol in ("tm", "te"):
        a = stack_response(stack, 800.0, 70.0, 1.30, pol)
        b = stack_response(rev, 800.0, 70.0, 1.30, pol)
        assert b.t == pytest.approx(a.t, abs=1e-12)
        assert b.r == pytest.approx(a.r, abs=1e-12)


def test_phase_convention():
    """phi_tr is arg(r) - arg(t), wrapped into (-pi, pi]."""
    stack = make_sensor_stack()
    resp = stack_response(stack, 800.0, 70.0, 1.31)
    expect = cmath.phase(resp.r) - cmath.phase(resp.t)
    expect = math.remainder(expect, 2.0 * math.pi)
    if expect <= -math.pi:
        expect += 2.0 * math.pi
    assert resp.phi_tr == pytest.approx(expect, abs=1e-12)
    assert -math.pi < resp.phi_tr <= math.pi


def test_vectorized_matches_scalar(stack):
    ns = np.array([1.25, 1.29, 1.33])
    resp = stack_response(stack, 800.0, 70.0, ns)
    for i, n in enumerate(ns):
        one = stack_response(stack, 800.0, 70.0, float(n))
        assert resp.T[i] == pytest.approx(one.T, abs=1e-15)
        assert resp.R[i] == pytest.approx(one.R, abs=1e-15)
        assert resp.phi_tr[i] == pytest.approx(one.phi_tr, abs=1e-15)


def test_theta_and_polarization_validation(stack):
    with pytest.raises(StackDefinitionError):
        stack_response(stack, 800.0, 90.0, 1.31)
    with pytest.raises(StackDefinitionError):
        stack_response(stack, 800.0, -1.0, 1.31)
    with pytest.raises(StackDefinitionError):
        stack_response(stack, 800.0, 70.0, 1.31, "tem")


def test_ns_without_sample_layer_rejected():
    fixed = slab_stack(1.5, 2.0, 100.0)
    with pytest.raises(StackDefinitionError):
        stack_response(fixed, 800.0, 40.0, 1.31)


# ---------------------------------------------------------------------------
# derivatives
# ---------------------------------------------------------------------------

def test_derivatives_vanish_for_ns_independent_stack():
    glass = constant_material("glass", 1.5)
    # A zero-thickness sample layer: the response cannot depend on n_s
    # anywhere in the probed range, so every derivative vanishes.
    stack = LayerStack(layers=(Layer(glass, None), Layer(glass, 50.0),
                               Layer(glass, 0.0), Layer(glass, 50.0),
                               Layer(glass, None)),
                       sample_layer=2, sample_n=1.5)
    d = response_derivatives(stack, 800.0, 40.0, 1.5)
    for v in d:
        assert abs(v) < 1e-8


def test_derivative_step_convergence(stack):
    d1 = response_derivatives(stack, 800.0, 70.0, 1.30, step=1e-6)
    d2 = response_derivatives(stack, 800.0, 70.0, 1.30, step=5e-7)
    for a, b in zip(d1, d2):
        assert abs(a - b) <= 1e-6 * max(1.0, abs(a))


def test_derivative_product_mostly_negative(stack):
    ns = np.linspace(1.25, 1.34, 91)
    signs = []
    for n in ns:
        dT, dR, _ = response_derivatives(stack, 800.0, 70.0, float(n))
        signs.append(dT * dR < 0.0)
    assert sum(signs) > 0.5 * len(signs)


# ---------------------------------------------------------------------------
# calibration
# ---------------------------------------------------------------------------

def test_calibration_hits_target(calibration):
    resp = stack_response(calibration.stack, 800.0, 70.0, 1.31)
    assert abs(resp.T - resp.R) < 1e-3
    assert calibration.residual < 1e-3


def test_calibration_fixed_point(calibration):
    again = calibrate_stack(calibration.stack)
    assert again.d_metal_nm == pytest.approx(calibration.d_metal_nm,
                                             abs=1e-9)
    assert again.d_sample_nm == pytest.approx(calibration.d_sample_nm,
                                              abs=1e-9)
    assert not again.changed


def test_calibration_unique_crossing(calibration):
    ns = np.linspace(1.31 - 0.02, 1.31 + 0.02, 81)
    resp = stack_response(calibration.stack, 800.0, 70.0, ns)
    g = np.asarray(resp.T) - np.asarray(resp.R)
    flips = np.sum(np.sign(g[:-1]) * np.sign(g[1:]) < 0)
    assert flips == 1


def test_calibration_failure_lists_range():
    with pytest.raises(CalibrationError) as err:
        calibrate_stack(d_metal_bounds=(20.0, 20.0),
                        d_sample_bounds=(100.0, 100.0))
    msg = str(err.value)
    assert "20" in msg and "100" in msg


def test_calibration_requires_sensor_shape():
    with pytest.raises(StackDefinitionError):
        calibrate_stack(slab_stack(1.5, 2.0, 100.0))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_stack_dict_roundtrip(stack):
    back = stack_from_dict(stack_to_dict(stack))
    a = stack_response(stack, 800.0, 70.0, 1.30)
    b = stack_response(back, 800.0, 70.0, 1.30)
    assert b.t == a.t and b.r == a.r


def test_stack_file_roundtrip(stack, tmp_path):
    path = tmp_path / "stack.json"
    save_stack(stack, path)
    back = load_stack(path)
    a = stack_response(stack, 800.0, 70.0, 1.33)
    b = stack_response(back, 800.0, 70.0, 1.33)
    assert b.t == a.t and b.r == a.r
    assert back.sample_layer == stack.sample_layer
