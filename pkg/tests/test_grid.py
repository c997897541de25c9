"""Grid photoemission emulator against dense-diagonalization and mask oracles."""

import math

import numpy as np
import pytest

from euvq.core import NumericalError, ValidationError
from euvq.grid import (
    FilterSpec,
    GridModel,
    apply_dipole,
    continuum_project,
    edge_density,
    correlation_identity_check,
    dense_hamiltonian,
    evolve,
    gaussian_filter,
    ground_state,
    kinetic_histogram,
    load_checkpoint,
    required_filter_degree,
    save_checkpoint,
    sigma_from_fwhm,
)


def soft_model(n=128, box=40.0, z=2.0, eta=1, **kw):
    x = (np.arange(n) - n // 2) * (box / n)
    v = -z / np.sqrt(x**2 + 1.0)
    return GridModel(dims=1, n_points=n, box_length=box, potential=v, eta=eta, **kw)


def free_model(n=64, box=20.0, eta=1):
    return GridModel(dims=1, n_points=n, box_length=box,
                     potential=np.zeros(n), eta=eta)


def test_grid_invariants():
    m = soft_model()
    assert m.spacing == pytest.approx(40.0 / 128)
    assert m.axis[m.n_points // 2] == 0.0
    with pytest.raises(ValidationError):
        GridModel(dims=1, n_points=100, box_length=10.0, potential=np.zeros(100))
    with pytest.raises(ValidationError):
        GridModel(dims=2, n_points=64, box_length=10.0, potential=np.zeros(64))


def test_hamiltonian_hermitian_on_grid():
    m = soft_model(n=32)
    h = dense_hamiltonian(m)
    np.testing.assert_allclose(h, h.conj().T, atol=1e-10)


def test_ground_state_free_particle():
    m = free_model()
    psi, energy = ground_state(m)
    assert energy == pytest.approx(0.0, abs=1e-9)
    # uniform k=0 plane wave up to a global phase
    probs = np.abs(psi) ** 2
    np.testing.assert_allclose(probs, probs[0], rtol=1e-6)


def test_ground_state_matches_dense_oracle():
    m = soft_model(n=256, box=60.0)
    psi, energy = ground_state(m)
    h = dense_hamiltonian(m)
    evals, evecs = np.linalg.eigh(h)
    assert energy == pytest.approx(float(evals[0]), abs=1e-9)
    overlap = abs(np.vdot(evecs[:, 0], psi))
    assert overlap == pytest.approx(1.0, abs=1e-8)
    # localized: participation ratio far below N
    pr = 1.0 / np.sum(np.abs(psi) ** 4)
    assert pr < m.n_points / 4
    assert energy > float(np.min(m.potential))


def test_ground_state_deepening_well_lowers_energy():
    energies = [ground_state(soft_model(n=128, z=z))[1] for z in (0.5, 1.0, 2.0, 4.0)]
    assert all(a > b for a, b in zip(energies, energies[1:]))


def test_two_electron_ground_state_sectors():
    m = soft_model(n=32, box=24.0, eta=2, interaction_strength=0.5)
    psi_s, e_s = ground_state(m, symmetry="symmetric")
    psi_a, e_a = ground_state(m, symmetry="antisymmetric")
    grid_s = psi_s.reshape(32, 32)
    grid_a = psi_a.reshape(32, 32)
    np.testing.assert_allclose(grid_s, grid_s.T, atol=1e-7)
    np.testing.assert_allclose(grid_a, -grid_a.T, atol=1e-7)
    assert e_s < e_a  # spatially symmetric sector lies lower


def test_apply_dipole_parity_selection_rule():
    m = soft_model(n=64, box=30.0)
    psi, _ = ground_state(m)  # even-parity bound state
    excited, norm = apply_dipole(m, psi)
    assert norm > 0
    assert abs(np.vdot(psi, excited)) <= 1e-8


def test_apply_dipole_norm_oracles():
    m = free_model(n=8, box=8.0)
    uniform = np.full(8, 1 / math.sqrt(8), dtype=complex)
    _, norm = apply_dipole(m, uniform)
    assert norm**2 == pytest.approx(float(np.mean(m.axis**2)), rel=1e-12)
    delta = np.zeros(8, dtype=complex)
    delta[2] = 1.0
    _, norm = apply_dipole(m, delta)
    assert norm == pytest.approx(abs(m.axis[2]), rel=1e-12)


def test_gaussian_filter_wide_window_is_identity():
    m = soft_model(n=64)
    psi, e0 = ground_state(m)
    filt = FilterSpec(center=0.0, sigma=1e6, mode="ExactEigen")
    out, success = gaussian_filter(m, filt, psi, e0)
    assert success == pytest.approx(1.0, rel=1e-9)
    np.testing.assert_allclose(out, psi, atol=1e-6)


def test_gaussian_filter_two_level_attenuation():
    # closed form on a 2-point grid: amplitudes scale by exp(-dE^2 / 2 sigma^2)
    m = free_model(n=2, box=2.0)
    h = dense_hamiltonian(m)
    evals, evecs = np.linalg.eigh(h)
    state = (evecs[:, 0] + evecs[:, 1]) / math.sqrt(2)
    sigma = 0.8 * (evals[1] - evals[0])
    filt = FilterSpec(center=evals[1] - evals[0], sigma=float(sigma), mode="ExactEigen")
    out, success = gaussian_filter(m, filt, state.astype(complex), float(evals[0]))
    a0 = abs(np.vdot(evecs[:, 0], out)) * math.sqrt(2)
    a1 = abs(np.vdot(evecs[:, 1], out)) * math.sqrt(2)
    assert a1 == pytest.approx(1.0, rel=1e-12)
    assert a0 == pytest.approx(math.exp(-(evals[1] - evals[0]) ** 2 / (2 * sigma**2)),
                               rel=1e-9)
    assert success == pytest.approx((a0**2 + a1**2) / 2, rel=1e-9)


def test_chebyshev_filter_matches_exact_mode():
    m = soft_model(n=64, box=30.0)
    psi, e0 = ground_state(m)
    excited, norm = apply_dipole(m, psi)
    excited /= norm
    exact = FilterSpec(center=0.8, sigma=0.3, mode="ExactEigen")
    poly = FilterSpec(center=0.8, sigma=0.3, mode="ChebyshevPoly", poly_tolerance=1e-6)
    out_e, p_e = gaussian_filter(m, exact, excited, e0)
    out_p, p_p = gaussian_filter(m, poly, excited, e0)
    assert p_p == pytest.approx(p_e, abs=1e-5)
    np.testing.assert_allclose(out_p, out_e, atol=1e-5)


def test_chebyshev_filter_degree_too_low_reports_requirement():
    m = soft_model(n=64)
    psi, e0 = ground_state(m)
    filt = FilterSpec(center=0.8, sigma=0.05, mode="ChebyshevPoly", poly_degree=4,
                      poly_tolerance=1e-4)
    with pytest.raises(ValidationError, match="need degree"):
        gaussian_filter(m, filt, psi, e0)


def test_filter_degree_scales_inversely_with_width():
    def gauss(sigma):
        return lambda x: np.exp(-(x - 0.1) ** 2 / (2 * sigma**2))

    d_wide = required_filter_degree(gauss(0.05), 1e-3)
    d_narrow = required_filter_degree(gauss(0.025), 1e-3)
    assert 1.6 <= d_narrow / d_wide <= 2.4


def test_sigma_from_fwhm():
    assert sigma_from_fwhm(2 * math.sqrt(2 * math.log(2))) == pytest.approx(1.0, rel=1e-12)


def test_evolve_identity_at_zero_time():
    m = soft_model(n=64)
    psi, _ = ground_state(m)
    np.testing.assert_allclose(evolve(m, psi, 0.0), psi)


def test_evolve_free_momentum_eigenstate_phase():
    m = free_model(n=64, box=16.0)
    k = m.k_axis[5]
    x = m.axis
    psi = np.exp(1j * k * x) / math.sqrt(64)
    t = 3.7
    out = evolve(m, psi, t, dt=0.05)
    np.testing.assert_allclose(out, psi * np.exp(-1j * k**2 * t / 2), atol=1e-10)


def test_evolve_matches_dense_oracle():
    m = soft_model(n=256, box=60.0)
    rng = np.random.default_rng(5)
    psi = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    psi /= np.linalg.norm(psi)
    t = 10.0
    out = evolve(m, psi, t)
    h = dense_hamiltonian(m)
    evals, evecs = np.linalg.eigh(h)
    oracle = evecs @ (np.exp(-1j * evals * t) * (evecs.conj().T @ psi))
    assert np.linalg.norm(out - oracle) <= 1e-6
    assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-10)


def test_evolve_conserves_energy():
    m = soft_model(n=128)
    psi, _ = ground_state(m)
    excited, norm = apply_dipole(m, psi)
    excited /= norm
    def energy(v):
        return float(np.real(np.vdot(v, m.apply_hamiltonian(v))))
    before = energy(excited)
    after = energy(evolve(m, excited, 5.0))
    assert after == pytest.approx(before, abs=1e-8)


def test_continuum_project_masks():
    m = free_model(n=32, box=16.0)
    rng = np.random.default_rng(11)
    psi = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    psi /= np.linalg.norm(psi)
    out, success = continuum_project(m, psi, 3.0)
    mask = np.abs(m.axis) < 3.0
    oracle = np.where(mask, 0.0, psi)
    np.testing.assert_allclose(out, oracle)
    assert success == pytest.approx(float(np.linalg.norm(oracle) ** 2), rel=1e-12)


def test_continuum_project_extremes():
    m = free_model(n=32, box=16.0)
    psi = np.full(32, 1 / math.sqrt(32), dtype=complex)
    with pytest.warns(UserWarning):
        out, success = continuum_project(m, psi, 100.0)
    assert success == 0.0
    assert np.linalg.norm(out) == 0.0
    out, success = continuum_project(m, psi, 1e-9)
    # only the single x=0 point is bound
    assert success == pytest.approx(1.0 - 1.0 / 32, rel=1e-12)


def test_continuum_project_two_electron_any_outside():
    m = soft_model(n=16, box=16.0, eta=2)
    rng = np.random.default_rng(3)
    psi = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    psi /= np.linalg.norm(psi)
    out, success = continuum_project(m, psi.reshape(-1), 2.0)
    inside = np.abs(m.axis) < 2.0
    both_inside = np.logical_and(inside[:, None], inside[None, :])
    oracle = np.where(both_inside, 0.0, psi)
    np.testing.assert_allclose(out.reshape(16, 16), oracle)
    assert success == pytest.approx(float(np.sum(np.abs(oracle) ** 2)), rel=1e-12)


def test_kinetic_histogram_momentum_eigenstate():
    m = free_model(n=32, box=16.0)
    k = m.k_axis[3]
    psi = np.exp(1j * k * m.axis) / math.sqrt(32)
    edges = np.linspace(0.0, 4.0, 17)
    hist = kinetic_histogram(m, psi, edges)
    expected_bin = np.searchsorted(edges, k**2 / 2, side="right") - 1
    assert hist.mass[expected_bin] == pytest.approx(1.0, rel=1e-12)
    assert hist.mass.sum() == pytest.approx(hist.success_probability, rel=1e-12)


def test_kinetic_histogram_two_momentum_split():
    m = free_model(n=32, box=16.0)
    k1, k2 = m.k_axis[2], m.k_axis[7]
    psi = (np.exp(1j * k1 * m.axis) + np.exp(1j * k2 * m.axis)) / math.sqrt(2 * 32)
    edges = np.linspace(0.0, 6.0, 25)
    hist = kinetic_histogram(m, psi, edges, shots=4000, seed=9)
    b1 = np.searchsorted(edges, k1**2 / 2, side="right") - 1
    b2 = np.searchsorted(edges, k2**2 / 2, side="right") - 1
    assert hist.mass[b1] == pytest.approx(0.5, rel=1e-9)
    assert hist.mass[b2] == pytest.approx(0.5, rel=1e-9)
    assert hist.sampled_mass[b1] == pytest.approx(0.5, abs=0.05)


def test_kinetic_histogram_mass_equals_success():
    m = soft_model(n=128, box=40.0)
    psi, e0 = ground_state(m)
    excited, norm = apply_dipole(m, psi)
    excited /= norm
    moved = evolve(m, excited, 4.0, dt=0.02)
    projected, success = continuum_project(m, moved, 6.0)
    kmax = float(np.max(m.k_axis**2) / 2)
    edges = np.linspace(0.0, kmax * 1.001, 40)
    hist = kinetic_histogram(m, projected, edges)
    assert hist.mass.sum() == pytest.approx(success, abs=1e-12)
    assert hist.success_probability == pytest.approx(success, abs=1e-12)


def test_kinetic_histogram_sampling_variance():
    # empirical estimator variance tracks p(1-p)/shots within 20%
    m = free_model(n=32, box=16.0)
    k1, k2 = m.k_axis[2], m.k_axis[7]
    psi = (np.exp(1j * k1 * m.axis) + np.exp(1j * k2 * m.axis)) / math.sqrt(2 * 32)
    edges = np.linspace(0.0, 6.0, 25)
    target_bin = np.searchsorted(edges, k1**2 / 2, side="right") - 1
    shots = 50
    draws = [kinetic_histogram(m, psi, edges, shots=shots, seed=s).sampled_mass[target_bin]
             for s in range(10_000)]
    empirical = float(np.var(draws, ddof=1))
    binomial = 0.5 * 0.5 / shots
    assert abs(empirical / binomial - 1.0) <= 0.20


def test_kinetic_histogram_rejects_zero_state():
    m = free_model(n=16)
    with pytest.raises(ValidationError):
        kinetic_histogram(m, np.zeros(16, dtype=complex), np.linspace(0, 1, 5))


def test_correlation_identity():
    m = soft_model(n=128, box=40.0)
    rng = np.random.default_rng(21)
    psi = rng.standard_normal(128) + 1j * rng.standard_normal(128)
    psi /= np.linalg.norm(psi)
    assert correlation_identity_check(m, psi, 5.0) <= 1e-12


def test_correlation_identity_zero_dipole_state():
    m = free_model(n=32, box=16.0)
    psi = np.zeros(32, dtype=complex)
    psi[0] = 1.0  # fully bound at the left edge point
    deviation = correlation_identity_check(m, psi, 1.0)
    assert deviation <= 1e-12


def test_free_packet_ionization_monotone_pre_wrap():
    m = free_model(n=256, box=120.0)
    x = m.axis
    packet = np.exp(-(x**2) / (2 * 2.0**2) + 1j * 1.5 * x)
    packet /= np.linalg.norm(packet)
    successes = []
    for t in (0.0, 4.0, 8.0, 12.0):
        moved = evolve(m, packet, t, dt=0.05)
        _, success = continuum_project(m, moved, 10.0)
        successes.append(success)
    assert all(b >= a - 1e-12 for a, b in zip(successes, successes[1:]))
    assert successes[-1] > successes[0]


def test_norm_bookkeeping_multiplies():
    m = soft_model(n=128, box=40.0)
    psi, e0 = ground_state(m)
    excited, norm = apply_dipole(m, psi)
    excited /= norm
    filt = FilterSpec(center=1.2, sigma=0.4, mode="ExactEigen")
    filtered, p_w = gaussian_filter(m, filt, excited, e0)
    filtered_n = filtered / np.linalg.norm(filtered)
    projected, p_c = continuum_project(m, filtered_n, 8.0)
    end_to_end = float(np.linalg.norm(projected) ** 2
                       * np.linalg.norm(filtered) ** 2)
    assert p_w * p_c == pytest.approx(end_to_end, abs=1e-12)


def test_continuum_project_smooth_mask():
    m = free_model(n=64, box=32.0)
    rng = np.random.default_rng(8)
    psi = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    psi /= np.linalg.norm(psi)
    hard, p_hard = continuum_project(m, psi, 6.0)
    soft, p_soft = continuum_project(m, psi, 6.0, smooth_width=0.05)
    # a narrow ramp approaches the hard projector
    assert p_soft == pytest.approx(p_hard, abs=0.05)
    wide, p_wide = continuum_project(m, psi, 6.0, smooth_width=50.0)
    assert 0 < p_wide < 1
    # oracle: amplitude weight (1 + tanh((|x| - Rc)/w)) / 2
    weight = (1 + np.tanh((np.abs(m.axis) - 6.0) / 50.0)) / 2
    np.testing.assert_allclose(wide, weight * psi, atol=1e-12)


def test_edge_density_flags_boundary_arrival():
    m = free_model(n=128, box=60.0)
    x = m.axis
    packet = np.exp(-(x**2) / (2 * 1.5**2) + 1j * 2.0 * x).astype(complex)
    packet /= np.linalg.norm(packet)
    assert edge_density(m, packet) < 1e-10
    moved = evolve(m, packet, 16.0, dt=0.05)  # k*t = 32 > box/2
    assert edge_density(m, moved) > 1e-6


def test_3d_ground_state_and_histogram():
    n, box = 8, 12.0
    m = GridModel(dims=3, n_points=n, box_length=box, potential=np.zeros(n))
    psi, energy = ground_state(m)
    assert energy == pytest.approx(0.0, abs=1e-9)
    k = m.k_axis[1]
    x = m.axis
    plane = np.exp(1j * k * x)[:, None, None] * np.ones((n, n, n))
    plane = (plane / np.linalg.norm(plane)).reshape(-1)
    edges = np.linspace(0.0, 2.0, 9)
    hist = kinetic_histogram(m, plane, edges)
    target = np.searchsorted(edges, k**2 / 2, side="right") - 1
    assert hist.mass[target] == pytest.approx(1.0, rel=1e-12)


def test_3d_continuum_project_sphere_mask():
    n, box = 8, 12.0
    m = GridModel(dims=3, n_points=n, box_length=box, potential=np.zeros(n))
    rng = np.random.default_rng(13)
    psi = rng.standard_normal((n, n, n)) + 1j * rng.standard_normal((n, n, n))
    psi /= np.linalg.norm(psi)
    out, success = continuum_project(m, psi.reshape(-1), 4.0)
    x = m.axis
    r = np.sqrt(x[:, None, None] ** 2 + x[None, :, None] ** 2 + x[None, None, :] ** 2)
    oracle = np.where(r < 4.0, 0.0, psi)
    np.testing.assert_allclose(out.reshape(n, n, n), oracle)
    assert success == pytest.approx(float(np.sum(np.abs(oracle) ** 2)), rel=1e-12)


def test_3d_evolve_free_eigenstate():
    n, box = 8, 12.0
    m = GridModel(dims=3, n_points=n, box_length=box, potential=np.zeros(n))
    kx, ky = m.k_axis[2], m.k_axis[1]
    x = m.axis
    psi = (np.exp(1j * kx * x)[:, None, None]
           * np.exp(1j * ky * x)[None, :, None]
           * np.ones((n, n, n))).astype(complex)
    psi /= np.linalg.norm(psi)
    t = 2.3
    out = evolve(m, psi.reshape(-1), t, dt=0.05)
    phase = np.exp(-1j * (kx**2 + ky**2) * t / 2)
    np.testing.assert_allclose(out, (phase * psi).reshape(-1), atol=1e-10)


def test_checkpoint_round_trip(tmp_path):
    m = soft_model(n=64)
    psi, _ = ground_state(m)
    path = tmp_path / "state.euvq"
    save_checkpoint(path, m, psi)
    header, back = load_checkpoint(path)
    assert header["n_points"] == 64
    assert header["box_length"] == pytest.approx(40.0)
    np.testing.assert_allclose(back, psi)
    with open(path, "rb") as fh:
        assert fh.read(8) == b"EUVQCKPT"


def test_checkpoint_rejects_bad_magic(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"NOTMAGIC" + b"\x01" + b"\x00" * 32)
    with pytest.raises(ValidationError):
        load_checkpoint(path)


def test_evolve_rejects_negative_time():
    m = free_model()
    with pytest.raises(ValidationError):
        evolve(m, np.ones(64, dtype=complex), -1.0)


def test_ground_state_nonconvergence_reports():
    m = soft_model(n=128)
    with pytest.raises(NumericalError, match="iteration|residual"):
        ground_state(m, maxiter=1)
