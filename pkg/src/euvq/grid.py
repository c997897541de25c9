"""Real-space grid emulation of the photoemission correlation function.

A periodic 1D (or small 3D) grid carries one or two electrons: ground state
via an iterative eigensolver, dipole excitation by the centered position
operator, a Gaussian energy filter (exact eigenbasis or Chebyshev polynomial),
split-operator real-time propagation, a hard spherical continuum projector,
and kinetic-energy histogram sampling in the momentum basis.

Grid conventions: N points per dimension (power of two), spacing
h = L / N, positions x_q = (q - N/2) h, momenta k = 2 pi fftfreq(N, h).
All FFTs are orthonormal so position/momentum norms match exactly.
"""

from __future__ import annotations

import json
import math
import struct
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .core import NumericalError, ValidationError

CHECKPOINT_MAGIC = b"EUVQCKPT"
CHECKPOINT_VERSION = 1


def _potential_from_config(kind: str, params: dict, x: np.ndarray) -> np.ndarray:
    if kind == "zero":
        return np.zeros_like(x)
    if kind == "soft_coulomb":
        z = float(params.get("z", 1.0))
        a = float(params.get("a", 1.0))
        center = float(params.get("center", 0.0))
        return -z / np.sqrt((x - center) ** 2 + a**2)
    if kind == "gaussian_well":
        v0 = float(params.get("v0", 1.0))
        sigma = float(params.get("sigma", 1.0))
        center = float(params.get("center", 0.0))
        return -v0 * np.exp(-((x - center) ** 2) / (2.0 * sigma**2))
    if kind == "harmonic":
        k = float(params.get("k", 1.0))
        return 0.5 * k * x**2
    if kind == "samples":
        v = np.asarray(params["values"], dtype=float)
        if v.shape != x.shape:
            raise ValidationError("sampled potential length != grid size")
        return v
    raise ValidationError(f"unknown potential kind '{kind}'")


@dataclass(frozen=True)
class GridModel:
    """Periodic real-space grid with kinetic + local potential Hamiltonian."""

    dims: int
    n_points: int
    box_length: float       # Bohr
    potential: np.ndarray   # on the 1D axis grid
    eta: int = 1
    interaction_strength: float = 0.0   # two-electron soft-Coulomb repulsion
    interaction_softening: float = 1.0

    def __post_init__(self) -> None:
        if self.dims not in (1, 3):
            raise ValidationError("dims must be 1 or 3")
        if self.eta not in (1, 2):
            raise ValidationError("eta must be 1 or 2 at desk scale")
        n = self.n_points
        if n < 2 or n & (n - 1):
            raise ValidationError("n_points must be a power of two >= 2")
        if self.box_length <= 0:
            raise ValidationError("box_length must be positive")
        v = np.asarray(self.potential, dtype=float)
        if v.shape != (n,):
            raise ValidationError("potential must be sampled on the 1D axis grid")
        object.__setattr__(self, "potential", v)
        if self.dims == 3 and self.eta != 1:
            raise ValidationError("3D mode supports a single electron")
        if self.dims == 3 and n > 32:
            raise ValidationError("3D grids capped at 32 points per dimension")
        if self.hilbert_dim > 2**20:
            raise ValidationError("Hilbert space capped at 2^20")

    @property
    def spacing(self) -> float:
        return self.box_length / self.n_points

    @property
    def axis(self) -> np.ndarray:
        """Centered positions x_q = (q - N/2) h."""
        return (np.arange(self.n_points) - self.n_points // 2) * self.spacing

    @property
    def k_axis(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.n_points, d=self.spacing)

    @property
    def shape(self) -> tuple[int, ...]:
        per_particle = (self.n_points,) * self.dims
        return per_particle * self.eta

    @property
    def hilbert_dim(self) -> int:
        return self.n_points ** (self.dims * self.eta)

    def potential_grid(self) -> np.ndarray:
        """Total potential on the configuration grid (incl. e-e repulsion)."""
        if self.dims == 1 and self.eta == 1:
            return self.potential
        if self.dims == 3:
            v = self.potential
            return v[:, None, None] + v[None, :, None] + v[None, None, :]
        v1 = self.potential[:, None] + self.potential[None, :]
        if self.interaction_strength:
            x = self.axis
            sep = x[:, None] - x[None, :]
            v1 = v1 + self.interaction_strength / np.sqrt(
                sep**2 + self.interaction_softening**2)
        return v1

    def kinetic_grid(self) -> np.ndarray:
        """Kinetic energies ||k||^2 / 2 on the configuration momentum grid."""
        k2 = self.k_axis**2
        if self.dims == 1 and self.eta == 1:
            return k2 / 2.0
        if self.dims == 3:
            return (k2[:, None, None] + k2[None, :, None] + k2[None, None, :]) / 2.0
        return (k2[:, None] + k2[None, :]) / 2.0

    def apply_hamiltonian(self, state: np.ndarray) -> np.ndarray:
        psi = state.reshape(self.shape)
        out = self.potential_grid() * psi
        out = out + np.fft.ifftn(self.kinetic_grid() * np.fft.fftn(psi, norm="ortho"),
                                 norm="ortho")
        return out.reshape(state.shape)

    @classmethod
    def from_config(cls, data: dict) -> "GridModel":
        """Build from JSON {dims, n_points, box_length, potential: {kind, params}, eta}."""
        try:
            dims = int(data.get("dims", 1))
            n = int(data["n_points"])
            box = float(data["box_length"])
            pot_cfg = data.get("potential", {"kind": "zero"})
            eta = int(data.get("eta", 1))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad grid config: {exc}") from exc
        x = (np.arange(n) - n // 2) * (box / n)
        v = _potential_from_config(pot_cfg.get("kind", "zero"),
                                   pot_cfg.get("params", {}), x)
        return cls(dims=dims, n_points=n, box_length=box, potential=v, eta=eta,
                   interaction_strength=float(data.get("interaction_strength", 0.0)),
                   interaction_softening=float(data.get("interaction_softening", 1.0)))


@dataclass(frozen=True)
class FilterSpec:
    """Gaussian energy window applied to H - E0."""

    center: float           # Ha above the ground energy
    sigma: float            # Ha
    poly_degree: int = 0    # 0 = choose automatically in ChebyshevPoly mode
    mode: str = "ExactEigen"
    poly_tolerance: float = 1e-3

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ValidationError("sigma must be positive")
        if self.mode not in ("ExactEigen", "ChebyshevPoly"):
            raise ValidationError("mode must be ExactEigen or ChebyshevPoly")
        if self.poly_tolerance <= 0:
            raise ValidationError("poly_tolerance must be positive")


def sigma_from_fwhm(fwhm: float) -> float:
    """Gaussian standard deviation from full width at half maximum."""
    return fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))


@dataclass(frozen=True)
class KineticHistogram:
    """Estimated probability mass per kinetic-energy bin."""

    bin_edges: np.ndarray          # Ha, length n_bins + 1
    mass: np.ndarray               # absolute mass (sums to success_probability)
    sampled_mass: np.ndarray | None
    success_probability: float
    shots_used: int
    epsilon: float
    stderr: np.ndarray | None = None

    def __post_init__(self) -> None:
        if np.any(self.mass < -1e-15):
            raise ValidationError("negative histogram mass")
        if self.mass.sum() > 1.0 + 1e-9:
            raise ValidationError("histogram mass exceeds 1")
        if not 0.0 <= self.success_probability <= 1.0 + 1e-12:
            raise ValidationError("success_probability outside [0, 1]")


def dense_hamiltonian(model: GridModel) -> np.ndarray:
    """Explicit Hamiltonian matrix (oracle-sized grids only)."""
    dim = model.hilbert_dim
    if dim > 4096:
        raise ValidationError("dense Hamiltonian capped at dimension 4096")
    eye = np.eye(dim, dtype=complex)
    cols = [model.apply_hamiltonian(eye[:, i]) for i in range(dim)]
    return np.column_stack(cols)


def ground_state(model: GridModel, symmetry: str = "none",
                 tol: float = 1e-10, maxiter: int | None = None
                 ) -> tuple[np.ndarray, float]:
    """Lowest eigenpair of the grid Hamiltonian via Lanczos iteration.

    ``symmetry`` for two-electron models: "none", "symmetric", or
    "antisymmetric" exchange sector (enforced by projecting the operator).
    Raises with iteration diagnostics if the residual exceeds 1e-8.
    """
    dim = model.hilbert_dim
    if symmetry not in ("none", "symmetric", "antisymmetric"):
        raise ValidationError("symmetry must be none, symmetric, or antisymmetric")
    if symmetry != "none" and model.eta != 2:
        raise ValidationError("exchange symmetry applies to two-electron models")

    vmax = float(np.max(model.potential_grid()))
    kmax = float(np.max(model.kinetic_grid()))
    push = abs(vmax) + kmax + 10.0  # lifts the complement above the target sector

    def matvec(v):
        v = v.astype(complex)
        if symmetry == "none":
            return model.apply_hamiltonian(v)
        psi = v.reshape(model.shape)
        sign = 1.0 if symmetry == "symmetric" else -1.0
        proj = (psi + sign * psi.T) / 2.0
        out = model.apply_hamiltonian(proj.reshape(v.shape)).reshape(model.shape)
        out = (out + sign * out.T) / 2.0
        out = out + push * (psi - proj)
        return out.reshape(v.shape)

    op = LinearOperator((dim, dim), matvec=matvec, dtype=complex)
    rng = np.random.default_rng(12345)
    v0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    if symmetry != "none":
        psi = v0.reshape(model.shape)
        sign = 1.0 if symmetry == "symmetric" else -1.0
        v0 = ((psi + sign * psi.T) / 2.0).reshape(dim)
    try:
        # several Ritz pairs: k=1 can lock onto a nearby cluster edge
        k = min(6, dim - 2) if dim > 8 else 1
        vals, vecs = eigsh(op, k=k, which="SA", v0=v0, tol=tol, maxiter=maxiter)
    except Exception as exc:  # scipy raises on non-convergence
        raise NumericalError(f"ground-state iteration failed: {exc}") from exc
    psi = vecs[:, int(np.argmin(vals))]
    psi /= np.linalg.norm(psi)
    energy = float(np.real(psi.conj() @ model.apply_hamiltonian(psi)))
    residual = float(np.linalg.norm(model.apply_hamiltonian(psi) - energy * psi))
    if residual > 1e-8:
        raise NumericalError(
            f"ground-state residual {residual:.2e} > 1e-8 (dim={dim}, tol={tol})")
    return psi, energy


def position_values(model: GridModel) -> np.ndarray:
    """Summed centered position operator on the configuration grid."""
    x = model.axis
    if model.dims == 1 and model.eta == 1:
        return x
    if model.dims == 3:
        # dipole along the first axis
        return np.broadcast_to(x[:, None, None], model.shape).copy().reshape(model.shape)
    return (x[:, None] + x[None, :])


def apply_dipole(model: GridModel, state: np.ndarray) -> tuple[np.ndarray, float]:
    """Multiply by the (signed, centered) position grid; returns (D psi, ||D psi||)."""
    psi = state.reshape(model.shape)
    out = position_values(model) * psi
    out = out.reshape(state.shape)
    return out, float(np.linalg.norm(out))


def gaussian_filter(model: GridModel, filt: FilterSpec, state: np.ndarray,
                    ground_energy: float) -> tuple[np.ndarray, float]:
    """Apply f(H - E0) with f a Gaussian centered at ``filt.center``.

    ExactEigen mode diagonalizes the (dense-capped) Hamiltonian; ChebyshevPoly
    applies a fitted Chebyshev series of the rescaled Hamiltonian matrix-free.
    Returns the filtered (un-normalized) state and the success probability
    ||f psi||^2 / ||psi||^2.
    """
    norm_in = float(np.linalg.norm(state))
    if norm_in == 0.0:
        raise ValidationError("cannot filter a zero state")

    if filt.mode == "ExactEigen":
        h = dense_hamiltonian(model)
        energies, vectors = np.linalg.eigh(h)
        window = np.exp(-((energies - ground_energy - filt.center) ** 2)
                        / (2.0 * filt.sigma**2))
        out = vectors @ (window * (vectors.conj().T @ state.reshape(-1)))
        out = out.reshape(state.shape)
    else:
        out = _chebyshev_filter(model, filt, state, ground_energy)
    success = float(np.linalg.norm(out) ** 2 / norm_in**2)
    return out, success


def _spectral_bounds(model: GridModel) -> tuple[float, float]:
    vmin = float(np.min(model.potential_grid()))
    vmax = float(np.max(model.potential_grid()))
    kmax = float(np.max(model.kinetic_grid()))
    return vmin, vmax + kmax


def chebyshev_coefficients(func, degree: int) -> np.ndarray:
    """Chebyshev interpolation coefficients of ``func`` on [-1, 1].

    Uses the cosine transform of the values at first-kind Chebyshev nodes,
    which is the interpolant through degree + 1 nodes.
    """
    from scipy.fft import dct

    m = degree + 1
    nodes = np.cos(math.pi * (np.arange(m) + 0.5) / m)
    values = func(nodes)
    coeffs = dct(values, type=2, norm=None) / m
    coeffs[0] /= 2.0
    return coeffs


def required_filter_degree(func, tolerance: float, max_degree: int = 20000) -> int:
    """Smallest Chebyshev degree whose sup error on [-1, 1] is below tolerance."""
    xs = np.cos(math.pi * (np.arange(2001) + 0.5) / 2001)
    target = func(xs)

    def sup_error(d):
        coeffs = chebyshev_coefficients(func, d)
        return float(np.max(np.abs(np.polynomial.chebyshev.chebval(xs, coeffs) - target)))

    lo, hi = 1, 8
    while sup_error(hi) > tolerance:
        hi *= 2
        if hi > max_degree:
            raise ValidationError(f"filter tolerance {tolerance} needs degree > {max_degree}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if sup_error(mid) > tolerance:
            lo = mid
        else:
            hi = mid
    return hi


def _chebyshev_filter(model: GridModel, filt: FilterSpec, state: np.ndarray,
                      ground_energy: float) -> np.ndarray:
    lo, hi = _spectral_bounds(model)
    half_span = (hi - lo) / 2.0
    mid = (hi + lo) / 2.0

    def gauss_rescaled(x):
        energy = x * half_span + mid - ground_energy
        return np.exp(-((energy - filt.center) ** 2) / (2.0 * filt.sigma**2))

    degree = filt.poly_degree or required_filter_degree(gauss_rescaled, filt.poly_tolerance)
    coeffs = chebyshev_coefficients(gauss_rescaled, degree)
    xs = np.cos(math.pi * (np.arange(2001) + 0.5) / 2001)
    err = float(np.max(np.abs(np.polynomial.chebyshev.chebval(xs, coeffs)
                              - gauss_rescaled(xs))))
    if err > filt.poly_tolerance:
        needed = required_filter_degree(gauss_rescaled, filt.poly_tolerance)
        raise ValidationError(
            f"degree {degree} reaches sup error {err:.2e} > {filt.poly_tolerance}; "
            f"need degree >= {needed}")

    # Clenshaw recurrence on the rescaled Hamiltonian
    def apply_ht(v):
        return (model.apply_hamiltonian(v) - mid * v) / half_span

    psi = state.reshape(-1).astype(complex)
    b_kp1 = np.zeros_like(psi)
    b_kp2 = np.zeros_like(psi)
    for c in coeffs[:0:-1]:
        b_k = c * psi + 2.0 * apply_ht(b_kp1) - b_kp2
        b_kp2, b_kp1 = b_kp1, b_k
    out = coeffs[0] * psi + apply_ht(b_kp1) - b_kp2
    return out.reshape(state.shape)


def evolve(model: GridModel, state: np.ndarray, t: float,
           dt: float | None = None, tol: float = 1e-8,
           max_refinements: int = 20) -> np.ndarray:
    """Propagate by exp(-i H t) with Strang-split FFT steps.

    When ``dt`` is not given, the step count is doubled until the
    Richardson difference ||psi_n - psi_2n|| drops below ``tol``; raises once
    the step underflows instead of converging.
    """
    if t < 0:
        raise ValidationError("t must be non-negative")
    if t == 0:
        return state.copy()
    if dt is not None:
        if dt <= 0:
            raise ValidationError("dt must be positive")
        steps = max(1, math.ceil(t / dt))
        return _split_operator(model, state, t, steps)

    steps = max(1, math.ceil(t / 0.1))
    prev = _split_operator(model, state, t, steps)
    for _ in range(max_refinements):
        steps *= 2
        if t / steps < 1e-12:
            raise NumericalError("step underflow before reaching tolerance")
        cur = _split_operator(model, state, t, steps)
        if float(np.linalg.norm(cur - prev)) <= tol:
            return cur
        prev = cur
    raise NumericalError(f"split-operator failed to reach {tol} in {max_refinements} refinements")


def _split_operator(model: GridModel, state: np.ndarray, t: float, steps: int) -> np.ndarray:
    dt = t / steps
    v_half = np.exp(-0.5j * dt * model.potential_grid())
    k_full = np.exp(-1j * dt * model.kinetic_grid())
    psi = state.reshape(model.shape).astype(complex)
    psi = v_half * psi
    for step in range(steps):
        psi = np.fft.ifftn(k_full * np.fft.fftn(psi, norm="ortho"), norm="ortho")
        # merge consecutive half-steps except at the very end
        psi = (v_half * v_half if step < steps - 1 else v_half) * psi
    return psi.reshape(state.shape)


def edge_density(model: GridModel, state: np.ndarray, cells: int = 2) -> float:
    """Probability mass within ``cells`` grid points of any box face.

    Propagation on the periodic grid is only physical until density reaches
    the boundary; callers flag a run invalid once this exceeds ~1e-6.
    """
    psi = np.abs(np.asarray(state).reshape(model.shape)) ** 2
    n = model.n_points
    interior = [slice(cells, n - cells)] * (model.dims * model.eta)
    total = float(psi.sum())
    if total == 0.0:
        return 0.0
    return float((total - psi[tuple(interior)].sum()) / total)


def _radius_values_1particle(model: GridModel) -> np.ndarray:
    x = model.axis
    if model.dims == 1:
        return np.abs(x)
    return np.sqrt(x[:, None, None] ** 2 + x[None, :, None] ** 2
                   + x[None, None, :] ** 2)


def bound_mask_1particle(model: GridModel, r_cutoff: float) -> np.ndarray:
    """Boolean mask of per-particle grid points with ||r|| < r_cutoff."""
    return _radius_values_1particle(model) < r_cutoff


def continuum_project(model: GridModel, state: np.ndarray, r_cutoff: float,
                      smooth_width: float | None = None
                      ) -> tuple[np.ndarray, float]:
    """Zero amplitudes where all particles lie inside the cutoff sphere.

    Keeps the "any particle outside" subspace; returns the projected
    (un-normalized) state and the retained norm^2 as success probability.
    With ``smooth_width`` the hard cutoff is replaced by a tanh ramp: each
    particle's "outside" weight becomes (1 + tanh((r - R_c)/w)) / 2 and the
    kept amplitude weight is 1 - prod_i (1 - w_i).
    """
    if r_cutoff <= 0:
        raise ValidationError("r_cutoff must be positive")
    half_diag = model.box_length / 2.0 * math.sqrt(model.dims)
    if r_cutoff > half_diag:
        warnings.warn("r_cutoff exceeds the box half-diagonal; projector is empty",
                      stacklevel=2)
    radius = _radius_values_1particle(model)
    if smooth_width is None:
        outside = (radius >= r_cutoff).astype(float)
    else:
        if smooth_width <= 0:
            raise ValidationError("smooth_width must be positive")
        outside = (1.0 + np.tanh((radius - r_cutoff) / smooth_width)) / 2.0
    psi = state.reshape(model.shape).astype(complex)
    if model.eta == 1:
        keep = outside
    else:
        keep = 1.0 - np.outer(1.0 - outside, 1.0 - outside).reshape(model.shape)
    out = keep * psi
    norm_in = float(np.linalg.norm(psi))
    if norm_in == 0.0:
        raise ValidationError("cannot project a zero state")
    success = float(np.linalg.norm(out) ** 2 / norm_in**2)
    return out.reshape(state.shape), success


def kinetic_energies(model: GridModel) -> np.ndarray:
    """Single-particle kinetic energies per momentum grid point."""
    k2 = model.k_axis**2
    if model.dims == 1:
        return k2 / 2.0
    return (k2[:, None, None] + k2[None, :, None] + k2[None, None, :]).reshape(-1) / 2.0


def kinetic_histogram(model: GridModel, state: np.ndarray, bins: np.ndarray,
                      shots: int = 0, seed: int = 0, epsilon: float = 0.05
                      ) -> KineticHistogram:
    """Histogram the single-particle kinetic energy of a (projected) state.

    The exact column is the momentum-basis distribution pushed through
    ||k||^2/2 into bins, scaled by the state's norm^2 (the projector success
    probability); with ``shots`` > 0 a sampled estimate with per-bin standard
    errors is included (eta samples per shot, one per electron register).
    """
    edges = np.asarray(bins, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ValidationError("bins must be increasing edges")
    psi = state.reshape(model.shape).astype(complex)
    norm2 = float(np.linalg.norm(psi) ** 2)
    if norm2 == 0.0:
        raise ValidationError("zero-norm state: projection failed upstream")

    amps = np.fft.fftn(psi, norm="ortho")
    joint = (np.abs(amps) ** 2).reshape(-1) / norm2   # conditional distribution
    ke = kinetic_energies(model)

    n_bins = len(edges) - 1
    if model.eta == 1:
        ke_per_particle = [ke]
        joint_shape = (len(ke),)
    else:
        ke_per_particle = [ke, ke]
        joint_shape = (len(ke), len(ke))
    joint = joint.reshape(joint_shape)

    # exact per-bin mass: average over particles of P(KE_i in bin)
    exact = np.zeros(n_bins)
    for axis, ke_ax in enumerate(ke_per_particle):
        marginal = joint.sum(axis=tuple(a for a in range(model.eta) if a != axis)) \
            if model.eta > 1 else joint
        idx = np.searchsorted(edges, ke_ax, side="right") - 1
        valid = (idx >= 0) & (idx < n_bins) & (ke_ax < edges[-1])
        np.add.at(exact, idx[valid], marginal[valid])
    exact /= model.eta
    mass = exact * norm2

    sampled = None
    stderr = None
    if shots > 0:
        rng = np.random.default_rng(seed)
        flat = joint.reshape(-1)
        draws = rng.choice(len(flat), size=shots, p=flat / flat.sum())
        counts = np.zeros(n_bins)
        if model.eta == 1:
            ke_draws = ke[draws]
            idx = np.searchsorted(edges, ke_draws, side="right") - 1
            valid = (idx >= 0) & (idx < n_bins) & (ke_draws < edges[-1])
            np.add.at(counts, idx[valid], 1.0)
        else:
            n1 = len(ke)
            for ke_draws in (ke[draws // n1], ke[draws % n1]):
                idx = np.searchsorted(edges, ke_draws, side="right") - 1
                valid = (idx >= 0) & (idx < n_bins) & (ke_draws < edges[-1])
                np.add.at(counts, idx[valid], 0.5)
        freq = counts / shots
        sampled = freq * norm2
        stderr = norm2 * np.sqrt(np.maximum(freq * (1.0 - freq), 0.0) / shots)

    return KineticHistogram(bin_edges=edges, mass=mass, sampled_mass=sampled,
                            success_probability=norm2, shots_used=shots,
                            epsilon=epsilon, stderr=stderr)


def correlation_identity_check(model: GridModel, state: np.ndarray,
                               r_cutoff: float, taus=(0.0, 0.5, 2.0)) -> float:
    """Max deviation between the two correlation-function forms.

    Form A resolves <psi| Pi_c exp(-i T tau) Pi_c |psi> through the grid
    operators; form B sums exp(-i E_k tau) |<k| Pi_c psi>|^2 over the
    momentum basis. The two are algebraically identical on a finite grid.
    """
    projected, _ = continuum_project(model, state, r_cutoff)
    psi = projected.reshape(model.shape).astype(complex)
    amps = np.fft.fftn(psi, norm="ortho").reshape(-1)
    ke = _configuration_kinetic(model)
    worst = 0.0
    for tau in taus:
        phases = np.exp(-1j * ke * tau)
        form_b = complex(np.sum(phases * np.abs(amps) ** 2))
        evolved = np.fft.ifftn((phases.reshape(model.shape))
                               * np.fft.fftn(psi, norm="ortho"), norm="ortho")
        form_a = complex(np.vdot(psi, evolved))
        worst = max(worst, abs(form_a - form_b))
    return worst


def _configuration_kinetic(model: GridModel) -> np.ndarray:
    return model.kinetic_grid().reshape(-1)


def save_checkpoint(path, model: GridModel, state: np.ndarray) -> None:
    """Raw binary checkpoint: 8-byte magic, version byte, header, complex128 payload."""
    psi = np.ascontiguousarray(state.reshape(-1), dtype=complex)
    header = struct.pack("<BBIId", model.dims, model.eta, model.n_points,
                         len(psi), model.box_length)
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(bytes([CHECKPOINT_VERSION]))
        fh.write(header)
        fh.write(psi.tobytes())


def load_checkpoint(path) -> tuple[dict, np.ndarray]:
    """Read a checkpoint; returns (header dict, state vector)."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != CHECKPOINT_MAGIC:
            raise ValidationError("bad checkpoint magic")
        version = fh.read(1)[0]
        if version != CHECKPOINT_VERSION:
            raise ValidationError(f"unsupported checkpoint version {version}")
        dims, eta, n_points, size, box_length = struct.unpack("<BBIId", fh.read(18))
        payload = fh.read(size * 16)
        state = np.frombuffer(payload, dtype=complex, count=size)
    return ({"dims": dims, "eta": eta, "n_points": n_points,
             "box_length": box_length}, state.copy())


def write_histogram_csv(path, hist: KineticHistogram) -> None:
    """CSV columns (bin_lo_Ha, bin_hi_Ha, mass, stderr)."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin_lo_Ha", "bin_hi_Ha", "mass", "stderr"])
        mass = hist.sampled_mass if hist.sampled_mass is not None else hist.mass
        err = hist.stderr if hist.stderr is not None else np.zeros_like(mass)
        for i in range(len(mass)):
            writer.writerow([repr(float(hist.bin_edges[i])),
                             repr(float(hist.bin_edges[i + 1])),
                             repr(float(mass[i])), repr(float(err[i]))])


def load_grid_config(path) -> GridModel:
    with open(path) as fh:
        return GridModel.from_config(json.load(fh))
