"""Shared domain types, physical constants, and unit conversions.

All internal energies are in Hartree, times in atomic units, lengths in
Bohr. Conversions to/from eV and femtoseconds happen only at input/output
boundaries, so that no factor of 27.2 or 41.3 can hide inside a formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

HARTREE_PER_EV = 1.0 / 27.211386
AU_TIME_PER_FS = 41.3414
SPEED_OF_LIGHT_AU = 137.036
EUV_OMEGA_HA = 3.38  # 92 eV operating frequency in Hartree
BOHR_PER_ANGSTROM = 1.8897259886


class ValidationError(ValueError):
    """Raised when a spec or report violates its declared invariants."""


class NumericalError(RuntimeError):
    """Raised when an iterative numerical procedure fails to converge."""


@dataclass(frozen=True)
class PhysicalConstants:
    """Unit ratios and the EUV operating frequency, all strictly positive."""

    hartree_per_ev: float = HARTREE_PER_EV
    au_time_per_fs: float = AU_TIME_PER_FS
    speed_of_light_au: float = SPEED_OF_LIGHT_AU
    euv_omega: float = EUV_OMEGA_HA

    def __post_init__(self) -> None:
        for name in ("hartree_per_ev", "au_time_per_fs", "speed_of_light_au", "euv_omega"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be strictly positive")
        # operating frequency must sit within 0.5% of 92 eV
        if abs(self.euv_omega / (92.0 * self.hartree_per_ev) - 1.0) > 5e-3:
            raise ValidationError("euv_omega inconsistent with 92 eV operating point")

    @property
    def cross_section_prefactor(self) -> float:
        """4*pi*omega / (3*c), the semi-classical prefactor at the EUV frequency."""
        return 4.0 * math.pi * self.euv_omega / (3.0 * self.speed_of_light_au)


CONSTANTS = PhysicalConstants()


def ev_to_hartree(energy_ev: float) -> float:
    """Convert an energy in eV to Hartree."""
    if not math.isfinite(energy_ev):
        raise ValidationError("energy must be finite")
    return energy_ev * HARTREE_PER_EV


def hartree_to_ev(energy_ha: float) -> float:
    """Convert an energy in Hartree to eV."""
    if not math.isfinite(energy_ha):
        raise ValidationError("energy must be finite")
    return energy_ha / HARTREE_PER_EV


def fs_to_au(time_fs: float) -> float:
    """Convert a time in femtoseconds to atomic units."""
    if not math.isfinite(time_fs):
        raise ValidationError("time must be finite")
    return time_fs * AU_TIME_PER_FS


def au_to_fs(time_au: float) -> float:
    """Convert a time in atomic units to femtoseconds."""
    if not math.isfinite(time_au):
        raise ValidationError("time must be finite")
    return time_au / AU_TIME_PER_FS


def angstrom_to_bohr(length_angstrom: float) -> float:
    """Convert a length in Angstrom to Bohr (cell-size unit override)."""
    if not math.isfinite(length_angstrom):
        raise ValidationError("length must be finite")
    return length_angstrom * BOHR_PER_ANGSTROM


def bohr_to_angstrom(length_bohr: float) -> float:
    """Convert a length in Bohr to Angstrom."""
    if not math.isfinite(length_bohr):
        raise ValidationError("length must be finite")
    return length_bohr / BOHR_PER_ANGSTROM


def format_sig3(value: float) -> str:
    """Render a gate count with 3 significant figures, round-half-up.

    Counts reach 1e20, so rendering goes through the decimal exponent
    rather than float formatting quirks.
    """
    if value == 0:
        return "0"
    if value < 0:
        return "-" + format_sig3(-value)
    exp = math.floor(math.log10(value))
    mant = value / 10.0**exp
    mant = math.floor(mant * 100 + 0.5) / 100  # round half up on 3rd figure
    if mant >= 10.0:
        mant /= 10.0
        exp += 1
    if -1 <= exp <= 3:
        out = mant * 10.0**exp
        return f"{out:.4g}"
    return f"{mant:.2f}e{exp}"


@dataclass(frozen=True)
class CostReport:
    """Logical-qubit and non-Clifford gate totals with a per-subroutine breakdown.

    ``overall_gates`` is always ``gates_per_circuit * shots`` and the breakdown
    entries always sum to ``gates_per_circuit``; both are enforced at
    construction. Gate counts are exact integers where the formulas are exact
    and floats where they are analytic.
    """

    logical_qubits: int
    gates_per_circuit: float
    shots: int
    overall_gates: float
    breakdown: tuple[tuple[str, float], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.logical_qubits < 0 or self.shots < 1:
            raise ValidationError("qubits must be >= 0 and shots >= 1")
        if any(count < 0 for _, count in self.breakdown):
            raise ValidationError("breakdown entries must be non-negative")
        if self.overall_gates != self.gates_per_circuit * self.shots:
            raise ValidationError("overall_gates != gates_per_circuit * shots")
        if self.breakdown:
            total = sum(count for _, count in self.breakdown)
            if isinstance(self.gates_per_circuit, int) and isinstance(total, int):
                ok = total == self.gates_per_circuit
            else:
                ok = math.isclose(total, self.gates_per_circuit, rel_tol=1e-12, abs_tol=0.0)
            if not ok:
                raise ValidationError("breakdown does not sum to gates_per_circuit")

    @classmethod
    def build(cls, logical_qubits: int, shots: int,
              breakdown: list[tuple[str, float]]) -> "CostReport":
        """Assemble a report whose gate total is defined as the breakdown sum."""
        gates = sum(count for _, count in breakdown)
        return cls(logical_qubits=logical_qubits, gates_per_circuit=gates,
                   shots=shots, overall_gates=gates * shots,
                   breakdown=tuple(breakdown))

    def to_dict(self) -> dict:
        return {
            "logical_qubits": self.logical_qubits,
            "gates_per_circuit": self.gates_per_circuit,
            "shots": self.shots,
            "overall_gates": self.overall_gates,
            "breakdown": [[label, count] for label, count in self.breakdown],
        }


@dataclass(frozen=True)
class AbsorptionSpec:
    """Inputs for the single-frequency absorption-sensitivity estimator.

    ``gamma`` is the spectral resolution target that sets the Trotter step;
    ``shot_alpha``/``shot_beta`` optionally pin the published operating-point
    constants for the shot count (computed from first principles when None).
    """

    n_orbitals: int
    l_fragments: int
    gamma: float            # Ha
    spectral_norm: float    # Ha, effective ||H||
    j_max: int
    tau: float              # a.u.
    y3_magnitude: float     # Ha, |<Y3>|
    dipole_norm: float      # a.u.
    epsilon: float          # a.u., target cross-section error
    rot_bits: int = 18
    shot_alpha: float | None = None
    shot_beta: float | None = None
    state_prep_gates: int = 0
    ancilla_qubits: int = 104
    gqsp_two_sided: bool = True

    def __post_init__(self) -> None:
        if self.gamma <= 0 or self.tau <= 0 or self.epsilon <= 0:
            raise ValidationError("gamma, tau, epsilon must be positive")
        if self.j_max < 0 or self.l_fragments < 1 or self.n_orbitals < 1:
            raise ValidationError("j_max >= 0, l_fragments >= 1, n_orbitals >= 1 required")
        if self.y3_magnitude <= 0 or self.spectral_norm <= 0:
            raise ValidationError("y3_magnitude and spectral_norm must be positive")
        if self.rot_bits < 3:
            raise ValidationError("rot_bits must be at least 3")
        if self.dipole_norm < 0 or self.state_prep_gates < 0:
            raise ValidationError("dipole_norm and state_prep_gates must be non-negative")

    @classmethod
    def from_dict(cls, data: dict) -> "AbsorptionSpec":
        return _spec_from_dict(cls, data)

    def to_dict(self) -> dict:
        return _spec_to_dict(self)


@dataclass(frozen=True)
class PlaneWaveSpec:
    """Inputs for the first-quantized photoemission cost estimator.

    ``n_bits`` is qubits per spatial dimension, so the grid has 2**n_bits
    plane waves per dimension. ``epsilon_be`` budgets the block-encoding
    precision bits; ``epsilon_sampling`` sets the shot count.
    """

    eta: int
    lambda_zeta: float
    omega_cell: float       # Bohr^3
    n_bits: int
    epsilon_be: float       # Ha
    delta_filter: float     # Ha
    t_evolution: float      # a.u.
    p_dipole: float = 1e-3
    p_window: float = 1e-3
    p_continuum: float = 1.0
    r_cutoff: float = 20.0  # Bohr
    c_sp: float = 1e9       # state-preparation gates, external input
    method: str = "AllElectron"
    epsilon_sampling: float = 0.01
    b_r: int = 7
    p_nu: float = 1.0
    filter_convention: str = "table"  # "table" or "body"

    def __post_init__(self) -> None:
        if self.eta < 1 or self.n_bits < 1:
            raise ValidationError("eta >= 1 and n_bits >= 1 required")
        if self.omega_cell <= 0 or self.r_cutoff <= 0:
            raise ValidationError("omega_cell and r_cutoff must be positive")
        for name in ("p_dipole", "p_window", "p_continuum", "p_nu"):
            p = getattr(self, name)
            if not 0 < p <= 1:
                raise ValidationError(f"{name} must lie in (0, 1]")
        for name in ("epsilon_be", "delta_filter", "epsilon_sampling", "lambda_zeta"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if self.t_evolution < 0:
            raise ValidationError("t_evolution must be non-negative")
        if self.method not in ("AllElectron", "Pseudopotential"):
            raise ValidationError("method must be AllElectron or Pseudopotential")
        if self.filter_convention not in ("table", "body"):
            raise ValidationError("filter_convention must be 'table' or 'body'")
        if self.b_r < 1:
            raise ValidationError("b_r must be at least 1")

    @property
    def box_length(self) -> float:
        """Cubic cell side length Omega^(1/3) in Bohr."""
        return self.omega_cell ** (1.0 / 3.0)

    @classmethod
    def from_dict(cls, data: dict) -> "PlaneWaveSpec":
        return _spec_from_dict(cls, data)

    def to_dict(self) -> dict:
        return _spec_to_dict(self)


def _spec_from_dict(cls, data: dict):
    if not isinstance(data, dict):
        raise ValidationError(f"{cls.__name__} input must be a JSON object")
    fields = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
    unknown = set(data) - fields
    if unknown:
        raise ValidationError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ValidationError(f"bad {cls.__name__}: {exc}") from exc


def _spec_to_dict(spec) -> dict:
    return {name: getattr(spec, name) for name in spec.__dataclass_fields__}


def with_overrides(spec, **kwargs):
    """Return a copy of a frozen spec with the given fields replaced."""
    return replace(spec, **kwargs)
