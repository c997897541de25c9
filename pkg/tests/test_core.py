"""Unit conversions, constants, and report invariants."""

import math

import pytest

from euvq.core import (
    CONSTANTS,
    AbsorptionSpec,
    CostReport,
    PhysicalConstants,
    ValidationError,
    au_to_fs,
    ev_to_hartree,
    format_sig3,
    fs_to_au,
    hartree_to_ev,
)


@pytest.mark.parametrize("ev, expected", [
    (92.0, 3.3809),       # the EUV operating point
    (0.0, 0.0),
    (1.84, 0.06761),      # the 2% bandwidth
])
def test_ev_to_hartree(ev, expected):
    assert ev_to_hartree(ev) == pytest.approx(expected, abs=5e-5)


@pytest.mark.parametrize("fs, expected", [(1.0, 41.3414), (0.0, 0.0), (10.0, 413.414)])
def test_fs_to_au(fs, expected):
    assert fs_to_au(fs) == pytest.approx(expected, rel=1e-6)


def test_round_trip_energy_and_time():
    for value in (1e-6, 0.0676, 3.38, 92.0, 1215.0):
        assert hartree_to_ev(ev_to_hartree(value)) == pytest.approx(value, rel=1e-12)
        assert au_to_fs(fs_to_au(value)) == pytest.approx(value, rel=1e-12)


def test_angstrom_override():
    from euvq.core import angstrom_to_bohr, bohr_to_angstrom

    # the 200-Angstrom reading of the cell side, available as an override
    assert angstrom_to_bohr(200.0) == pytest.approx(377.945, abs=1e-2)
    assert bohr_to_angstrom(angstrom_to_bohr(3.7)) == pytest.approx(3.7, rel=1e-12)


def test_constants_invariants():
    assert CONSTANTS.euv_omega == pytest.approx(92.0 * CONSTANTS.hartree_per_ev, rel=5e-3)
    assert CONSTANTS.cross_section_prefactor == pytest.approx(0.10, abs=5e-3)
    with pytest.raises(ValidationError):
        PhysicalConstants(euv_omega=-1.0)
    with pytest.raises(ValidationError):
        PhysicalConstants(euv_omega=4.0)  # not 92 eV


def test_cost_report_consistency():
    report = CostReport.build(logical_qubits=10, shots=3,
                              breakdown=[("a", 5), ("b", 7)])
    assert report.gates_per_circuit == 12
    assert report.overall_gates == 36
    with pytest.raises(ValidationError):
        CostReport(logical_qubits=1, gates_per_circuit=5, shots=2, overall_gates=9)
    with pytest.raises(ValidationError):
        CostReport(logical_qubits=1, gates_per_circuit=5, shots=2, overall_gates=10,
                   breakdown=(("a", 4),))
    with pytest.raises(ValidationError):
        CostReport(logical_qubits=1, gates_per_circuit=5, shots=2, overall_gates=10,
                   breakdown=(("a", -1), ("b", 6)))


def test_cost_report_large_counts_stay_exact():
    # Table-II scale totals must not lose integer precision
    gates = 10**20 + 7
    report = CostReport.build(logical_qubits=1, shots=10**4, breakdown=[("all", gates)])
    assert report.overall_gates == gates * 10**4


def test_format_sig3():
    assert format_sig3(3.944e9) == "3.94e9"
    assert format_sig3(3.945e9) == "3.95e9"   # half rounds up
    assert format_sig3(9.999e9) == "1.00e10"
    assert format_sig3(863) == "863"
    assert format_sig3(0) == "0"


def test_spec_validation_errors():
    good = dict(n_orbitals=4, l_fragments=4, gamma=0.03, spectral_norm=4.0, j_max=10,
                tau=0.4, y3_magnitude=10.0, dipole_norm=6.25, epsilon=0.1)
    AbsorptionSpec.from_dict(good)
    with pytest.raises(ValidationError):
        AbsorptionSpec.from_dict({**good, "gamma": -1.0})
    with pytest.raises(ValidationError):
        AbsorptionSpec.from_dict({**good, "bogus_field": 1})
    with pytest.raises(ValidationError):
        AbsorptionSpec.from_dict({**good, "rot_bits": 2})


def test_spec_round_trip():
    spec = AbsorptionSpec(n_orbitals=22, l_fragments=22, gamma=ev_to_hartree(1.0),
                          spectral_norm=4.0, j_max=200, tau=math.pi / 8,
                          y3_magnitude=10.0, dipole_norm=6.25, epsilon=0.1)
    assert AbsorptionSpec.from_dict(spec.to_dict()) == spec
