import numpy as np
import pytest

from voltspec.errors import InsufficientPeaks, StepSizeError
from voltspec.kernel import make_exponential
from voltspec.modal_sim import (
    abscissa_consistency,
    assemble,
    decay_rate,
    dominance,
    integrate,
    max_step,
    modal_reconstruction,
    rk4_propagator,
)
from voltspec.symbol import Mode


def test_propagator_matches_scalar_rk4():
    M = np.array([[-0.3]])
    dt = 0.1
    z = -0.3 * dt
    assert rk4_propagator(M, dt)[0, 0] == pytest.approx(1 + z + z**2 / 2 + z**3 / 6 + z**4 / 24, rel=1e-15)


def test_step_limit():
    mode, k = Mode(5.0, 0.0), make_exponential([(1, 2)])
    assert max_step(mode, k) == pytest.approx(0.02)
    with pytest.raises(StepSizeError):
        integrate(assemble(mode, k, 1.0, 0.0), 1.0, 0.05)


def test_energy_conserved_without_memory():
    mode, k = Mode(2.0, 0.0), make_exponential([(1e-12, 1.0)])
    trace = integrate(assemble(mode, k, 1.0, 0.0), 50.0, 0.005)
    drift = np.max(np.abs(trace.energy - trace.energy[0])) / trace.energy[0]
    assert drift <= 1e-8


def test_flat_envelope_rate_is_zero():
    mode, k = Mode(2.0, 0.0), make_exponential([(1e-15, 1.0)])
    trace = integrate(assemble(mode, k, 1.0, 0.0), 50.0, 0.005)
    trace.energy = np.full_like(trace.energy, trace.energy[0])
    assert decay_rate(trace) == 0.0


def test_zero_trace_raises():
    mode, k = Mode(1.0, 0.0), make_exponential([(1, 2)])
    trace = integrate(assemble(mode, k, 0.0, 0.0), 10.0, 0.01)
    with pytest.raises(InsufficientPeaks):
        decay_rate(trace)


@pytest.mark.parametrize("terms,a,theta", [([(1, 2)], 1.0, 0.0), ([(1, 1), (1, 3)], 2.0, 1.0),
                                           ([(4, 2)], 1.0, 0.0)])
def test_rate_matches_abscissa(terms, a, theta):
    mode, k = Mode(a, theta), make_exponential(terms)
    rep = abscissa_consistency(mode, k, 200.0, max_step(mode, k))
    assert rep.passed
    assert rep.rel_error < 1e-3


def test_reconstruction_matches_integration():
    mode, k = Mode(3.0, 0.5), make_exponential([(1, 1), (0.5, 2), (0.25, 4)])
    sys = assemble(mode, k, 1.0, 0.5)
    trace = integrate(sys, 10.0, 0.001)
    ref = modal_reconstruction(sys, trace.times[-1])
    assert np.max(np.abs(trace.states[-1] - ref)) < 1e-9


def test_dominance():
    assert dominance([complex(-0.1, 1), complex(-0.1, -1), -1.0])
    assert not dominance([complex(-0.1, 1), complex(-0.1, -1), -0.12])
    assert dominance([0.5])


def test_trace_rows():
    mode, k = Mode(1.0, 0.0), make_exponential([(1, 2)])
    trace = integrate(assemble(mode, k, 1.0, 0.0), 1.0, 0.01)
    rows = trace.as_rows(10)
    assert len(rows) == 11
    assert rows[0] == (0.0, 1.0, 0.0, 1.0)
