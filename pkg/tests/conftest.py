"""Session fixtures for the expensive simulation runs.

Each fixture is computed once and shared between the module tests and the
acceptance suite, so the full run stays in the low minutes.
"""

import math

import pytest

from phaselab import analogs, berry, scattering


EQUATOR_AMPLITUDE = 1.0
EQUATOR_WOBBLE = 0.005

WAVEPACKET_CONFIG = scattering.ScatteringConfig(
    p=1.5, m=1.0, X=20.0, barrier=scattering.DeltaBarrier(3.0))
WAVEPACKET_RUN = scattering.WavepacketRun(
    grid_points=8192, dt=0.01, length=1000.0, center=35.0, width=2.5,
    round_trips=16)


@pytest.fixture(scope="session")
def equatorial_decomposition():
    period = 2.0 * math.pi / EQUATOR_WOBBLE
    return berry.cyclic_phase_decomposition(
        EQUATOR_AMPLITUDE, 0.5 * math.pi, period, 0.02)


@pytest.fixture(scope="session")
def wavepacket_result():
    return scattering.wavepacket_run(WAVEPACKET_RUN, WAVEPACKET_CONFIG)


@pytest.fixture(scope="session")
def adiabatic_pendulum():
    system, duration = analogs.msw_benchmark_system()
    return analogs.pendulum_sweep(system, duration)


@pytest.fixture(scope="session")
def rectangle_transport():
    return analogs.rectangular_loop_phase(0.5, 10.0, samples=2000,
                                          adiabaticity=1e-3,
                                          transport_step=0.01)


@pytest.fixture(scope="session")
def celestial_config():
    return analogs.CelestialConfig(m_jupiter=1e-3, r_jupiter=5.2)


@pytest.fixture(scope="session")
def celestial_grid(celestial_config):
    return analogs.frozen_period_grid(celestial_config, nodes=32)


@pytest.fixture(scope="session")
def celestial_residual_report(celestial_config):
    return analogs.celestial_adiabatic_residual(celestial_config,
                                                n_periods=1.0)
