import numpy as np
import pytest

from jamnet import NetworkScenario, SensorParams, Setting, validate_scenario


def random_symmetric_configs(count: int, seed: int, m_max: int = 10):
    """(M, K, alpha, beta, power) tuples with 1 <= K < M <= m_max."""
    rng = np.random.default_rng(seed)
    configs = []
    for _ in range(count):
        M = int(rng.integers(2, m_max + 1))
        K = int(rng.integers(1, M))
        configs.append(
            (
                M,
                K,
                float(rng.uniform(0.2, 3.0)),
                float(rng.uniform(0.2, 3.0)),
                float(rng.uniform(0.1, 5.0)),
            )
        )
    return configs


def random_asym_scenario(rng: np.random.Generator, setting: Setting,
                         m_max: int = 6, k_max: int = 4) -> NetworkScenario:
    M = int(rng.integers(1, m_max + 1))
    K = int(rng.integers(1, k_max + 1))
    tx = tuple(
        SensorParams(
            alpha=float(rng.uniform(0.2, 3.0)),
            beta=float(rng.uniform(0.2, 3.0)),
            power=0.0,
        )
        for _ in range(M)
    )
    ad = tuple(
        SensorParams(
            alpha=float(rng.uniform(0.2, 3.0)),
            beta=float(rng.uniform(0.2, 3.0)),
            power=0.0,
        )
        for _ in range(K)
    )
    return validate_scenario(
        NetworkScenario(
            transmitters=tx,
            adversaries=ad,
            setting=setting,
            sum_power_transmit=float(rng.uniform(0.5, 5.0)),
            sum_power_attack=float(rng.uniform(0.05, 2.0)),
        )
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
