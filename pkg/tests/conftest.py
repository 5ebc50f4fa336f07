"""共享 fixture。"""

import pytest

from dsskit.bva import DerivationConfig, derive_suite, reference_nominal
from dsskit.kinematics import EnvConstants


@pytest.fixture
def env():
    return EnvConstants()


@pytest.fixture
def nominal():
    return reference_nominal()


@pytest.fixture(scope="session")
def reference_suite():
    """名义场景上推导的相对形式用例集。"""
    return derive_suite(DerivationConfig())


@pytest.fixture(scope="session")
def absolute_suite():
    return derive_suite(DerivationConfig(form="absolute"))


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    """CLI 测试不受外部环境变量影响。"""
    for name in ("DSSKIT_CONFIG", "DSSKIT_SEED", "DSSKIT_WORKERS", "DSSKIT_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
