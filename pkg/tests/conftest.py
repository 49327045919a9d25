import functools

import pytest

from fareygauss.specfun import build_rule


@functools.lru_cache(maxsize=None)
def _rule(measure, n, cutoff=None):
    return build_rule(measure, n, cutoff)


@pytest.fixture(scope="session")
def rule():
    """Cached quadrature rules: ``rule("m", 60)``."""
    return _rule


@pytest.fixture(scope="session")
def m60():
    return _rule("m", 60)
