import os
import subprocess
import sys

import numpy as np
import pytest

from fareygauss import _backend, kernels

needs_numba = pytest.mark.skipif(not _backend.HAVE_NUMBA, reason="numba not installed")


def _starts(n=64, seed=5):
    return np.random.default_rng(seed).uniform(1e-6, 1, n)


@needs_numba
def test_log_tau_backends_agree():
    x0 = _starts()
    a = kernels._gauss_log_tau_nb(x0, 500)
    b = kernels._gauss_log_tau_np(x0, 500)
    assert np.allclose(a, b, rtol=0, atol=1e-13, equal_nan=True)


@needs_numba
def test_passage_sums_backends_agree():
    x0 = _starts()
    cps = np.array([10, 100, 400], dtype=np.int64)
    a = kernels._gauss_passage_sums_nb(x0, cps)
    b = kernels._gauss_passage_sums_np(x0, cps)
    assert np.array_equal(a, b, equal_nan=True)


@needs_numba
@pytest.mark.parametrize("mode", [kernels.MODE_TRACE, kernels.MODE_DIRECT])
@pytest.mark.parametrize("ell, z, q", [(1, 1.0, 0), (2, 0.7, 1), (3, 0.5 + 0.2j, 0), (3, 1.0, 1)])
def test_tuple_sum_backends_agree(mode, ell, z, q):
    kmax, tol = 40, 1e-14
    wk, suf = kernels._digit_bounds(z, kmax)
    v, p, c = kernels._tuple_sum_nb(ell, complex(z), q, kmax, tol, mode, wk, suf)
    w, p2, c2 = kernels._tuple_sum_np(ell, complex(z), q, kmax, tol, mode, wk, suf)
    assert abs(np.sum(v) - w) < 1e-14
    assert int(np.sum(c)) == c2
    assert float(np.sum(p)) == pytest.approx(p2, rel=1e-12, abs=1e-300)


@needs_numba
def test_results_thread_count_independent():
    vals = []
    for n in (1, 2, 4):
        _backend.set_threads(n)
        vals.append(kernels.periodic_tuple_sum(3, 0.9, 0, 80, 1e-15, kernels.MODE_TRACE))
    _backend.set_threads(_backend.numba.config.NUMBA_NUM_THREADS)
    assert vals[0] == vals[1] == vals[2]


def test_checkpoints_validated():
    with pytest.raises(ValueError):
        kernels.gauss_passage_sums(_starts(4), [100, 10])


def test_tuple_sum_rejects_outside_disk():
    with pytest.raises(ValueError):
        kernels.periodic_tuple_sum(1, 1.5, 0, 10, 0.0, kernels.MODE_TRACE)


def _run_with_env(code, disable):
    env = dict(os.environ)
    env.pop(_backend.DISABLE_ENV, None)
    if disable:
        env[_backend.DISABLE_ENV] = "1"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def test_env_flag_selects_numpy_backend():
    code = (
        "from fareygauss import _backend, zeta, measures;"
        "print(_backend.backend_name());"
        "print(repr(zeta.grand_Xi(2, 0.7, 60).value));"
        "print(repr(measures.birkhoff_log_tau(1, 8, 1000).mean))"
    )
    off = _run_with_env(code, True).splitlines()
    assert off[0] == "numpy"
    if _backend.HAVE_NUMBA:
        on = _run_with_env(code, False).splitlines()
        assert on[0] == "numba"
        assert abs(complex(on[1]) - complex(off[1])) < 1e-15
        assert abs(float(on[2]) - float(off[2])) < 1e-13
