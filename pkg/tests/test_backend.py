import numpy as np
import pytest

from gaussperim import backend
from gaussperim._core_py import KERNEL_ADDITIVE, KERNEL_CUTOFF, KERNEL_PLAIN

CASES = [(1.0, 0.5, 2, 0, KERNEL_PLAIN, 0.0), (0.0, 0.5, 2, 0, KERNEL_CUTOFF, 0.1),
         (1.0, 0.7, 2, 0, KERNEL_ADDITIVE, 0.1), (1.0, 0.3, 3, 1, KERNEL_PLAIN, 0.0)]


def _batch():
    rng = np.random.default_rng(1)
    lo = rng.uniform(0.01, 0.5, 500)
    hi = lo + rng.exponential(2.0, 500)
    return lo, hi, rng.uniform(0.0, 8.0, 500), rng.normal(0.0, 1.0, 500)


def test_python_backend_always_available():
    assert "python" in backend.implementations()
    assert backend.NAME in backend.implementations()


@pytest.mark.parametrize("case", CASES)
def test_backends_agree(case):
    impls = backend.implementations()
    if len(impls) < 2:
        pytest.skip("compiled extension not built")
    lo, hi, c0, b = _batch()
    ref = impls["python"](lo, hi, c0, b, *case, 8)
    out = impls["cython"](lo, hi, c0, b, *case, 8)
    assert np.allclose(out, ref, rtol=1e-11, atol=1e-300)


def test_plain_euclidean_closed_form():
    f = backend.implementations()["python"]
    # int_1^2 r^{-1-s} dr with s = 0.5
    out = f(np.array([1.0]), np.array([2.0]), 0.0, 0.0, 0.0, 0.5, 1, 0, KERNEL_PLAIN, 0.0, 8)
    assert out[0] == pytest.approx(2 * (1 - 2 ** -0.5), rel=1e-14)


def test_gaussian_ray_against_scipy():
    from scipy import integrate
    f = backend.radial_integrate
    lo, hi, c0, b = 0.2, 3.0, 0.5, 0.3
    ref = integrate.quad(lambda r: r ** 0 * r ** -1.5 * np.exp(-(c0 + 2 * r * b + r * r) / 4),
                         lo, hi, epsabs=1e-14, epsrel=1e-13)[0]
    errs = [abs(f(np.array([lo]), np.array([hi]), c0, b, 1.0, 0.5, 1, 0, KERNEL_PLAIN, 0.0, o)[0]
                - ref) for o in (6, 8, 12)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-12 * ref
