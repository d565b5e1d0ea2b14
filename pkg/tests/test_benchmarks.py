import numpy as np
import pytest

from gaussperim.benchmarks import BENCHMARKS, benchmark
from gaussperim.functionals import j_total
from gaussperim.geometry import FullSpace, complement
from gaussperim.kernels import FracParams
from gaussperim.quad.integrate import QuadSpec


def test_registry():
    assert len(BENCHMARKS) == 5
    with pytest.raises(ValueError):
        benchmark("nope")


@pytest.mark.parametrize("name", list(BENCHMARKS))
def test_rotation_and_translation_keep_dimension(name):
    b = benchmark(name)
    R, D = b.rotated()
    T, DT = b.translated()
    assert R.dim == T.dim == b.dim
    if isinstance(b.domain, FullSpace):
        assert DT is b.domain


def test_symmetries_1d():
    b = benchmark("halfspace-1d-cube")
    p, spec = FracParams(1, 0.5), QuadSpec()
    base = j_total(b.region, b.domain, p, spec)
    comp = j_total(complement(b.region), b.domain, p, spec)
    T, DT = b.translated()
    moved = j_total(T, DT, p, spec)
    tol = base.error_estimate + comp.error_estimate
    assert abs(base.value - comp.value) <= 2 * tol
    assert abs(base.value - moved.value) > 5 * (base.error_estimate + moved.error_estimate)
