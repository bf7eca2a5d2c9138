import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from mcamsim import kernels
from mcamsim.kernels import _fallback

try:
    from mcamsim.kernels import _native
except ImportError:  # extension not built
    _native = None

needs_native = pytest.mark.skipif(_native is None, reason="compiled kernels not built")


def _popcount_ref(q, r):
    return np.array([[bin(int(a) ^ int(b)).count("1") for b in r] for a in q])


@st.composite
def lut_case(draw):
    n = draw(st.sampled_from([2, 4, 8]))
    w = draw(st.integers(1, 12))
    lut = draw(hnp.arrays(np.float64, (n, n), elements=st.floats(1e-6, 10.0)))
    q = draw(hnp.arrays(np.int32, (draw(st.integers(1, 5)), w), elements=st.integers(0, n - 1)))
    r = draw(hnp.arrays(np.int32, (draw(st.integers(1, 9)), w), elements=st.integers(0, n - 1)))
    return lut, q, r


def _sequential(lut, q, r):
    out = np.zeros((q.shape[0], r.shape[0]))
    for a in range(q.shape[0]):
        for b in range(r.shape[0]):
            acc = 0.0
            for j in range(q.shape[1]):
                acc += lut[q[a, j], r[b, j]]
            out[a, b] = acc
    return out


@given(lut_case())
def test_fallback_lut_scores_bit_exact(case):
    lut, q, r = case
    assert np.array_equal(kernels.lut_scores(lut, q, r, impl=_fallback), _sequential(lut, q, r))


@needs_native
@given(lut_case())
def test_native_equals_fallback_lut(case):
    lut, q, r = case
    assert np.array_equal(kernels.lut_scores(lut, q, r, impl=_native),
                          kernels.lut_scores(lut, q, r, impl=_fallback))


@needs_native
@given(st.integers(1, 6), st.integers(1, 10), st.integers(1, 5), st.sampled_from([2, 4, 8]), st.integers(0, 999))
def test_native_equals_fallback_tables(n_rows, w, n_q, n, seed):
    rng = np.random.default_rng(seed)
    tables = rng.random((n_rows, w, n)) + 1e-3
    q = rng.integers(0, n, (n_q, w))
    a = kernels.table_scores(tables, q, impl=_native)
    b = kernels.table_scores(tables, q, impl=_fallback)
    assert np.array_equal(a, b)
    ref = np.array([[sum(tables[r, j, q[k, j]] for j in range(w)) for r in range(n_rows)] for k in range(n_q)])
    assert np.allclose(a, ref, rtol=1e-12)


@pytest.mark.parametrize("impl", [_fallback, pytest.param(_native, marks=needs_native)])
def test_hamming_scores(impl):
    rng = np.random.default_rng(0)
    bits_q = rng.integers(0, 2, (7, 130), dtype=np.uint8)
    bits_r = rng.integers(0, 2, (11, 130), dtype=np.uint8)
    d = kernels.hamming_scores(kernels.pack_bits(bits_q), kernels.pack_bits(bits_r), impl=impl)
    ref = (bits_q[:, None, :] != bits_r[None, :, :]).sum(-1)
    assert np.array_equal(d, ref)


def test_pack_bits_matches_int():
    bits = np.array([[0, 1, 0, 1], [1, 1, 1, 1]], dtype=np.uint8)
    packed = kernels.pack_bits(bits)
    assert packed.shape == (2, 1)
    assert int(packed[0, 0]) == 0b1010 and int(packed[1, 0]) == 0b1111
    assert np.array_equal(kernels.hamming_scores(packed[:1], packed[1:]), _popcount_ref(packed[:1, 0], packed[1:, 0]))


@pytest.mark.parametrize("impl", [_fallback, pytest.param(_native, marks=needs_native)])
def test_first_argmin_ties(impl):
    s = np.array([[3.0, 1.0, 1.0, 2.0], [5.0, 5.0, 5.0, 5.0], [0.0, -1.0, 0.0, -1.0]])
    assert kernels.first_argmin(s, impl=impl).tolist() == [1, 0, 1]


def test_backend_flag():
    import os

    expect = "native" if _native is not None and not os.environ.get("MCAMSIM_PURE_PYTHON") else "python"
    assert kernels.BACKEND == expect


def test_pure_python_env_switch():
    import os
    import subprocess
    import sys

    env = dict(os.environ, MCAMSIM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import mcamsim.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
