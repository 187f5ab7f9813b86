"""Random streams and the compiled/numpy kernel pair."""

import numpy as np
import pytest

from predlim import _backend, _fallback
from predlim.ar1_model import Ar1Params
from predlim.replicates import BLOCK_SIZE, backward_replicates, forward_replicates

try:
    from predlim import _kernels
except ImportError:  # pragma: no cover - extension not built
    _kernels = None

needs_ext = pytest.mark.skipif(_kernels is None, reason="compiled kernels not built")

# Random123 known-answer vectors for philox4x32-10
KAT = [
    ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
    ((0xFFFFFFFF,) * 4, (0xFFFFFFFF,) * 2, (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
    ((0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344), (0xA4093822, 0x299F31D0),
     (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1)),
]


@pytest.mark.parametrize("ctr,key,expected", KAT)
def test_philox_known_answers(ctr, key, expected):
    assert tuple(int(w) for w in _fallback.philox4x32(*ctr, *key)) == expected


def test_normals_look_standard():
    z = _fallback.normals_block(2024, 0, 2000, 100, 0, 0).ravel()
    assert abs(z.mean()) < 4 / np.sqrt(z.size)
    assert abs(z.var() - 1) < 4 * np.sqrt(2 / z.size)


def test_streams_depend_on_replicate_attempt_and_purpose():
    base = _fallback.normals(7, 3, 8)
    assert not np.array_equal(base, _fallback.normals(7, 4, 8))
    assert not np.array_equal(base, _fallback.normals(7, 3, 8, attempt=1))
    assert not np.array_equal(base, _fallback.normals(7, 3, 8, purpose=1))
    assert not np.array_equal(base, _fallback.normals(8, 3, 8))
    # a replicate's stream does not depend on which block it sits in
    block = _fallback.normals_block(7, 0, 5, 8, 0, 0)
    assert np.array_equal(block[3], base)


@needs_ext
def test_backends_draw_the_same_streams():
    for rep in (0, 1, 2**40 + 3):
        a = _kernels.normals(123456789, rep, 9, 0, 0)
        b = _fallback.normals(123456789, rep, 9, 0, 0)
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-14)


@needs_ext
@pytest.mark.parametrize("n", [3, 4, 5, 50, 51])
def test_backends_agree_on_stats(n):
    args = (0.6, 1.3)
    out_c = [np.empty(300) for _ in range(3)]
    out_p = [np.empty(300) for _ in range(3)]
    _kernels.backward_stats(*args, 1.5, n, 99, 10, 300, 0, *out_c)
    _fallback.backward_stats(*args, 1.5, n, 99, 10, 300, 0, *out_p)
    for a, b in zip(out_c, out_p):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)
    out_c = [np.empty(300) for _ in range(4)]
    out_p = [np.empty(300) for _ in range(4)]
    _kernels.forward_stats(*args, n, 99, 10, 300, 0, *out_c)
    _fallback.forward_stats(*args, n, 99, 10, 300, 0, *out_p)
    for a, b in zip(out_c, out_p):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("module", [_fallback, pytest.param(_kernels, marks=needs_ext)])
def test_stats_match_paths(module):
    n = 7
    paths = module.backward_paths(0.4, 0.9, -1.2, n, 5, 0, 50)
    sxy, smid, y1 = (np.empty(50) for _ in range(3))
    module.backward_stats(0.4, 0.9, -1.2, n, 5, 0, 50, 0, sxy, smid, y1)
    np.testing.assert_allclose(sxy, np.sum(paths[:, 1:] * paths[:, :-1], axis=1), rtol=1e-13)
    np.testing.assert_allclose(smid, np.sum(paths[:, 1:-1] ** 2, axis=1), rtol=1e-13)
    np.testing.assert_array_equal(y1, paths[:, 0])
    paths = module.forward_paths(0.4, 0.9, n, 5, 0, 50)
    yn = np.empty(50)
    module.forward_stats(0.4, 0.9, n, 5, 0, 50, 0, sxy, smid, y1, yn)
    np.testing.assert_allclose(sxy, np.sum(paths[:, 1:] * paths[:, :-1], axis=1), rtol=1e-13)
    np.testing.assert_array_equal(yn, paths[:, -1])


def test_worker_count_does_not_change_results():
    params = Ar1Params(0.5, 1.0)
    count = 3 * BLOCK_SIZE + 17
    ref = backward_replicates(params, 20, 2.0, count, 11, workers=1)
    for workers in (2, 4, 8):
        other = backward_replicates(params, 20, 2.0, count, 11, workers=workers)
        for name in ("sxy", "smid", "y1", "yn"):
            assert getattr(ref, name).tobytes() == getattr(other, name).tobytes()
    fwd1 = forward_replicates(params, 20, count, 11, workers=1)
    fwd8 = forward_replicates(params, 20, count, 11, workers=8)
    assert fwd1.sxy.tobytes() == fwd8.sxy.tobytes()


def test_prefix_property():
    # the first m replicates of a larger run are the m-replicate run
    params = Ar1Params(0.3, 2.0)
    small = backward_replicates(params, 10, 1.0, 1000, 3)
    big = backward_replicates(params, 10, 1.0, 5000, 3)
    assert np.array_equal(small.sxy, big.sxy[:1000])


def test_backend_flag(monkeypatch):
    import importlib
    assert _backend.BACKEND in ("cython", "python")
    monkeypatch.setenv("PREDLIM_PURE_PYTHON", "1")
    try:
        assert importlib.reload(_backend).BACKEND == "python"
        monkeypatch.setenv("PREDLIM_PURE_PYTHON", "0")
        expected = "python" if _kernels is None else "cython"
        assert importlib.reload(_backend).BACKEND == expected
    finally:
        monkeypatch.undo()
        importlib.reload(_backend)
