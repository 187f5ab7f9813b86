"""Pure-numpy versions of the simulation kernels.

Every function here has a twin in ``_kernels.pyx`` with the same signature
and the same random streams: the Philox words are integer-exact in both, so
the two backends differ only by the last-ulp behaviour of ``log``/``cos``/
``sin`` inside the Box-Muller transform.
"""

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)

_TWO_PI = 6.283185307179586
_INV_2_53 = 1.0 / 9007199254740992.0

PURPOSE_BACKWARD = 0
PURPOSE_FORWARD = 1


def philox4x32(c0, c1, c2, c3, k0, k1, rounds=10):
    """Philox4x32 block function on uint64-held 32-bit words (broadcasts)."""
    c0 = np.asarray(c0, dtype=np.uint64)
    c1 = np.asarray(c1, dtype=np.uint64)
    c2 = np.asarray(c2, dtype=np.uint64)
    c3 = np.asarray(c3, dtype=np.uint64)
    k0 = int(k0) & 0xFFFFFFFF
    k1 = int(k1) & 0xFFFFFFFF
    for r in range(rounds):
        if r:
            k0 = (k0 + _W0) & 0xFFFFFFFF
            k1 = (k1 + _W1) & 0xFFFFFFFF
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0, lo0 = p0 >> _SHIFT32, p0 & _MASK32
        hi1, lo1 = p1 >> _SHIFT32, p1 & _MASK32
        c0, c1, c2, c3 = (
            hi1 ^ c1 ^ np.uint64(k0),
            lo1,
            hi0 ^ c3 ^ np.uint64(k1),
            lo0,
        )
    return c0, c1, c2, c3


def _tag(purpose, attempt):
    return (int(attempt) << 4) | int(purpose)


def normals_block(key, start, count, ndraw, attempt, purpose):
    """Standard normals, shape ``(count, ndraw)``; row i is replicate start+i."""
    k0 = key & 0xFFFFFFFF
    k1 = (key >> 32) & 0xFFFFFFFF
    npair = (ndraw + 1) // 2
    reps = np.arange(start, start + count, dtype=np.uint64)[:, None]
    pairs = np.arange(npair, dtype=np.uint64)[None, :]
    w0, w1, w2, w3 = philox4x32(
        pairs, reps & _MASK32, reps >> _SHIFT32, _tag(purpose, attempt), k0, k1
    )
    # u1 in (0, 1], u2 in [0, 1)
    u1 = ((w0 >> np.uint64(5)).astype(np.float64) * 67108864.0
          + (w1 >> np.uint64(6)).astype(np.float64) + 1.0) * _INV_2_53
    u2 = ((w2 >> np.uint64(5)).astype(np.float64) * 67108864.0
          + (w3 >> np.uint64(6)).astype(np.float64)) * _INV_2_53
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = _TWO_PI * u2
    out = np.empty((count, 2 * npair))
    out[:, 0::2] = radius * np.cos(angle)
    out[:, 1::2] = radius * np.sin(angle)
    return out[:, :ndraw]


def normals(key, replicate, count, attempt=0, purpose=PURPOSE_BACKWARD):
    return normals_block(key, replicate, 1, count, attempt, purpose)[0].copy()


def backward_paths(rho, sigma, y_n, n, key, start, count, attempt=0):
    z = normals_block(key, start, count, n - 1, attempt, PURPOSE_BACKWARD)
    out = np.empty((count, n))
    out[:, n - 1] = y_n
    for i in range(n - 1):
        t = n - 2 - i
        out[:, t] = rho * out[:, t + 1] + sigma * z[:, i]
    return out


def forward_paths(rho, sigma, n, key, start, count, attempt=0):
    z = normals_block(key, start, count, n, attempt, PURPOSE_FORWARD)
    out = np.empty((count, n))
    out[:, 0] = sigma / np.sqrt(1.0 - rho * rho) * z[:, 0]
    for t in range(1, n):
        out[:, t] = rho * out[:, t - 1] + sigma * z[:, t]
    return out


def backward_stats(rho, sigma, y_n, n, key, start, count, attempt, sxy, smid, y1):
    """Fill lag-one cross sum, interior sum of squares and first value."""
    z = normals_block(key, start, count, n - 1, attempt, PURPOSE_BACKWARD)
    prev = np.full(count, float(y_n))
    acc_xy = np.zeros(count)
    acc_mid = np.zeros(count)
    for i in range(n - 1):
        cur = rho * prev + sigma * z[:, i]
        acc_xy += prev * cur
        if i < n - 2:
            acc_mid += cur * cur
        prev = cur
    sxy[:] = acc_xy
    smid[:] = acc_mid
    y1[:] = prev


def forward_stats(rho, sigma, n, key, start, count, attempt, sxy, smid, y1, yn):
    z = normals_block(key, start, count, n, attempt, PURPOSE_FORWARD)
    first = sigma / np.sqrt(1.0 - rho * rho) * z[:, 0]
    prev = first
    acc_xy = np.zeros(count)
    acc_mid = np.zeros(count)
    for t in range(1, n):
        cur = rho * prev + sigma * z[:, t]
        acc_xy += prev * cur
        if t < n - 1:
            acc_mid += cur * cur
        prev = cur
    sxy[:] = acc_xy
    smid[:] = acc_mid
    y1[:] = first
    yn[:] = prev
