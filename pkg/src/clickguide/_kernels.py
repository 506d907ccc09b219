"""Compiled inner loops. Arrays here are plain C-ordered ndarrays indexed (x, y, z)."""

import numpy as np
import numba
from numba import njit, prange

# the bundled TBB is too old for numba; skip it instead of warning on every run
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

INF = np.inf


@njit(cache=True)
def _envelope_line(f, n, s2, v, z, out):
    # lower envelope of parabolas s2*(q-p)^2 + f[p]; infinite f[p] are skipped
    k = -1
    for q in range(n):
        fq = f[q]
        if fq == INF:
            continue
        if k < 0:
            k = 0
            v[0] = q
            z[0] = -INF
            z[1] = INF
            continue
        p = v[k]
        s = ((fq + s2 * q * q) - (f[p] + s2 * p * p)) / (2.0 * s2 * (q - p))
        while s <= z[k]:
            k -= 1
            p = v[k]
            s = ((fq + s2 * q * q) - (f[p] + s2 * p * p)) / (2.0 * s2 * (q - p))
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = INF
    if k < 0:
        for q in range(n):
            out[q] = INF
        return
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        p = v[k]
        out[q] = s2 * (q - p) * (q - p) + f[p]


@njit(cache=True)
def _envelope_slab(slab, buf, s2, f, out, v, z):
    # transform every column of a 2D slab along its first axis, via a transposed copy
    n, m = slab.shape
    for a in range(n):
        for b in range(m):
            buf[b, a] = slab[a, b]
    for b in range(m):
        for a in range(n):
            f[a] = buf[b, a]
        _envelope_line(f, n, s2, v, z, out)
        for a in range(n):
            buf[b, a] = out[a]
    for a in range(n):
        for b in range(m):
            slab[a, b] = buf[b, a]


@njit(cache=True)
def squared_edt(seed, spacing):
    """Exact squared Euclidean distance to the nearest True voxel (separable lower envelopes)."""
    nx, ny, nz = seed.shape
    d = np.empty(seed.shape, dtype=np.float64)
    m = max(nx, ny, nz)
    f = np.empty(m)
    out = np.empty(m)
    v = np.empty(m, dtype=np.int64)
    z = np.empty(m + 1)

    # z is contiguous: transform lines in place
    s2 = spacing[2] * spacing[2]
    for i in range(nx):
        for j in range(ny):
            any_seed = False
            for k in range(nz):
                if seed[i, j, k]:
                    f[k] = 0.0
                    any_seed = True
                else:
                    f[k] = INF
            if any_seed:
                _envelope_line(f, nz, s2, v, z, out)
                for k in range(nz):
                    d[i, j, k] = out[k]
            else:
                for k in range(nz):
                    d[i, j, k] = INF
    buf = np.empty((nz, max(nx, ny)))
    s2 = spacing[1] * spacing[1]
    for i in range(nx):
        _envelope_slab(d[i], buf[:, :ny], s2, f, out, v, z)
    s2 = spacing[0] * spacing[0]
    for j in range(ny):
        _envelope_slab(d[:, j, :], buf[:, :nx], s2, f, out, v, z)
    return d


@njit(cache=True, fastmath={"nnan", "nsz"})
def raster_sweep(d, img, shape, offsets, cost2, g2, forward, inrow):
    """One raster pass over a padded, flattened float32 grid. Returns True if any value dropped.

    ``offsets`` are flat index offsets to already-visited neighbours and
    ``cost2`` their squared spatial edge lengths. Only ``offsets[inrow]``
    points into the current row, so the other neighbours are relaxed a whole
    row at a time (vectorised) and the in-row one in a short serial pass.
    """
    nx, ny, nz = shape
    sx = ny * nz
    m = offsets.shape[0]
    tmp = np.empty(nz, dtype=d.dtype)
    step = np.empty(nz, dtype=d.dtype)
    o_in = offsets[inrow]
    c_in = cost2[inrow]
    changed = False
    for ii in range(1, nx - 1):
        i = ii if forward else nx - 1 - ii
        for jj in range(1, ny - 1):
            j = jj if forward else ny - 1 - jj
            row = np.uint64(i * sx + j * nz)
            for k in range(1, nz - 1):
                tmp[k] = d[row + np.uint64(k)]
            for n in range(m):
                if n == inrow:
                    continue
                # unsigned indices let LLVM drop the wraparound check and vectorise
                nb = np.uint64(i * sx + j * nz + offsets[n])
                c2 = cost2[n]
                for k in range(1, nz - 1):
                    uk = np.uint64(k)
                    diff = img[nb + uk] - img[row + uk]
                    tmp[uk] = min(tmp[uk], d[nb + uk] + np.sqrt(c2 + g2 * diff * diff))
            nb = np.uint64(i * sx + j * nz + o_in)
            for k in range(1, nz - 1):
                uk = np.uint64(k)
                diff = img[nb + uk] - img[row + uk]
                step[uk] = np.sqrt(c_in + g2 * diff * diff)
            for kk in range(1, nz - 1):
                k = kk if forward else nz - 1 - kk
                p = i * sx + j * nz + k
                best = min(tmp[k], d[p + o_in] + step[k])
                if best < d[p]:
                    d[p] = best
                    changed = True
    return changed


@njit(cache=True, parallel=True)
def heatmap_max(shape, centers, weights, squared):
    """max_i exp(-w_i * r_i) with r_i the distance (or squared distance) to centre i.

    The exponent is minimised first so only one exp per voxel is evaluated;
    for the unsquared form ``sqrt(q) * w == sqrt(q * w**2)`` keeps the sqrt out
    of the inner loop.
    """
    nx, ny, nz = shape
    m = centers.shape[0]
    out = np.empty(shape, dtype=np.float32)
    w = weights if squared else weights * weights
    for i in prange(nx):
        buf = np.empty(nz)
        for j in range(ny):
            buf[:] = INF
            for c in range(m):
                dx = i - centers[c, 0]
                dy = j - centers[c, 1]
                base = float(dx * dx + dy * dy)
                cz = centers[c, 2]
                wc = w[c]
                for k in range(nz):
                    dz = float(k - cz)
                    e = (base + dz * dz) * wc
                    if e < buf[k]:
                        buf[k] = e
            if squared:
                for k in range(nz):
                    out[i, j, k] = np.exp(-buf[k])
            else:
                for k in range(nz):
                    out[i, j, k] = np.exp(-np.sqrt(buf[k]))
    return out
