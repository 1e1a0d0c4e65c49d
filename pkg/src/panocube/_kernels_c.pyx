# Compiled bilinear gather kernels. Semantics must match _kernels_np exactly.

import numpy as np

cimport numpy as cnp
from libc.math cimport asin, atan2, fabs, floor, sqrt

cnp.import_array()

cdef double PI = 3.141592653589793


cdef inline Py_ssize_t _clamp(Py_ssize_t i, Py_ssize_t n) nogil:
    if i < 0:
        return 0
    if i >= n:
        return n - 1
    return i


cdef inline Py_ssize_t _wrap(Py_ssize_t i, Py_ssize_t n) nogil:
    i = i % n
    if i < 0:
        i += n
    return i


def bilinear_gather(const double[:, :, ::1] raster, const double[::1] rows, const double[::1] cols,
                    bint wrap_cols):
    cdef Py_ssize_t height = raster.shape[0]
    cdef Py_ssize_t width = raster.shape[1]
    cdef Py_ssize_t channels = raster.shape[2]
    cdef Py_ssize_t n = rows.shape[0]
    out_arr = np.empty((n, channels), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, c, r0, r1, c0, c1
    cdef double fr, fc, w00, w01, w10, w11

    with nogil:
        for i in range(n):
            r0 = <Py_ssize_t>floor(rows[i])
            c0 = <Py_ssize_t>floor(cols[i])
            fr = rows[i] - r0
            fc = cols[i] - c0
            r1 = _clamp(r0 + 1, height)
            r0 = _clamp(r0, height)
            if wrap_cols:
                c1 = _wrap(c0 + 1, width)
                c0 = _wrap(c0, width)
            else:
                c1 = _clamp(c0 + 1, width)
                c0 = _clamp(c0, width)
            w00 = (1.0 - fr) * (1.0 - fc)
            w01 = (1.0 - fr) * fc
            w10 = fr * (1.0 - fc)
            w11 = fr * fc
            for c in range(channels):
                out[i, c] = (w00 * raster[r0, c0, c] + w01 * raster[r0, c1, c]
                             + w10 * raster[r1, c0, c] + w11 * raster[r1, c1, c])
    return out_arr


def bilinear_gather_invalid(const double[:, ::1] raster, const double[::1] rows, const double[::1] cols,
                            bint wrap_cols):
    cdef Py_ssize_t height = raster.shape[0]
    cdef Py_ssize_t width = raster.shape[1]
    cdef Py_ssize_t n = rows.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, r0, r1, c0, c1
    cdef double fr, fc, v00, v01, v10, v11

    with nogil:
        for i in range(n):
            r0 = <Py_ssize_t>floor(rows[i])
            c0 = <Py_ssize_t>floor(cols[i])
            fr = rows[i] - r0
            fc = cols[i] - c0
            r1 = _clamp(r0 + 1, height)
            r0 = _clamp(r0, height)
            if wrap_cols:
                c1 = _wrap(c0 + 1, width)
                c0 = _wrap(c0, width)
            else:
                c1 = _clamp(c0 + 1, width)
                c0 = _clamp(c0, width)
            v00 = raster[r0, c0]
            v01 = raster[r0, c1]
            v10 = raster[r1, c0]
            v11 = raster[r1, c1]
            if v00 == 0.0 or v01 == 0.0 or v10 == 0.0 or v11 == 0.0:
                out[i] = 0.0
            else:
                out[i] = ((v00 * (1.0 - fc) + v01 * fc) * (1.0 - fr)
                          + (v10 * (1.0 - fc) + v11 * fc) * fr)
    return out_arr


cdef inline Py_ssize_t _select_face(const double[:, :, ::1] rt, double px, double py,
                                    double pz, double* ox, double* oy,
                                    double* oz) nogil:
    cdef Py_ssize_t f, best
    cdef double x, y, z, ax, ay, score, best_score
    best = 0
    best_score = -1e300
    for f in range(6):
        x = rt[f, 0, 0] * px + rt[f, 0, 1] * py + rt[f, 0, 2] * pz
        y = rt[f, 1, 0] * px + rt[f, 1, 1] * py + rt[f, 1, 2] * pz
        z = rt[f, 2, 0] * px + rt[f, 2, 1] * py + rt[f, 2, 2] * pz
        ax = x if x >= 0 else -x
        ay = y if y >= 0 else -y
        if z > 0 and ax <= z and ay <= z:
            ox[0] = x
            oy[0] = y
            oz[0] = z
            return f
        score = z - (ax if ax > ay else ay)
        if score > best_score:
            best_score = score
            best = f
    f = best
    ox[0] = rt[f, 0, 0] * px + rt[f, 0, 1] * py + rt[f, 0, 2] * pz
    oy[0] = rt[f, 1, 0] * px + rt[f, 1, 1] * py + rt[f, 1, 2] * pz
    oz[0] = rt[f, 2, 0] * px + rt[f, 2, 1] * py + rt[f, 2, 2] * pz
    return f


def cubemap_gather(const double[:, :, :, ::1] faces, const double[:, :, ::1] rt,
                   const double[:, ::1] pts):
    cdef Py_ssize_t w = faces.shape[1]
    cdef Py_ssize_t channels = faces.shape[3]
    cdef Py_ssize_t n = pts.shape[0]
    out_arr = np.empty((n, channels), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, f, c, r0, r1, c0, c1
    cdef double x, y, z, row, col, fr, fc, w00, w01, w10, w11
    cdef double half = w / 2.0

    with nogil:
        for i in range(n):
            f = _select_face(rt, pts[i, 0], pts[i, 1], pts[i, 2], &x, &y, &z)
            col = x / z * half + half - 0.5
            row = y / z * half + half - 0.5
            r0 = <Py_ssize_t>floor(row)
            c0 = <Py_ssize_t>floor(col)
            fr = row - r0
            fc = col - c0
            r1 = _clamp(r0 + 1, w)
            c1 = _clamp(c0 + 1, w)
            r0 = _clamp(r0, w)
            c0 = _clamp(c0, w)
            w00 = (1.0 - fr) * (1.0 - fc)
            w01 = (1.0 - fr) * fc
            w10 = fr * (1.0 - fc)
            w11 = fr * fc
            for c in range(channels):
                out[i, c] = (w00 * faces[f, r0, c0, c] + w01 * faces[f, r0, c1, c]
                             + w10 * faces[f, r1, c0, c] + w11 * faces[f, r1, c1, c])
    return out_arr


def cubemap_gather_table(const double[:, :, :, ::1] faces, const long long[::1] fidx,
                         const double[::1] rows, const double[::1] cols):
    cdef Py_ssize_t w = faces.shape[1]
    cdef Py_ssize_t channels = faces.shape[3]
    cdef Py_ssize_t n = fidx.shape[0]
    out_arr = np.empty((n, channels), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, f, c, r0, r1, c0, c1
    cdef double fr, fc, w00, w01, w10, w11

    with nogil:
        for i in range(n):
            f = fidx[i]
            r0 = <Py_ssize_t>floor(rows[i])
            c0 = <Py_ssize_t>floor(cols[i])
            fr = rows[i] - r0
            fc = cols[i] - c0
            r1 = _clamp(r0 + 1, w)
            c1 = _clamp(c0 + 1, w)
            r0 = _clamp(r0, w)
            c0 = _clamp(c0, w)
            w00 = (1.0 - fr) * (1.0 - fc)
            w01 = (1.0 - fr) * fc
            w10 = fr * (1.0 - fc)
            w11 = fr * fc
            for c in range(channels):
                out[i, c] = (w00 * faces[f, r0, c0, c] + w01 * faces[f, r0, c1, c]
                             + w10 * faces[f, r1, c0, c] + w11 * faces[f, r1, c1, c])
    return out_arr


def cubemap_gather_table_invalid(const double[:, :, ::1] faces, const long long[::1] fidx,
                                 const double[::1] rows, const double[::1] cols):
    cdef Py_ssize_t w = faces.shape[1]
    cdef Py_ssize_t n = fidx.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, f, r0, r1, c0, c1
    cdef double fr, fc, v00, v01, v10, v11

    with nogil:
        for i in range(n):
            f = fidx[i]
            r0 = <Py_ssize_t>floor(rows[i])
            c0 = <Py_ssize_t>floor(cols[i])
            fr = rows[i] - r0
            fc = cols[i] - c0
            r1 = _clamp(r0 + 1, w)
            c1 = _clamp(c0 + 1, w)
            r0 = _clamp(r0, w)
            c0 = _clamp(c0, w)
            v00 = faces[f, r0, c0]
            v01 = faces[f, r0, c1]
            v10 = faces[f, r1, c0]
            v11 = faces[f, r1, c1]
            if v00 == 0.0 or v01 == 0.0 or v10 == 0.0 or v11 == 0.0:
                out[i] = 0.0
            else:
                out[i] = ((v00 * (1.0 - fc) + v01 * fc) * (1.0 - fr)
                          + (v10 * (1.0 - fc) + v11 * fc) * fr)
    return out_arr


def cubemap_gather_invalid(const double[:, :, ::1] faces, const double[:, :, ::1] rt,
                           const double[:, ::1] pts):
    cdef Py_ssize_t w = faces.shape[1]
    cdef Py_ssize_t n = pts.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, f, r0, r1, c0, c1
    cdef double x, y, z, row, col, fr, fc, v00, v01, v10, v11
    cdef double half = w / 2.0

    with nogil:
        for i in range(n):
            f = _select_face(rt, pts[i, 0], pts[i, 1], pts[i, 2], &x, &y, &z)
            col = x / z * half + half - 0.5
            row = y / z * half + half - 0.5
            r0 = <Py_ssize_t>floor(row)
            c0 = <Py_ssize_t>floor(col)
            fr = row - r0
            fc = col - c0
            r1 = _clamp(r0 + 1, w)
            c1 = _clamp(c0 + 1, w)
            r0 = _clamp(r0, w)
            c0 = _clamp(c0, w)
            v00 = faces[f, r0, c0]
            v01 = faces[f, r0, c1]
            v10 = faces[f, r1, c0]
            v11 = faces[f, r1, c1]
            if v00 == 0.0 or v01 == 0.0 or v10 == 0.0 or v11 == 0.0:
                out[i] = 0.0
            else:
                out[i] = ((v00 * (1.0 - fc) + v01 * fc) * (1.0 - fr)
                          + (v10 * (1.0 - fc) + v11 * fc) * fr)
    return out_arr


def equirect_warp_loss(const double[:, ::1] ref, const double[:, :, ::1] tgt,
                       const double[::1] depth, const double[:, ::1] rays,
                       const double[:, ::1] rot, const double[::1] trans):
    """Fused lift + rigid transform + spherical projection + bilinear warp +
    photometric mean for an equirect pair. ref/depth/rays are flattened
    (N, C)/(N,)/(N, 3) over the (H, 2H) raster; tgt keeps its 2D layout.
    Returns mean |ref - warped(tgt)| over valid pixels and channels."""
    cdef Py_ssize_t height = tgt.shape[0]
    cdef Py_ssize_t width = tgt.shape[1]
    cdef Py_ssize_t channels = tgt.shape[2]
    cdef Py_ssize_t n = depth.shape[0]
    cdef Py_ssize_t i, c, r0, r1, c0, c1
    cdef double d, px, py, pz, norm, s, lon_n, lat_n, row, col
    cdef double fr, fc, w00, w01, w10, w11, samp
    cdef double acc = 0.0
    cdef Py_ssize_t count = 0

    with nogil:
        for i in range(n):
            d = depth[i]
            if d <= 0.0:
                continue
            px = (rot[0, 0] * rays[i, 0] + rot[0, 1] * rays[i, 1]
                  + rot[0, 2] * rays[i, 2]) * d + trans[0]
            py = (rot[1, 0] * rays[i, 0] + rot[1, 1] * rays[i, 1]
                  + rot[1, 2] * rays[i, 2]) * d + trans[1]
            pz = (rot[2, 0] * rays[i, 0] + rot[2, 1] * rays[i, 1]
                  + rot[2, 2] * rays[i, 2]) * d + trans[2]
            norm = sqrt(px * px + py * py + pz * pz)
            if norm == 0.0:
                continue
            lon_n = atan2(px, pz) / PI
            s = py / norm
            if s > 1.0:
                s = 1.0
            elif s < -1.0:
                s = -1.0
            lat_n = asin(s) / (0.5 * PI)
            col = (lon_n + 1.0) / 2.0 * width - 0.5
            row = (lat_n + 1.0) / 2.0 * height - 0.5
            if row < 0.0:
                row = 0.0
            elif row > height - 1.0:
                row = height - 1.0
            r0 = <Py_ssize_t>floor(row)
            c0 = <Py_ssize_t>floor(col)
            fr = row - r0
            fc = col - c0
            r1 = _clamp(r0 + 1, height)
            r0 = _clamp(r0, height)
            c1 = _wrap(c0 + 1, width)
            c0 = _wrap(c0, width)
            w00 = (1.0 - fr) * (1.0 - fc)
            w01 = (1.0 - fr) * fc
            w10 = fr * (1.0 - fc)
            w11 = fr * fc
            for c in range(channels):
                samp = (w00 * tgt[r0, c0, c] + w01 * tgt[r0, c1, c]
                        + w10 * tgt[r1, c0, c] + w11 * tgt[r1, c1, c])
                acc += fabs(ref[i, c] - samp)
            count += 1
    if count == 0:
        return 0.0
    return acc / (count * channels)


def cubemap_warp_loss(const double[:, ::1] ref, const double[:, :, :, ::1] tgt,
                      const double[::1] depth, const double[:, ::1] rays,
                      const double[:, :, ::1] rt, const double[:, ::1] rot,
                      const double[::1] trans):
    """Fused lift + rigid transform + face selection + bilinear warp +
    photometric mean for a cubemap pair. ref/depth/rays are flattened
    (N, C)/(N,)/(N, 3) over the (6, w, w) faces; tgt keeps its face layout.
    Returns mean |ref - warped(tgt)| over valid pixels and channels."""
    cdef Py_ssize_t w = tgt.shape[1]
    cdef Py_ssize_t channels = tgt.shape[3]
    cdef Py_ssize_t n = depth.shape[0]
    cdef Py_ssize_t i, c, f, r0, r1, c0, c1
    cdef double d, px, py, pz, x, y, z, row, col
    cdef double fr, fc, w00, w01, w10, w11, samp
    cdef double half = w / 2.0
    cdef double acc = 0.0
    cdef Py_ssize_t count = 0

    with nogil:
        for i in range(n):
            d = depth[i]
            if d <= 0.0:
                continue
            px = (rot[0, 0] * rays[i, 0] + rot[0, 1] * rays[i, 1]
                  + rot[0, 2] * rays[i, 2]) * d + trans[0]
            py = (rot[1, 0] * rays[i, 0] + rot[1, 1] * rays[i, 1]
                  + rot[1, 2] * rays[i, 2]) * d + trans[1]
            pz = (rot[2, 0] * rays[i, 0] + rot[2, 1] * rays[i, 1]
                  + rot[2, 2] * rays[i, 2]) * d + trans[2]
            f = _select_face(rt, px, py, pz, &x, &y, &z)
            col = x / z * half + half - 0.5
            row = y / z * half + half - 0.5
            r0 = <Py_ssize_t>floor(row)
            c0 = <Py_ssize_t>floor(col)
            fr = row - r0
            fc = col - c0
            r1 = _clamp(r0 + 1, w)
            c1 = _clamp(c0 + 1, w)
            r0 = _clamp(r0, w)
            c0 = _clamp(c0, w)
            w00 = (1.0 - fr) * (1.0 - fc)
            w01 = (1.0 - fr) * fc
            w10 = fr * (1.0 - fc)
            w11 = fr * fc
            for c in range(channels):
                samp = (w00 * tgt[f, r0, c0, c] + w01 * tgt[f, r0, c1, c]
                        + w10 * tgt[f, r1, c0, c] + w11 * tgt[f, r1, c1, c])
                acc += fabs(ref[i, c] - samp)
            count += 1
    if count == 0:
        return 0.0
    return acc / (count * channels)


def bilinear_gather_sorted(const double[:, :, ::1] raster, const double[::1] rows,
                           const double[::1] cols, const long long[::1] oidx,
                           bint wrap_cols):
    """bilinear_gather with an output index per sample: out[oidx[i]] takes the
    i-th gather. Callers pass samples pre-sorted by source position so the
    reads stream through the raster."""
    cdef Py_ssize_t height = raster.shape[0]
    cdef Py_ssize_t width = raster.shape[1]
    cdef Py_ssize_t channels = raster.shape[2]
    cdef Py_ssize_t n = rows.shape[0]
    out_arr = np.empty((n, channels), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, c, j, r0, r1, c0, c1
    cdef double fr, fc, w00, w01, w10, w11

    with nogil:
        for i in range(n):
            j = oidx[i]
            r0 = <Py_ssize_t>floor(rows[i])
            c0 = <Py_ssize_t>floor(cols[i])
            fr = rows[i] - r0
            fc = cols[i] - c0
            r1 = _clamp(r0 + 1, height)
            r0 = _clamp(r0, height)
            if wrap_cols:
                c1 = _wrap(c0 + 1, width)
                c0 = _wrap(c0, width)
            else:
                c1 = _clamp(c0 + 1, width)
                c0 = _clamp(c0, width)
            w00 = (1.0 - fr) * (1.0 - fc)
            w01 = (1.0 - fr) * fc
            w10 = fr * (1.0 - fc)
            w11 = fr * fc
            for c in range(channels):
                out[j, c] = (w00 * raster[r0, c0, c] + w01 * raster[r0, c1, c]
                             + w10 * raster[r1, c0, c] + w11 * raster[r1, c1, c])
    return out_arr


def bilinear_gather_sorted_invalid(const double[:, ::1] raster, const double[::1] rows,
                                   const double[::1] cols, const long long[::1] oidx,
                                   bint wrap_cols):
    """bilinear_gather_invalid with an output index per sample."""
    cdef Py_ssize_t height = raster.shape[0]
    cdef Py_ssize_t width = raster.shape[1]
    cdef Py_ssize_t n = rows.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j, r0, r1, c0, c1
    cdef double fr, fc, v00, v01, v10, v11

    with nogil:
        for i in range(n):
            j = oidx[i]
            r0 = <Py_ssize_t>floor(rows[i])
            c0 = <Py_ssize_t>floor(cols[i])
            fr = rows[i] - r0
            fc = cols[i] - c0
            r1 = _clamp(r0 + 1, height)
            r0 = _clamp(r0, height)
            if wrap_cols:
                c1 = _wrap(c0 + 1, width)
                c0 = _wrap(c0, width)
            else:
                c1 = _clamp(c0 + 1, width)
                c0 = _clamp(c0, width)
            v00 = raster[r0, c0]
            v01 = raster[r0, c1]
            v10 = raster[r1, c0]
            v11 = raster[r1, c1]
            if v00 == 0.0 or v01 == 0.0 or v10 == 0.0 or v11 == 0.0:
                out[j] = 0.0
            else:
                out[j] = ((v00 * (1.0 - fc) + v01 * fc) * (1.0 - fr)
                          + (v10 * (1.0 - fc) + v11 * fc) * fr)
    return out_arr


def cubemap_gather_table_sorted(const double[:, :, :, ::1] faces, const long long[::1] fidx,
                                const double[::1] rows, const double[::1] cols,
                                const long long[::1] oidx):
    """cubemap_gather_table with an output index per sample (samples pre-sorted
    by source face position for streaming reads)."""
    cdef Py_ssize_t w = faces.shape[1]
    cdef Py_ssize_t channels = faces.shape[3]
    cdef Py_ssize_t n = fidx.shape[0]
    out_arr = np.empty((n, channels), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, f, c, j, r0, r1, c0, c1
    cdef double fr, fc, w00, w01, w10, w11

    with nogil:
        for i in range(n):
            j = oidx[i]
            f = fidx[i]
            r0 = <Py_ssize_t>floor(rows[i])
            c0 = <Py_ssize_t>floor(cols[i])
            fr = rows[i] - r0
            fc = cols[i] - c0
            r1 = _clamp(r0 + 1, w)
            c1 = _clamp(c0 + 1, w)
            r0 = _clamp(r0, w)
            c0 = _clamp(c0, w)
            w00 = (1.0 - fr) * (1.0 - fc)
            w01 = (1.0 - fr) * fc
            w10 = fr * (1.0 - fc)
            w11 = fr * fc
            for c in range(channels):
                out[j, c] = (w00 * faces[f, r0, c0, c] + w01 * faces[f, r0, c1, c]
                             + w10 * faces[f, r1, c0, c] + w11 * faces[f, r1, c1, c])
    return out_arr


def cubemap_gather_table_sorted_invalid(const double[:, :, ::1] faces, const long long[::1] fidx,
                                        const double[::1] rows, const double[::1] cols,
                                        const long long[::1] oidx):
    """cubemap_gather_table_invalid with an output index per sample."""
    cdef Py_ssize_t w = faces.shape[1]
    cdef Py_ssize_t n = fidx.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, f, j, r0, r1, c0, c1
    cdef double fr, fc, v00, v01, v10, v11

    with nogil:
        for i in range(n):
            j = oidx[i]
            f = fidx[i]
            r0 = <Py_ssize_t>floor(rows[i])
            c0 = <Py_ssize_t>floor(cols[i])
            fr = rows[i] - r0
            fc = cols[i] - c0
            r1 = _clamp(r0 + 1, w)
            c1 = _clamp(c0 + 1, w)
            r0 = _clamp(r0, w)
            c0 = _clamp(c0, w)
            v00 = faces[f, r0, c0]
            v01 = faces[f, r0, c1]
            v10 = faces[f, r1, c0]
            v11 = faces[f, r1, c1]
            if v00 == 0.0 or v01 == 0.0 or v10 == 0.0 or v11 == 0.0:
                out[j] = 0.0
            else:
                out[j] = ((v00 * (1.0 - fc) + v01 * fc) * (1.0 - fr)
                          + (v10 * (1.0 - fc) + v11 * fc) * fr)
    return out_arr
