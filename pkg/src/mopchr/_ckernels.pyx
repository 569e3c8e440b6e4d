# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled float64/complex128 kernels mirroring ``mopchr._pykernels``."""
import numpy as np
cimport cython
cimport numpy as cnp
from libc.math cimport fabs, sqrt, isnan

cnp.import_array()

ctypedef fused scalar_t:
    double
    double complex

COMPILED = True


cdef inline double _mag(scalar_t v) nogil:
    if scalar_t is double:
        return fabs(v)
    else:
        return sqrt(v.real * v.real + v.imag * v.imag)


cdef inline bint _undef(scalar_t v) nogil:
    if scalar_t is double:
        return isnan(v)
    else:
        return isnan(v.real) or isnan(v.imag)


cdef inline bint _tiny(scalar_t den, scalar_t s1, scalar_t s2, double eps) nogil:
    cdef double m = _mag(s1)
    cdef double m2 = _mag(s2)
    if m2 > m:
        m = m2
    if m < 1.0:
        m = 1.0
    return _mag(den) <= eps * m


def _as_array(x):
    arr = np.asarray(x)
    if arr.dtype.kind == "c":
        return np.ascontiguousarray(arr, dtype=np.complex128)
    return np.ascontiguousarray(arr, dtype=np.float64)


cdef _galant_impl(scalar_t[::1] b, scalar_t[::1] a, scalar_t z0, Py_ssize_t L, double eps,
                  scalar_t[::1] bh, scalar_t[::1] ah, scalar_t[::1] delta):
    cdef Py_ssize_t n
    cdef scalar_t d, dn
    d = z0 - b[0]
    if _tiny(d, z0, b[0], eps):
        return 0, 0
    delta[0] = d
    ah[0] = 0
    bh[0] = b[0] - a[1] / d
    for n in range(1, L):
        dn = bh[n - 1] - b[n] + d
        if _tiny(dn, bh[n - 1], b[n], eps):
            return n, n
        ah[n] = a[n] * dn / d
        bh[n] = b[n] + (ah[n] - a[n + 1]) / dn
        delta[n] = dn
        d = dn
    return L, -1


def galant(b, a, z0, Py_ssize_t L, exact, double eps):
    """Compiled one-step Christoffel recursion (see ``_pykernels.galant``)."""
    cplx = isinstance(z0, complex) or np.iscomplexobj(b) or np.iscomplexobj(a)
    dt = np.complex128 if cplx else np.float64
    bb = np.ascontiguousarray(b, dtype=dt)
    aa = np.ascontiguousarray(a, dtype=dt)
    bh = np.zeros(L, dtype=dt)
    ah = np.zeros(L, dtype=dt)
    delta = np.zeros(L, dtype=dt)
    if cplx:
        count, fail = _galant_impl[cython.doublecomplex](bb, aa, complex(z0), L, eps, bh, ah, delta)
    else:
        count, fail = _galant_impl[double](bb, aa, float(z0), L, eps, bh, ah, delta)
    return bh[:count].tolist(), ah[:count].tolist(), delta[:count].tolist(), fail


cdef _horner_impl(scalar_t[::1] c, scalar_t[::1] xs, scalar_t[::1] out):
    cdef Py_ssize_t i, k, n = c.shape[0]
    cdef scalar_t acc
    for i in range(xs.shape[0]):
        if n == 0:
            out[i] = 0
            continue
        acc = c[n - 1]
        for k in range(n - 2, -1, -1):
            acc = acc * xs[i] + c[k]
        out[i] = acc


def horner(coeffs, xs):
    """Evaluate ascending ``coeffs`` at every point of ``xs``."""
    cplx = np.iscomplexobj(coeffs) or np.iscomplexobj(xs)
    dt = np.complex128 if cplx else np.float64
    c = np.ascontiguousarray(coeffs, dtype=dt)
    x = np.ascontiguousarray(xs, dtype=dt)
    out = np.empty(x.shape[0], dtype=dt)
    if cplx:
        _horner_impl[cython.doublecomplex](c, x, out)
    else:
        _horner_impl[double](c, x, out)
    return out.tolist()


cdef list _a_phase(scalar_t[::1] a, scalar_t[::1] b, Py_ssize_t r,
                   cnp.int64_t[:, ::1] rows, double eps, scalar_t undef):
    cdef Py_ssize_t pos, c, j, k, p, q
    cdef scalar_t ap, n1, n2, d1, d2, den
    cdef list failed = []
    for pos in range(rows.shape[0]):
        c = rows[pos, 0]; j = rows[pos, 1]; k = rows[pos, 2]
        p = rows[pos, 3]; q = rows[pos, 4]
        ap = a[p * r + j]
        n1 = b[p * r + j]; n2 = b[p * r + k]
        d1 = b[q * r + j]; d2 = b[q * r + k]
        if _undef(ap) or _undef(n1) or _undef(n2) or _undef(d1) or _undef(d2):
            a[c * r + j] = undef
            failed.append(pos)
            continue
        if ap == 0:
            a[c * r + j] = ap
            continue
        den = d1 - d2
        if _tiny(den, d1, d2, eps):
            a[c * r + j] = undef
            failed.append(pos)
            continue
        a[c * r + j] = ap * (n1 - n2) / den
    return failed


cdef list _b_phase(scalar_t[::1] a, scalar_t[::1] b, Py_ssize_t r,
                   cnp.int64_t[:, ::1] rows, double eps, scalar_t undef):
    cdef Py_ssize_t pos, c, j, k, p, s, i
    cdef scalar_t bpj, bpk, sa, v1, v2, den
    cdef bint ok
    cdef list failed = []
    for pos in range(rows.shape[0]):
        c = rows[pos, 0]; j = rows[pos, 1]; k = rows[pos, 2]
        p = rows[pos, 3]; s = rows[pos, 4]
        bpj = b[p * r + j]; bpk = b[p * r + k]
        sa = 0
        ok = not (_undef(bpj) or _undef(bpk))
        if ok:
            for i in range(r):
                v1 = a[c * r + i]; v2 = a[s * r + i]
                if _undef(v1) or _undef(v2):
                    ok = False
                    break
                sa = sa + v1 - v2
        if not ok:
            b[c * r + j] = undef
            failed.append(pos)
            continue
        den = bpk - bpj
        if _tiny(den, bpk, bpj, eps):
            b[c * r + j] = undef
            failed.append(pos)
            continue
        b[c * r + j] = bpj + sa / den
    return failed


def _rows(rows):
    return np.ascontiguousarray(np.asarray(rows, dtype=np.int64).reshape(-1, 5))


def cc_a_phase(a, b, Py_ssize_t r, rows, exact, double eps, undef):
    """In-place a-phase over float64 or complex128 arrays."""
    rr = _rows(rows)
    if a.dtype == np.complex128:
        return _a_phase[cython.doublecomplex](a, b, r, rr, eps, complex(undef))
    return _a_phase[double](a, b, r, rr, eps, float(undef))


def cc_b_phase(a, b, Py_ssize_t r, rows, exact, double eps, undef):
    """In-place b-phase over float64 or complex128 arrays."""
    rr = _rows(rows)
    if a.dtype == np.complex128:
        return _b_phase[cython.doublecomplex](a, b, r, rr, eps, complex(undef))
    return _b_phase[double](a, b, r, rr, eps, float(undef))
