"""Pure-Python versions of the hot loops.

These work for any scalar type supporting field arithmetic, so the
exact (Fraction) backend always runs through here.  The compiled module
``mopchr._ckernels`` mirrors the same signatures for float64 and
complex128 arrays; :mod:`mopchr.kernels` picks one at import.

Undefined cells are ``None`` in lists or NaN in float arrays.
"""


def _undef(v):
    return v is None or v != v


def _mag(v):
    return abs(v)


def _tiny(den, s1, s2, exact, eps):
    if exact:
        return den == 0
    return _mag(den) <= eps * max(_mag(s1), _mag(s2), 1.0)


def galant(b, a, z0, L, exact, eps):
    """One-step Christoffel recursion for Jacobi data.

    ``b[0..L-1]`` and ``a[0..L]`` (with ``a[0]`` unused) must be
    available.  Returns ``(bh, ah, delta, fail)`` where ``fail`` is the
    index of the first negligible delta, or -1.
    """
    bh, ah, delta = [], [], []
    d = z0 - b[0]
    if _tiny(d, z0, b[0], exact, eps):
        return bh, ah, delta, 0
    delta.append(d)
    ah.append(d - d)
    bh.append(b[0] - a[1] / d)
    for n in range(1, L):
        dn = bh[n - 1] - b[n] + d
        if _tiny(dn, bh[n - 1], b[n], exact, eps):
            return bh, ah, delta, n
        ahn = a[n] * dn / d
        ah.append(ahn)
        bh.append(b[n] + (ahn - a[n + 1]) / dn)
        delta.append(dn)
        d = dn
    return bh, ah, delta, -1


def horner(coeffs, xs):
    """Evaluate ascending ``coeffs`` at every point of ``xs``."""
    out = []
    n = len(coeffs)
    for x in xs:
        if n == 0:
            out.append(0 * x)
            continue
        acc = coeffs[n - 1]
        for k in range(n - 2, -1, -1):
            acc = acc * x + coeffs[k]
        out.append(acc)
    return out


def cc_a_phase(a, b, r, rows, exact, eps, undef):
    """a[c,j] = a[p,j] * (b[p,j]-b[p,k]) / (b[q,j]-b[q,k]).

    ``rows`` holds tuples (c, j, k, p, q) with p = n-e_k and
    q = n-e_k-e_j.  Returns the list of row positions that failed.
    """
    failed = []
    for pos, (c, j, k, p, q) in enumerate(rows):
        ap = a[p * r + j]
        num1, num2 = b[p * r + j], b[p * r + k]
        den1, den2 = b[q * r + j], b[q * r + k]
        if _undef(ap) or _undef(num1) or _undef(num2) or _undef(den1) or _undef(den2):
            a[c * r + j] = undef
            failed.append(pos)
            continue
        if ap == 0:
            a[c * r + j] = ap
            continue
        den = den1 - den2
        if _tiny(den, den1, den2, exact, eps):
            a[c * r + j] = undef
            failed.append(pos)
            continue
        a[c * r + j] = ap * (num1 - num2) / den
    return failed


def cc_b_phase(a, b, r, rows, exact, eps, undef):
    """b[c,j] = b[p,j] + (sum a[c,:] - sum a[s,:]) / (b[p,k] - b[p,j]).

    ``rows`` holds tuples (c, j, k, p, s) with p = n-e_k and
    s = n+e_j-e_k.  Returns the list of row positions that failed.
    """
    failed = []
    for pos, (c, j, k, p, s) in enumerate(rows):
        bpj, bpk = b[p * r + j], b[p * r + k]
        sa = 0
        ok = not (_undef(bpj) or _undef(bpk))
        if ok:
            for i in range(r):
                v1, v2 = a[c * r + i], a[s * r + i]
                if _undef(v1) or _undef(v2):
                    ok = False
                    break
                sa = sa + v1 - v2
        if not ok:
            b[c * r + j] = undef
            failed.append(pos)
            continue
        den = bpk - bpj
        if _tiny(den, bpk, bpj, exact, eps):
            b[c * r + j] = undef
            failed.append(pos)
            continue
        b[c * r + j] = bpj + sa / den
    return failed


COMPILED = False
__all__ = ["galant", "horner", "cc_a_phase", "cc_b_phase", "COMPILED"]
