# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""GMP-backed fixed-point kernels; drop-in replacement for ``_pykernels``.

Integers cross the Python boundary as little-endian magnitude bytes, so this
module links the system libgmp and never shares mpz objects with gmpy2.
"""

from libc.stdlib cimport malloc, realloc, free

NAME = "compiled"


cdef extern from "gmp.h":
    ctypedef struct __mpz_struct:
        pass
    ctypedef __mpz_struct mpz_t[1]
    ctypedef __mpz_struct* mpz_ptr
    void mpz_init(mpz_ptr)
    void mpz_clear(mpz_ptr)
    void mpz_set(mpz_ptr, mpz_ptr)
    void mpz_set_ui(mpz_ptr, unsigned long)
    void mpz_add(mpz_ptr, mpz_ptr, mpz_ptr)
    void mpz_sub(mpz_ptr, mpz_ptr, mpz_ptr)
    void mpz_mul(mpz_ptr, mpz_ptr, mpz_ptr)
    void mpz_mul_ui(mpz_ptr, mpz_ptr, unsigned long)
    void mpz_addmul(mpz_ptr, mpz_ptr, mpz_ptr)
    void mpz_submul(mpz_ptr, mpz_ptr, mpz_ptr)
    void mpz_neg(mpz_ptr, mpz_ptr)
    void mpz_swap(mpz_ptr, mpz_ptr)
    void mpz_setbit(mpz_ptr, unsigned long)
    void mpz_fdiv_q_2exp(mpz_ptr, mpz_ptr, unsigned long)
    int mpz_sgn(mpz_ptr)
    size_t mpz_sizeinbase(mpz_ptr, int)
    void mpz_import(mpz_ptr, size_t, int, size_t, int, size_t, const void*)
    void* mpz_export(void*, size_t*, int, size_t, int, size_t, mpz_ptr)


cdef void _from_py(mpz_ptr z, object x):
    cdef bint neg
    cdef bytes raw
    cdef size_t nbytes
    if not x:
        mpz_set_ui(z, 0)
        return
    neg = x < 0
    if neg:
        x = -x
    nbytes = (x.bit_length() + 7) >> 3
    raw = x.to_bytes(nbytes, "little")
    mpz_import(z, nbytes, -1, 1, 0, 0, <const char*>raw)
    if neg:
        mpz_neg(z, z)


cdef object _to_py(mpz_ptr z):
    cdef int sgn = mpz_sgn(z)
    cdef size_t count = 0
    cdef size_t nbytes
    cdef bytearray buf
    if sgn == 0:
        return 0
    nbytes = (mpz_sizeinbase(z, 2) + 7) >> 3
    buf = bytearray(nbytes)
    mpz_export(<char*>buf, &count, -1, 1, 0, 0, z)
    v = int.from_bytes(buf[:count], "little")
    return -v if sgn < 0 else v


cdef mpz_ptr _alloc_row(Py_ssize_t n) except NULL:
    cdef mpz_ptr row = <mpz_ptr>malloc(n * sizeof(__mpz_struct))
    cdef Py_ssize_t i
    if row == NULL:
        raise MemoryError()
    for i in range(n):
        mpz_init(&row[i])
    return row


cdef void _free_row(mpz_ptr row, Py_ssize_t n):
    cdef Py_ssize_t i
    if row == NULL:
        return
    for i in range(n):
        mpz_clear(&row[i])
    free(row)


cdef class _Rows:
    cdef mpz_ptr* rows
    cdef Py_ssize_t n, cap, width

    def __cinit__(self, Py_ssize_t width):
        self.rows = NULL
        self.n = 0
        self.cap = 0
        self.width = width

    def __dealloc__(self):
        cdef Py_ssize_t i
        for i in range(self.n):
            _free_row(self.rows[i], self.width)
        free(self.rows)

    cdef mpz_ptr push(self) except NULL:
        cdef mpz_ptr* grown
        if self.n == self.cap:
            self.cap = 16 if self.cap == 0 else 2 * self.cap
            grown = <mpz_ptr*>realloc(self.rows, self.cap * sizeof(mpz_ptr))
            if grown == NULL:
                raise MemoryError()
            self.rows = grown
        self.rows[self.n] = _alloc_row(self.width)
        self.n += 1
        return self.rows[self.n - 1]


def fft(re, im, cos_table, sin_table, Py_ssize_t frac_bits, int sign=1):
    """Same contract as ``_pykernels.fft``."""
    cdef Py_ssize_t n = len(re)
    cdef Py_ssize_t h2 = n // 2
    cdef Py_ssize_t i, j, bit, size, h, step, m, a, b
    cdef mpz_ptr xr
    cdef mpz_ptr xi
    cdef mpz_ptr cr
    cdef mpz_ptr ci
    cdef mpz_t tr, ti, half
    if n & (n - 1) or n != len(im):
        raise ValueError("transform length must be a power of two")
    if n == 1:
        return [int(re[0])], [int(im[0])]
    xr = _alloc_row(n)
    xi = _alloc_row(n)
    cr = _alloc_row(h2)
    ci = _alloc_row(h2)
    mpz_init(tr)
    mpz_init(ti)
    mpz_init(half)
    try:
        for i in range(n):
            _from_py(&xr[i], re[i])
            _from_py(&xi[i], im[i])
        for i in range(h2):
            _from_py(&cr[i], cos_table[i])
            _from_py(&ci[i], sin_table[i])
            if sign < 0:
                mpz_neg(&ci[i], &ci[i])
        mpz_setbit(half, frac_bits - 1)
        j = 0
        for i in range(1, n):
            bit = n >> 1
            while j & bit:
                j ^= bit
                bit >>= 1
            j |= bit
            if i < j:
                mpz_swap(&xr[i], &xr[j])
                mpz_swap(&xi[i], &xi[j])
        size = 2
        while size <= n:
            h = size >> 1
            step = n // size
            for m in range(h):
                for a in range(m, n, size):
                    b = a + h
                    # tr = (xr*wr - xi*wi + half) >> frac
                    mpz_mul(tr, &xr[b], &cr[m * step])
                    mpz_submul(tr, &xi[b], &ci[m * step])
                    mpz_add(tr, tr, half)
                    mpz_fdiv_q_2exp(tr, tr, frac_bits)
                    mpz_mul(ti, &xr[b], &ci[m * step])
                    mpz_addmul(ti, &xi[b], &cr[m * step])
                    mpz_add(ti, ti, half)
                    mpz_fdiv_q_2exp(ti, ti, frac_bits)
                    mpz_sub(&xr[b], &xr[a], tr)
                    mpz_sub(&xi[b], &xi[a], ti)
                    mpz_add(&xr[a], &xr[a], tr)
                    mpz_add(&xi[a], &xi[a], ti)
            size <<= 1
        out_r = [_to_py(&xr[i]) for i in range(n)]
        out_i = [_to_py(&xi[i]) for i in range(n)]
    finally:
        _free_row(xr, n)
        _free_row(xi, n)
        _free_row(cr, h2)
        _free_row(ci, h2)
        mpz_clear(tr)
        mpz_clear(ti)
        mpz_clear(half)
    return out_r, out_i


cdef class ValueBank:
    """Same contract as ``_pykernels.ValueBank``; samples live in GMP memory."""

    cdef readonly Py_ssize_t size
    cdef readonly Py_ssize_t frac_bits
    cdef _Rows _u, _wr, _wi

    def __init__(self, Py_ssize_t size, Py_ssize_t frac_bits):
        self.size = size
        self.frac_bits = frac_bits
        self._u = _Rows(size)
        self._wr = _Rows(size)
        self._wi = _Rows(size)

    @property
    def n_u(self):
        return self._u.n

    @property
    def n_w(self):
        return self._wr.n

    def _check(self, values):
        if len(values) != self.size:
            raise ValueError(f"expected {self.size} samples, got {len(values)}")

    def append_u(self, values):
        cdef mpz_ptr row
        cdef Py_ssize_t t
        self._check(values)
        row = self._u.push()
        for t in range(self.size):
            _from_py(&row[t], values[t])

    def append_w(self, re, im):
        cdef mpz_ptr rr
        cdef mpz_ptr ri
        cdef Py_ssize_t t
        self._check(re)
        self._check(im)
        rr = self._wr.push()
        ri = self._wi.push()
        for t in range(self.size):
            _from_py(&rr[t], re[t])
            _from_py(&ri[t], im[t])

    def dot(self, Py_ssize_t k):
        cdef Py_ssize_t n = self.size
        cdef Py_ssize_t j, t
        cdef mpz_ptr acc_r
        cdef mpz_ptr acc_i
        cdef mpz_ptr u
        cdef mpz_ptr wr
        cdef mpz_ptr wi
        cdef mpz_t ju, half
        if k < 1 or self._u.n <= k or self._wr.n < k:
            raise IndexError(f"bank holds u_0..u_{self._u.n - 1}, w_0..w_{self._wr.n - 1}; order {k} unavailable")
        acc_r = _alloc_row(n)
        acc_i = _alloc_row(n)
        mpz_init(ju)
        mpz_init(half)
        try:
            for j in range(1, k + 1):
                u = self._u.rows[j]
                wr = self._wr.rows[k - j]
                wi = self._wi.rows[k - j]
                for t in range(n):
                    mpz_mul_ui(ju, &u[t], <unsigned long>j)
                    mpz_addmul(&acc_r[t], ju, &wr[t])
                    mpz_addmul(&acc_i[t], ju, &wi[t])
            mpz_setbit(half, self.frac_bits - 1)
            for t in range(n):
                mpz_add(&acc_r[t], &acc_r[t], half)
                mpz_fdiv_q_2exp(&acc_r[t], &acc_r[t], self.frac_bits)
                mpz_add(&acc_i[t], &acc_i[t], half)
                mpz_fdiv_q_2exp(&acc_i[t], &acc_i[t], self.frac_bits)
            out_r = [_to_py(&acc_r[t]) for t in range(n)]
            out_i = [_to_py(&acc_i[t]) for t in range(n)]
        finally:
            _free_row(acc_r, n)
            _free_row(acc_i, n)
            mpz_clear(ju)
            mpz_clear(half)
        return out_r, out_i
