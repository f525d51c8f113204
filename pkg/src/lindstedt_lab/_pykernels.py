"""Pure-Python fixed-point kernels.

Reference implementation of the two hot loops of the expansion engine.
Values are Python integers read as fixed-point numbers ``x / 2**frac_bits``.
Every rounding is ``(x + 2**(s-1)) >> s`` (round half up), which the compiled
backend reproduces bit for bit.
"""

NAME = "python"


def _bitrev_permute(re, im):
    n = len(re)
    j = 0
    for i in range(1, n):
        bit = n >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j |= bit
        if i < j:
            re[i], re[j] = re[j], re[i]
            im[i], im[j] = im[j], im[i]


def fft(re, im, cos_table, sin_table, frac_bits, sign=1):
    """Radix-2 transform ``X_t = sum_l x_l exp(sign * 2*pi*i*l*t/M)``.

    ``cos_table[m]``, ``sin_table[m]`` hold cos/sin(2*pi*m/M) for
    ``0 <= m < M/2`` at ``frac_bits``.  No 1/M normalisation is applied.
    Returns new lists.
    """
    n = len(re)
    if n & (n - 1) or n != len(im):
        raise ValueError("transform length must be a power of two")
    re = [int(x) for x in re]
    im = [int(x) for x in im]
    if n == 1:
        return re, im
    _bitrev_permute(re, im)
    half = 1 << (frac_bits - 1)
    size = 2
    while size <= n:
        h = size >> 1
        step = n // size
        for m in range(h):
            wr = cos_table[m * step]
            wi = sin_table[m * step] if sign > 0 else -sin_table[m * step]
            for a in range(m, n, size):
                b = a + h
                xr = re[b]
                xi = im[b]
                tr = (xr * wr - xi * wi + half) >> frac_bits
                ti = (xr * wi + xi * wr + half) >> frac_bits
                ar = re[a]
                ai = im[a]
                re[b] = ar - tr
                im[b] = ai - ti
                re[a] = ar + tr
                im[a] = ai + ti
        size <<= 1
    return re, im


class ValueBank:
    """Grid samples of the real functions u_j and complex functions w_i.

    ``dot(k)`` returns the samples of ``sum_{j=1..k} j * u_j * w_{k-j}``,
    rescaled by ``2**-frac_bits`` with rounding.
    """

    def __init__(self, size, frac_bits):
        self.size = int(size)
        self.frac_bits = int(frac_bits)
        self._u = []
        self._wr = []
        self._wi = []

    @property
    def n_u(self):
        return len(self._u)

    @property
    def n_w(self):
        return len(self._wr)

    def _check(self, values):
        if len(values) != self.size:
            raise ValueError(f"expected {self.size} samples, got {len(values)}")

    def append_u(self, values):
        self._check(values)
        self._u.append([int(v) for v in values])

    def append_w(self, re, im):
        self._check(re)
        self._check(im)
        self._wr.append([int(v) for v in re])
        self._wi.append([int(v) for v in im])

    def dot(self, k):
        if k < 1 or self.n_u <= k or self.n_w < k:
            raise IndexError(f"bank holds u_0..u_{self.n_u - 1}, w_0..w_{self.n_w - 1}; order {k} unavailable")
        acc_r = [0] * self.size
        acc_i = [0] * self.size
        for j in range(1, k + 1):
            u = self._u[j]
            wr = self._wr[k - j]
            wi = self._wi[k - j]
            for t in range(self.size):
                ju = j * u[t]
                acc_r[t] += ju * wr[t]
                acc_i[t] += ju * wi[t]
        s = self.frac_bits
        half = 1 << (s - 1)
        return [(x + half) >> s for x in acc_r], [(x + half) >> s for x in acc_i]
