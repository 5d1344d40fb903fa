"""SplitMix64 stream used for every seeded direction and offset.

The generator is tiny and fully specified so that scenario files produce the
same vectors on any platform: state advances by the golden-gamma constant and
each output is the standard SplitMix64 finaliser.  Doubles take the top 53
bits; normals use Box-Muller on consecutive pairs.
"""

import math

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed):
        self.state = int(seed) & _MASK

    def next_u64(self):
        self.state = (self.state + _GAMMA) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self):
        """Double in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniforms(self, n):
        return np.array([self.uniform() for _ in range(n)])

    def normals(self, n):
        out = np.empty(n)
        i = 0
        while i < n:
            u1 = 1.0 - self.uniform()  # (0, 1], keeps log finite
            u2 = self.uniform()
            r = math.sqrt(-2.0 * math.log(u1))
            out[i] = r * math.cos(2.0 * math.pi * u2)
            if i + 1 < n:
                out[i + 1] = r * math.sin(2.0 * math.pi * u2)
            i += 2
        return out


def unit_vector(seed, n, weight=1.0):
    """Random direction with unit norm in the weighted inner product h * sum(x*y)."""
    x = SplitMix64(seed).normals(n)
    return x / math.sqrt(weight * float(x @ x))


def orthogonal_matrix(seed, n):
    """Orthogonal matrix from QR of a seeded Gaussian matrix, signs fixed so R has a positive diagonal."""
    g = SplitMix64(seed).normals(n * n).reshape(n, n)
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))
