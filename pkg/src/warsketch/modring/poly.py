"""Univariate polynomials over a prime field F_p.

Polynomials are plain lists of residues, lowest degree first, with no trailing
zeros (the zero polynomial is ``[]``). ``PolyField`` carries the prime and a
field-multiplication counter so callers can audit operation counts.
"""

from __future__ import annotations

KARATSUBA_CUTOFF = 32  # schoolbook below this length
DIVISION_CUTOFF = 32  # long division below this quotient length


def trim(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def degree(f: list[int]) -> int:
    return len(f) - 1


class PolyField:
    """Polynomial arithmetic over F_p with a running multiplication count."""

    def __init__(self, p: int):
        if p < 2:
            raise ValueError("p must be >= 2")
        self.p = p
        self.mults = 0

    # scalar helpers

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("inverse of zero in F_p")
        self.mults += 1  # counted as one field operation
        return pow(a, -1, self.p)

    # basic ring operations

    def add(self, f: list[int], g: list[int]) -> list[int]:
        p = self.p
        if len(f) < len(g):
            f, g = g, f
        out = list(f)
        for i, c in enumerate(g):
            out[i] = (out[i] + c) % p
        return trim(out)

    def sub(self, f: list[int], g: list[int]) -> list[int]:
        p = self.p
        n = max(len(f), len(g))
        out = [0] * n
        for i, c in enumerate(f):
            out[i] = c
        for i, c in enumerate(g):
            out[i] = (out[i] - c) % p
        return trim(out)

    def scale(self, f: list[int], c: int) -> list[int]:
        c %= self.p
        self.mults += len(f)
        return trim([(a * c) % self.p for a in f])

    def mul(self, f: list[int], g: list[int]) -> list[int]:
        if not f or not g:
            return []
        return trim(self._mul(f, g))

    def _mul(self, f: list[int], g: list[int]) -> list[int]:
        if min(len(f), len(g)) < KARATSUBA_CUTOFF:
            return self._schoolbook(f, g)
        return self._karatsuba(f, g)

    def _schoolbook(self, f: list[int], g: list[int]) -> list[int]:
        p = self.p
        self.mults += len(f) * len(g)
        out = [0] * (len(f) + len(g) - 1)
        for i, a in enumerate(f):
            if a == 0:
                continue
            for j, b in enumerate(g):
                out[i + j] += a * b
        return [c % p for c in out]

    def _karatsuba(self, f: list[int], g: list[int]) -> list[int]:
        p = self.p
        n = max(len(f), len(g))
        half = n // 2
        f0, f1 = f[:half], f[half:]
        g0, g1 = g[:half], g[half:]
        z0 = self._mul(f0, g0) if f0 and g0 else []
        z2 = self._mul(f1, g1) if f1 and g1 else []
        fs = _pad_add(f0, f1, p)
        gs = _pad_add(g0, g1, p)
        z1 = self._mul(fs, gs) if fs and gs else []
        out = [0] * (len(f) + len(g) - 1)
        for i, c in enumerate(z0):
            out[i] += c
            out[i + half] -= c
        for i, c in enumerate(z2):
            out[i + 2 * half] += c
            out[i + half] -= c
        for i, c in enumerate(z1):
            out[i + half] += c
        return [c % p for c in out]

    def truncate(self, f: list[int], n: int) -> list[int]:
        return trim(list(f[:n]))

    def inv_series(self, f: list[int], n: int) -> list[int]:
        """1/f modulo z**n by Newton iteration; needs f(0) != 0."""
        if not f or f[0] % self.p == 0:
            raise ZeroDivisionError("power series with zero constant term is not invertible")
        g = [self.inv(f[0])]
        m = 1
        while m < n:
            m = min(2 * m, n)
            # g <- g * (2 - f*g) mod z^m
            fg = self.truncate(self.mul(self.truncate(f, m), g), m)
            two_minus = self.sub([2], fg)
            g = self.truncate(self.mul(g, two_minus), m)
        return g

    def divmod(self, a: list[int], b: list[int]) -> tuple[list[int], list[int]]:
        if not b:
            raise ZeroDivisionError("polynomial division by zero")
        a = trim(list(a))
        if len(a) < len(b):
            return [], a
        qlen = len(a) - len(b) + 1
        if qlen < DIVISION_CUTOFF or len(b) < DIVISION_CUTOFF:
            return self._long_division(a, b)
        # reversed-coefficient division: rev(q) = rev(a) / rev(b) mod z^qlen
        ra = a[::-1]
        rb = b[::-1]
        rq = self.truncate(self.mul(self.truncate(ra, qlen), self.inv_series(rb, qlen)), qlen)
        q = trim((rq + [0] * (qlen - len(rq)))[::-1])
        r = self.sub(a, self.mul(q, b))
        return q, r

    def _long_division(self, a: list[int], b: list[int]) -> tuple[list[int], list[int]]:
        p = self.p
        r = list(a)
        db = len(b) - 1
        lead_inv = self.inv(b[-1])
        q = [0] * (len(a) - db)
        for i in range(len(a) - 1 - db, -1, -1):
            c = (r[i + db] * lead_inv) % p
            self.mults += 1
            if c == 0:
                continue
            q[i] = c
            for j in range(db + 1):
                r[i + j] = (r[i + j] - c * b[j]) % p
            self.mults += db + 1
        return trim(q), trim(r[:db])

    def rem(self, a: list[int], b: list[int]) -> list[int]:
        return self.divmod(a, b)[1]

    # evaluation

    def horner(self, f: list[int], x: int) -> int:
        p = self.p
        acc = 0
        for c in reversed(f):
            acc = (acc * x + c) % p
        self.mults += len(f)
        return acc

    def subproduct_tree(self, points: list[int]) -> list[list[list[int]]]:
        """Levels of products of (z - x_i); level 0 holds the linear factors."""
        p = self.p
        level = [trim([(-x) % p, 1]) for x in points]
        tree = [level]
        while len(level) > 1:
            nxt = []
            for i in range(0, len(level) - 1, 2):
                nxt.append(self.mul(level[i], level[i + 1]))
            if len(level) % 2:
                nxt.append(level[-1])
            tree.append(nxt)
            level = nxt
        return tree

    def multipoint_eval(self, f: list[int], points: list[int]) -> list[int]:
        """f(x) for every x in ``points`` by remainder-tree descent."""
        points = [x % self.p for x in points]
        if not points:
            return []
        f = trim(list(f))
        if not f:
            return [0] * len(points)
        tree = self.subproduct_tree(points)
        rems = [self.rem(f, tree[-1][0])]
        for depth in range(len(tree) - 2, -1, -1):
            level = tree[depth]
            nxt = []
            for i, r in enumerate(rems):
                left = 2 * i
                nxt.append(self.rem(r, level[left]))
                if left + 1 < len(level):
                    nxt.append(self.rem(r, level[left + 1]))
            rems = nxt
        return [r[0] if r else 0 for r in rems]

    def weighted_power_sums(self, points: list[int], weights: list[int], count: int) -> list[int]:
        """s_r = sum_c w_c * a_c**(r-1) for r = 1..count.

        Accumulates sum_c w_c / (1 - a_c z) as one fraction N/D by divide and
        conquer, then expands N * D^{-1} mod z**count.
        """
        p = self.p
        if len(points) != len(weights):
            raise ValueError("points and weights differ in length")
        if len(points) > count:
            raise ValueError(f"{len(points)} points exceed count {count}")
        pts = [a % p for a in points]
        if any(a == 0 for a in pts):
            raise ValueError("zero point")
        if len(set(pts)) != len(pts):
            raise ValueError("duplicate point")
        if count == 0:
            return []
        if not pts:
            return [0] * count
        fracs = [(trim([w % p]), [1, (-a) % p]) for a, w in zip(pts, weights)]
        while len(fracs) > 1:
            nxt = []
            for i in range(0, len(fracs) - 1, 2):
                (n1, d1), (n2, d2) = fracs[i], fracs[i + 1]
                num = self.add(self.mul(n1, d2), self.mul(n2, d1))
                nxt.append((num, self.mul(d1, d2)))
            if len(fracs) % 2:
                nxt.append(fracs[-1])
            fracs = nxt
        num, den = fracs[0]
        series = self.truncate(self.mul(num, self.inv_series(den, count)), count)
        return series + [0] * (count - len(series))


def _pad_add(f: list[int], g: list[int], p: int) -> list[int]:
    n = max(len(f), len(g))
    out = [0] * n
    for i, c in enumerate(f):
        out[i] = c
    for i, c in enumerate(g):
        out[i] = (out[i] + c) % p
    return trim(out)


def poly_multipoint_eval(f: list[int], points: list[int], p: int) -> list[int]:
    return PolyField(p).multipoint_eval(f, points)


def weighted_power_sums(points: list[int], weights: list[int], count: int, p: int) -> list[int]:
    return PolyField(p).weighted_power_sums(points, weights, count)
