"""Extended-precision replay of MAP/MSP error sequences with mpmath.

Some exact identities are unobservable in double precision.  For the
``mu_-`` eigenvector start, rounding seeds the ``mu_+`` eigenspace at about
1e-16, and MSP amplifies that seed by ``mu_+/mu_-`` per step.  Replaying the
iteration at a few dozen extra digits keeps the seed invisible for the
number of steps being checked.
"""

from __future__ import annotations

import math
from typing import Sequence

import mpmath
import numpy as np

from .subspace import _rng, random_orthogonal


class MPPair:
    """Two subspaces held as mpmath bases with orthonormality to ``dps`` digits."""

    def __init__(self, QA, QB, QAB, ctx):
        self.ctx = ctx
        self.QA = QA
        self.QB = QB
        self.QAB = QAB

    @staticmethod
    def _context(dps: int):
        ctx = mpmath.MPContext()
        ctx.dps = dps
        return ctx

    @staticmethod
    def _gram_schmidt(ctx, cols: list):
        out = []
        for c in cols:
            v = c.copy()
            for _ in range(2):
                for q in out:
                    v -= q * (q.T * v)[0]
            out.append(v / ctx.norm(v))
        return out

    @classmethod
    def from_angles(
        cls,
        d: int,
        angles: Sequence[float],
        seed: int,
        dps: int = 60,
        extra_a: int = 0,
        extra_b: int = 0,
    ) -> "MPPair":
        """Same configuration as :func:`projlab.subspace.subspaces_with_angles`.

        Zero angles give exactly shared basis vectors, so ``A ∩ B`` is exact
        in the extended-precision model too.
        """
        ctx = cls._context(dps)
        Q = random_orthogonal(d, _rng(seed))
        cols = cls._gram_schmidt(ctx, [ctx.matrix(Q[:, j].tolist()) for j in range(d)])
        theta = [float(t) for t in angles]
        p = len(theta)
        u = cols[:p]
        b = list(u)
        col = p
        for n, t in enumerate(theta):
            if t > 0:
                tt = ctx.mpf(t)
                b[n] = ctx.cos(tt) * u[n] + ctx.sin(tt) * cols[col]
                col += 1
        a_extra = cols[col:col + extra_a]
        col += extra_a
        b_extra = cols[col:col + extra_b]
        shared = [u[n] for n, t in enumerate(theta) if t == 0]

        def stack(vs):
            if not vs:
                return None
            M = ctx.matrix(d, len(vs))
            for j, v in enumerate(vs):
                for i in range(d):
                    M[i, j] = v[i]
            return M

        return cls(stack(u + a_extra), stack(b + b_extra), stack(shared), ctx)

    def vector(self, x) -> "mpmath.matrix":
        return self.ctx.matrix([self.ctx.mpf(float(v)) for v in np.asarray(x, dtype=float)])

    def _proj(self, Q, x):
        if Q is None:
            return x * 0
        return Q * (Q.T * x)

    def project_A(self, x):
        return self._proj(self.QA, x)

    def project_B(self, x):
        return self._proj(self.QB, x)

    def project_AB(self, x):
        return self._proj(self.QAB, x)

    def step(self, method: str, x):
        if method == "MAP":
            return self.project_A(self.project_B(x))
        return (self.project_A(x) + self.project_B(x)) / 2

    def avg_matrix(self):
        PA = self.QA * self.QA.T
        PB = self.QB * self.QB.T
        return (PA + PB) / 2

    def refine_eigvec(self, x, value, steps: int = 3):
        """Inverse iteration on ``(P_A+P_B)/2`` at a shift next to ``value``."""
        ctx = self.ctx
        T = self.avg_matrix()
        n = T.rows
        sigma = ctx.mpf(value) * (1 + ctx.mpf(10) ** (-(ctx.dps // 2)))
        M = T - sigma * ctx.eye(n)
        y = x / ctx.norm(x)
        for _ in range(steps):
            y = ctx.lu_solve(M, y)
            y = y / ctx.norm(y)
        return y

    def errors(self, method: str, x0, K: int) -> list:
        """Exact-model error norms ``e_0 .. e_K`` for an mpmath start vector."""
        z = x0 - self.project_AB(x0)
        out = [self.ctx.norm(z)]
        for _ in range(K):
            z = self.step(method, z)
            z = z - self.project_AB(z)
            out.append(self.ctx.norm(z))
        return out


def digits_for_growth(growth: float, K: int, margin: int = 30) -> int:
    """Working digits so that a 1e-dps seed grown by ``growth**K`` stays below 1e-margin."""
    return margin + int(math.ceil(K * math.log10(max(growth, 1.0))))
