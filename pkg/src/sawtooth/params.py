"""Parameter set of the sawtooth map.

The classical dynamics only depends on ``K = k*T``.  The quantum map also
needs the register size ``n_q`` (``N = 2**n_q`` levels) and, for the torus
geometry, the integer number of momentum cells ``L = T*N/(2*pi)``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass


class ParameterError(ValueError):
    """Raised when a parameter set violates a consistency rule."""


# relative tolerance for L = T*N/(2*pi) being an integer
_L_RTOL = 1e-9


@dataclass(frozen=True)
class MapParams:
    """Kick strength ``k``, period ``T`` and optional register/torus data.

    ``L=None`` selects the cylinder geometry: momentum is unbounded for the
    classical map and cut off at ``N`` levels for the quantum map.
    """

    k: float
    T: float
    n_q: int | None = None
    L: int | None = None

    def __post_init__(self):
        if self.n_q is not None and (int(self.n_q) != self.n_q or self.n_q < 1):
            raise ParameterError(f"n_q must be a positive integer, got {self.n_q!r}")
        if self.L is not None:
            if int(self.L) != self.L or self.L < 1:
                raise ParameterError(f"L must be a positive integer, got {self.L!r}")
            if self.n_q is not None:
                L_from_T = self.T * self.N / (2 * math.pi)
                if not math.isclose(L_from_T, self.L, rel_tol=_L_RTOL):
                    raise ParameterError(
                        f"torus requires L = T*N/(2*pi); got L={self.L}, "
                        f"T*N/(2*pi)={L_from_T:.12g}"
                    )

    @property
    def K(self) -> float:
        return self.k * self.T

    @property
    def N(self) -> int:
        if self.n_q is None:
            raise ParameterError("n_q is not set")
        return 1 << self.n_q

    @property
    def hbar_eff(self) -> float:
        return self.T

    @property
    def torus(self) -> bool:
        return self.L is not None

    @property
    def p_window(self) -> tuple[float, float]:
        """Momentum range ``[-pi*L, pi*L)`` covered by the torus or the register."""
        if self.L is not None:
            return -math.pi * self.L, math.pi * self.L
        if self.n_q is not None:
            half = self.T * self.N / 2
            return -half, half
        raise ParameterError("cylinder without register has no momentum window")

    @classmethod
    def on_torus(cls, K: float, L: int, n_q: int) -> "MapParams":
        """Quantum torus: ``T = 2*pi*L/N`` and ``k = K/T``."""
        T = 2 * math.pi * L / (1 << n_q)
        return cls(k=K / T, T=T, n_q=n_q, L=L)

    @classmethod
    def classical(cls, K: float, L: int | None = None) -> "MapParams":
        """Classical map in rescaled units (``T = 1`` so that ``p = n``)."""
        return cls(k=K, T=1.0, L=L)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["K"] = self.K
        if self.n_q is not None:
            d["N"] = self.N
        return d
