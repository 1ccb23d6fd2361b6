"""Directional-cosine arithmetic and steering vectors for a square M x M surface.

Far-field directions are parameterized by directional cosines (kx, ky); a
direction is physically realizable ("visible") iff kx^2 + ky^2 <= 1.  Element
phases are periodic in each cosine with period 2, so every component has a
canonical representative in (-1, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSizeError


@dataclass(frozen=True)
class Direction:
    """A far-field direction given by its directional cosines."""

    kx: float
    ky: float

    @classmethod
    def of(cls, value) -> "Direction":
        """Coerce a Direction, (kx, ky) pair, or length-2 array."""
        if isinstance(value, Direction):
            return value
        kx, ky = value
        return cls(float(kx), float(ky))

    def is_visible(self, tol: float = 0.0) -> bool:
        return self.kx * self.kx + self.ky * self.ky <= 1.0 + tol

    def canonical(self) -> "Direction":
        return Direction(mod2_canonical(self.kx), mod2_canonical(self.ky))

    def as_array(self) -> np.ndarray:
        return np.array([self.kx, self.ky], dtype=float)

    def __add__(self, other) -> "Direction":
        o = Direction.of(other)
        return Direction(self.kx + o.kx, self.ky + o.ky)

    def __sub__(self, other) -> "Direction":
        o = Direction.of(other)
        return Direction(self.kx - o.kx, self.ky - o.ky)

    def __neg__(self) -> "Direction":
        return Direction(-self.kx, -self.ky)


ZERO = Direction(0.0, 0.0)


def mod2_canonical(x: float) -> float:
    """Reduce x modulo 2 into (-1, 1].  The boundary -1 maps to +1."""
    y = math.fmod(float(x), 2.0)  # fmod is exact for doubles
    if y > 1.0:
        y -= 2.0
    elif y <= -1.0:
        y += 2.0
    return y + 0.0  # normalize -0.0


def element_grid(m_side: int):
    """1-based (m, n) coordinates of all elements in vectorization order.

    The grid is flattened row-major with m as the outer index: element (m, n)
    sits at flat position (m-1)*M + (n-1).  All other modules rely on this
    single ordering so permutation indices stay unambiguous.
    """
    if m_side < 1:
        raise InvalidSizeError(f"surface side must be >= 1, got {m_side}")
    idx = np.arange(1, m_side + 1)
    mm = np.repeat(idx, m_side)
    nn = np.tile(idx, m_side)
    return mm, nn


def steering_vector(m_side: int, d) -> np.ndarray:
    """Unit-modulus steering phasors exp(j*pi*(m*kx + n*ky)), m, n in 1..M.

    The common reference phase is fixed to zero.  The direction need not be
    visible; the phases are well defined for any real cosines.  Per-axis
    products are reduced mod 2 before the complex exponential so the phase
    error stays independent of |m*k|.
    """
    if m_side < 1:
        raise InvalidSizeError(f"surface side must be >= 1, got {m_side}")
    d = Direction.of(d)
    idx = np.arange(1, m_side + 1, dtype=float)
    px = np.fmod(idx * d.kx, 2.0)
    py = np.fmod(idx * d.ky, 2.0)
    ang = np.pi * (px[:, None] + py[None, :])
    return np.exp(1j * ang.ravel())


def hadamard_identity_check(a, b, m_side: int, tol: float = 1e-12) -> bool:
    """True iff s(a) o s(b) equals s(a+b) entrywise within tol."""
    a = Direction.of(a)
    b = Direction.of(b)
    lhs = steering_vector(m_side, a) * steering_vector(m_side, b)
    rhs = steering_vector(m_side, a + b)
    return bool(np.max(np.abs(lhs - rhs)) <= tol)
