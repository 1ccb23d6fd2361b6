"""Element permutations: construction, classification, diagnostics, JSON I/O.

A permutation maps the element receiving a signal to the element re-radiating
it.  Externally (JSON, CLI, diagnostics) targets are 1-based; internal storage
is a 0-based numpy array aligned with the flattening order of
:func:`permris.geometry.element_grid`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, InvalidSizeError

KIND_IDENTITY = "identity"
KIND_SEPARABLE = "separable"
KIND_SYMMETRIC = "symmetric"
KIND_GENERAL = "general"


class Permutation:
    """A bijection on the flattened M x M element grid.

    `targets[j] = i` means the signal received at flat element j leaves from
    flat element i (0-based).  `factors`, when present, holds the 1-based
    per-axis bijections (rows, cols) the permutation was built from.
    """

    def __init__(self, targets, m_side: int | None = None, factors=None):
        t = np.asarray(targets, dtype=np.int64).copy()
        n = t.size
        if n < 1:
            raise InvalidSizeError("permutation must have at least one element")
        hit = np.zeros(n, dtype=bool)
        if t.min() < 0 or t.max() >= n:
            raise InvalidArgumentError("permutation targets out of range")
        hit[t] = True
        if not hit.all():
            raise InvalidArgumentError("permutation targets are not a bijection")
        if m_side is None:
            m_side = int(round(n**0.5))
        if m_side * m_side != n:
            raise InvalidSizeError(f"flattened size {n} is not a perfect square")
        t.setflags(write=False)
        self.targets = t
        self.m_side = int(m_side)
        self.factors = None
        if factors is not None:
            s1, s2 = factors
            self.factors = (tuple(int(v) for v in s1), tuple(int(v) for v in s2))

    @property
    def size(self) -> int:
        return self.targets.size

    def one_based(self) -> list[int]:
        return [int(v) + 1 for v in self.targets]

    def is_identity(self) -> bool:
        return bool(np.all(self.targets == np.arange(self.size)))

    def is_involution(self) -> bool:
        return bool(np.all(self.targets[self.targets] == np.arange(self.size)))

    def fixed_point_count(self) -> int:
        return int(np.sum(self.targets == np.arange(self.size)))

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.targets)
        inv[self.targets] = np.arange(self.size)
        return Permutation(inv, self.m_side)

    @property
    def kind(self) -> str:
        # A separable involution keeps the separable tag: the factor metadata
        # is strictly richer, and is_involution() stays queryable.
        if self.is_identity():
            return KIND_IDENTITY
        if self.factors is not None:
            return KIND_SEPARABLE
        if self.is_involution():
            return KIND_SYMMETRIC
        return KIND_GENERAL

    def to_json(self) -> str:
        doc = {"kind": self.kind, "m_side": self.m_side, "targets": self.one_based()}
        if self.factors is not None:
            doc["factors"] = {"rows": list(self.factors[0]), "cols": list(self.factors[1])}
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "Permutation":
        doc = json.loads(text)
        if "factors" in doc and doc["factors"]:
            return separable_perm(doc["factors"]["rows"], doc["factors"]["cols"])
        targets = np.asarray(doc["targets"], dtype=np.int64) - 1
        return cls(targets, m_side=doc.get("m_side"))

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and bool(np.all(self.targets == other.targets))

    def __repr__(self) -> str:
        return f"Permutation(kind={self.kind}, m_side={self.m_side})"


@dataclass(frozen=True)
class PermDiagnostics:
    """Difference diagnostics of a 1-based bijection sigma."""

    diffs: tuple          # d_m = sigma(m) - m
    consecutive_gaps: tuple  # g_m = sigma(m+1) - sigma(m)
    fixed_point_count: int


def _one_based_of(perm_or_seq) -> np.ndarray:
    if isinstance(perm_or_seq, Permutation):
        return np.asarray(perm_or_seq.one_based(), dtype=np.int64)
    return np.asarray(list(perm_or_seq), dtype=np.int64)


def diagnostics(perm_or_seq) -> PermDiagnostics:
    """Diffs d_m, consecutive gaps g_m, and fixed points of a bijection.

    Accepts a Permutation (flattened mapping) or any 1-based target sequence,
    e.g. a single separable factor.
    """
    sigma = _one_based_of(perm_or_seq)
    m = np.arange(1, sigma.size + 1)
    diffs = sigma - m
    gaps = sigma[1:] - sigma[:-1]
    return PermDiagnostics(
        diffs=tuple(int(v) for v in diffs),
        consecutive_gaps=tuple(int(v) for v in gaps),
        fixed_point_count=int(np.sum(diffs == 0)),
    )


def identity_perm(m_side: int) -> Permutation:
    if m_side < 1:
        raise InvalidSizeError(f"surface side must be >= 1, got {m_side}")
    return Permutation(np.arange(m_side * m_side), m_side)


def random_perm(m_side: int, seed) -> Permutation:
    """Uniform random permutation of the M^2 elements.

    Fisher-Yates shuffle driven by a seeded PCG64 generator, so the result is
    reproducible bit-for-bit for a given seed on one platform.
    """
    if m_side < 1:
        raise InvalidSizeError(f"surface side must be >= 1, got {m_side}")
    rng = np.random.default_rng(seed)
    return Permutation(rng.permutation(m_side * m_side), m_side)


def random_symmetric_perm(m_side: int, seed) -> Permutation:
    """Random involution on the M^2 elements (pairs plus fixed points).

    Indices are visited in order; an unmatched index stays fixed with
    probability 1/u, u being the number of still-unmatched indices, and is
    otherwise paired with a uniformly chosen other unmatched index.  Every
    involution is reachable; the distribution over involutions is only
    approximately uniform.
    """
    if m_side < 1:
        raise InvalidSizeError(f"surface side must be >= 1, got {m_side}")
    n = m_side * m_side
    rng = np.random.default_rng(seed)
    targets = np.full(n, -1, dtype=np.int64)
    unmatched = list(range(n))
    while unmatched:
        i = unmatched[0]
        u = len(unmatched)
        if u == 1 or rng.integers(u) == 0:
            targets[i] = i
            unmatched.pop(0)
        else:
            j = unmatched[int(rng.integers(1, u))]
            targets[i] = j
            targets[j] = i
            unmatched.remove(j)
            unmatched.pop(0)
    return Permutation(targets, m_side)


def _validate_factor(sigma, m_side: int, name: str) -> np.ndarray:
    s = np.asarray(list(sigma), dtype=np.int64)
    if s.size != m_side:
        raise InvalidArgumentError(f"{name} has size {s.size}, expected {m_side}")
    if sorted(s.tolist()) != list(range(1, m_side + 1)):
        raise InvalidArgumentError(f"{name} is not a bijection on 1..{m_side}")
    return s


def separable_perm(sigma1, sigma2) -> Permutation:
    """Permutation acting per axis: element (m, n) goes to (sigma1(m), sigma2(n)).

    Both factors are 1-based bijections on 1..M and must have equal size.
    """
    s1 = np.asarray(list(sigma1), dtype=np.int64)
    m_side = s1.size
    s1 = _validate_factor(s1, m_side, "sigma1")
    s2 = _validate_factor(sigma2, m_side, "sigma2")
    m0 = s1 - 1  # 0-based row targets
    n0 = s2 - 1
    targets = (m0[:, None] * m_side + n0[None, :]).ravel()
    return Permutation(targets, m_side, factors=(s1.tolist(), s2.tolist()))


def perm_from_targets(targets_one_based, m_side: int | None = None) -> Permutation:
    """Permutation from an explicit 1-based target list (CLI / file input)."""
    t = np.asarray(list(targets_one_based), dtype=np.int64) - 1
    return Permutation(t, m_side)
