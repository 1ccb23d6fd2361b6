"""Gain kernels and phase-configuration constructors for permuted-element RIS.

The received power when a signal impinges from `incoming` and is measured in
`outgoing` is |s(outgoing)^T P C s(incoming)|^2, with P the permutation matrix
(signal received at element j leaves from element sigma(j)) and C the diagonal
of per-element unit-modulus phase shifts.  With all phases aligned the gain
reaches its ceiling M^4.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSplitError,
    HardwareModeError,
    InvalidArgumentError,
)
from .geometry import Direction, element_grid, steering_vector
from .permutation import Permutation

HARDWARE_PER_ELEMENT = "per_element"
HARDWARE_SHARED_PAIR = "shared_pair"

UNIT_MODULUS_TOL = 1e-12


class PhaseConfig:
    """Per-element phase shifts: a length-M^2 vector of unit-modulus phasors."""

    def __init__(self, phases):
        p = np.asarray(phases, dtype=np.complex128).copy()
        if p.ndim != 1:
            raise InvalidArgumentError("phase config must be a 1-D sequence")
        if np.max(np.abs(np.abs(p) - 1.0)) > UNIT_MODULUS_TOL:
            raise InvalidArgumentError("phase config entries must have unit modulus")
        p.setflags(write=False)
        self.phases = p

    def __len__(self) -> int:
        return self.phases.size

    def angles(self) -> np.ndarray:
        """Phase angles in radians, wrapped to [0, 2*pi)."""
        a = np.angle(self.phases)
        return np.where(a < 0, a + 2 * np.pi, a)

    def to_json(self) -> str:
        return json.dumps({"angles": self.angles().tolist()})

    @classmethod
    def from_json(cls, text: str) -> "PhaseConfig":
        doc = json.loads(text)
        return cls(np.exp(1j * np.asarray(doc["angles"], dtype=float)))


@dataclass(frozen=True)
class SplitWeights:
    """Forward/reverse weighting of a beam-split configuration."""

    alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidArgumentError(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class RisModel:
    """Surface size, element permutation, and phase-shifter hardware mode."""

    m_side: int
    perm: Permutation
    hardware: str = HARDWARE_PER_ELEMENT

    def __post_init__(self):
        if self.m_side < 1:
            raise InvalidArgumentError(f"surface side must be >= 1, got {self.m_side}")
        if self.perm.size != self.m_side * self.m_side:
            raise InvalidArgumentError(
                f"permutation size {self.perm.size} does not match M^2 = {self.m_side**2}"
            )
        if self.hardware not in (HARDWARE_PER_ELEMENT, HARDWARE_SHARED_PAIR):
            raise HardwareModeError(f"unknown hardware mode {self.hardware!r}")
        if self.hardware == HARDWARE_SHARED_PAIR and not self.perm.is_involution():
            raise HardwareModeError("shared-pair hardware requires a symmetric permutation")


def gain(model: RisModel, incoming, outgoing, config: PhaseConfig) -> float:
    """Beamforming gain |s(outgoing)^T P C s(incoming)|^2, in [0, M^4]."""
    if len(config) != model.m_side**2:
        raise InvalidArgumentError(
            f"config length {len(config)} does not match M^2 = {model.m_side**2}"
        )
    s_in = steering_vector(model.m_side, incoming)
    s_out = steering_vector(model.m_side, outgoing)
    fieldsum = np.sum(s_out[model.perm.targets] * config.phases * s_in)
    return float(abs(fieldsum) ** 2)


def optimal_config(model: RisModel, outgoing, incoming) -> PhaseConfig:
    """Phase config aligning every element for the pair (incoming -> outgoing).

    Entrywise conjugate of s(outgoing) back-permuted to the receiving element
    times s(incoming); with the identity permutation this reduces to the
    standard choice s(-(incoming + outgoing)).  Reaches gain M^4 exactly.
    """
    if model.hardware != HARDWARE_PER_ELEMENT:
        raise HardwareModeError(
            "optimal_config needs per-element shifters; use symmetric_pair_config"
        )
    s_in = steering_vector(model.m_side, incoming)
    s_out = steering_vector(model.m_side, outgoing)
    return PhaseConfig(np.conj(s_out[model.perm.targets] * s_in))


def beam_split_config(model: RisModel, k, ktilde, w: SplitWeights | float = 0.5) -> PhaseConfig:
    """Reciprocity-restoring config: normalized weighted sum of both optima.

    Each entry is the unit-normalized alpha-weighted sum of the forward
    (k -> ktilde) and reverse (ktilde -> k) aligned phases.  Raises
    DegenerateSplitError when some entry of the unnormalized sum (nearly)
    vanishes, i.e. the two constituent phases are antipodal.
    """
    if not isinstance(w, SplitWeights):
        w = SplitWeights(float(w))
    fwd = optimal_config(model, ktilde, k).phases
    rev = optimal_config(model, k, ktilde).phases
    mix = w.alpha * fwd + (1.0 - w.alpha) * rev
    mag = np.abs(mix)
    if np.min(mag) < 1e-12:
        raise DegenerateSplitError(
            "beam-split phases are antipodal on some element; the split is undefined"
        )
    return PhaseConfig(mix / mag)


def _pair_field_terms(model: RisModel, k, ktilde) -> np.ndarray:
    """Per-pair field subtotal at unit shifter phase, stored on both elements.

    Element e contributes s_e(k) * s_sigma(e)(ktilde); its partner contributes
    the mirrored product.  A shared shifter multiplies the pair subtotal, so
    the per-pair optimum is the subtotal's conjugate phase.
    """
    t = model.perm.targets
    s_k = steering_vector(model.m_side, k)
    s_kt = steering_vector(model.m_side, ktilde)
    v = s_k * s_kt[t]
    partner = v[t]
    fixed = t == np.arange(t.size)
    return np.where(fixed, v, v + partner)


def symmetric_pair_config(model: RisModel, k, ktilde) -> PhaseConfig:
    """One shared phase per element pair of a symmetric permutation.

    Aligns each pair's combined field term for the pair (k -> ktilde); fixed
    points behave as ordinary per-element shifters.  Pairs whose two terms are
    antipodal contribute nothing regardless of phase and get phase 1.
    """
    if not model.perm.is_involution():
        raise HardwareModeError("pair configuration requires a symmetric permutation")
    w = _pair_field_terms(model, k, ktilde)
    mag = np.abs(w)
    safe = np.where(mag < 1e-12, 1.0, mag)
    phases = np.where(mag < 1e-12, 1.0 + 0j, np.conj(w) / safe)
    return PhaseConfig(phases)


def symmetric_gain_closed_form(model: RisModel, k, ktilde) -> float:
    """Gain of the optimal shared-pair configuration, in closed form.

    Each pair {e, sigma(e)} contributes |1 + exp(j*pi*theta)| with theta the
    coordinate-offset phase mismatch of the pair for (k, ktilde); fixed points
    contribute 1.  The total field is the sum, and the gain its square.  Both
    elements of a pair carry the same mismatch magnitude, so the sum runs over
    elements and halves.
    """
    if not model.perm.is_involution():
        raise InvalidArgumentError("closed form requires a symmetric permutation")
    k = Direction.of(k)
    kt = Direction.of(ktilde)
    mm, nn = element_grid(model.m_side)
    t = model.perm.targets
    row_off = mm[t] - mm
    col_off = nn[t] - nn
    theta = row_off * (k.kx - kt.kx) + col_off * (k.ky - kt.ky)
    amp = np.abs(1.0 + np.exp(1j * np.pi * theta))
    total_field = float(np.sum(amp)) / 2.0
    return total_field**2
