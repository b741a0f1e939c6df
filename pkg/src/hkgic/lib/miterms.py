"""
Mutual-information bounds of the Han-Kobayashi constraint system for Gaussian layers.

Each user superposes an independent common layer U and private layer V. The
private layer of the other user is never decoded at a receiver: it stays inside
the received signal as extra Gaussian noise. With that treatment every bound is
the capacity of a scalar AWGN channel at an effective SNR, and ``mi_oracle``
re-derives the same numbers from the joint covariance.
"""

import logging
from typing import Annotated
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field

from .models import DomainError
from .models import GicChannel
from .models import PowerSplit
from .models import awgn_capacity

logger = logging.getLogger(__name__)

RATE_COORDS = ("ru1", "ru2", "rv1", "rv2")
LAYERS = ("U1", "U2", "V1", "V2")
# layer -> rate coordinate
LAYER_RATE = {"U1": "ru1", "U2": "ru2", "V1": "rv1", "V2": "rv2"}


class HkTerm(NamedTuple):
    index: int
    receiver: int
    signal: tuple[str, ...]
    given: tuple[str, ...]

    @property
    def label(self) -> str:
        return f"HK{self.index}"

    @property
    def pattern(self) -> tuple[str, ...]:
        """rate coordinates summed on the left-hand side"""
        return tuple(LAYER_RATE[layer] for layer in self.signal)

    def describe(self) -> str:
        cond = f"|{','.join(self.given)}" if self.given else ""
        return f"{'+'.join(self.pattern)} <= I({','.join(self.signal)};Y{self.receiver}{cond})"


HK_TERMS: tuple[HkTerm, ...] = (
    HkTerm(1, 1, ("U1",), ("U2", "V1")),
    HkTerm(2, 2, ("U1",), ("U2", "V2")),
    HkTerm(3, 1, ("U2",), ("U1", "V1")),
    HkTerm(4, 2, ("U2",), ("U1", "V2")),
    HkTerm(5, 1, ("V1",), ("U1", "U2")),
    HkTerm(6, 2, ("V2",), ("U1", "U2")),
    HkTerm(7, 1, ("U1", "U2"), ("V1",)),
    HkTerm(8, 2, ("U1", "U2"), ("V2",)),
    HkTerm(9, 1, ("U1", "V1"), ("U2",)),
    HkTerm(10, 2, ("U2", "V2"), ("U1",)),
    HkTerm(11, 1, ("U2", "V1"), ("U1",)),
    HkTerm(12, 2, ("U1", "V2"), ("U2",)),
    HkTerm(13, 1, ("U1", "U2", "V1"), ()),
    HkTerm(14, 2, ("U1", "U2", "V2"), ()),
)

# index permutation that exchanges user labels
SWAP_INDEX = (4, 3, 2, 1, 6, 5, 8, 7, 10, 9, 12, 11, 14, 13)


class HkBounds(BaseModel):
    """Right-hand sides b1..b14 in bits per channel use."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    b: tuple[Annotated[float, Field(ge=0)], ...] = Field(min_length=14, max_length=14)

    def bound(self, index: int) -> float:
        if not 1 <= index <= 14:
            raise DomainError(f"HK term index must be in 1..14, got {index}")
        return self.b[index - 1]

    @property
    def values(self) -> tuple[float, ...]:
        return self.b

    def swapped(self) -> "HkBounds":
        return HkBounds(b=tuple(self.b[j - 1] for j in SWAP_INDEX))


def _effective_noise(channel: GicChannel, split: PowerSplit) -> tuple[float, float]:
    d1 = channel.n1 + channel.a * split.pv2
    d2 = channel.n2 + channel.b * split.pv1
    return d1, d2


def compute_bounds(channel: GicChannel, split: PowerSplit) -> HkBounds:
    split.check_against(channel)
    a, b = channel.a, channel.b
    pu1, pv1, pu2, pv2 = split.pu1, split.pv1, split.pu2, split.pv2
    d1, d2 = _effective_noise(channel, split)
    snr = (
        pu1 / d1,
        b * pu1 / d2,
        a * pu2 / d1,
        pu2 / d2,
        pv1 / d1,
        pv2 / d2,
        (pu1 + a * pu2) / d1,
        (b * pu1 + pu2) / d2,
        (pu1 + pv1) / d1,
        (pu2 + pv2) / d2,
        (a * pu2 + pv1) / d1,
        (b * pu1 + pv2) / d2,
        (pu1 + pv1 + a * pu2) / d1,
        (b * pu1 + pu2 + pv2) / d2,
    )
    return HkBounds(b=tuple(float(c) for c in awgn_capacity(np.array(snr))))


def _receiver_covariance(channel: GicChannel, split: PowerSplit, receiver: int) -> tuple[np.ndarray, float]:
    """
    Covariance of (U1, U2, V1, V2, Yk) for receiver k, with the noise variance.
    """
    powers = np.array([split.pu1, split.pu2, split.pv1, split.pv2])
    if receiver == 1:
        gains = np.array([1.0, np.sqrt(channel.a), 1.0, np.sqrt(channel.a)])
        noise = channel.n1
    else:
        gains = np.array([np.sqrt(channel.b), 1.0, np.sqrt(channel.b), 1.0])
        noise = channel.n2
    cov = np.zeros((5, 5))
    cov[:4, :4] = np.diag(powers)
    cross = powers * gains
    cov[:4, 4] = cross
    cov[4, :4] = cross
    cov[4, 4] = float(gains @ (powers * gains)) + noise
    return cov, noise


def _conditional_cov(cov: np.ndarray, target: list[int], given: list[int]) -> np.ndarray:
    sub = cov[np.ix_(target, target)]
    if not given:
        return sub
    cgg = cov[np.ix_(given, given)]
    ctg = cov[np.ix_(target, given)]
    return sub - ctg @ np.linalg.solve(cgg, ctg.T)


def mi_oracle(channel: GicChannel, split: PowerSplit, term_index: int) -> float:
    """
    Evaluate I(S; Yk | T) of one HK term from the joint Gaussian covariance.

    Uses 1/2 log2(det Cov(Yk|T) / det Cov(Yk|T,S)). Zero-power layers are
    constants, so they are dropped from S and T before conditioning.
    """
    if not 1 <= term_index <= 14:
        raise DomainError(f"HK term index must be in 1..14, got {term_index}")
    split.check_against(channel)
    term = HK_TERMS[term_index - 1]
    cov, _ = _receiver_covariance(channel, split, term.receiver)

    def live(layers):
        return [LAYERS.index(x) for x in layers if cov[LAYERS.index(x), LAYERS.index(x)] > 0.0]

    given = live(term.given)
    given_signal = given + live(term.signal)
    num = np.linalg.det(_conditional_cov(cov, [4], given))
    den = np.linalg.det(_conditional_cov(cov, [4], given_signal))
    if not (den > 0.0 and num > 0.0):
        raise DomainError(f"singular conditional covariance for HK{term_index}")
    # num >= den up to rounding; clamp keeps exact zero terms at zero
    return max(0.5 * float(np.log2(num / den)), 0.0)


def oracle_bounds(channel: GicChannel, split: PowerSplit) -> HkBounds:
    return HkBounds(b=tuple(mi_oracle(channel, split, t.index) for t in HK_TERMS))


def last_layer_rates(channel: GicChannel, split: PowerSplit) -> tuple[float, float]:
    """
    Rate of the other user's private layer when it is the last layer decoded:
    C(a pv2 / n1) at receiver 1 and C(b pv1 / n2) at receiver 2.
    """
    split.check_against(channel)
    return (
        awgn_capacity(channel.a * split.pv2 / channel.n1),
        awgn_capacity(channel.b * split.pv1 / channel.n2),
    )


def sum_rate_bounds(channel: GicChannel) -> tuple[float, float]:
    """
    Full-MAC sum rates at each receiver; these do not depend on the layering.
    """
    return (
        awgn_capacity((channel.p1 + channel.a * channel.p2) / channel.n1),
        awgn_capacity((channel.b * channel.p1 + channel.p2) / channel.n2),
    )
