import math

import numpy as np
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field

# relative tolerance for pu + pv = p
SPLIT_REL_TOL = 1e-12


class DomainError(ValueError):
    pass


def awgn_capacity(snr):
    """
    Capacity of a real AWGN channel in bits per channel use, 1/2 log2(1 + snr).

    Accepts a scalar or a numpy array; raises DomainError for negative or
    non-finite input.
    """
    arr = np.asarray(snr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"snr must be finite, got {snr}")
    if np.any(arr < 0):
        raise DomainError(f"snr must be >= 0, got {snr}")
    out = 0.5 * np.log2(1.0 + arr)
    if out.ndim == 0:
        return float(out)
    return out


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)


class GicChannel(_Frozen):
    """
    2-user Gaussian interference channel in canonical form

        Y1 = X1 + sqrt(a) X2 + Z1,   Z1 ~ N(0, n1)
        Y2 = sqrt(b) X1 + X2 + Z2,   Z2 ~ N(0, n2)

    with E[X1^2] = p1, E[X2^2] = p2. Gains and powers are linear.
    """

    p1: float = Field(gt=0)
    p2: float = Field(gt=0)
    a: float = Field(ge=0)
    b: float = Field(ge=0)
    n1: float = Field(gt=0)
    n2: float = Field(gt=0)

    def swapped(self) -> "GicChannel":
        return GicChannel(p1=self.p2, p2=self.p1, a=self.b, b=self.a, n1=self.n2, n2=self.n1)

    def scaled(self, factor: float) -> "GicChannel":
        return self.model_copy(
            update={
                "p1": self.p1 * factor,
                "p2": self.p2 * factor,
                "n1": self.n1 * factor,
                "n2": self.n2 * factor,
            }
        )

    @property
    def is_symmetric(self) -> bool:
        return self.p1 == self.p2 and self.a == self.b and self.n1 == self.n2


class PowerSplit(_Frozen):
    """
    Split of each user's power between the common layer U and the private layer V.
    """

    pu1: float = Field(ge=0)
    pv1: float = Field(ge=0)
    pu2: float = Field(ge=0)
    pv2: float = Field(ge=0)

    @classmethod
    def from_fractions(cls, channel: GicChannel, lam1: float, lam2: float) -> "PowerSplit":
        """
        Build a split from private-power fractions, pv = lam * p and pu = p - pv.
        """
        for name, lam in (("lam1", lam1), ("lam2", lam2)):
            if not (math.isfinite(lam) and 0.0 <= lam <= 1.0):
                raise DomainError(f"{name} must lie in [0, 1], got {lam}")
        pv1 = lam1 * channel.p1
        pv2 = lam2 * channel.p2
        return cls(pu1=max(channel.p1 - pv1, 0.0), pv1=pv1, pu2=max(channel.p2 - pv2, 0.0), pv2=pv2)

    @classmethod
    def all_private(cls, channel: GicChannel) -> "PowerSplit":
        return cls.from_fractions(channel, 1.0, 1.0)

    @classmethod
    def all_common(cls, channel: GicChannel) -> "PowerSplit":
        return cls.from_fractions(channel, 0.0, 0.0)

    def check_against(self, channel: GicChannel) -> None:
        for user, pu, pv, p in ((1, self.pu1, self.pv1, channel.p1), (2, self.pu2, self.pv2, channel.p2)):
            if abs(pu + pv - p) > SPLIT_REL_TOL * p:
                raise DomainError(f"split of user {user} sums to {pu + pv}, channel power is {p}")

    def fractions(self, channel: GicChannel) -> tuple[float, float]:
        return self.pv1 / channel.p1, self.pv2 / channel.p2

    def swapped(self) -> "PowerSplit":
        return PowerSplit(pu1=self.pu2, pv1=self.pv2, pu2=self.pu1, pv2=self.pv1)

    def scaled(self, factor: float) -> "PowerSplit":
        return PowerSplit(
            pu1=self.pu1 * factor,
            pv1=self.pv1 * factor,
            pu2=self.pu2 * factor,
            pv2=self.pv2 * factor,
        )


class RatePair(_Frozen):
    r1: float = Field(ge=0)
    r2: float = Field(ge=0)


class RateTuple4(_Frozen):
    """Layer rates in bits per channel use."""

    ru1: float = Field(ge=0)
    ru2: float = Field(ge=0)
    rv1: float = Field(ge=0)
    rv2: float = Field(ge=0)

    @classmethod
    def from_point(cls, point, clip_tol: float = 1e-9) -> "RateTuple4":
        # LP vertices may sit a hair below zero
        vals = [0.0 if -clip_tol <= float(v) <= 0.0 else float(v) for v in point]
        return cls(ru1=vals[0], ru2=vals[1], rv1=vals[2], rv2=vals[3])

    def rate_pair(self) -> RatePair:
        return RatePair(r1=self.ru1 + self.rv1, r2=self.ru2 + self.rv2)
