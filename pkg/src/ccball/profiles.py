"""Degeneracy profiles f and g.

A profile is a nondecreasing function of the first coordinate that
controls how fast the metric degenerates in the y or z direction.  Two
closed families are supported so that values, derivatives and logarithmic
derivatives are all available in closed form:

* ``PowerLaw(k)``      x -> x**k
* ``ExpInverse(s, p)`` x -> exp(-s / x**p), extended by 0 at x = 0

Profiles are written on the command line as ``"power:k=2"`` or
``"exp-inverse:sigma=1,p=2"``; an optional ``max=<float>`` entry sets the
largest abscissa the profile may be evaluated at.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError

DEFAULT_DOMAIN_MAX = 10.0

# backend codes understood by the compiled kernels
KIND_POWER = 0
KIND_EXP_INVERSE = 1


@dataclass(frozen=True)
class PowerLaw:
    k: float

    def __post_init__(self):
        if not self.k > 0:
            raise DomainError(f"PowerLaw exponent must be positive, got {self.k}")


@dataclass(frozen=True)
class ExpInverse:
    sigma: float
    p: float

    def __post_init__(self):
        if not (self.sigma > 0 and self.p > 0):
            raise DomainError(
                f"ExpInverse needs sigma > 0 and p > 0, got sigma={self.sigma}, p={self.p}"
            )


Family = Union[PowerLaw, ExpInverse]


@dataclass(frozen=True)
class Profile:
    """A degeneracy profile: a closed-form family plus its evaluation range."""

    family: Family
    domain_max: float = DEFAULT_DOMAIN_MAX

    def __post_init__(self):
        if not self.domain_max > 0:
            raise DomainError(f"domain_max must be positive, got {self.domain_max}")

    # -- construction -------------------------------------------------

    @classmethod
    def power(cls, k, domain_max=DEFAULT_DOMAIN_MAX):
        return cls(PowerLaw(float(k)), float(domain_max))

    @classmethod
    def exp_inverse(cls, sigma=1.0, p=2.0, domain_max=DEFAULT_DOMAIN_MAX):
        return cls(ExpInverse(float(sigma), float(p)), float(domain_max))

    @classmethod
    def parse(cls, spec: str) -> "Profile":
        """Build a profile from ``"power:k=2"`` / ``"exp-inverse:sigma=1,p=2"``."""
        name, _, body = spec.strip().partition(":")
        name = name.strip().lower().replace("_", "-")
        params = {}
        if body.strip():
            for item in body.split(","):
                key, sep, val = item.partition("=")
                if not sep:
                    raise DomainError(f"malformed profile parameter {item!r} in {spec!r}")
                try:
                    params[key.strip().lower()] = float(val)
                except ValueError:
                    raise DomainError(f"non-numeric value {val!r} in profile {spec!r}") from None
        domain_max = params.pop("max", DEFAULT_DOMAIN_MAX)
        if name in ("power", "power-law", "powerlaw"):
            allowed = {"k"}
            if "k" not in params:
                raise DomainError(f"power profile needs k: {spec!r}")
            family = PowerLaw(params["k"])
        elif name in ("exp-inverse", "expinverse", "exp"):
            allowed = {"sigma", "p"}
            family = ExpInverse(params.get("sigma", 1.0), params.get("p", 2.0))
        else:
            raise DomainError(f"unknown profile family {name!r}")
        extra = set(params) - allowed
        if extra:
            raise DomainError(f"unexpected parameters {sorted(extra)} for {name!r}")
        return cls(family, domain_max)

    def spec(self) -> str:
        """Inverse of :meth:`parse`."""
        fam = self.family
        if isinstance(fam, PowerLaw):
            body = f"k={fam.k:g}"
            head = "power"
        else:
            body = f"sigma={fam.sigma:g},p={fam.p:g}"
            head = "exp-inverse"
        if self.domain_max != DEFAULT_DOMAIN_MAX:
            body += f",max={self.domain_max:g}"
        return f"{head}:{body}"

    def __str__(self):
        return self.spec()

    @property
    def code(self):
        """``(kind, a, b)`` triple consumed by the numerical kernels."""
        fam = self.family
        if isinstance(fam, PowerLaw):
            return (KIND_POWER, fam.k, 0.0)
        return (KIND_EXP_INVERSE, fam.sigma, fam.p)

    # -- evaluation ---------------------------------------------------

    def _check(self, x, allow_zero):
        arr = np.asarray(x, dtype=float)
        lo_ok = arr >= 0 if allow_zero else arr > 0
        if not np.all(lo_ok & (arr <= self.domain_max)):
            bound = "[0, " if allow_zero else "(0, "
            raise DomainError(
                f"x={x!r} outside profile domain {bound}{self.domain_max}]"
            )
        return arr

    def value(self, x):
        """f(x) for 0 <= x <= domain_max."""
        arr = self._check(x, allow_zero=True)
        fam = self.family
        if isinstance(fam, PowerLaw):
            out = np.power(arr, fam.k)
        else:
            with np.errstate(divide="ignore", over="ignore"):
                out = np.where(arr > 0, np.exp(-fam.sigma / np.power(arr, fam.p)), 0.0)
        return out if out.ndim else float(out)

    def deriv(self, x):
        """f'(x) for 0 < x <= domain_max."""
        arr = self._check(x, allow_zero=False)
        fam = self.family
        if isinstance(fam, PowerLaw):
            out = fam.k * np.power(arr, fam.k - 1.0)
        else:
            xp = np.power(arr, fam.p)
            out = fam.sigma * fam.p / (xp * arr) * np.exp(-fam.sigma / xp)
        return out if out.ndim else float(out)

    def log_deriv_mag(self, x):
        """|f'(x)| / f(x), the magnitude of the logarithmic derivative."""
        arr = self._check(x, allow_zero=False)
        fam = self.family
        if isinstance(fam, PowerLaw):
            out = fam.k / arr
        else:
            out = fam.sigma * fam.p / np.power(arr, fam.p + 1.0)
        return out if out.ndim else float(out)


def value(p: Profile, x):
    return p.value(x)


def deriv(p: Profile, x):
    return p.deriv(x)


def log_deriv_mag(p: Profile, x):
    return p.log_deriv_mag(x)


@dataclass(frozen=True)
class ProfilePair:
    """The two profiles (f, g) of the metric dx^2 + dy^2/f^2 + dz^2/g^2."""

    f: Profile
    g: Profile

    @classmethod
    def parse(cls, f_spec: str, g_spec: str) -> "ProfilePair":
        return cls(Profile.parse(f_spec), Profile.parse(g_spec))

    @property
    def domain_max(self) -> float:
        return min(self.f.domain_max, self.g.domain_max)

    @property
    def codes(self):
        return self.f.code, self.g.code
