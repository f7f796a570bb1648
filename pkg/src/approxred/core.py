"""Core domain types: vector fields, control systems, state decompositions,
trajectories, comparison functions, and axis-aligned boxes.

All types are immutable after construction and all operations are pure, so
instances can be shared freely between threads or processes.

Conventions fixed here and relied on everywhere else:

* States are 1-d float arrays; batched evaluation uses arrays of shape
  ``(N, n)`` with the state on the last axis.
* A decomposition splits the state as ``x = (y, z)`` with the *retained*
  coordinates ``y`` first (``m`` of them) and the *fiber* coordinates ``z``
  last (``k`` of them).
* All distances are Euclidean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class InputError(ValueError):
    """Invalid argument: wrong dimension, out-of-domain value, bad name."""


class ConstraintError(ValueError):
    """A declared parameter constraint is violated."""


class UnknownSystemError(KeyError):
    """Requested system name is not registered."""


class NumericalError(RuntimeError):
    """Base class for failures of numerical procedures."""


class DivergenceError(NumericalError):
    """State became non-finite during integration.

    ``t_last`` is the last time at which the state was still finite.
    """

    def __init__(self, message: str, t_last: float):
        super().__init__(message)
        self.t_last = float(t_last)


class StepBudgetError(NumericalError):
    """Integration exceeded its step budget before reaching the horizon."""

    def __init__(self, message: str, t_last: float):
        super().__init__(message)
        self.t_last = float(t_last)


class EvaluationError(InputError, NumericalError):
    """A function evaluation produced a non-finite value.

    Doubles as an input error (the supplied function misbehaves) and a
    numerical failure (the CLI reports it with the numerical exit code).
    """


def as_state(x, n: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a 1-d float64 array, optionally checking its length."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise InputError(f"expected a 1-d state vector, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise InputError(f"expected a state of dimension {n}, got {arr.shape[0]}")
    return arr


@dataclass(frozen=True)
class VectorFieldDef:
    """An autonomous vector field on R^n.

    ``rhs`` maps a state of shape ``(n,)`` to a velocity of shape ``(n,)``.
    Implementations are encouraged (but not required) to also accept batched
    input of shape ``(N, n)`` and return ``(N, n)``; the numeric helpers probe
    for this and fall back to a loop.
    """

    n: int
    rhs: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)
    name: str = "field"

    def __post_init__(self):
        if self.n < 1:
            raise InputError("state dimension must be >= 1")

    def __call__(self, x) -> np.ndarray:
        x = as_state(x, self.n)
        out = np.asarray(self.rhs(x), dtype=float)
        if out.shape != (self.n,):
            raise InputError(
                f"rhs of '{self.name}' returned shape {out.shape}, expected ({self.n},)"
            )
        return out


@dataclass(frozen=True)
class ControlSystemDef:
    """A controlled vector field on R^n with inputs in R^m_in.

    ``rhs`` maps ``(state, input)`` to a velocity; same batching convention
    as :class:`VectorFieldDef`, broadcasting over leading axes.
    """

    n: int
    m_in: int
    rhs: Callable[[np.ndarray, np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)
    name: str = "control_system"

    def __post_init__(self):
        if self.n < 1 or self.m_in < 1:
            raise InputError("state and input dimensions must be >= 1")

    def __call__(self, x, u) -> np.ndarray:
        x = as_state(x, self.n)
        u = as_state(u, self.m_in)
        out = np.asarray(self.rhs(x, u), dtype=float)
        if out.shape != (self.n,):
            raise InputError(
                f"rhs of '{self.name}' returned shape {out.shape}, expected ({self.n},)"
            )
        return out


@dataclass(frozen=True)
class Decomposition:
    """A split R^n = R^m x R^k with the retained block leading."""

    n: int
    m: int
    k: int

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise InputError("both blocks of a decomposition must be nonempty")
        if self.m + self.k != self.n:
            raise InputError(f"decomposition {self.m}+{self.k} != {self.n}")

    @classmethod
    def retain(cls, n: int, m: int) -> "Decomposition":
        return cls(n=n, m=m, k=n - m)


def project(x, d: Decomposition, which: str) -> np.ndarray:
    """Canonical projection of a state onto the retained or fiber block.

    ``which`` is ``"m"`` (first ``d.m`` coordinates) or ``"k"`` (last ``d.k``).
    """
    x = as_state(x, d.n)
    if which == "m":
        return x[: d.m].copy()
    if which == "k":
        return x[d.m :].copy()
    raise InputError(f"which must be 'm' or 'k', got {which!r}")


@dataclass(frozen=True)
class Trajectory:
    """A sampled solution curve: strictly increasing times, one state per time.

    Integrator output always starts at t=0 with states[0] equal to the initial
    condition. ``derivs`` optionally stores the vector field evaluated at each
    node, enabling cubic Hermite resampling.
    """

    times: np.ndarray
    states: np.ndarray
    dim: int
    derivs: np.ndarray | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        if times.ndim != 1 or times.shape[0] < 2:
            raise InputError("a trajectory needs at least two time points")
        if not np.all(np.diff(times) > 0):
            raise InputError("trajectory times must be strictly increasing")
        if times[0] != 0.0:
            raise InputError("trajectory times must start at 0")
        if states.shape != (times.shape[0], self.dim):
            raise InputError(
                f"states shape {states.shape} inconsistent with "
                f"{times.shape[0]} times and dimension {self.dim}"
            )
        if self.derivs is not None:
            derivs = np.asarray(self.derivs, dtype=float)
            object.__setattr__(self, "derivs", derivs)
            if derivs.shape != states.shape:
                raise InputError("derivs must have the same shape as states")

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def endpoint(self) -> np.ndarray:
        return self.states[-1].copy()


_COMPARISON_KINDS = ("linear", "power", "affine_power")


@dataclass(frozen=True)
class ComparisonFunction:
    """A parametric class-K-infinity function.

    Three families are supported: ``linear`` a*r, ``power`` a*r**p and
    ``affine_power`` a*r**p + b*r. Positive leading coefficients make all of
    them strictly increasing, zero at zero and unbounded, so class membership
    holds by construction.
    """

    kind: str
    a: float
    p: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        if self.kind not in _COMPARISON_KINDS:
            raise InputError(f"unknown comparison kind {self.kind!r}")
        if not (self.a > 0):
            raise InputError("coefficient a must be positive")
        if not (self.p > 0):
            raise InputError("exponent p must be positive")
        if self.b < 0:
            raise InputError("coefficient b must be nonnegative")

    @classmethod
    def linear(cls, a: float) -> "ComparisonFunction":
        return cls(kind="linear", a=a)

    @classmethod
    def power(cls, a: float, p: float) -> "ComparisonFunction":
        return cls(kind="power", a=a, p=p)

    @classmethod
    def affine_power(cls, a: float, p: float, b: float) -> "ComparisonFunction":
        return cls(kind="affine_power", a=a, p=p, b=b)

    def value(self, r):
        """Evaluate at a nonnegative scalar or array of radii."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise InputError("comparison functions are defined for r >= 0 only")
        if self.kind == "linear":
            out = self.a * r
        elif self.kind == "power":
            out = self.a * r**self.p
        else:
            out = self.a * r**self.p + self.b * r
        return float(out) if out.ndim == 0 else out


def eval_comparison(f: ComparisonFunction, r: float) -> float:
    """Evaluate a comparison function at a single nonnegative radius."""
    if r < 0:
        raise InputError(f"comparison functions require r >= 0, got {r}")
    return float(f.value(r))


@dataclass(frozen=True)
class KLFunction:
    """A class-KL function of the separable form beta(r, s) = gamma(r)*exp(-lam*s)."""

    gamma: ComparisonFunction
    lam: float

    def __post_init__(self):
        if not (self.lam > 0):
            raise InputError("decay rate lam must be positive")

    def value(self, r, s):
        r = np.asarray(r, dtype=float)
        s = np.asarray(s, dtype=float)
        if np.any(s < 0):
            raise InputError("KL functions are defined for s >= 0 only")
        out = self.gamma.value(r) * np.exp(-self.lam * s)
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Box:
    """A nonempty axis-aligned box, used as compact set and sampling region."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise InputError("box bounds must be 1-d arrays of equal length")
        if not np.all(lower <= upper):
            raise InputError("box lower bounds must not exceed upper bounds")

    @classmethod
    def from_pairs(cls, pairs) -> "Box":
        pairs = [(float(lo), float(hi)) for lo, hi in pairs]
        return cls(np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    def diameter(self) -> float:
        """Euclidean diameter (length of the main diagonal)."""
        return float(np.linalg.norm(self.widths))

    def contains(self, x) -> bool:
        x = as_state(x, self.dim)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def project(self, d: Decomposition, which: str) -> "Box":
        """The image of the box under a canonical projection."""
        if self.dim != d.n:
            raise InputError("box dimension does not match the decomposition")
        if which == "m":
            return Box(self.lower[: d.m].copy(), self.upper[: d.m].copy())
        if which == "k":
            return Box(self.lower[d.m :].copy(), self.upper[d.m :].copy())
        raise InputError(f"which must be 'm' or 'k', got {which!r}")

    def concat(self, other: "Box") -> "Box":
        return Box(
            np.concatenate([self.lower, other.lower]),
            np.concatenate([self.upper, other.upper]),
        )
