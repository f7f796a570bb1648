"""Sampling-based falsifiers for incremental-stability certificates.

Three certificate notions are checked: incremental input-to-state stability
(IISS), incremental uniform bounded-input bounded-state stability (IUBIBSS),
and fiberwise practical stability. Each checker Sobol-samples its boxes,
evaluates the certificate conditions with a small numerical slack, and either
reports the worst violation (with a witness precise enough to re-evaluate) or
records that no counterexample was found.

A NO_COUNTEREXAMPLE verdict is evidence on the given boxes at the given sample
count; it is never a proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (
    Box,
    ComparisonFunction,
    ControlSystemDef,
    Decomposition,
    EvaluationError,
    InputError,
    VectorFieldDef,
)
from .numdiff import (
    batch_eval,
    batch_eval_pair,
    gradient_batch,
    jacobian_batch,
    pair_gradient_batch,
)
from .sampling import DEFAULT_SEED, sobol_points

NO_COUNTEREXAMPLE = "NO_COUNTEREXAMPLE"
COUNTEREXAMPLE = "COUNTEREXAMPLE"

EVIDENCE_NOTE = (
    "no counterexample found; sampling evidence on the recorded boxes only, "
    "not a proof"
)


def _slack(values) -> np.ndarray:
    """Numerical slack for sign/inequality checks: 1e-9 * (1 + |value|)."""
    return 1e-9 * (1.0 + np.abs(values))


@dataclass(frozen=True)
class ScalarFunctionDef:
    """A scalar function of one state ("state" arity) or of a state pair.

    ``fn`` maps (n,) -> float for state arity and ((n,), (n,)) -> float for
    pair arity; batched variants over (N, n) blocks are used when they work.
    ``grad`` is optional: the gradient for state arity, and a function
    returning the pair of block gradients for pair arity.
    """

    arity: str
    fn: Callable
    grad: Callable | None = None
    name: str = "V"

    def __post_init__(self):
        if self.arity not in ("state", "pair"):
            raise InputError(f"arity must be 'state' or 'pair', got {self.arity!r}")


@dataclass(frozen=True)
class IISSCertificate:
    """Candidate IISS Lyapunov data: sandwich bounds, decay rate, input gain."""

    V: ScalarFunctionDef
    alpha_lower: ComparisonFunction
    alpha_upper: ComparisonFunction
    alpha_decay: ComparisonFunction
    mu: ComparisonFunction

    def __post_init__(self):
        if self.V.arity != "pair":
            raise InputError("an IISS certificate needs a pair function V(x1, x2)")


@dataclass(frozen=True)
class IUBIBSSCertificate:
    """Candidate IUBIBSS Lyapunov data.

    The gain threshold used in the checks is mu(r) + mu_offset; the required
    inequality mu(r) + mu_offset >= r + xi forces a positive offset at r = 0,
    which the pure class-K-infinity families cannot supply on their own.
    """

    V: ScalarFunctionDef
    alpha_lower: ComparisonFunction
    alpha_upper: ComparisonFunction
    mu: ComparisonFunction
    xi: float
    mu_offset: float = 0.0

    def __post_init__(self):
        if self.V.arity != "pair":
            raise InputError("an IUBIBSS certificate needs a pair function V(x1, x2)")
        if not (self.xi > 0):
            raise InputError("threshold xi must be positive")
        if self.mu_offset < 0:
            raise InputError("mu_offset must be nonnegative")

    def gain(self, r):
        return self.mu.value(r) + self.mu_offset


@dataclass(frozen=True)
class FiberwiseCertificate:
    """Candidate fiberwise practical stability data for a decomposed field."""

    V: ScalarFunctionDef
    alpha_lower: ComparisonFunction
    alpha_upper: ComparisonFunction
    d_threshold: float = 0.0

    def __post_init__(self):
        if self.V.arity != "state":
            raise InputError("a fiberwise certificate needs a state function V(x)")
        if self.d_threshold < 0:
            raise InputError("d_threshold must be nonnegative")


@dataclass(frozen=True)
class Counterexample:
    """A re-evaluatable certificate violation."""

    condition: str
    magnitude: float
    sample_index: int
    point: dict
    observed: float
    bound: float


@dataclass(frozen=True)
class CertificateReport:
    verdict: str
    samples_checked: int
    boxes: dict
    counterexample: Counterexample | None = None
    condition_counts: dict = field(default_factory=dict)
    note: str = EVIDENCE_NOTE

    @property
    def passed(self) -> bool:
        return self.verdict == NO_COUNTEREXAMPLE


def _eval_V_pair(V: ScalarFunctionDef, X1, X2) -> np.ndarray:
    vals = batch_eval_pair(V.fn, X1, X2)
    if not np.all(np.isfinite(vals)):
        bad = int(np.argmax(~np.isfinite(vals)))
        raise EvaluationError(
            f"V produced a non-finite value at x1={X1[bad].tolist()}, "
            f"x2={X2[bad].tolist()}"
        )
    return vals


def _pair_grads(V: ScalarFunctionDef, X1, X2) -> tuple[np.ndarray, np.ndarray]:
    if V.grad is not None:
        try:
            g1, g2 = V.grad(X1, X2)
            g1 = np.asarray(g1, dtype=float)
            g2 = np.asarray(g2, dtype=float)
            if g1.shape == X1.shape and g2.shape == X2.shape:
                return g1, g2
        except Exception:
            pass
        pairs = [V.grad(x1, x2) for x1, x2 in zip(X1, X2)]
        g1 = np.stack([np.asarray(p[0], dtype=float) for p in pairs])
        g2 = np.stack([np.asarray(p[1], dtype=float) for p in pairs])
        return g1, g2
    return pair_gradient_batch(V.fn, X1, X2)


def _vdot_batch(
    V: ScalarFunctionDef, F: ControlSystemDef, X1, X2, U1, U2
) -> np.ndarray:
    g1, g2 = _pair_grads(V, X1, X2)
    F1 = _eval_control_batch(F, X1, U1)
    F2 = _eval_control_batch(F, X2, U2)
    out = np.einsum("ni,ni->n", g1, F1) + np.einsum("ni,ni->n", g2, F2)
    if not np.all(np.isfinite(out)):
        bad = int(np.argmax(~np.isfinite(out)))
        raise EvaluationError(
            f"non-finite derivative of V along F at x1={X1[bad].tolist()}"
        )
    return out


def _eval_control_batch(F: ControlSystemDef, X, U) -> np.ndarray:
    n = X.shape[0]
    try:
        out = np.asarray(F.rhs(X, U), dtype=float)
        if out.shape == (n, F.n):
            return out
    except Exception:
        pass
    return np.stack([np.asarray(F.rhs(x, u), dtype=float) for x, u in zip(X, U)])


def vdot(
    V: ScalarFunctionDef,
    F: ControlSystemDef,
    x1,
    x2,
    u1,
    u2,
) -> float:
    """Derivative of a pair function V along two copies of the dynamics.

    Returns grad_1 V . F(x1, u1) + grad_2 V . F(x2, u2), with analytic
    gradients when the certificate supplies them and central finite
    differences otherwise.
    """
    if V.arity != "pair":
        raise InputError("vdot needs a pair function V(x1, x2)")
    X1 = np.asarray(x1, dtype=float).reshape(1, -1)
    X2 = np.asarray(x2, dtype=float).reshape(1, -1)
    U1 = np.asarray(u1, dtype=float).reshape(1, -1)
    U2 = np.asarray(u2, dtype=float).reshape(1, -1)
    return float(_vdot_batch(V, F, X1, X2, U1, U2)[0])


def _worst(violations: np.ndarray, mask: np.ndarray) -> int | None:
    """Index of the largest violation within ``mask``, ties to the lowest index."""
    idx = np.flatnonzero(mask & (violations > 0))
    if idx.size == 0:
        return None
    order = np.argmax(violations[idx])
    return int(idx[order])


def _sample_pairs(state_box: Box, input_box: Box, n_samples: int, seed: int):
    joint = state_box.concat(state_box).concat(input_box).concat(input_box)
    P = sobol_points(joint, n_samples, seed)
    n, m = state_box.dim, input_box.dim
    X1 = P[:, :n]
    X2 = P[:, n : 2 * n]
    U1 = P[:, 2 * n : 2 * n + m]
    U2 = P[:, 2 * n + m :]
    return X1, X2, U1, U2


def check_iiss(
    F: ControlSystemDef,
    cert: IISSCertificate,
    state_box: Box,
    input_box: Box,
    n_samples: int = 4096,
    seed: int = DEFAULT_SEED,
) -> CertificateReport:
    """Falsify an IISS Lyapunov candidate on sampled state and input pairs.

    The sandwich condition alpha_lower(|x1-x2|) <= V <= alpha_upper(|x1-x2|)
    is checked at every sample; the decay condition Vdot <= -alpha(|x1-x2|)
    on the samples where |x1-x2| >= mu(|u1-u2|).
    """
    if state_box.dim != F.n or input_box.dim != F.m_in:
        raise InputError("box dimensions do not match the control system")
    X1, X2, U1, U2 = _sample_pairs(state_box, input_box, n_samples, seed)
    dx = np.linalg.norm(X1 - X2, axis=1)
    du = np.linalg.norm(U1 - U2, axis=1)
    V = _eval_V_pair(cert.V, X1, X2)

    lo = cert.alpha_lower.value(dx)
    hi = cert.alpha_upper.value(dx)
    sandwich_lo_viol = (lo - V) - _slack(V)
    sandwich_hi_viol = (V - hi) - _slack(V)

    decay_mask = dx >= cert.mu.value(du)
    vd = _vdot_batch(cert.V, F, X1, X2, U1, U2)
    decay_viol = np.where(decay_mask, (vd + cert.alpha_decay.value(dx)) - _slack(vd), -np.inf)

    boxes = {"state_box": state_box, "input_box": input_box}
    counts = {
        "sandwich_checked": int(n_samples),
        "decay_checked": int(decay_mask.sum()),
    }
    candidates = [
        ("lower_bound", sandwich_lo_viol, lo, V),
        ("upper_bound", sandwich_hi_viol, V, hi),
        ("decay", decay_viol, vd, -cert.alpha_decay.value(dx)),
    ]
    best = None
    for cond, viol, observed, bound in candidates:
        i = _worst(viol, np.ones(n_samples, bool))
        if i is not None and (best is None or viol[i] > best[1]):
            best = (cond, viol[i], i, float(observed[i]), float(bound[i]))
    if best is None:
        return CertificateReport(
            verdict=NO_COUNTEREXAMPLE,
            samples_checked=n_samples,
            boxes=boxes,
            condition_counts=counts,
        )
    cond, mag, i, observed, bound = best
    ce = Counterexample(
        condition=cond,
        magnitude=float(mag),
        sample_index=int(i),
        point={
            "x1": X1[i].copy(),
            "x2": X2[i].copy(),
            "u1": U1[i].copy(),
            "u2": U2[i].copy(),
        },
        observed=observed,
        bound=bound,
    )
    return CertificateReport(
        verdict=COUNTEREXAMPLE,
        samples_checked=n_samples,
        boxes=boxes,
        counterexample=ce,
        condition_counts=counts,
        note="counterexample found; violation exceeds the numerical slack",
    )


def check_iubibss(
    F: ControlSystemDef,
    cert: IUBIBSSCertificate,
    state_box: Box,
    input_box: Box,
    n_samples: int = 4096,
    seed: int = DEFAULT_SEED,
    gain_grid: int = 1001,
) -> CertificateReport:
    """Falsify an IUBIBSS Lyapunov candidate.

    Three conditions: the sandwich bounds on samples with |x1-x2| >= xi, the
    gain inequality mu(r) + mu_offset >= r + xi on a 1-d grid over
    [0, diameter(input_box)], and Vdot <= 0 on samples with
    |x1-x2| >= mu(|u1-u2|) + mu_offset.
    """
    if state_box.dim != F.n or input_box.dim != F.m_in:
        raise InputError("box dimensions do not match the control system")

    # condition 2 is deterministic in r; check it first on the grid
    r = np.linspace(0.0, input_box.diameter(), gain_grid)
    gain = cert.gain(r)
    gain_viol = (r + cert.xi - gain) - _slack(gain)

    X1, X2, U1, U2 = _sample_pairs(state_box, input_box, n_samples, seed)
    dx = np.linalg.norm(X1 - X2, axis=1)
    du = np.linalg.norm(U1 - U2, axis=1)
    V = _eval_V_pair(cert.V, X1, X2)

    sandwich_mask = dx >= cert.xi
    lo = cert.alpha_lower.value(dx)
    hi = cert.alpha_upper.value(dx)
    sandwich_lo_viol = np.where(sandwich_mask, (lo - V) - _slack(V), -np.inf)
    sandwich_hi_viol = np.where(sandwich_mask, (V - hi) - _slack(V), -np.inf)

    decay_mask = dx >= cert.gain(du)
    vd = _vdot_batch(cert.V, F, X1, X2, U1, U2)
    decay_viol = np.where(decay_mask, vd - _slack(vd), -np.inf)

    boxes = {"state_box": state_box, "input_box": input_box}
    counts = {
        "sandwich_checked": int(sandwich_mask.sum()),
        "gain_grid": int(gain_grid),
        "decay_checked": int(decay_mask.sum()),
    }

    i_gain = _worst(gain_viol, np.ones_like(r, bool))
    best = None
    if i_gain is not None:
        best = (
            "gain_threshold",
            gain_viol[i_gain],
            i_gain,
            {"r": np.array([r[i_gain]])},
            float(gain[i_gain]),
            float(r[i_gain] + cert.xi),
        )
    candidates = [
        ("lower_bound", sandwich_lo_viol, lo, V),
        ("upper_bound", sandwich_hi_viol, V, hi),
        ("decay", decay_viol, vd, np.zeros(n_samples)),
    ]
    for cond, viol, observed, bound in candidates:
        i = _worst(viol, np.ones(n_samples, bool))
        if i is not None and (best is None or viol[i] > best[1]):
            best = (
                cond,
                viol[i],
                i,
                {
                    "x1": X1[i].copy(),
                    "x2": X2[i].copy(),
                    "u1": U1[i].copy(),
                    "u2": U2[i].copy(),
                },
                float(observed[i]),
                float(bound[i]),
            )
    if best is None:
        return CertificateReport(
            verdict=NO_COUNTEREXAMPLE,
            samples_checked=n_samples,
            boxes=boxes,
            condition_counts=counts,
        )
    cond, mag, i, point, observed, bound = best
    ce = Counterexample(
        condition=cond,
        magnitude=float(mag),
        sample_index=int(i),
        point=point,
        observed=observed,
        bound=bound,
    )
    return CertificateReport(
        verdict=COUNTEREXAMPLE,
        samples_checked=n_samples,
        boxes=boxes,
        counterexample=ce,
        condition_counts=counts,
        note="counterexample found; violation exceeds the numerical slack",
    )


def check_fiberwise(
    f: VectorFieldDef,
    d: Decomposition,
    cert: FiberwiseCertificate,
    box: Box,
    n_samples: int = 4096,
    seed: int = DEFAULT_SEED,
) -> CertificateReport:
    """Falsify a fiberwise practical stability candidate on a box.

    Both conditions are restricted to samples whose fiber norm is at least
    ``cert.d_threshold``: the sandwich bounds in the fiber norm, and
    Vdot = grad V . f <= 0.
    """
    if box.dim != f.n or d.n != f.n:
        raise InputError("box and decomposition must match the field dimension")
    X = sobol_points(box, n_samples, seed)
    fiber = np.linalg.norm(X[:, d.m :], axis=1)
    active = fiber >= cert.d_threshold

    V = batch_eval(cert.V.fn, X)
    if not np.all(np.isfinite(V[active])):
        bad = int(np.argmax(active & ~np.isfinite(V)))
        raise EvaluationError(f"V produced a non-finite value at {X[bad].tolist()}")
    lo = cert.alpha_lower.value(fiber)
    hi = cert.alpha_upper.value(fiber)
    lo_viol = np.where(active, (lo - V) - _slack(V), -np.inf)
    hi_viol = np.where(active, (V - hi) - _slack(V), -np.inf)

    if cert.V.grad is not None:
        G = _state_grads(cert.V, X)
    else:
        G = gradient_batch(cert.V.fn, X)
    FX = batch_eval(f.rhs, X, f.n)
    vd = np.einsum("ni,ni->n", G, FX)
    decay_viol = np.where(active, vd - _slack(vd), -np.inf)

    boxes = {"box": box}
    counts = {"active_samples": int(active.sum())}
    best = None
    for cond, viol, observed, bound in [
        ("lower_bound", lo_viol, lo, V),
        ("upper_bound", hi_viol, V, hi),
        ("decay", decay_viol, vd, np.zeros(n_samples)),
    ]:
        i = _worst(viol, active)
        if i is not None and (best is None or viol[i] > best[1]):
            best = (cond, viol[i], i, observed, bound)
    if best is None:
        return CertificateReport(
            verdict=NO_COUNTEREXAMPLE,
            samples_checked=n_samples,
            boxes=boxes,
            condition_counts=counts,
        )
    cond, mag, i, observed, bound = best
    ce = Counterexample(
        condition=cond,
        magnitude=float(mag),
        sample_index=int(i),
        point={"x": X[i].copy()},
        observed=float(observed[i]),
        bound=float(bound[i]),
    )
    return CertificateReport(
        verdict=COUNTEREXAMPLE,
        samples_checked=n_samples,
        boxes=boxes,
        counterexample=ce,
        condition_counts=counts,
        note="counterexample found; violation exceeds the numerical slack",
    )


def _state_grads(V: ScalarFunctionDef, X: np.ndarray) -> np.ndarray:
    try:
        G = np.asarray(V.grad(X), dtype=float)
        if G.shape == X.shape:
            return G
    except Exception:
        pass
    return np.stack([np.asarray(V.grad(x), dtype=float) for x in X])


def estimate_lipschitz(
    g: Callable,
    box: Box,
    n_samples: int = 1024,
    seed: int = DEFAULT_SEED,
    out_dim: int | None = None,
) -> float:
    """Sampled lower estimate of a Lipschitz constant on a box.

    Takes the maximum operator 2-norm of central-difference Jacobians at
    Sobol samples. Callers that need an upper bound should inflate the result
    by a safety factor (the bundled certificates use 1.2).
    """
    X = sobol_points(box, n_samples, seed)
    if out_dim is None:
        probe = np.atleast_1d(np.asarray(g(X[0]), dtype=float))
        out_dim = probe.shape[0]
    J = jacobian_batch(g, X, out_dim)
    if not np.all(np.isfinite(J)):
        bad = int(np.argmax((~np.isfinite(J.reshape(n_samples, -1))).any(axis=1)))
        raise EvaluationError(f"non-finite derivative at sample {X[bad].tolist()}")
    sv = np.linalg.svd(J, compute_uv=False)
    return float(sv[:, 0].max())
