"""Fixed-point solver for the optimal measurement at a fixed inconclusive rate.

The success rate sum_j p_j Tr[Pi_j rho_j] is maximized over (N+1)-outcome
POVMs subject to completeness and to Tr[sigma Pi_0] = target, where outcome
0 is the inconclusive one and sigma is the average state. Stationarity of
the Lagrangian with an operator multiplier ``lam`` (completeness) and a
scalar multiplier ``a`` (inconclusive-rate constraint) gives extremal
equations that can be symmetrized into a positivity-preserving map:

    Pi_j  <-  p_j^2 lam^{-1} rho_j Pi_j rho_j lam^{-1}     (j = 1..N)
    Pi_0  <-  a^2   lam^{-1} sigma Pi_0 sigma lam^{-1}

with lam = [sum_j p_j^2 rho_j Pi_j rho_j + a^2 sigma Pi_0 sigma]^{1/2}
chosen so the map preserves completeness, and ``a`` tuned every sweep by
interval halving so the updated POVM keeps the requested inconclusive
rate. Iterating this map from a maximally uninformative start converges
(empirically exponentially fast) to a stationary POVM; global optimality
is checked separately by the certificate module.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .ensemble import StateEnsemble, average_state
from .hermitian import DEFAULT_PINV_CUTOFF, frozen, hermitian, sqrt_psd, trace_product

logger = logging.getLogger(__name__)

# Element-positivity floor and relative closure tolerance for POVMs; looser
# than the state-level floors because elements are products of iterates.
POVM_PSD_FLOOR = -1e-9
POVM_CLOSURE_RTOL = 1e-9
# Inconclusive rate this close to 1 leaves no conclusive outcomes to renormalize.
RELATIVE_RATE_EPS = 1e-12

_BRACKET_CAP = 2.0**60


class InfeasibleTargetError(RuntimeError):
    """The requested inconclusive rate is beyond what the update can reach."""

    def __init__(self, target: float, supremum: float):
        self.target = target
        self.supremum = supremum
        super().__init__(
            f"inconclusive rate {target:.17g} unreachable; "
            f"multiplier sweep saturated at {supremum:.17g}"
        )


class RelativeRateUndefinedError(ValueError):
    """The conclusive fraction vanished, so the renormalized rate is undefined."""


@dataclass(frozen=True)
class Povm:
    """N+1 measurement elements; index 0 is the inconclusive outcome.

    Invariants (maintained by the solver, checked by :func:`povm_violations`):
    every element PSD within the floor, and the elements sum to the identity
    within round-off.
    """

    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        elems = tuple(np.asarray(m, dtype=np.complex128) for m in self.elements)
        if len(elems) < 2:
            raise ValueError("a POVM needs at least two elements")
        dim = elems[0].shape[0] if elems[0].ndim == 2 else -1
        for k, m in enumerate(elems):
            if m.ndim != 2 or m.shape != (dim, dim):
                raise ValueError(f"element {k} has shape {m.shape}, expected ({dim}, {dim})")
        object.__setattr__(self, "elements", tuple(frozen(m) for m in elems))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @property
    def n_conclusive(self) -> int:
        return len(self.elements) - 1

    @property
    def inconclusive(self) -> np.ndarray:
        return self.elements[0]

    @property
    def conclusive(self) -> tuple[np.ndarray, ...]:
        return self.elements[1:]


def povm_violations(povm: Povm) -> list:
    """Report PSD and completeness violations of a candidate POVM."""
    from .ensemble import Violation  # local import keeps module deps acyclic

    report = []
    total = np.zeros((povm.dim, povm.dim), dtype=np.complex128)
    for k, m in enumerate(povm.elements):
        asym = float(np.max(np.abs(m - m.conj().T)))
        if asym > 1e-9:
            report.append(Violation(
                f"element {k} is not Hermitian (asymmetry {asym:.3e})",
                residual=asym, index=k))
            continue
        wmin = float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])
        if wmin < POVM_PSD_FLOOR:
            report.append(Violation(
                f"element {k} has negative eigenvalue {wmin:.3e}",
                residual=wmin, index=k))
        total = total + m
    closure = float(np.linalg.norm(total - np.eye(povm.dim), "fro"))
    if closure > POVM_CLOSURE_RTOL * povm.dim:
        report.append(Violation(
            f"elements sum to identity only within {closure:.3e}",
            residual=closure))
    return report


@dataclass(frozen=True)
class SolverConfig:
    """Iteration and root-finding knobs; all tolerances strictly positive."""

    max_iterations: int = 500
    povm_tolerance: float = 1e-12          # max Frobenius change per sweep
    bisection_tolerance: float = 1e-14     # residual on the inconclusive rate
    bisection_max_steps: int = 200
    pinv_cutoff: float = DEFAULT_PINV_CUTOFF

    def __post_init__(self):
        if self.max_iterations < 1 or self.bisection_max_steps < 1:
            raise ValueError("iteration counts must be positive")
        for name in ("povm_tolerance", "bisection_tolerance", "pinv_cutoff"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class SuccessMetrics:
    p_s: float
    p_i: float
    p_rs: float

    def __iter__(self):
        return iter((self.p_s, self.p_i, self.p_rs))


@dataclass(frozen=True)
class SolveResult:
    """Converged POVM with its metrics, multipliers, and diagnostics.

    ``a`` is None when the solve ran at zero inconclusive rate, where the
    scalar multiplier plays no role.
    """

    povm: Povm
    p_s: float
    p_i: float
    p_rs: float
    lam: np.ndarray
    a: float | None
    iterations: int
    final_change: float
    converged: bool
    change_history: tuple[float, ...] = field(repr=False, default=())


# ---------------------------------------------------------------------------
# sweep internals

@dataclass(frozen=True)
class _SweepTerms:
    """Operators fixed during one sweep's multiplier search."""

    sigma: np.ndarray
    sandwiches: tuple[np.ndarray, ...]   # p_j^2 rho_j Pi_j rho_j
    conclusive_sum: np.ndarray           # sum of the sandwiches
    inconclusive: np.ndarray             # sigma Pi_0 sigma


def _herm(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2.0


def _sweep_terms(e: StateEnsemble, povm: Povm) -> _SweepTerms:
    sig = average_state(e)
    sandwiches = []
    for p, rho, pi in zip(e.priors, e.states, povm.conclusive):
        rho = _herm(rho)
        sandwiches.append(_herm(p * p * rho @ pi @ rho))
    ksum = _herm(sum(sandwiches))
    m0 = _herm(sig @ povm.inconclusive @ sig)
    return _SweepTerms(sig, tuple(sandwiches), ksum, m0)


def _sqrt_and_pinv(psd: np.ndarray, cutoff: float) -> tuple[np.ndarray, np.ndarray]:
    """PSD square root of ``psd`` and the pseudoinverse of that root."""
    w, v = np.linalg.eigh(psd)
    s = np.sqrt(np.clip(w, 0.0, None))
    smax = s[-1]
    if smax == 0.0:
        z = np.zeros_like(psd)
        return z, z
    sinv = np.where(s > cutoff * smax, 1.0 / np.where(s > 0, s, 1.0), 0.0)
    root = _herm((v * s) @ v.conj().T)
    rootinv = _herm((v * sinv) @ v.conj().T)
    return root, rootinv


def _predicted_rate(terms: _SweepTerms, a: float, cutoff: float) -> float:
    """Inconclusive rate the sweep would produce with multiplier ``a``."""
    lam2 = terms.conclusive_sum + (a * a) * terms.inconclusive
    w, v = np.linalg.eigh(lam2)
    s = np.sqrt(np.clip(w, 0.0, None))
    smax = s[-1]
    if smax == 0.0:
        return 0.0
    sinv = np.where(s > cutoff * smax, 1.0 / np.where(s > 0, s, 1.0), 0.0)
    mt = v.conj().T @ terms.inconclusive @ v
    st = v.conj().T @ terms.sigma @ v
    val = np.einsum("ij,j,ji,i->", st, sinv, mt, sinv)
    return float((a * a) * val.real)


def _solve_multiplier(
    terms: _SweepTerms, target_pi: float, cfg: SolverConfig
) -> tuple[float, np.ndarray, np.ndarray]:
    """Interval-halving search for the multiplier matching the target rate.

    The rate is 0 at a = 0 and grows (empirically monotonically, checked
    and logged) toward a saturation value as a -> inf; the bracket starts
    at [0, 1] and doubles its upper end until it straddles the target.
    """
    def rate(a: float) -> float:
        return _predicted_rate(terms, a, cfg.pinv_cutoff)

    lo, rate_lo = 0.0, 0.0
    hi = 1.0
    rate_hi = rate(hi)
    while rate_hi < target_pi:
        if hi >= _BRACKET_CAP:
            raise InfeasibleTargetError(target=target_pi, supremum=rate_hi)
        if rate_hi < rate_lo - 1e-12:
            logger.warning(
                "inconclusive rate is not monotone in the multiplier "
                "(%.17g at a=%.3g vs %.17g at a=%.3g); bisection may settle "
                "on a non-principal root", rate_hi, hi, rate_lo, lo)
        lo, rate_lo = hi, rate_hi
        hi *= 2.0
        rate_hi = rate(hi)

    best_a, best_res = hi, abs(rate_hi - target_pi)
    if abs(rate_lo - target_pi) < best_res:
        best_a, best_res = lo, abs(rate_lo - target_pi)
    for _ in range(cfg.bisection_max_steps):
        if best_res <= cfg.bisection_tolerance:
            break
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:  # interval exhausted at float resolution
            break
        rate_mid = rate(mid)
        if abs(rate_mid - target_pi) < best_res:
            best_a, best_res = mid, abs(rate_mid - target_pi)
        if rate_mid < target_pi:
            lo = mid
        else:
            hi = mid
    if best_res > cfg.bisection_tolerance:
        logger.debug(
            "multiplier bisection stopped at residual %.3e (tolerance %.3e)",
            best_res, cfg.bisection_tolerance)

    lam2 = terms.conclusive_sum + best_a * best_a * terms.inconclusive
    lam, laminv = _sqrt_and_pinv(lam2, cfg.pinv_cutoff)
    return best_a, lam, laminv


# ---------------------------------------------------------------------------
# public operations

def initial_povm(e: StateEnsemble, target_pi: float) -> Povm:
    """Maximally uninformative start satisfying completeness and the target.

    Pi_0 = target * identity and the conclusive elements split the rest
    evenly, so Tr[sigma Pi_0] equals the target exactly.
    """
    if not 0.0 <= target_pi < 1.0:
        raise ValueError(f"target inconclusive rate must lie in [0, 1), got {target_pi}")
    eye = np.eye(e.dim, dtype=np.complex128)
    share = (1.0 - target_pi) / e.n_states
    elements = (target_pi * eye,) + tuple(share * eye for _ in range(e.n_states))
    return Povm(elements)


def multiplier_operator(e: StateEnsemble, povm: Povm, a: float) -> np.ndarray:
    """Operator multiplier for a given scalar multiplier: the PSD square root
    of sum_j p_j^2 rho_j Pi_j rho_j + a^2 sigma Pi_0 sigma."""
    if a < 0:
        raise ValueError("the scalar multiplier must be nonnegative")
    terms = _sweep_terms(e, povm)
    return sqrt_psd(terms.conclusive_sum + (a * a) * terms.inconclusive)


def predicted_inconclusive_rate(
    e: StateEnsemble, povm: Povm, a: float, cfg: SolverConfig | None = None
) -> float:
    """Inconclusive rate the next sweep would produce with multiplier ``a``."""
    if a < 0:
        raise ValueError("the scalar multiplier must be nonnegative")
    cfg = cfg or SolverConfig()
    return _predicted_rate(_sweep_terms(e, povm), a, cfg.pinv_cutoff)


def solve_multiplier(
    e: StateEnsemble, povm: Povm, target_pi: float, cfg: SolverConfig | None = None
) -> tuple[float, np.ndarray]:
    """Scalar multiplier whose sweep reproduces the target inconclusive rate,
    together with the matching operator multiplier."""
    if not 0.0 < target_pi < 1.0:
        raise ValueError(f"target inconclusive rate must lie in (0, 1), got {target_pi}")
    cfg = cfg or SolverConfig()
    a, lam, _ = _solve_multiplier(_sweep_terms(e, povm), target_pi, cfg)
    return a, frozen(lam)


def iterate_once(
    e: StateEnsemble, povm: Povm, target_pi: float, cfg: SolverConfig | None = None
) -> tuple[Povm, np.ndarray, float | None]:
    """One symmetrized sweep; returns the new POVM and the multipliers used.

    Every new element is a congruence transform of a PSD operator, hence
    PSD. Completeness holds on the support of the operator multiplier;
    whatever identity weight falls outside that support carries zero
    probability for every state and is folded into the inconclusive
    element, restoring exact completeness. At zero target the inconclusive
    element is exactly that fold-in (zero for a full-support multiplier).
    """
    if not 0.0 <= target_pi < 1.0:
        raise ValueError(f"target inconclusive rate must lie in [0, 1), got {target_pi}")
    cfg = cfg or SolverConfig()
    terms = _sweep_terms(e, povm)

    a: float | None
    if target_pi == 0.0:
        lam, laminv = _sqrt_and_pinv(terms.conclusive_sum, cfg.pinv_cutoff)
        a = None
        new_inconclusive = np.zeros((e.dim, e.dim), dtype=np.complex128)
    else:
        a, lam, laminv = _solve_multiplier(terms, target_pi, cfg)
        new_inconclusive = (a * a) * (laminv @ terms.inconclusive @ laminv)

    new_conclusive = [_herm(laminv @ s @ laminv) for s in terms.sandwiches]
    deficit = np.eye(e.dim) - new_inconclusive - sum(new_conclusive)
    new_inconclusive = _herm(new_inconclusive + deficit)
    new = Povm((new_inconclusive, *new_conclusive))
    return new, frozen(lam), a


def success_metrics(e: StateEnsemble, povm: Povm) -> SuccessMetrics:
    """Success rate, inconclusive rate, and the renormalized success rate.

    p_s = sum_j p_j Tr[Pi_j rho_j]; p_i = Tr[sigma Pi_0];
    p_rs = p_s / (1 - p_i), undefined when the inconclusive rate saturates.
    """
    if povm.n_conclusive != e.n_states:
        raise ValueError(
            f"POVM has {povm.n_conclusive} conclusive elements for {e.n_states} states")
    p_s = sum(
        p * trace_product(rho, pi)
        for p, rho, pi in zip(e.priors, e.states, povm.conclusive)
    )
    p_i = trace_product(average_state(e), povm.inconclusive)
    if p_i >= 1.0 - RELATIVE_RATE_EPS:
        raise RelativeRateUndefinedError(
            f"inconclusive rate {p_i:.17g} leaves no conclusive fraction")
    return SuccessMetrics(float(p_s), float(p_i), float(p_s / (1.0 - p_i)))


def solve(
    e: StateEnsemble, target_pi: float, cfg: SolverConfig | None = None
) -> SolveResult:
    """Iterate the sweep to a fixed point at the requested inconclusive rate.

    Stops when the largest Frobenius-norm change across elements drops to
    the configured tolerance, or at the iteration cap (reported through
    ``converged``, not an exception). The returned multipliers are the ones
    used in the final sweep.
    """
    cfg = cfg or SolverConfig()
    e.require_valid()
    if not 0.0 <= target_pi < 1.0:
        raise ValueError(f"target inconclusive rate must lie in [0, 1), got {target_pi}")
    if target_pi >= 1.0 - RELATIVE_RATE_EPS:
        raise ValueError(
            f"target inconclusive rate {target_pi:.17g} leaves no conclusive "
            f"fraction to renormalize")

    povm = initial_povm(e, target_pi)
    history: list[float] = []
    lam = np.zeros((e.dim, e.dim))
    a: float | None = None
    converged = False
    for sweep in range(1, cfg.max_iterations + 1):
        new, lam, a = iterate_once(e, povm, target_pi, cfg)
        change = max(
            float(np.linalg.norm(n - o, "fro"))
            for n, o in zip(new.elements, povm.elements)
        )
        history.append(change)
        povm = new
        logger.debug("sweep %d: change %.3e, a=%s", sweep, change,
                     "n/a" if a is None else f"{a:.12g}")
        if change <= cfg.povm_tolerance:
            converged = True
            break
    if not converged:
        logger.warning(
            "no fixed point within %d sweeps (last change %.3e)",
            cfg.max_iterations, history[-1])

    metrics = success_metrics(e, povm)
    return SolveResult(
        povm=povm,
        p_s=metrics.p_s,
        p_i=metrics.p_i,
        p_rs=metrics.p_rs,
        lam=lam,
        a=a,
        iterations=len(history),
        final_change=history[-1],
        converged=converged,
        change_history=tuple(history),
    )
