"""Convergence studies, order fits, light-cone probes, depth and truncation
studies for product-formula schedules on small spin chains.

The standard fixture is a transverse-field Ising chain (J = 1, g = 1.05,
open boundary) written as nearest-neighbour edge terms: each edge carries
the ZZ coupling plus the transverse field of its endpoints split evenly
between the edges touching them.  That makes the even/odd decomposition a
pair of commuting layers while keeping the assembled Hamiltonian equal to
sum_i J Z_i Z_{i+1} + g sum_i X_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dense import DenseOperator, ResourceCapError, embed
from .model import (
    DecayFunction,
    Decomposition,
    Interaction,
    InteractionTerm,
    PauliString,
    SpinModel,
    assemble,
    chain,
    term,
    truncation_bound_check,
    truncate,
)
from .schedule import merge_adjacent, suzuki_schedule
from .simulator import EvolutionPlan, error_norm, heisenberg, leakage_profile

ERROR_FLOOR = 1e-12
LIGHTCONE_THRESHOLD = 1e-6


class DegenerateFitError(RuntimeError):
    """All error samples sit at the floating-point floor; no order can be fitted."""


def expected_order(m: int) -> int:
    """Convergence exponent of the order-m schedule: m when even, m+1 when odd."""
    return m if m % 2 == 0 else m + 1


# ---------------------------------------------------------------------------
# fixtures
# ---------------------------------------------------------------------------

def tfim_chain(
    length: int,
    coupling: float = 1.0,
    field: float = 1.05,
    boundary: str = "open",
) -> SpinModel:
    """Transverse-field Ising chain as edge terms with folded-in fields."""
    graph = chain(length, boundary)
    degree = {v: 0 for v in graph.vertices}
    for u, v in graph.edges:
        degree[u] += 1
        degree[v] += 1
    terms = []
    for u, v in graph.edges:
        strings = [PauliString(coupling, (u, v), "ZZ")]
        if field != 0.0:
            strings.append(PauliString(field / degree[u], (u,), "X"))
            strings.append(PauliString(field / degree[v], (v,), "X"))
        terms.append(InteractionTerm(frozenset((u, v)), tuple(strings)))
    return SpinModel(
        graph=graph,
        interaction=Interaction(tuple(terms)),
        decay=DecayFunction(),
        observable=PauliString(1.0, (length // 2,), "Z"),
        name=f"tfim-chain-L{length}-{boundary}",
    )


def long_range_chain(length: int = 10, rate: float = 1.0, stretch: float = 0.5) -> SpinModel:
    """All-to-all ZZ couplings decaying as exp(-rate * d(x,y)**stretch)."""
    graph = chain(length, "open")
    terms = []
    for x in range(length):
        for y in range(x + 1, length):
            coeff = math.exp(-rate * graph.distance(x, y) ** stretch)
            terms.append(term(coeff, (x, y), "ZZ"))
    # X at the centre does not commute with the ZZ couplings, so truncation
    # has a visible dynamical effect
    return SpinModel(
        graph=graph,
        interaction=Interaction(tuple(terms)),
        decay=DecayFunction(b=rate, p=stretch),
        observable=PauliString(1.0, (length // 2,), "X"),
        name=f"long-range-chain-L{length}",
    )


def _observable_operator(model: SpinModel, observable: PauliString | None) -> DenseOperator:
    obs = observable if observable is not None else model.observable_or_raise()
    return obs.matrix()


# ---------------------------------------------------------------------------
# log-log order fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogLogFit:
    slope: float
    r_squared: float
    stderr: float
    used: int
    excluded: int


def fit_loglog(samples, floor: float = ERROR_FLOOR) -> LogLogFit:
    """Least-squares slope of log(error) against log(x); floor points excluded."""
    used = [(x, e) for x, e in samples if e > floor]
    if len(used) < 2:
        raise DegenerateFitError(
            "all error samples are at the floating-point floor; "
            "increase t or lower the order"
        )
    log_x = np.log([x for x, _ in used])
    log_e = np.log([e for _, e in used])
    slope, intercept = np.polyfit(log_x, log_e, 1)
    predicted = slope * log_x + intercept
    ss_res = float(np.sum((log_e - predicted) ** 2))
    ss_tot = float(np.sum((log_e - np.mean(log_e)) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    if len(used) > 2:
        var = ss_res / (len(used) - 2) / float(np.sum((log_x - np.mean(log_x)) ** 2))
        stderr = math.sqrt(var)
    else:
        stderr = float("nan")
    return LogLogFit(
        slope=float(slope),
        r_squared=r_squared,
        stderr=stderr,
        used=len(used),
        excluded=len(samples) - len(used),
    )


# ---------------------------------------------------------------------------
# convergence in the step count
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceReport:
    model_id: str
    m: int
    r: int
    k: int
    t: float
    samples: tuple[tuple[int, float], ...]
    fitted_order: float
    r_squared: float
    stderr: float
    excluded: int
    alpha_expected: int

    csv_header = ("n", "error")

    def csv_rows(self):
        return self.samples


def convergence_study(
    model: SpinModel,
    decomposition: Decomposition,
    observable: PauliString | None,
    t: float,
    m: int,
    r: int,
    n_list,
) -> ConvergenceReport:
    """Errors of the n-step schedule against exact evolution, with an order fit."""
    n_list = sorted(int(n) for n in n_list)
    if any(n < 1 for n in n_list):
        raise ValueError("step counts must be positive")
    region = model.graph.vertices
    obs = embed(_observable_operator(model, observable), region)
    exact = heisenberg(assemble(model.interaction, region), t, obs)
    plan = EvolutionPlan(decomposition, region)
    schedule = suzuki_schedule(decomposition.k, m, r)
    samples = []
    for n in n_list:
        approx = plan.run(schedule, t / n, n, obs)
        samples.append((n, error_norm(exact, approx)))
    fit = fit_loglog(samples)
    return ConvergenceReport(
        model_id=model.name,
        m=m,
        r=r,
        k=decomposition.k,
        t=t,
        samples=tuple(samples),
        fitted_order=-fit.slope,
        r_squared=fit.r_squared,
        stderr=fit.stderr,
        excluded=fit.excluded,
        alpha_expected=expected_order(m),
    )


# ---------------------------------------------------------------------------
# single-step order
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepOrderReport:
    model_id: str
    m: int
    r: int
    samples: tuple[tuple[float, float], ...]
    observed_exponent: float
    r_squared: float
    expected_exponent: int

    csv_header = ("mu", "error")

    def csv_rows(self):
        return self.samples


def single_step_order(
    model: SpinModel,
    decomposition: Decomposition,
    observable: PauliString | None,
    m: int,
    r: int,
    mu_list,
) -> StepOrderReport:
    """Observed exponent of the one-step error over a halving mu sequence."""
    mu_list = sorted((float(mu) for mu in mu_list), reverse=True)
    region = model.graph.vertices
    obs = embed(_observable_operator(model, observable), region)
    hamiltonian = assemble(model.interaction, region)
    plan = EvolutionPlan(decomposition, region)
    schedule = suzuki_schedule(decomposition.k, m, r)
    samples = []
    for mu in mu_list:
        exact = heisenberg(hamiltonian, mu, obs)
        approx = plan.run(schedule, mu, 1, obs)
        samples.append((mu, error_norm(exact, approx)))
    fit = fit_loglog(samples)
    return StepOrderReport(
        model_id=model.name,
        m=m,
        r=r,
        samples=tuple(samples),
        observed_exponent=fit.slope,
        r_squared=fit.r_squared,
        expected_exponent=expected_order(m) + 1,
    )


# ---------------------------------------------------------------------------
# light cone
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LightconeReport:
    model_id: str
    threshold: float
    rows: tuple[tuple[float, int, float], ...]
    r_star: tuple[tuple[float, int], ...]

    csv_header = ("t", "r", "leakage")

    def csv_rows(self):
        return self.rows


def lightcone_study(
    model: SpinModel,
    observable: PauliString | None,
    t_list,
    threshold: float = LIGHTCONE_THRESHOLD,
) -> LightconeReport:
    """Leakage profiles of exactly evolved observables, per time."""
    region = model.graph.vertices
    obs_string = observable if observable is not None else model.observable_or_raise()
    anchor = frozenset(obs_string.sites)
    obs = embed(obs_string.matrix(), region)
    hamiltonian = assemble(model.interaction, region)
    rows = []
    r_star = []
    for t in sorted(float(t) for t in t_list):
        evolved = heisenberg(hamiltonian, t, obs)
        profile = leakage_profile(evolved, anchor, model.graph)
        for radius, leakage in profile:
            rows.append((t, radius, leakage))
        inside = [radius for radius, leakage in profile if leakage < threshold]
        r_star.append((t, min(inside)))
    return LightconeReport(
        model_id=model.name,
        threshold=threshold,
        rows=tuple(rows),
        r_star=tuple(r_star),
    )


# ---------------------------------------------------------------------------
# depth search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DepthReport:
    model_id: str
    m: int
    r: int
    t: float
    epsilon: float
    n_min: int
    factors_per_step: int
    total_depth: int
    error_at_min: float
    error_below: float | None

    csv_header = ("epsilon", "n_min", "factors_per_step", "total_depth")

    def csv_rows(self):
        return ((self.epsilon, self.n_min, self.factors_per_step, self.total_depth),)


def depth_search(
    model: SpinModel,
    decomposition: Decomposition,
    observable: PauliString | None,
    t: float,
    m: int,
    r: int,
    epsilon: float,
    n_cap: int = 1 << 16,
) -> DepthReport:
    """Minimal step count with measured error <= epsilon (doubling + bisection)."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    region = model.graph.vertices
    obs = embed(_observable_operator(model, observable), region)
    exact = heisenberg(assemble(model.interaction, region), t, obs)
    plan = EvolutionPlan(decomposition, region)
    schedule = suzuki_schedule(decomposition.k, m, r)
    cache: dict[int, float] = {}

    def err(n: int) -> float:
        if n not in cache:
            cache[n] = error_norm(exact, plan.run(schedule, t / n, n, obs))
        return cache[n]

    hi = 1
    while err(hi) > epsilon:
        hi *= 2
        if hi > n_cap:
            raise ResourceCapError(
                f"no step count up to {n_cap} reaches error {epsilon:g}"
            )
    lo = hi // 2  # err(lo) > epsilon when lo >= 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if err(mid) <= epsilon:
            hi = mid
        else:
            lo = mid
    factors = len(merge_adjacent(schedule))
    return DepthReport(
        model_id=model.name,
        m=m,
        r=r,
        t=t,
        epsilon=epsilon,
        n_min=hi,
        factors_per_step=factors,
        total_depth=hi * factors,
        error_at_min=err(hi),
        error_below=err(hi - 1) if hi > 1 else None,
    )


# ---------------------------------------------------------------------------
# truncation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruncationReport:
    model_id: str
    t: float
    b: float
    b_prime: float
    rows: tuple[tuple[int, float, float, float], ...]

    csv_header = ("R", "norm_lhs", "norm_rhs", "dyn_error")

    def csv_rows(self):
        return self.rows

    @property
    def all_hold(self) -> bool:
        return all(lhs <= rhs for _, lhs, rhs, _ in self.rows)


def truncation_study(
    model: SpinModel,
    radii,
    b_prime: float,
    t: float,
    observable: PauliString | None = None,
) -> TruncationReport:
    """Truncation norm bound and exact dynamical error per interaction range."""
    region = model.graph.vertices
    obs = embed(_observable_operator(model, observable), region)
    exact = heisenberg(assemble(model.interaction, region), t, obs)
    rows = []
    for radius in sorted(int(r) for r in radii):
        bound = truncation_bound_check(
            model.interaction, radius, model.decay, b_prime, model.graph
        )
        truncated = truncate(model.interaction, radius, model.graph)
        evolved = heisenberg(assemble(truncated, region), t, obs)
        rows.append((radius, bound.lhs, bound.rhs, error_norm(evolved, exact)))
    return TruncationReport(
        model_id=model.name,
        t=t,
        b=model.decay.b,
        b_prime=b_prime,
        rows=tuple(rows),
    )


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def format_value(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def write_report_csv(report, path) -> None:
    """Write a report's rows with its documented header, floats at 17 digits."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(report.csv_header) + "\n")
        for row in report.csv_rows():
            fh.write(",".join(format_value(v) for v in row) + "\n")
