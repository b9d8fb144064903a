"""Product-formula schedule algebra.

A schedule is an ordered list of (layer, fraction) entries describing an
alternating product of layer evolutions.  Entries are stored in application
order: the first entry acts on the observable first, which is the innermost
(rightmost) factor of the conjugating unitary.  For two layers the symmetric
base schedule [(1, 1/2), (2, 1), (1, 1/2)] therefore realizes conjugation by
exp(i u K1 / 2) exp(i u K2) exp(i u K1 / 2) with layer 1 outermost.

Higher orders come from the recursive construction with an odd arity r >= 3:
an order-(2m+1) schedule is ell = (r-1)/2 copies of the order-2m schedule
scaled by s_m, one copy scaled by 1 - (r-1) s_m (a backward step), and ell
more copies scaled by s_m, where s_m = 1 / ((r-1) - (r-1)**(1/(2m+1))).
Even order labels alias the preceding odd order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

MERGE_DROP_TOL = 1e-15

Entry = tuple[int, float]


def _validate_arity(r: int) -> None:
    if not isinstance(r, int) or r < 3 or r % 2 == 0:
        raise ValueError(f"recursion arity r must be an odd integer >= 3, got {r}")


@dataclass(frozen=True)
class ScheduleParams:
    """Parameters (k, m, r, mu) labelling a schedule.

    k is the number of Hamiltonian parts, m the order label, r the recursion
    arity (meaningful for m >= 3), and mu the base time step the fractions
    refer to.
    """

    k: int
    m: int = 1
    r: int = 3
    mu: float = 1.0

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if not isinstance(self.m, int) or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        _validate_arity(self.r)


@dataclass(frozen=True)
class ProductSchedule:
    """Ordered (layer, fraction) entries realizing one base step of size mu."""

    entries: tuple[Entry, ...]
    params: ScheduleParams

    def __post_init__(self):
        entries = []
        for layer, fraction in self.entries:
            layer = int(layer)
            if not 1 <= layer <= self.params.k:
                raise ValueError(
                    f"layer {layer} outside 1..{self.params.k}"
                )
            fraction = float(fraction)
            if not math.isfinite(fraction):
                raise ValueError("fractions must be finite")
            entries.append((layer, fraction))
        object.__setattr__(self, "entries", tuple(entries))

    @property
    def k(self) -> int:
        return self.params.k

    def __len__(self) -> int:
        return len(self.entries)

    def is_palindrome(self) -> bool:
        """Structural time-reversal symmetry: the entry list equals its reverse."""
        return self.entries == self.entries[::-1]

    def layer_sums(self) -> dict[int, float]:
        """Total fraction consumed per layer (1.0 per layer for generated schedules)."""
        sums = {j: [] for j in range(1, self.k + 1)}
        for layer, fraction in self.entries:
            sums[layer].append(fraction)
        return {j: math.fsum(fs) for j, fs in sums.items()}


@dataclass(frozen=True)
class PathTrace:
    """Per-layer cumulative signed times (the staircase of a schedule).

    Each sequence starts at 0 and, for unit-layer-sum schedules, ends at 1.
    `rows` lists (step, layer, cumulative_time) per entry in schedule order,
    step 0 rows carrying the time origin for each layer.
    """

    k: int
    sequences: dict[int, tuple[float, ...]]
    rows: tuple[tuple[int, int, float], ...]


@dataclass(frozen=True)
class OrderConditionReport:
    """Residuals of the coefficient conditions at one recursion level."""

    m: int
    fractions: tuple[float, ...]
    sum_residual: float
    power_residual: float
    palindrome_residual: float

    def satisfied(self, tol: float = 1e-10) -> bool:
        return (
            self.sum_residual < tol
            and self.power_residual < tol
            and self.palindrome_residual < tol
        )


def base_symmetric(k: int, mu: float = 1.0) -> ProductSchedule:
    """Symmetric lowest-order schedule: half steps 1..k then k..1."""
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    half = [(j, 0.5) for j in range(1, k + 1)]
    return ProductSchedule(
        entries=tuple(half + half[::-1]),
        params=ScheduleParams(k=k, m=1, mu=mu),
    )


def suzuki_coefficient(m: int, r: int) -> float:
    """Recursion coefficient s_m = 1 / ((r-1) - (r-1)**(1/(2m+1)))."""
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    _validate_arity(r)
    return 1.0 / ((r - 1) - (r - 1) ** (1.0 / (2 * m + 1)))


def level_coefficients(m: int, r: int) -> tuple[float, ...]:
    """Canonical coefficient vector (s_m, ..., 1-(r-1)s_m, ..., s_m) of length r."""
    s = suzuki_coefficient(m, r)
    ell = (r - 1) // 2
    return (s,) * ell + (1.0 - (r - 1) * s,) + (s,) * ell


def recursion_depth(order: int) -> int:
    """Number of recursion levels below the given order label."""
    if not isinstance(order, int) or order < 1:
        raise ValueError(f"order must be a positive integer, got {order}")
    return 0 if order <= 2 else (order - 1) // 2


def _merge_entries(entries, drop_tol: float = MERGE_DROP_TOL) -> tuple[Entry, ...]:
    stack: list[Entry] = []
    for layer, fraction in entries:
        if stack and stack[-1][0] == layer:
            fraction = stack[-1][1] + fraction
            stack.pop()
        if abs(fraction) >= drop_tol:
            stack.append((layer, fraction))
    return tuple(stack)


def merge_adjacent(schedule: ProductSchedule, drop_tol: float = MERGE_DROP_TOL) -> ProductSchedule:
    """Coalesce consecutive equal-layer entries; drop near-zero fractions.

    Merging cascades: when a run sums below `drop_tol` the neighbours it
    separated become adjacent and merge in turn.
    """
    return replace(schedule, entries=_merge_entries(schedule.entries, drop_tol))


def reverse(schedule: ProductSchedule) -> ProductSchedule:
    """Time-reversed schedule: entries reversed and fractions negated."""
    entries = tuple((layer, -fraction) for layer, fraction in schedule.entries[::-1])
    return replace(schedule, entries=entries)


def compose(a: ProductSchedule, b: ProductSchedule) -> ProductSchedule:
    """Concatenate two schedules (a applied first, then b)."""
    if a.k != b.k:
        raise ValueError(f"cannot compose schedules with k={a.k} and k={b.k}")
    return replace(a, entries=a.entries + b.entries)


def _scale(entries, factor: float):
    return [(layer, fraction * factor) for layer, fraction in entries]


def suzuki_recurse(base: ProductSchedule, order: int, r: int = 3) -> ProductSchedule:
    """Recursively build the schedule with the given order label from the base.

    Odd order 2m+1 takes m recursion levels; even orders alias the preceding
    odd order (same entries, relabelled).  Entries stay unmerged, one per
    factor of the raw recursion (r**m * 2k of them), so the summed absolute
    fractions equal the closed-form total time k * prod(2 (r-1) s_j - 1);
    merge_adjacent coalesces them to the r**m * (2k-2) + 1 execution factors.
    """
    if not isinstance(order, int) or order < 1:
        raise ValueError(f"order must be a positive integer, got {order}")
    _validate_arity(r)
    depth = recursion_depth(order)
    ell = (r - 1) // 2
    entries = list(base.entries)
    for level in range(1, depth + 1):
        s = suzuki_coefficient(level, r)
        mid = 1.0 - (r - 1) * s
        wings = _scale(entries, s)
        entries = wings * ell + _scale(entries, mid) + wings * ell
    return ProductSchedule(
        entries=tuple(entries),
        params=replace(base.params, m=order, r=r),
    )


def suzuki_schedule(k: int, order: int, r: int = 3, mu: float = 1.0) -> ProductSchedule:
    """Convenience constructor: recursion applied to the symmetric base."""
    return suzuki_recurse(base_symmetric(k, mu=mu), order, r)


def check_order_conditions(fractions, m: int) -> OrderConditionReport:
    """Residuals of sum = 1, power sum (2m+1) = 0 and coefficient palindromy."""
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) % 2 == 0:
        raise ValueError(f"coefficient vector must have odd length, got {len(fractions)}")
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    sum_residual = abs(math.fsum(fractions) - 1.0)
    power_residual = abs(math.fsum(f ** (2 * m + 1) for f in fractions))
    palindrome_residual = max(
        abs(a - b) for a, b in zip(fractions, fractions[::-1])
    )
    return OrderConditionReport(
        m=m,
        fractions=fractions,
        sum_residual=sum_residual,
        power_residual=power_residual,
        palindrome_residual=palindrome_residual,
    )


def total_absolute_time(schedule: ProductSchedule) -> float:
    """Sum of |fraction| over all entries, in units of mu."""
    return math.fsum(abs(f) for _, f in schedule.entries)


def total_time_closed_form(k: int, depth: int, r: int) -> float:
    """k * prod_{j=1..depth} (2 (r-1) s_j - 1): the recursion's total time."""
    product = 1.0
    for j in range(1, depth + 1):
        product *= 2.0 * (r - 1) * suzuki_coefficient(j, r) - 1.0
    return k * product


def path_trace(schedule: ProductSchedule) -> PathTrace:
    """Cumulative signed time per layer in execution order."""
    running = {j: 0.0 for j in range(1, schedule.k + 1)}
    sequences = {j: [0.0] for j in range(1, schedule.k + 1)}
    rows = [(0, j, 0.0) for j in range(1, schedule.k + 1)]
    for step, (layer, fraction) in enumerate(schedule.entries, start=1):
        running[layer] += fraction
        sequences[layer].append(running[layer])
        rows.append((step, layer, running[layer]))
    return PathTrace(
        k=schedule.k,
        sequences={j: tuple(seq) for j, seq in sequences.items()},
        rows=tuple(rows),
    )


def format_schedule(schedule: ProductSchedule) -> str:
    """Line-oriented export: header then one 'layer<TAB>fraction' line per entry."""
    p = schedule.params
    lines = [f"#k={p.k} m={p.m} r={p.r}"]
    lines.extend(f"{layer}\t{fraction:.17g}" for layer, fraction in schedule.entries)
    return "\n".join(lines) + "\n"


def write_schedule(schedule: ProductSchedule, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_schedule(schedule))


def write_path_trace(trace: PathTrace, path) -> None:
    """CSV export with columns step,layer,cumulative_time."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("step,layer,cumulative_time\n")
        for step, layer, value in trace.rows:
            fh.write(f"{step},{layer},{value:.17g}\n")
