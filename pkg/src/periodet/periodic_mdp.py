"""Value iteration for finite MDPs with period-T transition and cost structure.

The engine minimizes expected total discounted cost
E[sum_k alpha^k c_{k mod T}(X_k, U_k)] over finitely many states and
actions, where both the kernels P_l(s'|s,a) and the stage costs c_l(s,a)
repeat with period T.  One sweep of the cycle operator applies the stage
Bellman operators innermost-last:

    Psi(V) = Psi_0(Psi_1(... Psi_{T-1}(V) ...)),

so a fixed point of Psi is the optimal cost seen at entry to stage 0.
Iterating Psi from the all-zero vector produces a pointwise nondecreasing
sequence converging to that fixed point; the optimal policy is periodic
and is read off greedily from the T intermediate stage compositions.

alpha = 1 is allowed for optimal-stopping style problems.  Nonnegative
costs keep every iterate well defined, but at alpha = 1 convergence
within ``max_cycles`` is reported, not guaranteed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "PeriodicMdp",
    "StageValues",
    "PeriodicPolicy",
    "InstanceFormatError",
    "apply_stage_operator",
    "apply_policy_operator",
    "apply_cycle_operator",
    "value_iterate",
    "extract_periodic_policy",
    "fixed_point_residual",
    "finite_horizon_oracle",
    "simulate_policy",
    "load_instance",
    "dump_instance",
]

_ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class PeriodicMdp:
    """Finite periodic MDP.

    transitions : array (T, S, A, S), row-stochastic in the last axis
    costs       : array (T, S, A), nonnegative expected stage costs
    discount    : alpha in [0, 1]
    """

    transitions: np.ndarray
    costs: np.ndarray
    discount: float

    def __post_init__(self):
        P = np.asarray(self.transitions, dtype=float)
        c = np.asarray(self.costs, dtype=float)
        if P.ndim != 4 or P.shape[1] != P.shape[3]:
            raise ValueError(f"transitions must have shape (T, S, A, S), got {P.shape}")
        if c.shape != P.shape[:3]:
            raise ValueError(f"costs shape {c.shape} does not match kernels {P.shape[:3]}")
        if np.any(P < 0.0):
            raise ValueError("transition probabilities must be nonnegative")
        row_sums = P.sum(axis=-1)
        if np.max(np.abs(row_sums - 1.0)) > _ROW_SUM_TOL:
            bad = np.unravel_index(np.argmax(np.abs(row_sums - 1.0)), row_sums.shape)
            raise ValueError(f"transition row {bad} sums to {row_sums[bad]!r}")
        if np.any(c < 0.0) or not np.all(np.isfinite(c)):
            raise ValueError("stage costs must be finite and nonnegative")
        if not 0.0 <= self.discount <= 1.0:
            raise ValueError(f"discount must lie in [0, 1], got {self.discount}")
        P.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "transitions", P)
        object.__setattr__(self, "costs", c)

    @property
    def period(self) -> int:
        return self.transitions.shape[0]

    @property
    def num_states(self) -> int:
        return self.transitions.shape[1]

    @property
    def num_actions(self) -> int:
        return self.transitions.shape[2]


@dataclass(frozen=True)
class StageValues:
    """Converged (or best-effort) values at each stage entry point.

    ``values[l]`` is the expected cost-to-go entering stage l, i.e. the
    l-th intermediate composition of the stage operators applied to the
    cycle fixed point.  ``sup_history``/``l2_history`` record the distance
    between successive cycle iterates of the stage-0 entry vector.
    """

    values: np.ndarray  # (T, S)
    converged: bool
    cycles: int
    sup_history: np.ndarray = field(repr=False)
    l2_history: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class PeriodicPolicy:
    """T action maps, one per stage; ``actions[l, s]`` is the stage-l action."""

    actions: np.ndarray  # (T, S) int

    def stage_map(self, l: int) -> np.ndarray:
        return self.actions[l % self.actions.shape[0]]


def apply_stage_operator(values: np.ndarray, mdp: PeriodicMdp, stage: int) -> np.ndarray:
    """One Bellman minimization at the given stage:
    s -> min_a [ c_l(s,a) + alpha * sum_s' P_l(s'|s,a) V(s') ]."""
    q = _stage_q(values, mdp, stage)
    return q.min(axis=1)


def apply_policy_operator(
    values: np.ndarray, mdp: PeriodicMdp, stage: int, action_map: np.ndarray
) -> np.ndarray:
    """Stage operator with the action fixed by ``action_map`` per state."""
    q = _stage_q(values, mdp, stage)
    return q[np.arange(mdp.num_states), np.asarray(action_map, dtype=int)]


def _stage_q(values: np.ndarray, mdp: PeriodicMdp, stage: int) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != (mdp.num_states,):
        raise ValueError(f"value vector must have shape ({mdp.num_states},)")
    l = stage % mdp.period
    # (S, A, S) @ (S,) -> (S, A)
    cont = mdp.transitions[l] @ values
    return mdp.costs[l] + mdp.discount * cont


def apply_cycle_operator(
    values: np.ndarray, mdp: PeriodicMdp
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Apply the T stage operators innermost-last.

    Returns the new stage-0 entry vector together with the T intermediate
    stage compositions (entry values for stages 0..T-1), which policy
    extraction needs.
    """
    entries: list[np.ndarray] = [None] * mdp.period  # type: ignore[list-item]
    cur = np.asarray(values, dtype=float)
    for l in range(mdp.period - 1, -1, -1):
        cur = apply_stage_operator(cur, mdp, l)
        entries[l] = cur
    return cur, entries


def value_iterate(
    mdp: PeriodicMdp,
    tol: float | None = None,
    max_cycles: int = 100_000,
) -> StageValues:
    """Iterate the cycle operator from the all-zero vector.

    Stops when the sup-norm distance between successive stage-0 iterates
    drops to ``tol`` (default 1e-8 for alpha < 1, 1e-6 at alpha = 1) or
    after ``max_cycles`` cycles, whichever comes first.  Non-convergence
    is reported through the ``converged`` flag, never raised: at
    alpha = 1 monotone convergence can be arbitrarily slow.
    """
    if tol is None:
        tol = 1e-8 if mdp.discount < 1.0 else 1e-6
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    v = np.zeros(mdp.num_states)
    sup_hist: list[float] = []
    l2_hist: list[float] = []
    converged = False
    cycles = 0
    entries = [np.zeros(mdp.num_states) for _ in range(mdp.period)]
    for cycles in range(1, max_cycles + 1):
        new, entries = apply_cycle_operator(v, mdp)
        if np.any(new < v - 1e-9):
            raise AssertionError("cycle iterates must be pointwise nondecreasing")
        diff = new - v
        sup_hist.append(float(np.max(np.abs(diff))))
        l2_hist.append(float(np.linalg.norm(diff)))
        v = new
        if sup_hist[-1] <= tol:
            converged = True
            break
    return StageValues(
        values=np.stack(entries),
        converged=converged,
        cycles=cycles,
        sup_history=np.asarray(sup_hist),
        l2_history=np.asarray(l2_hist),
    )


def extract_periodic_policy(stage_values: StageValues, mdp: PeriodicMdp) -> PeriodicPolicy:
    """Greedy periodic policy from converged stage-entry values.

    The stage-l map minimizes against the entry values of stage l+1
    (cyclically).  Ties break to the lowest action index so repeated runs
    yield identical policies.
    """
    T = mdp.period
    actions = np.empty((T, mdp.num_states), dtype=int)
    for l in range(T):
        nxt = stage_values.values[(l + 1) % T]
        q = _stage_q(nxt, mdp, l)
        actions[l] = np.argmin(q, axis=1)
    return PeriodicPolicy(actions=actions)


def fixed_point_residual(stage_values: StageValues, mdp: PeriodicMdp) -> float:
    """Sup-norm defect of the cycle fixed-point equation at stage 0."""
    v = stage_values.values[0]
    new, _ = apply_cycle_operator(v, mdp)
    return float(np.max(np.abs(new - v)))


def finite_horizon_oracle(mdp: PeriodicMdp, horizon: int) -> np.ndarray:
    """Exact optimal cost of the problem truncated after ``horizon`` steps,
    starting at stage 0.

    Deliberately a standalone backward induction (no reuse of the cycle
    machinery) so it can serve as an independent oracle in tests.
    """
    if horizon < 0 or horizon % mdp.period != 0:
        raise ValueError("horizon must be a nonnegative multiple of the period")
    P = mdp.transitions
    c = mdp.costs
    v = np.zeros(mdp.num_states)
    for k in range(horizon - 1, -1, -1):
        l = k % mdp.period
        q = c[l] + mdp.discount * (P[l] @ v)
        v = q.min(axis=1)
    return v


def simulate_policy(
    mdp: PeriodicMdp,
    stage_maps: np.ndarray,
    n_paths: int,
    horizon: int,
    seed: int,
    initial_state: int = 0,
) -> tuple[float, float]:
    """Monte-Carlo estimate of a policy's discounted cost from one state.

    ``stage_maps`` has shape (T, S); a stationary policy is the same row
    repeated.  Returns (mean cost, standard error).  The truncation bias
    is at most alpha^horizon * max_cost / (1 - alpha) for alpha < 1.
    """
    stage_maps = np.asarray(stage_maps, dtype=int)
    if stage_maps.shape != (mdp.period, mdp.num_states):
        raise ValueError(f"stage_maps must have shape ({mdp.period}, {mdp.num_states})")
    rng = np.random.default_rng(seed)
    cum = np.cumsum(mdp.transitions, axis=-1)
    states = np.full(n_paths, initial_state, dtype=int)
    total = np.zeros(n_paths)
    disc = 1.0
    for k in range(horizon):
        l = k % mdp.period
        acts = stage_maps[l][states]
        total += disc * mdp.costs[l][states, acts]
        u = rng.random(n_paths)
        rows = cum[l][states, acts]  # (n_paths, S)
        states = (u[:, None] > rows).sum(axis=1)
        disc *= mdp.discount
    return float(total.mean()), float(total.std(ddof=1) / np.sqrt(n_paths))


class InstanceFormatError(ValueError):
    """Malformed MDP instance file; carries the offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def load_instance(path: str | Path) -> PeriodicMdp:
    """Parse the plain-text instance format.

    Grammar (one directive per line, '#' starts a comment):

        states <S>
        actions <A>
        period <T>
        discount <alpha>
        kernel <stage> <state> <action> <p_0> ... <p_{S-1}>
        cost <stage> <state> <action> <value>

    The four dimension directives must precede any kernel/cost line; every
    (stage, state, action) triple needs exactly one kernel row and one
    cost line.
    """
    dims: dict[str, float] = {}
    kernel_rows: dict[tuple[int, int, int], tuple[int, list[float]]] = {}
    cost_rows: dict[tuple[int, int, int], tuple[int, float]] = {}
    text = Path(path).read_text()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        key = parts[0]
        if key in ("states", "actions", "period", "discount"):
            if len(parts) != 2:
                raise InstanceFormatError(line_no, f"'{key}' takes exactly one value")
            try:
                dims[key] = float(parts[1])
            except ValueError:
                raise InstanceFormatError(line_no, f"bad number {parts[1]!r}") from None
        elif key in ("kernel", "cost"):
            missing = [d for d in ("states", "actions", "period", "discount") if d not in dims]
            if missing:
                raise InstanceFormatError(
                    line_no, f"'{key}' before dimension directive(s) {', '.join(missing)}"
                )
            S, A, T = int(dims["states"]), int(dims["actions"]), int(dims["period"])
            want = 3 + (S if key == "kernel" else 1)
            if len(parts) - 1 != want:
                raise InstanceFormatError(
                    line_no, f"'{key}' needs {want} values, got {len(parts) - 1}"
                )
            try:
                idx = tuple(int(p) for p in parts[1:4])
                vals = [float(p) for p in parts[4:]]
            except ValueError:
                raise InstanceFormatError(line_no, "bad number in row") from None
            l, s, a = idx
            if not (0 <= l < T and 0 <= s < S and 0 <= a < A):
                raise InstanceFormatError(line_no, f"index {idx} out of range")
            table = kernel_rows if key == "kernel" else cost_rows
            if idx in table:
                raise InstanceFormatError(
                    line_no, f"duplicate {key} row for {idx} (first at line {table[idx][0]})"
                )
            table[idx] = (line_no, vals if key == "kernel" else vals[0])
        else:
            raise InstanceFormatError(line_no, f"unknown directive {key!r}")
    missing = [d for d in ("states", "actions", "period", "discount") if d not in dims]
    if missing:
        raise InstanceFormatError(0, f"missing dimension directive(s): {', '.join(missing)}")
    S, A, T = int(dims["states"]), int(dims["actions"]), int(dims["period"])
    P = np.zeros((T, S, A, S))
    c = np.zeros((T, S, A))
    for l in range(T):
        for s in range(S):
            for a in range(A):
                if (l, s, a) not in kernel_rows:
                    raise InstanceFormatError(0, f"missing kernel row for {(l, s, a)}")
                if (l, s, a) not in cost_rows:
                    raise InstanceFormatError(0, f"missing cost line for {(l, s, a)}")
                P[l, s, a] = kernel_rows[(l, s, a)][1]
                c[l, s, a] = cost_rows[(l, s, a)][1]
    try:
        return PeriodicMdp(transitions=P, costs=c, discount=dims["discount"])
    except ValueError as exc:
        raise InstanceFormatError(0, str(exc)) from exc


def dump_instance(mdp: PeriodicMdp, path: str | Path) -> None:
    """Write an instance in the format accepted by ``load_instance``."""
    lines = [
        f"states {mdp.num_states}",
        f"actions {mdp.num_actions}",
        f"period {mdp.period}",
        f"discount {mdp.discount!r}",
    ]
    for l in range(mdp.period):
        for s in range(mdp.num_states):
            for a in range(mdp.num_actions):
                probs = " ".join(repr(float(p)) for p in mdp.transitions[l, s, a])
                lines.append(f"kernel {l} {s} {a} {probs}")
                lines.append(f"cost {l} {s} {a} {float(mdp.costs[l, s, a])!r}")
    Path(path).write_text("\n".join(lines) + "\n")
