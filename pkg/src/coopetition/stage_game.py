"""The one-shot campaign game between two marketers.

Marketer 1 pulls opinions towards 1, marketer 2 towards 0. For a single
campaign with influence power ``rho`` the stage payoffs are

    u1 = rho . x_plus - lambda1 * sum(a1)
    u2 = rho . (1 - x_plus) - lambda2 * sum(a2)

where ``x_plus`` is the post-jump state. When the budgets exceed the
surplus threshold the game separates node by node and its Nash equilibrium
has a closed form, implemented by :func:`one_shot_ne`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .dynamics import FINAL, InfluencePower, action_vector, jump, normalize_mode, opinion_vector
from .errors import NumericalQualityError, ParameterError, UnsupportedConfigurationError

CLAMP_TOL = 1e-12


def unit_schedule(n_stages: int, period: float = 1.0) -> tuple[tuple[float, float], ...]:
    """Campaigns at ``t_k = k * period`` each lasting ``period``."""
    if n_stages < 1:
        raise ParameterError(f"need at least one campaign, got {n_stages}")
    return tuple((k * period, period) for k in range(1, n_stages + 1))


@dataclass(frozen=True)
class GameParameters:
    """Costs, budgets and campaign schedule of the repeated game.

    ``schedule`` lists ``(t_k, T_k)`` pairs: campaign instants and the
    window over which each campaign's payoff is measured. ``t0`` is the
    time of the initial state.
    """

    lambda1: float
    lambda2: float
    budget1: float
    budget2: float
    schedule: tuple[tuple[float, float], ...] = field(default_factory=lambda: unit_schedule(5))
    rho_mode: str = FINAL
    t0: float = 0.0

    def __post_init__(self):
        for name in ("lambda1", "lambda2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ParameterError(f"{name} must be a non-negative number, got {value}")
        if not self.lambda1 + self.lambda2 > 0:
            raise ParameterError("lambda1 + lambda2 must be positive")
        for name in ("budget1", "budget2"):
            value = getattr(self, name)
            if not value > 0:
                raise ParameterError(f"{name} must be positive, got {value}")
        schedule = tuple((float(t), float(T)) for t, T in self.schedule)
        if not schedule:
            raise ParameterError("schedule must contain at least one campaign")
        times = [t for t, _ in schedule]
        if times[0] < self.t0:
            raise ParameterError(f"first campaign at {times[0]} precedes the initial time {self.t0}")
        for k, (t, T) in enumerate(schedule):
            if not T > 0:
                raise ParameterError(f"campaign {k + 1}: window must be positive, got {T}")
            if k + 1 < len(schedule):
                gap = schedule[k + 1][0] - t
                if not gap > 0:
                    raise ParameterError("campaign instants must be strictly increasing")
                if T > gap:
                    raise ParameterError(f"campaign {k + 1}: window {T} exceeds the gap {gap} to the next campaign")
        object.__setattr__(self, "schedule", schedule)
        object.__setattr__(self, "rho_mode", normalize_mode(self.rho_mode))

    @property
    def n_stages(self) -> int:
        return len(self.schedule)

    @property
    def lambda_sum(self) -> float:
        return self.lambda1 + self.lambda2

    @property
    def eta(self) -> float:
        return eta(self)

    def cost(self, player: int) -> float:
        return (self.lambda1, self.lambda2)[_player_index(player)]

    def budget(self, player: int) -> float:
        return (self.budget1, self.budget2)[_player_index(player)]

    def replace(self, **changes) -> "GameParameters":
        return replace(self, **changes)


def _player_index(player: int) -> int:
    if player not in (1, 2):
        raise ParameterError(f"player must be 1 or 2, got {player}")
    return player - 1


def eta(params: GameParameters) -> float:
    """Market share of marketer 1 at the high-influence equilibrium."""
    s = params.lambda1 + params.lambda2
    if not s > 0:
        raise ParameterError("eta is undefined when both advertising costs are zero")
    return params.lambda2 / s


class Regime(enum.Enum):
    LOW = "low"
    HIGH = "high"


@dataclass(frozen=True)
class NodeRegime:
    """Regime of one node and its open no-conflict interval.

    For ``LOW`` the interval is where neither marketer spends; for ``HIGH``
    it is where both spend and the post-jump opinion lands on eta.
    """

    regime: Regime
    lower: float
    upper: float
    node: int | None = None

    def contains(self, x: float) -> bool:
        return self.lower < x < self.upper


def node_regime(rho_n: float, params: GameParameters, node: int | None = None) -> NodeRegime:
    if not rho_n > 0:
        raise ParameterError(f"influence power must be positive, got {rho_n}")
    s = params.lambda_sum
    if rho_n <= s:
        return NodeRegime(Regime.LOW, 1 - params.lambda1 / rho_n, params.lambda2 / rho_n, node)
    e = params.eta
    return NodeRegime(Regime.HIGH, 1 - (1 - e) * rho_n / s, e * rho_n / s, node)


def _rho_values(rho) -> np.ndarray:
    values = rho.rho if isinstance(rho, InfluencePower) else np.asarray(rho, dtype=float)
    values = np.atleast_1d(values)
    if np.any(~(values > 0)):
        raise ParameterError("influence power must be strictly positive at every node")
    return values


def budget_threshold(rho, params: GameParameters) -> tuple[float, float]:
    """Smallest budgets for which the closed-form equilibrium applies.

    A player with zero advertising cost has an unbounded threshold, reported
    as ``math.inf``.
    """
    r = _rho_values(rho)
    share_term = r / params.lambda_sum - 1
    out = []
    for lam in (params.lambda1, params.lambda2):
        if lam == 0:
            out.append(math.inf)
            continue
        terms = np.maximum.reduce([np.zeros_like(r), np.sqrt(r / lam) - 1, share_term])
        out.append(float(terms.sum()))
    return out[0], out[1]


def _clamp(a: np.ndarray, what: str) -> np.ndarray:
    if a.size and a.min() < -CLAMP_TOL:
        raise NumericalQualityError(f"{what} produced negative spend {a.min():.3e}")
    return np.maximum(a, 0.0)


def one_shot_ne(x, rho, params: GameParameters, check_budget: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Nash equilibrium spends of a single campaign from state ``x``.

    Each node is solved independently. Low-influence nodes
    (``rho_n <= lambda1 + lambda2``) see at most one marketer spending, and
    nobody spends while the opinion sits inside the low-regime interval.
    High-influence nodes see both marketers spend inside the high-regime
    interval, exactly enough to put the opinion on eta. Outside the
    interval only the marketer the opinion leans away from spends. Boundary
    points use the outside formulas; they agree there by continuity.

    Raises :class:`UnsupportedConfigurationError` when a budget is below the
    surplus threshold, where the budget constraint could bind.
    """
    x = opinion_vector(np.atleast_1d(np.asarray(x, dtype=float)))
    r = _rho_values(rho)
    if r.size != x.size:
        raise ParameterError(f"state has {x.size} nodes but influence power has {r.size}")
    if check_budget:
        thresholds = budget_threshold(r, params)
        for player, threshold in zip((1, 2), thresholds):
            if params.budget(player) < threshold:
                raise UnsupportedConfigurationError(
                    f"budget of marketer {player} is {params.budget(player):.6g}, below the surplus "
                    f"threshold {threshold:.6g}; the budget-constrained equilibrium is not supported"
                )
    lam1, lam2, s = params.lambda1, params.lambda2, params.lambda_sum
    if lam1 == 0 or lam2 == 0:
        raise UnsupportedConfigurationError("closed-form equilibrium needs both advertising costs positive")
    e = lam2 / s

    low = r <= s
    lower = np.where(low, 1 - lam1 / r, 1 - (1 - e) * r / s)
    upper = np.where(low, lam2 / r, e * r / s)
    inside = (x > lower) & (x < upper)
    above = ~inside & (x >= upper)
    below = ~inside & ~above

    a1 = np.zeros_like(x)
    a2 = np.zeros_like(x)
    # outside the interval only one marketer spends
    a1[below] = np.sqrt(r[below] * (1 - x[below]) / lam1) - 1
    a2[above] = np.sqrt(r[above] * x[above] / lam2) - 1
    # inside a high-regime interval both spend and the jump lands on eta
    both = inside & ~low
    a1[both] = r[both] * e / s - x[both]
    a2[both] = r[both] * (1 - e) / s - (1 - x[both])

    a1 = _clamp(a1, "marketer 1 equilibrium")
    a2 = _clamp(a2, "marketer 2 equilibrium")
    if check_budget:
        for player, a in ((1, a1), (2, a2)):
            if a.sum() > params.budget(player) * (1 + 1e-12):
                raise NumericalQualityError(
                    f"equilibrium spend {a.sum():.6g} of marketer {player} exceeds its budget"
                )
    return a1, a2


def best_response(x_n: float, rho_n: float, opponent_spend: float, player: int,
                  params: GameParameters) -> float:
    """Unconstrained best spend of ``player`` on one node.

    Marketer 1 maximises ``rho (x + a1) / (1 + a1 + a2) - lambda1 a1``; the
    first-order condition gives ``sqrt(rho (1 - x + a2) / lambda1) - 1 - a2``,
    floored at zero. Marketer 2 is symmetric with ``x`` in place of
    ``1 - x``.
    """
    lam = params.cost(player)
    if lam == 0:
        raise UnsupportedConfigurationError(f"marketer {player} has zero cost; its best response is unbounded")
    if opponent_spend < 0:
        raise ParameterError("opponent spend must be non-negative")
    if not rho_n > 0:
        raise ParameterError(f"influence power must be positive, got {rho_n}")
    # the opponent's "free" share of the numerator
    base = 1 - x_n if player == 1 else x_n
    return max(0.0, math.sqrt(rho_n * (base + opponent_spend) / lam) - 1 - opponent_spend)


def stage_utilities(post_state, a1, a2, rho, params: GameParameters) -> tuple[float, float]:
    x_plus = np.atleast_1d(np.asarray(post_state, dtype=float))
    r = rho.rho if isinstance(rho, InfluencePower) else np.atleast_1d(np.asarray(rho, dtype=float))
    a1 = np.atleast_1d(np.asarray(a1, dtype=float))
    a2 = np.atleast_1d(np.asarray(a2, dtype=float))
    if not (x_plus.shape == r.shape == a1.shape == a2.shape):
        raise ParameterError("state, influence power and actions must have matching lengths")
    u1 = float(r @ x_plus - params.lambda1 * a1.sum())
    u2 = float(r @ (1 - x_plus) - params.lambda2 * a2.sum())
    return u1, u2


@dataclass(frozen=True)
class StageOutcome:
    a1: np.ndarray
    a2: np.ndarray
    post_state: np.ndarray
    u1: float
    u2: float


def play_stage(x, rho, params: GameParameters, a1: Sequence[float] | None = None,
               a2: Sequence[float] | None = None) -> StageOutcome:
    """Run one campaign. Missing actions default to the one-shot equilibrium."""
    x = opinion_vector(x)
    if a1 is None or a2 is None:
        ne1, ne2 = one_shot_ne(x, rho, params)
        a1 = ne1 if a1 is None else a1
        a2 = ne2 if a2 is None else a2
    a1 = action_vector(a1, x.size, params.budget1)
    a2 = action_vector(a2, x.size, params.budget2)
    post = jump(x, a1, a2)
    u1, u2 = stage_utilities(post, a1, a2, rho, params)
    return StageOutcome(a1, a2, post, u1, u2)
