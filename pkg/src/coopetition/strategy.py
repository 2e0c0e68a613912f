"""Multi-stage strategy profiles run over the hybrid dynamics.

Two profiles are studied: both marketers replaying the one-shot
equilibrium at every campaign, and the coopetition plan that replays it for
the first ``k1`` campaigns and then stops advertising altogether. A third,
``zero``, never advertises.
"""
from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dynamics import InfluencePower, influence_power, opinion_vector, propagator, sample_flow
from .errors import InapplicableRegimeError, ParameterError
from .graph import GraphSpec, build_laplacian
from .stage_game import GameParameters, play_stage

HISTORY_SCHEMA_VERSION = 1
STAGE_CSV_COLUMNS = ("k", "t", "u1", "u2", "spend1", "spend2", "max_dev_eta")

# sup-norm distance to eta below which the network counts as converged
PRACTICAL_CONVERGENCE_TOL = 0.01


class ProfileKind(enum.Enum):
    REPEATED_NE = "repeated-ne"
    COOPETITION = "coopetition"
    ZERO = "zero"


@dataclass(frozen=True)
class StrategyProfile:
    kind: ProfileKind
    k1: int | None = None

    def __post_init__(self):
        if self.kind is ProfileKind.COOPETITION:
            if self.k1 is None or int(self.k1) != self.k1 or self.k1 < 0:
                raise ParameterError(f"coopetition needs a non-negative integer k1, got {self.k1!r}")
        elif self.k1 is not None:
            raise ParameterError(f"k1 only applies to coopetition, not {self.kind.value}")

    @classmethod
    def repeated_ne(cls):
        return cls(ProfileKind.REPEATED_NE)

    @classmethod
    def coopetition(cls, k1: int):
        return cls(ProfileKind.COOPETITION, k1)

    @classmethod
    def zero(cls):
        return cls(ProfileKind.ZERO)

    @classmethod
    def parse(cls, text: str) -> "StrategyProfile":
        """Parse ``repeated-ne``, ``zero`` or ``coopetition:<k1>``."""
        name, _, arg = text.partition(":")
        if name == ProfileKind.COOPETITION.value:
            try:
                return cls.coopetition(int(arg))
            except ValueError:
                raise ParameterError(f"bad coopetition profile {text!r}; expected coopetition:<k1>") from None
        for kind in (ProfileKind.REPEATED_NE, ProfileKind.ZERO):
            if name == kind.value and not arg:
                return cls(kind)
        raise ParameterError(f"unknown profile {text!r}")

    def __str__(self):
        return f"coopetition:{self.k1}" if self.kind is ProfileKind.COOPETITION else self.kind.value

    def plays_equilibrium(self, k: int) -> bool:
        if self.kind is ProfileKind.REPEATED_NE:
            return True
        if self.kind is ProfileKind.COOPETITION:
            return k <= self.k1
        return False

    def actions(self, k: int, x: np.ndarray, rho: InfluencePower, params: GameParameters,
                history: "History | None" = None):
        """Spends at stage ``k``; ``None`` requests the one-shot equilibrium.

        ``history`` is the record so far. Neither shipped profile reads it.
        """
        if self.plays_equilibrium(k):
            return None, None
        zero = np.zeros_like(x)
        return zero, zero.copy()


@dataclass(frozen=True)
class StageRecord:
    k: int
    t: float
    x_pre: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    x_post: np.ndarray
    u1: float
    u2: float
    rho: InfluencePower


@dataclass
class History:
    x0: np.ndarray
    laplacian: np.ndarray
    params: GameParameters
    profile: StrategyProfile
    records: list[StageRecord] = field(default_factory=list)
    trajectory: list[tuple[int, float, np.ndarray]] = field(default_factory=list)
    final_state: np.ndarray | None = None

    @property
    def complete(self) -> bool:
        return len(self.records) == self.params.n_stages

    @property
    def rho_per_stage(self) -> list[InfluencePower]:
        return [r.rho for r in self.records]

    def states(self) -> np.ndarray:
        """Pre-campaign states ``x(t_k)`` stacked row-wise."""
        return np.array([r.x_pre for r in self.records])

    def to_dict(self) -> dict:
        p = self.params
        return {
            "schema_version": HISTORY_SCHEMA_VERSION,
            "profile": str(self.profile),
            "params": {
                "lambda1": p.lambda1, "lambda2": p.lambda2,
                "budget1": p.budget1, "budget2": p.budget2,
                "schedule": [list(s) for s in p.schedule],
                "rho_mode": p.rho_mode, "t0": p.t0,
            },
            "x0": self.x0.tolist(),
            "stages": [
                {
                    "k": r.k, "t": r.t,
                    "x_pre": r.x_pre.tolist(), "a1": r.a1.tolist(), "a2": r.a2.tolist(),
                    "x_post": r.x_post.tolist(), "u1": r.u1, "u2": r.u2,
                    "rho": r.rho.rho.tolist(),
                }
                for r in self.records
            ],
            "final_state": None if self.final_state is None else self.final_state.tolist(),
        }

    def write_json(self, path) -> None:
        _atomic_write(path, json.dumps(self.to_dict(), indent=1) + "\n")

    def write_stage_csv(self, path) -> None:
        eta = self.params.eta
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        with tmp.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(STAGE_CSV_COLUMNS)
            for r in self.records:
                writer.writerow((r.k, repr(r.t), repr(r.u1), repr(r.u2), repr(float(r.a1.sum())),
                                 repr(float(r.a2.sum())), repr(float(np.max(np.abs(r.x_pre - eta))))))
        tmp.replace(path)


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)


def _as_laplacian(graph) -> np.ndarray:
    if isinstance(graph, GraphSpec):
        return build_laplacian(graph)
    L = np.asarray(graph, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ParameterError(f"Laplacian must be square, got shape {L.shape}")
    return L


def run_profile(x0, graph, params: GameParameters, profile: StrategyProfile,
                samples_per_stage: int = 0) -> History:
    """Simulate ``profile`` from ``x0`` at time ``params.t0`` over every campaign.

    With ``samples_per_stage > 0`` the flow between campaigns is also
    sampled into ``History.trajectory``.
    """
    L = _as_laplacian(graph)
    x = opinion_vector(x0)
    if x.size != L.shape[0]:
        raise ParameterError(f"initial state has {x.size} nodes but the graph has {L.shape[0]}")
    history = History(x.copy(), L, params, profile)

    propagators: dict[float, np.ndarray] = {}
    powers: dict[float, InfluencePower] = {}

    def advance(state, t_from, duration, label):
        if samples_per_stage:
            history.trajectory.extend((label, t, s) for t, s in
                                      sample_flow(state, L, t_from, duration, samples_per_stage))
        if duration == 0:
            return state
        if duration not in propagators:
            propagators[duration] = propagator(L, duration)
        return np.clip(propagators[duration] @ state, 1e-12, 1 - 1e-12)

    schedule = params.schedule
    x = advance(x, params.t0, schedule[0][0] - params.t0, 0)
    for k, (t_k, window) in enumerate(schedule, start=1):
        if window not in powers:
            powers[window] = influence_power(L, window, params.rho_mode)
        rho = powers[window]
        a1, a2 = profile.actions(k, x, rho, params, history)
        outcome = play_stage(x, rho, params, a1, a2)
        history.records.append(StageRecord(k, t_k, x, outcome.a1, outcome.a2, outcome.post_state,
                                           outcome.u1, outcome.u2,
                                           InfluencePower(rho.rho, rho.duration, rho.mode, k)))
        gap = schedule[k][0] - t_k if k < len(schedule) else window
        x = advance(outcome.post_state, t_k, gap, k)
    history.final_state = x
    if samples_per_stage:
        history.trajectory.append((len(schedule), schedule[-1][0] + schedule[-1][1], x))
    return history


def long_term_utility(history: History) -> tuple[float, float]:
    """Average stage payoff of each marketer over all campaigns."""
    if not history.records or not history.complete:
        raise ParameterError(
            f"history covers {len(history.records)} of {history.params.n_stages} campaigns"
        )
    u1 = sum(r.u1 for r in history.records) / len(history.records)
    u2 = sum(r.u2 for r in history.records) / len(history.records)
    return u1, u2


class EquilibriumRegime(enum.Enum):
    UNIQUE_ETA = "unique-eta"
    FAMILY = "family"


@dataclass(frozen=True)
class EquilibriumPrediction:
    rho_max: float
    regime: EquilibriumRegime
    eta: float
    interval: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        return {"rho_max": self.rho_max, "regime": self.regime.value, "eta": self.eta,
                "interval": None if self.interval is None else list(self.interval)}


def rho_max(rho_per_stage: Sequence) -> float:
    """Smallest over campaigns of the largest influence power in the network."""
    if not rho_per_stage:
        raise ParameterError("need influence powers for at least one campaign")
    return min(float(np.max(r.rho if isinstance(r, InfluencePower) else r)) for r in rho_per_stage)


def predict_equilibrium(rho_per_stage: Sequence, params: GameParameters) -> EquilibriumPrediction:
    """Where repeated equilibrium play leaves the network.

    If some node is influential enough at every campaign the only rest
    point is consensus on eta. Otherwise every consensus value inside the
    low-regime interval of the strongest node is a rest point.
    """
    r = rho_max(rho_per_stage)
    s = params.lambda_sum
    if r / s > 1:
        return EquilibriumPrediction(r, EquilibriumRegime.UNIQUE_ETA, params.eta)
    interval = (1 - params.lambda1 / r, params.lambda2 / r)
    return EquilibriumPrediction(r, EquilibriumRegime.FAMILY, params.eta, interval)


def contraction_trace(history: History, target: float) -> list[float]:
    return [float(np.max(np.abs(r.x_pre - target))) for r in history.records]


def convergence_stage(history: History, target: float | None = None,
                      tol: float = PRACTICAL_CONVERGENCE_TOL) -> int | None:
    """First campaign whose pre-campaign state is within ``tol`` of ``target`` in sup norm."""
    target = history.params.eta if target is None else target
    for k, dist in enumerate(contraction_trace(history, target), start=1):
        if dist < tol:
            return k
    return None


def _check_comparable(a: History, b: History) -> None:
    if a.params != b.params:
        raise ParameterError("histories were run with different game parameters")
    if a.x0.shape != b.x0.shape or not np.array_equal(a.x0, b.x0):
        raise ParameterError("histories start from different initial states")
    if a.laplacian.shape != b.laplacian.shape or not np.array_equal(a.laplacian, b.laplacian):
        raise ParameterError("histories were run on different graphs")


@dataclass(frozen=True)
class SustainabilityResult:
    player1: bool
    player2: bool
    utilities: tuple[float, float]
    baseline: tuple[float, float]

    @property
    def sustainable(self) -> bool:
        return self.player1 and self.player2


def check_sustainability(history_cs: History, history_ne: History) -> SustainabilityResult:
    """Does the candidate profile weakly Pareto-dominate the equilibrium baseline?"""
    _check_comparable(history_cs, history_ne)
    cs = long_term_utility(history_cs)
    ne = long_term_utility(history_ne)
    return SustainabilityResult(cs[0] >= ne[0], cs[1] >= ne[1], cs, ne)


def utility_gap_decomposition(history_cs: History, history_ne: History, k1: int) -> tuple[float, float]:
    """Summed payoff gain of stopping after ``k1`` campaigns, stage by stage.

    For marketer 1 each later stage contributes
    ``rho . (x_cs(t_k) - x_ne(t_k+)) + lambda1 * sum(a1_ne(k))``, marketer 2
    symmetrically. The totals equal ``K`` times the long-term utility gap.
    """
    _check_comparable(history_cs, history_ne)
    p = history_ne.params
    g1 = g2 = 0.0
    for cs, ne in zip(history_cs.records[k1:], history_ne.records[k1:]):
        drift = float(ne.rho.rho @ (cs.x_pre - ne.x_post))
        g1 += drift + p.lambda1 * float(ne.a1.sum())
        g2 += -drift + p.lambda2 * float(ne.a2.sum())
    return g1, g2


@dataclass(frozen=True)
class CertificateResult:
    """Outcome of the sufficient test for coopetition sustainability."""

    delta: float
    near_eta: bool
    below_margin: bool
    below_payoff_bound: tuple[bool, bool]
    margin: float
    payoff_bounds: tuple[float, float]

    @property
    def passed(self) -> bool:
        return self.near_eta and self.below_margin and all(self.below_payoff_bound)

    def to_dict(self) -> dict:
        return {"delta": self.delta, "near_eta": self.near_eta, "below_margin": self.below_margin,
                "below_payoff_bound": list(self.below_payoff_bound), "margin": self.margin,
                "payoff_bounds": list(self.payoff_bounds), "passed": self.passed}


def sustainability_certificate(history: History, k1: int, delta: float | None = None) -> CertificateResult:
    """Check the sufficient conditions for stopping after ``k1`` campaigns.

    Three conditions on a radius ``delta``:

    * every opinion at campaign ``k1 + 1`` is within ``delta`` of eta;
    * ``delta < min(eta, 1 - eta) * (rho_max / (lambda1 + lambda2) - 1)``;
    * for both marketers and every campaign ``k > k1``,
      ``delta <= lam_i * rho_max * lam_i / (2 R_k S^2) / (1 + lam_i / (2 R_k))``
      with ``R_k = sum(rho(k))`` and ``S = lambda1 + lambda2``.

    ``delta`` defaults to the observed sup-norm distance at campaign
    ``k1 + 1``. Passing is sufficient for sustainability, not necessary.
    ``history`` may be either the equilibrium or the coopetition run; they
    coincide up to campaign ``k1 + 1``.
    """
    p = history.params
    if not history.complete:
        raise ParameterError("certificate needs a complete history")
    if not 0 <= k1 < p.n_stages:
        raise ParameterError(f"k1 must lie in 0..{p.n_stages - 1}, got {k1}")
    r_max = rho_max(history.rho_per_stage)
    s = p.lambda_sum
    if not r_max > s:
        raise InapplicableRegimeError(
            f"rho_max = {r_max:.6g} does not exceed lambda1 + lambda2 = {s:.6g}"
        )
    eta = p.eta
    deviation = float(np.max(np.abs(history.records[k1].x_pre - eta)))
    if delta is None:
        delta = deviation
    if not 0 <= delta < 1:
        raise ParameterError(f"delta must lie in [0, 1), got {delta}")

    margin = min(eta, 1 - eta) * (r_max / s - 1)
    bounds = []
    for lam in (p.lambda1, p.lambda2):
        per_stage = []
        for rec in history.records[k1:]:
            total = rec.rho.total
            per_stage.append(lam * (r_max * lam / (2 * total * s**2)) / (1 + lam / (2 * total)))
        bounds.append(min(per_stage))
    return CertificateResult(
        delta=float(delta),
        near_eta=deviation <= delta,
        below_margin=delta < margin,
        below_payoff_bound=(delta <= bounds[0], delta <= bounds[1]),
        margin=margin,
        payoff_bounds=(bounds[0], bounds[1]),
    )
