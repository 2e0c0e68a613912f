"""Hybrid opinion dynamics: consensus flow between campaigns, jumps at them.

Between campaigns the opinions follow ``dx/dt = -L x``; at a campaign the
two marketers' spends move each opinion to
``(x + a1) / (1 + a1 + a2)``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import NumericalQualityError, ParameterError
from .linalg import matrix_exponential

FINAL = "final"
INTEGRAL = "integral"
RHO_MODES = (FINAL, INTEGRAL)
_MODE_ALIASES = {"final": FINAL, "final-opinion": FINAL, "integral": INTEGRAL}

# floating-point slack tolerated before clamping turns into an error
CLAMP_TOL = 1e-12
OPINION_EPS = 1e-12

TRAJECTORY_COLUMNS = ("k", "t", "node", "opinion")


def opinion_vector(values) -> np.ndarray:
    """Validate and copy a network state; every entry must lie in (0, 1)."""
    x = np.array(values, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ParameterError(f"opinions must be a non-empty 1-d vector, got shape {x.shape}")
    if not np.all((x > 0) & (x < 1)):
        bad = np.flatnonzero(~((x > 0) & (x < 1)))
        raise ParameterError(f"opinions must lie in (0, 1); offending nodes {list(bad + 1)[:10]}")
    return x


def action_vector(spends, n_nodes: int | None = None, budget: float | None = None) -> np.ndarray:
    """Validate and copy one marketer's per-node spends."""
    a = np.array(spends, dtype=float)
    if a.ndim != 1:
        raise ParameterError(f"actions must be a 1-d vector, got shape {a.shape}")
    if n_nodes is not None and a.size != n_nodes:
        raise ParameterError(f"actions have {a.size} entries, expected {n_nodes}")
    if not np.all(np.isfinite(a)) or np.any(a < 0):
        raise ParameterError("spends must be finite and non-negative")
    if budget is not None and a.sum() > budget * (1 + 1e-12):
        raise ParameterError(f"total spend {a.sum():.6g} exceeds budget {budget:.6g}")
    return a


def _square(L) -> np.ndarray:
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ParameterError(f"Laplacian must be square, got shape {L.shape}")
    return L


def propagator(L, duration: float) -> np.ndarray:
    """``exp(-L * duration)``, a row-stochastic matrix with non-negative entries."""
    L = _square(L)
    if not duration >= 0:
        raise ParameterError(f"duration must be non-negative, got {duration}")
    P = matrix_exponential(-duration * L)
    if P.size and P.min() < -CLAMP_TOL:
        raise NumericalQualityError(f"propagator has entry {P.min():.3e} below zero")
    return np.maximum(P, 0.0)


def _keep_open(x: np.ndarray) -> np.ndarray:
    return np.clip(x, OPINION_EPS, 1 - OPINION_EPS)


def flow(x, L, duration: float) -> np.ndarray:
    """Evolve opinions under the consensus flow for ``duration`` time units."""
    x = opinion_vector(x)
    L = _square(L)
    if L.shape[0] != x.size:
        raise ParameterError(f"state has {x.size} nodes but Laplacian is {L.shape[0]}x{L.shape[0]}")
    if duration == 0:
        return x
    return _keep_open(propagator(L, duration) @ x)


def jump(x, a1, a2) -> np.ndarray:
    """Apply one campaign: node ``n`` moves to ``(x_n + a1_n) / (1 + a1_n + a2_n)``."""
    x = opinion_vector(x)
    a1 = action_vector(a1, x.size)
    a2 = action_vector(a2, x.size)
    return _keep_open((x + a1) / (1.0 + a1 + a2))


@dataclass(frozen=True)
class InfluencePower:
    """Per-node weight of the post-campaign opinion in a stage payoff."""

    rho: np.ndarray
    duration: float
    mode: str = FINAL
    stage: int | None = None

    @property
    def total(self) -> float:
        return float(self.rho.sum())

    @property
    def max(self) -> float:
        return float(self.rho.max())

    def __len__(self):
        return self.rho.size


def normalize_mode(mode: str) -> str:
    try:
        return _MODE_ALIASES[mode]
    except KeyError:
        raise ParameterError(f"unknown rho mode {mode!r}; expected one of {RHO_MODES}") from None


def _integrated_row(L: np.ndarray, duration: float, tol: float, max_panels: int) -> np.ndarray:
    # composite Simpson on s -> 1^T exp(-L s), refined until two passes agree
    n = L.shape[0]
    previous = None
    panels = 16
    while panels <= max_panels:
        h = duration / panels
        step = propagator(L, h)
        row = np.ones(n)
        acc = row.copy()
        for j in range(1, panels + 1):
            row = row @ step
            weight = 1.0 if j == panels else (4.0 if j % 2 else 2.0)
            acc += weight * row
        estimate = acc * h / 3.0
        if previous is not None and np.max(np.abs(estimate - previous)) <= tol:
            return estimate
        previous = estimate
        panels *= 2
    raise NumericalQualityError(f"integral influence power did not settle within {max_panels} panels")


def influence_power(L, duration: float, mode: str = FINAL, stage: int | None = None,
                    tol: float = 1e-8, max_panels: int = 1 << 14) -> InfluencePower:
    """Influence power of every node for a campaign lasting ``duration``.

    ``final`` mode weights the opinion at the end of the campaign window,
    ``rho^T = 1^T exp(-L T)``, whose entries sum to N. ``integral`` mode
    weights the opinion integrated over the window,
    ``rho^T = 1^T int_0^T exp(-L s) ds``, whose entries sum to ``N T``.
    """
    L = _square(L)
    mode = normalize_mode(mode)
    if not duration > 0:
        raise ParameterError(f"campaign duration must be positive, got {duration}")
    if mode == FINAL:
        rho = propagator(L, duration).sum(axis=0)
    else:
        rho = _integrated_row(L, duration, tol, max_panels)
    rho.setflags(write=False)
    return InfluencePower(rho, float(duration), mode, stage)


def sample_flow(x_start, L, t_start: float, duration: float, samples: int) -> list[tuple[float, np.ndarray]]:
    """Opinions at ``samples`` evenly spaced times in ``[t_start, t_start + duration)``."""
    if samples < 1:
        raise ParameterError("need at least one sample per stage")
    x = opinion_vector(x_start)
    out = [(float(t_start), x)]
    if samples == 1 or duration == 0:
        return out
    step = propagator(L, duration / samples)
    for j in range(1, samples):
        x = _keep_open(step @ x)
        out.append((t_start + j * duration / samples, x))
    return out


def write_trajectory_csv(rows: Iterable[tuple[int, float, np.ndarray]], path,
                         nodes: Iterable[int] | None = None) -> None:
    """Write ``(k, t, node, opinion)`` rows, one per sampled node and time.

    ``rows`` yields ``(stage, time, state)``; ``nodes`` (1-based) restricts
    the output, defaulting to all nodes.
    """
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRAJECTORY_COLUMNS)
        for k, t, state in rows:
            selected = range(1, len(state) + 1) if nodes is None else nodes
            for node in selected:
                writer.writerow((k, repr(float(t)), node, repr(float(state[node - 1]))))
    tmp.replace(path)
