"""Event simulation, score estimation and significance of a violation.

Events are processed as count tables: an estimate only needs how often each
``(x, y, b)`` cell occurred, so arbitrarily long streams fit in constant
memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Iterator

import numpy as np

from .scenario import Behavior, GameFunctional, Scenario, evaluate, read_behavior_csv

__all__ = [
    "EventRecord",
    "Events",
    "CertificationInput",
    "uniform_settings",
    "simulate_events",
    "count_events",
    "estimate_score",
    "azuma_log_bound",
    "azuma_bound",
    "sigma_violation",
    "ingest_results_table",
    "fixture_path",
    "certification_input",
    "certify",
    "TABLE6_AGGREGATE_ERROR",
    "REPORTED_AGGREGATE_ERROR",
    "S_ROUNDS",
    "EVENTS_PER_SETTING",
    "default_rounds",
    "propagated_error",
]

# Aggregate uncertainties reported alongside the bundled tables; the per-cell
# errors in the fixtures do not include the systematic part.
REPORTED_AGGREGATE_ERROR = {"S": 0.009, "T": 0.003}
TABLE6_AGGREGATE_ERROR = REPORTED_AGGREGATE_ERROR["T"]
# About 18 million events were collected per setting.
EVENTS_PER_SETTING = 18 * 10**6
S_ROUNDS = EVENTS_PER_SETTING * 30


@dataclass(frozen=True)
class EventRecord:
    x: int
    y: int
    b: int


@dataclass(frozen=True, eq=False)
class Events:
    """A batch of events as parallel 0-based index arrays."""

    x: np.ndarray
    y: np.ndarray
    b: np.ndarray

    def __len__(self) -> int:
        return int(self.x.size)

    def records(self) -> Iterator[EventRecord]:
        for x, y, b in zip(self.x, self.y, self.b):
            yield EventRecord(int(x), int(y), int(b))


def uniform_settings(scenario: Scenario) -> np.ndarray:
    return np.full((scenario.n_x, scenario.n_y), 1.0 / (scenario.n_x * scenario.n_y))


def _check_settings(dist: np.ndarray, scenario: Scenario) -> np.ndarray:
    dist = np.asarray(dist, dtype=float)
    if dist.shape != (scenario.n_x, scenario.n_y):
        raise ValueError(f"setting distribution must have shape {(scenario.n_x, scenario.n_y)}")
    if np.any(dist < 0) or abs(dist.sum() - 1) > 1e-9:
        raise ValueError("setting distribution must be non-negative and sum to one")
    return dist


def simulate_events(behavior: Behavior, settings: np.ndarray, n: int, seed=None,
                    chunk: int = 1 << 20) -> Iterator[Events]:
    """I.i.d. rounds: ``(x, y)`` from ``settings``, then ``b ~ p(.|x,y)``.

    Yields batches of at most ``chunk`` events; the stream is a deterministic
    function of ``seed``.
    """
    if n < 1:
        raise ValueError("need at least one event")
    if behavior.is_partial:
        raise ValueError("cannot sample from a partial behavior")
    scen = behavior.scenario
    dist = _check_settings(settings, scen).ravel()
    cdf = np.cumsum(behavior.table.reshape(-1, scen.n_b), axis=1)
    cdf[:, -1] = 1.0
    rng = np.random.default_rng(seed)
    done = 0
    while done < n:
        m = min(chunk, n - done)
        xy = rng.choice(dist.size, size=m, p=dist)
        u = rng.random(m)
        b = (u[:, None] >= cdf[xy]).sum(axis=1)
        x, y = np.divmod(xy, scen.n_y)
        yield Events(x, y, np.minimum(b, scen.n_b - 1))
        done += m


def count_events(stream: Events | Iterable[Events] | Iterable[EventRecord],
                 scenario: Scenario) -> np.ndarray:
    """Accumulate a stream into an ``(n_x, n_y, n_b)`` count table."""
    counts = np.zeros(scenario.shape, dtype=np.int64)
    size = counts.size
    if isinstance(stream, Events):
        stream = (stream,)
    pending = []
    for item in stream:
        if isinstance(item, EventRecord):
            pending.append((item.x, item.y, item.b))
            continue
        flat = np.ravel_multi_index((item.x, item.y, item.b), scenario.shape)
        counts += np.bincount(flat, minlength=size).reshape(scenario.shape)
    if pending:
        x, y, b = np.array(pending).T
        flat = np.ravel_multi_index((x, y, b), scenario.shape)
        counts += np.bincount(flat, minlength=size).reshape(scenario.shape)
    return counts


def estimate_score(stream, functional: GameFunctional, settings: np.ndarray) -> float:
    """Importance-weighted estimator ``(1/N) Σ_i Σ c χ(event_i) / p(x,y)``.

    ``stream`` may also be a precomputed count table.
    """
    scen = functional.scenario
    dist = _check_settings(settings, scen)
    counts = stream if isinstance(stream, np.ndarray) else count_events(stream, scen)
    n = int(counts.sum())
    if n == 0:
        raise ValueError("empty event stream")
    seen = counts.sum(axis=2) > 0
    if np.any(seen & (dist == 0)):
        raise ValueError("stream contains a setting with zero probability")
    with np.errstate(divide="ignore", invalid="ignore"):
        weights = np.where(dist > 0, 1.0 / dist, 0.0)
    total = np.sum(functional.coefficients * counts * weights[:, :, None])
    return functional.normalization * float(total) / n


@dataclass(frozen=True, eq=False)
class CertificationInput:
    """Inputs to the Azuma-Hoeffding tail bound for a linear score.

    ``c_max`` is ``max c/p(x,y)`` and ``t_bound`` the classical bound on the
    negated score, both in the same units as ``mu``.
    """

    mu: float
    n: int
    c_max: float
    t_bound: float
    settings: np.ndarray | None = None

    def __post_init__(self):
        if self.settings is not None:
            dist = np.asarray(self.settings, dtype=float)
            if np.any(dist < 0) or abs(dist.sum() - 1) > 1e-9:
                raise ValueError("setting distribution must be non-negative and sum to one")
        if self.n < 1:
            raise ValueError("N must be at least 1")
        if self.mu < 0:
            raise ValueError("mu must be non-negative")
        if self.c_max + self.t_bound <= 0:
            raise ValueError("c_max + t_bound must be positive")


def azuma_log_bound(inp: CertificationInput) -> float:
    """Natural log of ``exp(-2 N mu² / (c + T)²)``."""
    return -2.0 * inp.n * inp.mu ** 2 / (inp.c_max + inp.t_bound) ** 2


def azuma_bound(inp: CertificationInput) -> float:
    """Upper bound on the p-value of the observed violation.

    When the exact value underflows double precision the smallest positive
    double is returned, which is still a valid upper bound.
    """
    return max(math.exp(azuma_log_bound(inp)), math.ulp(0.0))


def sigma_violation(measured: float, error: float, bound: float) -> float:
    if not error > 0:
        raise ValueError("error must be positive")
    return (measured - bound) / error


def default_rounds(functional: GameFunctional) -> int:
    """Rounds in an experiment with the usual event count per setting."""
    return EVENTS_PER_SETTING * functional.scenario.n_x * functional.scenario.n_y


def propagated_error(functional: GameFunctional, behavior: Behavior) -> float:
    """Score uncertainty from independent per-cell errors."""
    if behavior.errors is None:
        raise ValueError("behavior carries no per-cell errors")
    c = functional.coefficients * functional.normalization
    err = np.nan_to_num(behavior.errors)
    return float(np.sqrt(np.sum((c * err) ** 2)))


def fixture_path(name: str):
    """Path to a bundled results table (``table3.csv`` or ``table6.csv``)."""
    return resources.files("eacomm") / "data" / name


def ingest_results_table(source, functional: GameFunctional, sum_tol: float = 0.02) -> Behavior:
    """Read an experimental results table for the functional's scenario.

    ``source`` may be a path, a stream, or the name of a bundled fixture.
    """
    if isinstance(source, str) and source in ("table3.csv", "table6.csv"):
        with fixture_path(source).open() as fh:
            return read_behavior_csv(fh, functional.scenario, sum_tol)
    return read_behavior_csv(source, functional.scenario, sum_tol)


def certification_input(functional: GameFunctional, settings: np.ndarray, score: float,
                        classical_bound: float, n: int, d: int = 4) -> CertificationInput:
    """Azuma inputs for a score compared against the classical ``d``-symbol bound."""
    from .classical import max_classical_value

    dist = _check_settings(settings, functional.scenario)
    scaled = functional.scaled()
    per_setting = np.abs(scaled).max(axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(dist > 0, per_setting / dist, 0.0)
    t_bound = max_classical_value(functional.negated(), d).value
    return CertificationInput(mu=max(score - classical_bound, 0.0), n=n,
                              c_max=float(ratio.max()), t_bound=t_bound, settings=dist)


def certify(behavior: Behavior, functional: GameFunctional, error: float,
            n: int, d: int = 4) -> dict:
    """Score, σ-distance to the classical ``d``-symbol bound and the Azuma bound."""
    from .classical import max_classical_value

    score = evaluate(functional, behavior)
    bound = max_classical_value(functional, d).value
    settings = uniform_settings(functional.scenario)
    inp = certification_input(functional, settings, score, bound, n, d)
    return {
        "schema": 1,
        "score": score,
        "bound": bound,
        "mu": inp.mu,
        "sigmaViolation": sigma_violation(score, error, bound),
        "pValueUpperBound": azuma_bound(inp),
        "logPValueUpperBound": azuma_log_bound(inp),
        "N": n,
        "cMax": inp.c_max,
        "tBound": inp.t_bound,
    }
