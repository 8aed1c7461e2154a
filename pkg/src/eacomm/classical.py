"""Exact classical bounds for d-symbol messages.

Shared randomness cannot beat the best deterministic strategy on a linear
score, so the maximum is found by enumerating one side of the strategy
(all encoders, or all decoder tuples) and optimising the other side
pointwise. The cheaper side is chosen automatically.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .qcore import ValidationError
from .scenario import Behavior, GameFunctional, evaluate

__all__ = [
    "DeterministicStrategy",
    "BoundResult",
    "BudgetExceededError",
    "enumeration_costs",
    "max_classical_value",
    "strategy_behavior",
    "verify_strategy",
]

DEFAULT_BUDGET = 10**9
# Work per vectorised block (array elements), keeps peak memory to ~100 MB.
_BLOCK = 1 << 22


class BudgetExceededError(RuntimeError):
    pass


@dataclass(frozen=True)
class DeterministicStrategy:
    """Encoder ``x -> m`` and decoders ``(y, m) -> b``, all 0-based."""

    d: int
    encoder: tuple[int, ...]
    decoders: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("alphabet size must be at least 1")
        if any(not 0 <= m < self.d for m in self.encoder):
            raise ValidationError("encoder uses a message outside the alphabet")
        if any(len(dec) != self.d for dec in self.decoders):
            raise ValidationError("each decoder must be defined on all d messages")

    def to_dict(self) -> dict:
        return {"encoder": list(self.encoder), "decoders": [list(d) for d in self.decoders]}


@dataclass(frozen=True)
class BoundResult:
    value: float
    witness: DeterministicStrategy
    enumerated_side: str
    count: int

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "d": self.witness.d,
            "enumeratedSide": self.enumerated_side,
            "count": self.count,
            "witness": self.witness.to_dict(),
        }


def enumeration_costs(functional: GameFunctional, d: int) -> dict[str, float]:
    """log10 of the elementary work for enumerating each side."""
    n_x, n_y, n_b = functional.scenario.shape
    return {
        "encoders": n_x * math.log10(d) + math.log10(n_x * n_y * n_b),
        "decoders": n_y * d * math.log10(n_b) + math.log10(n_x * d),
    }


def strategy_behavior(functional: GameFunctional, strategy: DeterministicStrategy) -> Behavior:
    scen = functional.scenario
    if len(strategy.encoder) != scen.n_x or len(strategy.decoders) != scen.n_y:
        raise ValidationError("strategy does not match the scenario")
    table = np.zeros(scen.shape)
    for x, m in enumerate(strategy.encoder):
        for y, dec in enumerate(strategy.decoders):
            b = dec[m]
            if not 0 <= b < scen.n_b:
                raise ValidationError(f"decoder {y + 1} outputs invalid outcome {b}")
            table[x, y, b] = 1.0
    return Behavior(scen, table)


def verify_strategy(functional: GameFunctional, strategy: DeterministicStrategy) -> float:
    return evaluate(functional, strategy_behavior(functional, strategy))


def _digits(idx: np.ndarray, base: int, width: int) -> np.ndarray:
    """Base-``base`` digits of each index, most significant first."""
    out = np.empty((idx.size, width), dtype=np.int64)
    rem = idx.copy()
    for k in range(width - 1, -1, -1):
        rem, out[:, k] = np.divmod(rem, base)
    return out


def _scan_encoders(c: np.ndarray, d: int):
    """Enumerate all ``d**n_x`` encoders; decoders chosen pointwise."""
    n_x, n_y, n_b = c.shape
    total = d ** n_x
    flat = c.reshape(n_x, n_y * n_b)
    chunk = max(1, _BLOCK // (n_x + d * n_y * n_b))
    best_raw, best_idx = -np.inf, -1
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        enc = _digits(idx, d, n_x)
        rows = np.arange(idx.size)
        mass = np.zeros((idx.size, d, n_y * n_b))
        for x in range(n_x):
            mass[rows, enc[:, x]] += flat[x]
        raw = mass.reshape(idx.size, d, n_y, n_b).max(axis=3).sum(axis=(1, 2))
        k = int(np.argmax(raw))
        if raw[k] > best_raw:
            best_raw, best_idx = raw[k], int(idx[k])
    enc = tuple(int(m) for m in _digits(np.array([best_idx]), d, n_x)[0])
    onehot = (np.array(enc)[:, None] == np.arange(d)).astype(float)
    mass = np.einsum("xm,xyb->ymb", onehot, c)
    decoders = tuple(tuple(int(b) for b in row) for row in mass.argmax(axis=2))
    return DeterministicStrategy(d, enc, decoders), total


def _scan_decoders(c: np.ndarray, d: int):
    """Enumerate all decoder tuples; the encoder is chosen pointwise per input."""
    n_x, n_y, n_b = c.shape
    per_y = n_b ** d
    funcs = _digits(np.arange(per_y, dtype=np.int64), n_b, d)  # (j, m) -> b
    # table[y][j, x, m] = c[x, y, funcs[j, m]]
    tables = [c[:, y, :][:, funcs].transpose(1, 0, 2) for y in range(n_y)]
    # Vectorise over the trailing questions, loop over the leading ones.
    n_inner = n_y
    while n_inner > 1 and per_y ** n_inner * n_x * d > _BLOCK:
        n_inner -= 1
    inner = np.zeros((1, n_x, d))
    for t in tables[n_y - n_inner:]:
        inner = (inner[:, None] + t[None]).reshape(-1, n_x, d)
    best_raw, best_key = -np.inf, None
    for outer in itertools.product(range(per_y), repeat=n_y - n_inner):
        base = sum((tables[y][j] for y, j in enumerate(outer)), np.zeros((n_x, d)))
        raw = (inner + base).max(axis=2).sum(axis=1)
        k = int(np.argmax(raw))
        if raw[k] > best_raw:
            best_raw, best_key = raw[k], (outer, k)
    outer, k = best_key
    inner_idx = tuple(int(j) for j in _digits(np.array([k]), per_y, n_inner)[0]) if n_inner else ()
    choice = tuple(outer) + inner_idx
    decoders = tuple(tuple(int(b) for b in funcs[j]) for j in choice)
    payoff = sum(tables[y][j] for y, j in enumerate(choice))
    encoder = tuple(int(m) for m in payoff.argmax(axis=1))
    return DeterministicStrategy(d, encoder, decoders), per_y ** n_y


def max_classical_value(
    functional: GameFunctional,
    d: int,
    budget: float = DEFAULT_BUDGET,
    side: str | None = None,
) -> BoundResult:
    """Largest score reachable by any classical strategy with a ``d``-symbol message.

    ``side`` forces ``"encoders"`` or ``"decoders"`` enumeration; by default
    the cheaper one is used, decoders on ties. Raises
    :class:`BudgetExceededError` when the chosen side costs more than
    ``budget`` elementary evaluations. Among optimal strategies the witness
    is the first in enumeration order.
    """
    if d < 1:
        raise ValueError("alphabet size must be at least 1")
    costs = enumeration_costs(functional, d)
    if side is None:
        side = "encoders" if costs["encoders"] < costs["decoders"] else "decoders"
    if side not in costs:
        raise ValueError(f"unknown side {side!r}")
    if costs[side] > math.log10(budget):
        raise BudgetExceededError(
            f"enumerating {side} needs ~1e{costs[side]:.1f} evaluations "
            f"(encoders ~1e{costs['encoders']:.1f}, decoders ~1e{costs['decoders']:.1f}), "
            f"budget {budget:.3g}"
        )
    c = np.asarray(functional.coefficients, dtype=float)
    scan = _scan_encoders if side == "encoders" else _scan_decoders
    witness, count = scan(c, d)
    return BoundResult(verify_strategy(functional, witness), witness, side, count)
