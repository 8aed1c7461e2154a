"""Communication scenarios, behaviors and linear figures of merit.

Arrays are indexed ``[x, y, b]`` with 0-based positions. The CSV format and
anything user-facing use 1-based ``x`` and ``y``; outcomes are written with
the scenario's ``outcome_labels`` (``+1/-1`` for the S task, ``1..4`` for the
R task, ``0/1`` for the T task).
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .qcore import ValidationError, isotropic_mix

if TYPE_CHECKING:
    from .protocols import EAQProtocol

__all__ = [
    "Scenario",
    "Behavior",
    "GameFunctional",
    "S_COEFFICIENTS",
    "functional_S",
    "functional_RAC",
    "rac_digits",
    "evaluate",
    "behavior_from_protocol",
    "uniform_behavior",
    "read_behavior_csv",
    "write_behavior_csv",
]


@dataclass(frozen=True)
class Scenario:
    n_x: int
    n_y: int
    n_b: int
    outcome_labels: tuple = ()

    def __post_init__(self):
        if min(self.n_x, self.n_y, self.n_b) < 1:
            raise ValueError("scenario sizes must be positive")
        if not self.outcome_labels:
            object.__setattr__(self, "outcome_labels", tuple(range(1, self.n_b + 1)))
        if len(self.outcome_labels) != self.n_b:
            raise ValueError("need one label per outcome")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n_x, self.n_y, self.n_b)

    def outcome_index(self, label) -> int:
        for k, lab in enumerate(self.outcome_labels):
            if str(lab) == str(label).lstrip("+") or str(lab) == str(label):
                return k
        raise ValueError(f"unknown outcome label {label!r} (expected one of {self.outcome_labels})")


@dataclass(frozen=True, eq=False)
class Behavior:
    """Table of conditional probabilities ``p(b|x,y)``.

    Unreported cells are NaN (experimental tables only list some outcomes).
    ``sum_tol`` bounds the normalisation error on fully reported ``(x, y)``
    rows; partially reported rows are only required not to exceed one.
    """

    scenario: Scenario
    table: np.ndarray
    errors: np.ndarray | None = None
    sum_tol: float = 1e-9

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.shape != self.scenario.shape:
            raise ValidationError(f"behavior shape {t.shape} != scenario {self.scenario.shape}")
        known = ~np.isnan(t)
        if np.any(t[known] < -self.sum_tol) or np.any(t[known] > 1 + self.sum_tol):
            raise ValidationError("probabilities must lie in [0, 1]")
        sums = np.nansum(t, axis=2)
        full = known.all(axis=2)
        if np.any(np.abs(sums[full] - 1) > self.sum_tol):
            raise ValidationError("outcome probabilities do not sum to one")
        if np.any(sums[~full] > 1 + self.sum_tol):
            raise ValidationError("reported probabilities exceed one")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def is_partial(self) -> bool:
        return bool(np.isnan(self.table).any())

    def mix(self, other: "Behavior", alpha: float) -> "Behavior":
        """``alpha * self + (1 - alpha) * other``."""
        return Behavior(self.scenario, alpha * self.table + (1 - alpha) * other.table,
                        sum_tol=max(self.sum_tol, other.sum_tol))


@dataclass(frozen=True, eq=False)
class GameFunctional:
    """Linear score ``normalization * Σ c[x,y,b] p(b|x,y)``."""

    scenario: Scenario
    coefficients: np.ndarray
    normalization: float = 1.0
    label: str = ""

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.shape != self.scenario.shape:
            raise ValueError(f"coefficient shape {c.shape} != scenario {self.scenario.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def scaled(self) -> np.ndarray:
        return self.normalization * self.coefficients

    def negated(self) -> "GameFunctional":
        return GameFunctional(self.scenario, -self.coefficients, self.normalization,
                              f"-{self.label}")


S_COEFFICIENTS = np.array([
    [1, 1, 1, 0, 0, 0],
    [-1, 0, 0, 1, 0, 0],
    [-1, 0, 0, -1, 1, 0],
    [0, -1, 0, -1, -1, 1],
    [0, 0, -1, -1, -1, -1],
], dtype=float)


def functional_S() -> GameFunctional:
    """Five inputs, six binary questions; only the ``b=+1`` answer scores."""
    scen = Scenario(5, 6, 2, (1, -1))
    c = np.zeros(scen.shape)
    c[:, :, 0] = S_COEFFICIENTS
    return GameFunctional(scen, c, 1.0, "S")


def rac_digits(x: int, n_data: int, n_values: int) -> tuple[int, ...]:
    """Data string of input index ``x``, most significant entry first."""
    digits = []
    for _ in range(n_data):
        x, r = divmod(x, n_values)
        digits.append(r)
    return tuple(reversed(digits))


def functional_RAC(n_data: int, n_values: int, max_inputs: int = 2**24) -> GameFunctional:
    """Random access code: recover entry ``y`` of an ``n_data``-long string.

    Input ``x`` enumerates strings in base ``n_values`` with the first entry
    most significant. Outcome labels are ``1..n_values``, except for binary
    strings where they are the bit values ``0, 1``.
    """
    if n_data < 1 or n_values < 2:
        raise ValueError("need n_data >= 1 and n_values >= 2")
    n_x = n_values ** n_data
    if n_x > max_inputs:
        raise ValueError(f"{n_values}^{n_data} inputs exceeds the limit of {max_inputs}")
    labels = (0, 1) if n_values == 2 else tuple(range(1, n_values + 1))
    scen = Scenario(n_x, n_data, n_values, labels)
    c = np.zeros(scen.shape)
    for x in range(n_x):
        for y, v in enumerate(rac_digits(x, n_data, n_values)):
            c[x, y, v] = 1.0
    name = {(2, 4): "R", (3, 2): "T"}.get((n_data, n_values), f"RAC({n_data},{n_values})")
    return GameFunctional(scen, c, 1.0 / (n_x * n_data), name)


def evaluate(functional: GameFunctional, behavior: Behavior) -> float:
    if functional.scenario.shape != behavior.scenario.shape:
        raise ValidationError(
            f"scenario mismatch: {functional.scenario.shape} vs {behavior.scenario.shape}"
        )
    c = functional.coefficients
    p = behavior.table
    used = c != 0
    if np.isnan(p[used]).any():
        missing = np.argwhere(used & np.isnan(p))[0]
        raise ValidationError(f"behavior lacks cell (x,y,b)={tuple(int(i) + 1 for i in missing)}")
    raw = float(np.sum(c[used] * p[used]))
    return functional.normalization * raw


def uniform_behavior(scenario: Scenario) -> Behavior:
    return Behavior(scenario, np.full(scenario.shape, 1.0 / scenario.n_b))


def behavior_from_protocol(protocol: "EAQProtocol", visibility: float | None = None) -> Behavior:
    """Born-rule behavior of a protocol, optionally with isotropic noise on the shared pair."""
    v = 1.0 if visibility is None else visibility
    rho = isotropic_mix(protocol.shared, v)
    effects = protocol.effects
    table = np.empty((protocol.n_x, protocol.n_y, protocol.n_b))
    for x, u in enumerate(protocol.unitaries):
        big = np.kron(u, np.eye(2))
        rx = big @ rho @ big.conj().T
        # Tr(E rho) for all (y, b) at once; E and rho are Hermitian.
        table[x] = np.einsum("ybij,ji->yb", effects, rx).real
    table = np.clip(table, 0.0, 1.0)
    return Behavior(protocol.scenario, table)


def read_behavior_csv(source, scenario: Scenario, sum_tol: float = 0.02) -> Behavior:
    """Parse the ``x,y,b,p[,err]`` format into a (possibly partial) behavior.

    ``source`` is a path or an open text stream. Parse errors carry the line
    number of the offending row.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            text = fh.read()
    else:
        text = source.read()
    rows = list(csv.reader(io.StringIO(text)))
    rows = [(i + 1, r) for i, r in enumerate(rows) if r and any(cell.strip() for cell in r)]
    if not rows:
        raise ValueError("empty behavior file")
    lineno, header = rows[0]
    header = [h.strip() for h in header]
    if header[:4] != ["x", "y", "b", "p"] or len(header) > 5 or (len(header) == 5 and header[4] != "err"):
        raise ValueError(f"line {lineno}: expected header x,y,b,p[,err], got {','.join(header)}")
    table = np.full(scenario.shape, np.nan)
    errors = np.full(scenario.shape, np.nan)
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise ValueError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            x, y = int(row[0]), int(row[1])
            b = scenario.outcome_index(row[2].strip())
            p = float(row[3])
            err = float(row[4]) if len(row) == 5 else np.nan
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if not (1 <= x <= scenario.n_x and 1 <= y <= scenario.n_y):
            raise ValueError(f"line {lineno}: setting ({x},{y}) out of range")
        if not 0 <= p <= 1:
            raise ValueError(f"line {lineno}: probability {p} outside [0, 1]")
        if not np.isnan(table[x - 1, y - 1, b]):
            raise ValueError(f"line {lineno}: duplicate cell ({x},{y},{row[2].strip()})")
        table[x - 1, y - 1, b] = p
        errors[x - 1, y - 1, b] = err
    if np.isnan(table).all():
        raise ValueError("behavior file has a header but no rows")
    return Behavior(scenario, table, errors, sum_tol=sum_tol)


def write_behavior_csv(behavior: Behavior, dest) -> None:
    """Write every reported cell; the ``err`` column is added when errors exist."""
    with_err = behavior.errors is not None
    own = isinstance(dest, (str, os.PathLike))
    fh = open(dest, "w", newline="") if own else dest
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "b", "p", "err"] if with_err else ["x", "y", "b", "p"])
        labels = behavior.scenario.outcome_labels
        for x, y, b in zip(*np.nonzero(~np.isnan(behavior.table))):
            row = [x + 1, y + 1, labels[b], repr(float(behavior.table[x, y, b]))]
            if with_err:
                row.append(repr(float(behavior.errors[x, y, b])))
            w.writerow(row)
    finally:
        if own:
            fh.close()
