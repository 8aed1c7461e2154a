"""See-saw lower bounds for entanglement-assisted strategies.

Every sub-step holds all but one block of variables fixed and improves that
block, so the score never decreases within a run. Restarts use independent
seeds spawned from ``SeesawConfig.seed``.

Two strategy families are searched:

* ``seesaw_eaq``: shared two-qubit ket, one unitary per input on the
  sender's qubit, two-qubit measurement by the receiver. Restrictions:
  ``"product"`` (receiver observables ``A_y ⊗ B_y``) and ``"theta"``
  (shared ket fixed to ``cos(θ/2)|00⟩ + sin(θ/2)|11⟩``).
* ``seesaw_ent_bit``: shared entangled state, the sender measures her half
  and sends the one-bit outcome, the receiver measures his half.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import qcore
from .protocols import EAQProtocol, partially_entangled
from .qcore import PHI_PLUS
from .scenario import GameFunctional

__all__ = [
    "SeesawConfig",
    "SeesawResult",
    "EntBitStrategy",
    "SweepResult",
    "seesaw_eaq",
    "seesaw_ent_bit",
    "sweep_partial_entanglement",
    "ScoreDecreasedError",
]

RESTRICTIONS = ("none", "product", "theta", "entbit")


class ScoreDecreasedError(AssertionError):
    """A see-saw sub-step lowered the score beyond round-off."""


@dataclass(frozen=True)
class SeesawConfig:
    restarts: int = 50
    max_iters: int = 500
    tol: float = 1e-9
    seed: int = 0
    restriction: str = "none"
    theta: float | None = None
    local_dim: int = 2  # ent+bit only
    n_jobs: int | None = None

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.restriction not in RESTRICTIONS:
            raise ValueError(f"restriction must be one of {RESTRICTIONS}")
        if self.restriction == "theta":
            if self.theta is None or not 0 <= self.theta <= np.pi / 2 + 1e-12:
                raise ValueError("theta restriction needs theta in [0, pi/2]")

    def jobs(self) -> int:
        if self.n_jobs is not None:
            return max(1, self.n_jobs)
        return max(1, int(os.environ.get("EACOMM_THREADS", "1")))


@dataclass(frozen=True, eq=False)
class EntBitStrategy:
    """Shared ket plus sender and receiver projective measurements.

    ``sender[x, a]`` is the effect for outcome (and message) ``a`` given
    input ``x``; ``receiver[y, a, b]`` the effect for answer ``b`` to
    question ``y`` after message ``a``.
    """

    shared: np.ndarray
    sender: np.ndarray
    receiver: np.ndarray

    @property
    def local_dim(self) -> int:
        return self.sender.shape[-1]

    def behavior_table(self) -> np.ndarray:
        k = self.local_dim
        rho = np.outer(self.shared, self.shared.conj()).reshape(k, k, k, k)
        # p(b|x,y) = Σ_a <Ψ| A_{a|x} ⊗ B_{b|y,a} |Ψ>
        return np.einsum("xaij,yabkl,jlik->xyb", self.sender, self.receiver, rho).real

    def to_dict(self) -> dict:
        def reals(a):
            a = np.asarray(a, dtype=complex).ravel()
            return np.column_stack([a.real, a.imag]).ravel().tolist()

        return {"localDim": self.local_dim, "shared": reals(self.shared),
                "sender": reals(self.sender), "receiver": reals(self.receiver)}


@dataclass(frozen=True, eq=False)
class SeesawResult:
    value: float
    protocol: EAQProtocol | EntBitStrategy
    iterations: int
    converged: bool
    per_restart_values: tuple[float, ...]
    config: SeesawConfig = field(default_factory=SeesawConfig)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "converged": self.converged,
            "iterations": self.iterations,
            "restarts": self.config.restarts,
            "seed": self.config.seed,
            "restriction": self.config.restriction,
            "perRestartValues": list(self.per_restart_values),
            "protocol": self.protocol.to_dict(),
        }


# ---------------------------------------------------------------------------
# shared sub-steps


def _check_monotone(new: float, old: float, where: str) -> None:
    if new < old - 1e-9 * max(1.0, abs(old)):
        raise ScoreDecreasedError(f"{where}: score fell from {old!r} to {new!r}")


def _positive_projector(h: np.ndarray, prev: np.ndarray | None) -> np.ndarray:
    """Projector onto the positive eigenspace of ``h``.

    Null directions go wherever ``prev`` put most of their weight, so
    degenerate updates do not flip back and forth.
    """
    w, v = np.linalg.eigh(h)
    scale = max(1.0, float(np.abs(w).max()))
    keep = w > 1e-12 * scale
    null = np.abs(w) <= 1e-12 * scale
    if prev is not None and null.any():
        for k in np.flatnonzero(null):
            vk = v[:, k]
            keep[k] = np.vdot(vk, prev @ vk).real > 0.5
    vk = v[:, keep]
    return vk @ vk.conj().T


def _basis_projectors(basis: np.ndarray, labels: np.ndarray, n_b: int) -> np.ndarray:
    dim = basis.shape[0]
    out = np.zeros((n_b, dim, dim), dtype=complex)
    for k, b in enumerate(labels):
        out[b] += np.outer(basis[:, k], basis[:, k].conj())
    return out


def _best_measurement(q: np.ndarray, state: dict, inner: int = 10) -> np.ndarray:
    """Improve the measurement maximising ``Σ_b Tr(E_b q_b)``.

    Two outcomes are solved exactly (positive eigenspace of ``q_0 - q_1``).
    With more outcomes the measurement is a labelled orthonormal basis:
    each vector is relabelled to its best outcome, then the basis takes
    minorise-maximise steps ``basis <- polar([q_{l_k} e_k]_k)`` on the
    PSD-shifted operators, each of which cannot lower the objective.
    ``state`` carries the basis and labels between calls.
    """
    n_b = q.shape[0]
    if n_b == 2:
        e0 = _positive_projector(q[0] - q[1], state.get("prev"))
        state["prev"] = e0
        return np.array([e0, np.eye(q.shape[1]) - e0])
    basis, labels = state["basis"], state["labels"]
    shift = max(0.0, -min(np.linalg.eigvalsh(qb).min() for qb in q)) + 1e-3
    qs = q + shift * np.eye(q.shape[1])
    for _ in range(inner):
        vals = np.einsum("ik,bij,jk->kb", basis.conj(), qs, basis).real
        best = vals.argmax(axis=1)
        # keep current label on ties
        cur = vals[np.arange(len(labels)), labels]
        labels = np.where(vals[np.arange(len(labels)), best] > cur + 1e-14, best, labels)
        g = np.einsum("kij,jk->ik", qs[labels], basis)
        new = qcore.nearest_unitary(g)
        if np.allclose(new, basis, atol=1e-13, rtol=0):
            basis = new
            break
        basis = new
    state["basis"], state["labels"] = basis, labels
    return _basis_projectors(basis, labels, n_b)


def _init_measurement_state(rng: np.random.Generator, dim: int, n_b: int) -> dict:
    basis = qcore.random_unitary(rng, dim)
    labels = np.arange(dim) % n_b
    rng.shuffle(labels)
    return {"basis": basis, "labels": labels, "prev": _basis_projectors(basis, labels, n_b)[0]}


def _merge(results, config: SeesawConfig) -> SeesawResult:
    # max by value, earliest restart on ties
    best_i = max(range(len(results)), key=lambda i: (results[i][0], -i))
    value, proto, iters, conv = results[best_i]
    return SeesawResult(value, proto, iters, conv, tuple(r[0] for r in results), config)


def _run_restarts(worker, args_list, config: SeesawConfig):
    if config.jobs() > 1 and len(args_list) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs()) as pool:
            return list(pool.map(worker, args_list))
    return [worker(a) for a in args_list]


def _seeds(config: SeesawConfig) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(config.seed).spawn(config.restarts)


# ---------------------------------------------------------------------------
# qubit message with shared entanglement


def _coeffs(functional: GameFunctional) -> np.ndarray:
    return functional.normalization * np.asarray(functional.coefficients, dtype=float)


def _eaq_score(c: np.ndarray, kets: np.ndarray, effects: np.ndarray) -> float:
    probs = np.einsum("xi,ybij,xj->xyb", kets.conj(), effects, kets).real
    return float(np.sum(c * probs))


def _product_effects(a_vec: np.ndarray, b_vec: np.ndarray) -> np.ndarray:
    paulis = np.array([qcore.pauli(p) for p in "XYZ"])
    obs = np.kron(np.einsum("k,kij->ij", a_vec, paulis), np.einsum("k,kij->ij", b_vec, paulis))
    return np.array([(np.eye(4) + obs) / 2, (np.eye(4) - obs) / 2])


def _unit(v: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 1e-14 else fallback


def _product_update(delta: np.ndarray, a_vec, b_vec, inner: int = 50):
    """Alternate ``a ← Tr_B[(I⊗B)Δ]``-direction, ``b ← Tr_A[(A⊗I)Δ]``-direction.

    Each half-step maximises ``Tr((A⊗B)Δ)`` exactly over one unit Bloch vector.
    """
    paulis = np.array([qcore.pauli(p) for p in "XYZ"])
    d4 = delta.reshape(2, 2, 2, 2)
    for _ in range(inner):
        b_op = np.einsum("k,kij->ij", b_vec, paulis)
        m_a = np.einsum("ijkl,lj->ik", d4, b_op)  # Tr_B[(I⊗B)Δ]
        a_new = _unit(np.einsum("kij,ji->k", paulis, m_a).real, a_vec)
        a_op = np.einsum("k,kij->ij", a_new, paulis)
        m_b = np.einsum("ijkl,ki->jl", d4, a_op)  # Tr_A[(A⊗I)Δ]
        b_new = _unit(np.einsum("kij,ji->k", paulis, m_b).real, b_vec)
        done = np.allclose(a_new, a_vec, atol=1e-13) and np.allclose(b_new, b_vec, atol=1e-13)
        a_vec, b_vec = a_new, b_new
        if done:
            break
    return a_vec, b_vec


def _unitary_objective(h: np.ndarray, us: np.ndarray, psi_m: np.ndarray) -> np.ndarray:
    kets = (us @ psi_m).reshape(-1, 4)
    return np.einsum("xi,xij,xj->x", kets.conj(), h, kets).real


def _unitary_update(h: np.ndarray, us: np.ndarray, psi_m: np.ndarray, max_ent: bool,
                    inner: int = 10) -> np.ndarray:
    """Improve every ``U_x`` for ``max <ψ|(U_x†⊗I) h_x (U_x⊗I)|ψ>`` (batched over x).

    On a maximally entangled ket the top eigenvector of ``h_x``, pushed onto
    the maximally entangled set through its nearest unitary, is tried first.
    Then minorise-maximise steps ``U <- polar(H' (UΨ) Ψ†)`` with ``H'`` a
    PSD shift of ``h_x``; the objective is convex in ``U`` so a step never
    lowers it. Updates are kept only where they improve.
    """
    cur = _unitary_objective(h, us, psi_m)
    w, v = np.linalg.eigh(h)
    if max_ent:
        cand = qcore.nearest_unitary(np.sqrt(2) * v[:, :, -1].reshape(-1, 2, 2))
        val = _unitary_objective(h, cand, psi_m)
        better = val > cur
        us = np.where(better[:, None, None], cand, us)
        cur = np.where(better, val, cur)
    shifted = h - w[:, :1, None] * np.eye(4)
    for _ in range(inner):
        kets = (us @ psi_m).reshape(-1, 4, 1)
        g = (shifted @ kets).reshape(-1, 2, 2) @ psi_m.conj().T
        new = qcore.nearest_unitary(g)
        val = _unitary_objective(h, new, psi_m)
        better = val > cur + 1e-15
        if not better.any():
            break
        us = np.where(better[:, None, None], new, us)
        cur = np.where(better, val, cur)
    return us


def _eaq_restart(args):
    c, shared, restriction, seed, max_iters, tol, warm = args
    rng = np.random.default_rng(seed)
    n_x, n_y, n_b = c.shape
    psi_m = shared.reshape(2, 2)
    max_ent = np.allclose(qcore.schmidt_coefficients(shared), 1 / np.sqrt(2), atol=1e-12)

    if warm is not None:
        us = np.array(warm.unitaries)
    else:
        us = np.array([qcore.random_unitary(rng, 2) for _ in range(n_x)])
    if restriction == "product":
        ab = [(_unit(rng.standard_normal(3), np.array([0, 0, 1.0])),
               _unit(rng.standard_normal(3), np.array([0, 0, 1.0]))) for _ in range(n_y)]
        states = None
    else:
        states = [_init_measurement_state(rng, 4, n_b) for _ in range(n_y)]
        if warm is not None:
            for y, st in enumerate(states):
                st["prev"] = np.array(warm.effects[y, 0])
                if n_b > 2:
                    # eigenvectors of the warm projectors seed the labelled basis
                    vecs, labs = [], []
                    for b in range(n_b):
                        w, v = np.linalg.eigh(warm.effects[y, b])
                        for k in np.flatnonzero(w > 0.5):
                            vecs.append(v[:, k])
                            labs.append(b)
                    if len(vecs) == 4:
                        st["basis"] = qcore.nearest_unitary(np.array(vecs).T)
                        st["labels"] = np.array(labs)

    def kets_of(us_):
        return np.einsum("xij,jk->xik", us_, psi_m).reshape(n_x, 4)

    effects = np.zeros((n_y, n_b, 4, 4), dtype=complex)
    score = -np.inf
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        kets = kets_of(us)
        rhos = np.einsum("xi,xj->xij", kets, kets.conj())
        # receiver step
        for y in range(n_y):
            q = np.einsum("xb,xij->bij", c[:, y, :], rhos)
            if restriction == "product":
                delta = q[0] - q[1]
                ab[y] = _product_update(delta, *ab[y])
                effects[y] = _product_effects(*ab[y])
            else:
                effects[y] = _best_measurement(q, states[y])
        mid = _eaq_score(c, kets, effects)
        _check_monotone(mid, score, "receiver step")
        # sender step
        h = np.einsum("xyb,ybij->xij", c, effects)
        us = _unitary_update(h, us, psi_m, max_ent)
        new = _eaq_score(c, kets_of(us), effects)
        _check_monotone(new, mid, "sender step")
        if new - score < tol:
            score = new
            converged = True
            break
        score = new
    return score, us.copy(), effects.copy(), it, converged


def _shared_for(config: SeesawConfig) -> np.ndarray:
    if config.restriction == "theta":
        return partially_entangled(config.theta)
    return np.array(PHI_PLUS)


def seesaw_eaq(functional: GameFunctional, config: SeesawConfig = SeesawConfig(),
               warm_start=None) -> SeesawResult:
    """Best protocol found by alternating receiver and sender updates.

    ``warm_start`` (a protocol or a sequence of them) adds one extra run per
    protocol, seeded with its unitaries and effects; their values are
    reported after the random restarts.
    """
    if config.restriction == "entbit":
        return seesaw_ent_bit(functional, config)
    scen = functional.scenario
    if config.restriction == "product" and scen.n_b != 2:
        raise ValueError("product-observable restriction needs binary outcomes")
    c = _coeffs(functional)
    shared = _shared_for(config)
    jobs = [(c, shared, config.restriction, s, config.max_iters, config.tol, None)
            for s in _seeds(config)]
    if isinstance(warm_start, EAQProtocol):
        warm_start = (warm_start,)
    for i, warm in enumerate(warm_start or ()):
        jobs.append((c, shared, config.restriction, np.random.SeedSequence([config.seed, 1, i]),
                     config.max_iters, config.tol, warm))
    raw = _run_restarts(_eaq_restart, jobs, config)
    results = []
    for score, us, effects, it, conv in raw:
        proto = EAQProtocol(shared, us, effects, label=f"seesaw-{functional.label}",
                            outcome_labels=scen.outcome_labels, atol=1e-8)
        results.append((score, proto, it, conv))
    return _merge(results, config)


# ---------------------------------------------------------------------------
# one classical bit with shared entanglement


def _entbit_restart(args):
    c, k, seed, max_iters, tol = args
    rng = np.random.default_rng(seed)
    n_x, n_y, n_b = c.shape
    eye = np.eye(k)
    psi = qcore.random_unitary(rng, k * k)[:, 0]
    snd_states = [_init_measurement_state(rng, k, 2) for _ in range(n_x)]
    rcv_states = [[_init_measurement_state(rng, k, n_b) for _ in range(2)] for _ in range(n_y)]
    sender = np.array([[st["prev"], eye - st["prev"]] for st in snd_states])
    receiver = np.array([[_basis_projectors(st["basis"], st["labels"], n_b) for st in row]
                         for row in rcv_states])

    def score_of(psi_, snd, rcv):
        return float(np.sum(c * EntBitStrategy(psi_, snd, rcv).behavior_table()))

    score = -np.inf
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        rho = np.outer(psi, psi.conj()).reshape(k, k, k, k)
        # ρ[i,j,k,l] = <ij|ρ|kl>, first index pair on the sender's side
        # sender: K[x,a] = Tr_B[(I ⊗ Σ_{y,b} c B_{b|y,a}) ρ]
        mb = np.einsum("xyb,yabij->xaij", c, receiver)
        kx = np.einsum("xajm,imkj->xaik", mb, rho)
        for x in range(n_x):
            sender[x] = _best_measurement(kx[x], snd_states[x])
        s1 = score_of(psi, sender, receiver)
        _check_monotone(s1, score, "ent+bit sender step")
        # receiver: L[y,a,b] = Tr_A[(Σ_x c A_{a|x} ⊗ I) ρ]
        ma = np.einsum("xyb,xaij->yabij", c, sender)
        ly = np.einsum("yabim,mjil->yabjl", ma, rho)
        for y in range(n_y):
            for a in range(2):
                receiver[y, a] = _best_measurement(ly[y, a], rcv_states[y][a])
        s2 = score_of(psi, sender, receiver)
        _check_monotone(s2, s1, "ent+bit receiver step")
        # state: top eigenvector of Σ c A_{a|x} ⊗ B_{b|y,a}
        w_op = np.einsum("xyb,xaij,yabkl->ikjl", c, sender, receiver).reshape(k * k, k * k)
        w, v = np.linalg.eigh(w_op)
        psi = v[:, -1]
        s3 = score_of(psi, sender, receiver)
        _check_monotone(s3, s2, "ent+bit state step")
        if s3 - score < tol:
            score = s3
            converged = True
            break
        score = s3
    return score, EntBitStrategy(psi, sender.copy(), receiver.copy()), it, converged


def seesaw_ent_bit(functional: GameFunctional, config: SeesawConfig = SeesawConfig()) -> SeesawResult:
    """Lower bound for one classical bit assisted by a shared entangled state."""
    c = _coeffs(functional)
    jobs = [(c, config.local_dim, s, config.max_iters, config.tol) for s in _seeds(config)]
    return _merge(_run_restarts(_entbit_restart, jobs, config), config)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    thetas: tuple[float, ...]
    values: tuple[float, ...]
    threshold: float | None
    crossing: float | None

    def is_monotone(self, slack: float = 1e-4) -> bool:
        return bool(np.all(np.diff(self.values) >= -slack))

    def to_csv(self) -> str:
        lines = ["theta,value"]
        lines += [f"{t!r},{v!r}" for t, v in zip(self.thetas, self.values)]
        return "\n".join(lines) + "\n"


def _crossing(thetas, values, threshold) -> float | None:
    for i in range(len(thetas) - 1):
        v0, v1 = values[i] - threshold, values[i + 1] - threshold
        if v0 <= 0 < v1:
            return thetas[i] + (thetas[i + 1] - thetas[i]) * (-v0) / (v1 - v0)
    return None


def sweep_partial_entanglement(functional: GameFunctional, theta_grid,
                               config: SeesawConfig = SeesawConfig(),
                               threshold: float | None = None,
                               anchors: tuple = (), anchor_restarts: int = 50) -> SweepResult:
    """See-saw value versus the entanglement angle of the shared ket.

    Grid points are processed from the most entangled down. Each one is
    also warm-started from its neighbour's optimum and from the optimum for
    the maximally entangled state, which is searched first if it is not on
    the grid (with at least ``anchor_restarts`` restarts), together with
    any ``anchors`` passed in.
    """
    thetas = sorted(float(t) for t in theta_grid)
    if not thetas:
        raise ValueError("empty theta grid")
    for t in thetas:
        if not 0 <= t <= np.pi / 2 + 1e-12:
            raise ValueError(f"theta {t} outside [0, pi/2]")
    values = {}
    anchors = tuple(anchors)
    if thetas[-1] < np.pi / 2 - 1e-12:
        top_cfg = replace(config, restriction="theta", theta=np.pi / 2,
                          restarts=max(config.restarts, anchor_restarts))
        top = seesaw_eaq(functional, top_cfg, warm_start=anchors)
        anchors = anchors + (top.protocol,)
    warm = ()
    for t in reversed(thetas):
        cfg = replace(config, restriction="theta", theta=t)
        res = seesaw_eaq(functional, cfg, warm_start=warm + anchors)
        values[t] = res.value
        warm = (res.protocol,)
    vals = tuple(values[t] for t in thetas)
    cross = _crossing(thetas, vals, threshold) if threshold is not None else None
    return SweepResult(tuple(thetas), vals, threshold, cross)
