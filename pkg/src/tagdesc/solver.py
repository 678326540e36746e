"""Heuristic quadratic-binary minimization: parallel-trial annealing with a
dynamic offset escape, plus an exhaustive minimizer for small models.

Each sweep evaluates the flip gain of every variable against the current
state, Metropolis-accepts candidates independently, then applies exactly one
accepted flip chosen uniformly at random. Sweeps with no acceptance raise an
energy offset that lowers the barrier until something moves; any acceptance
resets it. Local fields make every gain evaluation O(1) and a flip update
O(n). Results are deterministic for a given (model, config): restart r draws
from its own stream derived from (seed, r), and the cross-restart reduction
runs in restart order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import qubo
from .qubo import QuboModel


class TooManyVariablesError(ValueError):
    """Exhaustive enumeration refused above the variable threshold."""


@dataclass
class SolverConfig:
    sweeps: int = 2000
    restarts: int = 8
    temp_initial: float | None = None
    temp_final: float | None = None
    offset_increment: float | None = None
    seed: int = 42
    time_budget: float | None = None
    initial_bits: np.ndarray | None = None  # warm start for restart 0

    def __post_init__(self):
        if self.sweeps < 1 or self.restarts < 1:
            raise ValueError("sweeps and restarts must be >= 1")
        for name in ("temp_initial", "temp_final"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be > 0")
        if (self.temp_initial is not None and self.temp_final is not None
                and self.temp_initial < self.temp_final):
            raise ValueError("temp_initial must be >= temp_final")
        if self.offset_increment is not None and self.offset_increment < 0:
            raise ValueError("offset_increment must be >= 0")
        if self.time_budget is not None and self.time_budget <= 0:
            raise ValueError("time_budget must be > 0")


@dataclass
class SolveResult:
    best_bits: np.ndarray
    best_energy: float
    solution: object | None          # DescriptorSolution when decodable
    residuals: qubo.ResidualReport | None
    stats: dict


class FieldState:
    """Bit vector with incrementally maintained local fields.

    The field of variable i is its linear weight plus the coupling to every
    set bit, so the energy change of flipping i is one multiply away and a
    committed flip updates all fields in one vector operation.
    """

    def __init__(self, model: QuboModel, bits):
        self.model = model
        diag, qmat = model.dense()
        self._qmat = qmat
        self.bits = np.ascontiguousarray(np.asarray(bits, dtype=np.uint8))
        if self.bits.shape != (model.n_vars,):
            raise ValueError(f"expected {model.n_vars} bits")
        x = self.bits.astype(np.float64)
        self.fields = diag + qmat @ x
        self.energy = float(model.constant + diag @ x + 0.5 * x @ qmat @ x)

    def flip_delta(self, i: int) -> float:
        """Energy change of flipping bit i, from the cached field."""
        if not 0 <= i < self.bits.shape[0]:
            raise IndexError(f"variable id {i} out of range")
        return float((1.0 - 2.0 * self.bits[i]) * self.fields[i])

    def apply_flip(self, i: int) -> float:
        """Commit the flip of bit i; returns the applied energy change."""
        d = self.flip_delta(i)
        dx = 1.0 - 2.0 * self.bits[i]
        self.energy += d
        self.fields += self._qmat[i] * dx
        self.bits[i] ^= 1
        return d


def flip_delta(state: FieldState, i: int) -> float:
    """Constant-time flip gain for `state`'s current bit vector."""
    return state.flip_delta(i)


def _sweep_block(qmat, x, field, scalars, best_bits, counters, temps, logs, selectors, offset_inc):
    # scalars: [energy, offset, best_energy]; counters: [accepted, offset_activations]
    # Candidate i is accepted iff delta - offset < T * (-log u); among the
    # accepted, one flip is applied per sweep.
    n = x.shape[0]
    for t in range(temps.shape[0]):
        temp = temps[t]
        off = scalars[1]
        count = 0
        for i in range(n):
            d = (1.0 - 2.0 * x[i]) * field[i]
            if d - off < temp * logs[t, i]:
                count += 1
        if count == 0:
            scalars[1] = off + offset_inc
            counters[1] += 1
            continue
        target = int(selectors[t] * count)
        seen = 0
        pick = -1
        for i in range(n):
            d = (1.0 - 2.0 * x[i]) * field[i]
            if d - off < temp * logs[t, i]:
                if seen == target:
                    pick = i
                    break
                seen += 1
        dx = 1.0 - 2.0 * x[pick]
        scalars[0] += dx * field[pick]
        x[pick] = 1 - x[pick]
        for j in range(n):
            field[j] += qmat[pick, j] * dx
        scalars[1] = 0.0
        counters[0] += 1
        if scalars[0] < scalars[2]:
            scalars[2] = scalars[0]
            for j in range(n):
                best_bits[j] = x[j]


_kernel = None


def _get_kernel():
    global _kernel
    if _kernel is None:
        try:
            from numba import njit
            _kernel = njit(cache=True, nogil=True)(_sweep_block)
        except ImportError:
            _kernel = _sweep_block
    return _kernel


def _resolve_schedule(model: QuboModel, config: SolverConfig) -> tuple[float, float, float]:
    if config.temp_initial is not None:
        t0 = float(config.temp_initial)
    else:
        diag, qmat = model.dense()
        reach = np.abs(diag) + np.abs(qmat).sum(axis=1) if model.n_vars else np.zeros(1)
        t0 = max(float(reach.max()), 1.0)
    tf = float(config.temp_final) if config.temp_final is not None else max(t0 * 1e-4, 1e-12)
    tf = min(tf, t0)
    inc = float(config.offset_increment) if config.offset_increment is not None else tf / 10.0
    return t0, tf, inc


def _temperatures(t0: float, tf: float, sweeps: int) -> np.ndarray:
    if sweeps == 1:
        return np.array([t0])
    ratio = (tf / t0) ** (1.0 / (sweeps - 1))
    return t0 * ratio ** np.arange(sweeps, dtype=np.float64)


def _dense_energy(model: QuboModel, bits: np.ndarray) -> float:
    diag, qmat = model.dense()
    x = bits.astype(np.float64)
    return float(model.constant + diag @ x + 0.5 * x @ qmat @ x)


_BLOCK = 1024


def anneal(model: QuboModel, config: SolverConfig) -> SolveResult:
    """Minimize `model` with restarts of the parallel-trial sweep chain.

    The best state seen anywhere (including initial states) is returned;
    energy ties across restarts resolve to the lowest restart index. With
    time_budget unset the result is a pure function of (model, config).
    """
    n = model.n_vars
    t0, tf, offset_inc = _resolve_schedule(model, config)
    stats: dict = {
        "restarts": [],
        "temp_initial": t0,
        "temp_final": tf,
        "offset_increment": offset_inc,
        "truncated": False,
        "best_restart": 0,
    }
    if n == 0:
        return _finish(model, np.zeros(0, dtype=np.uint8), float(model.constant), stats)

    diag, qmat = model.dense()
    qmat = np.ascontiguousarray(qmat)
    temps = _temperatures(t0, tf, config.sweeps)
    kernel = _get_kernel()
    start = time.monotonic()

    best_bits = None
    best_energy = np.inf
    for r in range(config.restarts):
        rng = np.random.default_rng([config.seed, r])
        if r == 0:
            if config.initial_bits is not None:
                bits = np.asarray(config.initial_bits, dtype=np.uint8).copy()
                if bits.shape != (n,):
                    raise ValueError(f"initial_bits must have shape ({n},)")
            else:
                bits = np.zeros(n, dtype=np.uint8)
        else:
            bits = rng.integers(0, 2, n, dtype=np.uint8)
        x = bits.astype(np.float64)
        field = diag + qmat @ x
        e0 = float(model.constant + diag @ x + 0.5 * x @ qmat @ x)
        scalars = np.array([e0, 0.0, e0])
        counters = np.zeros(2, dtype=np.int64)
        restart_best = bits.copy()

        done = 0
        truncated = False
        while done < config.sweeps:
            b = min(_BLOCK, config.sweeps - done)
            with np.errstate(divide="ignore"):
                logs = -np.log(rng.random((b, n)))
            selectors = rng.random(b)
            kernel(qmat, bits, field, scalars, restart_best, counters,
                   temps[done:done + b], logs, selectors, offset_inc)
            done += b
            if config.time_budget is not None and time.monotonic() - start > config.time_budget:
                truncated = done < config.sweeps or r < config.restarts - 1
                break

        e_best = _dense_energy(model, restart_best)
        stats["restarts"].append({
            "best_energy": e_best,
            "accepted_flips": int(counters[0]),
            "offset_activations": int(counters[1]),
            "sweeps": done,
        })
        if e_best < best_energy:
            best_energy = e_best
            best_bits = restart_best
            stats["best_restart"] = r
        if truncated:
            stats["truncated"] = True
            break

    return _finish(model, best_bits, float(best_energy), stats)


def _finish(model: QuboModel, bits: np.ndarray, e: float, stats: dict) -> SolveResult:
    solution = residuals = None
    if model.index is not None:
        solution, residuals = qubo.decode(model, bits)
    return SolveResult(bits, e, solution, residuals, stats)


_LOW_BITS = 15


def exhaustive_min(model: QuboModel, max_vars: int = 24) -> tuple[np.ndarray, float]:
    """Global minimum by enumerating all 2^n assignments.

    Energy ties resolve to the lowest bit vector read as a little-endian
    integer (bit 0 least significant). States are scanned in integer order,
    vectorized over the low bits with the energy split into a precomputed
    low-bit table, a per-pattern high-bit scalar, and one cross matvec.
    """
    n = model.n_vars
    if n > max_vars:
        raise TooManyVariablesError(
            f"{n} variables exceeds the enumeration threshold {max_vars}")
    if n == 0:
        return np.zeros(0, dtype=np.uint8), float(model.constant)
    diag, qmat = model.dense()
    n_low = min(n, _LOW_BITS)
    n_high = n - n_low
    states_low = np.arange(1 << n_low, dtype=np.uint64)
    x_low = ((states_low[:, None] >> np.arange(n_low, dtype=np.uint64)) & np.uint64(1))
    x_low = x_low.astype(np.float64)
    q_ll = qmat[:n_low, :n_low]
    base = x_low @ diag[:n_low] + 0.5 * ((x_low @ q_ll) * x_low).sum(axis=1)

    if n_high == 0:
        j = int(np.argmin(base))
        best_state, best_energy = j, float(base[j])
    else:
        q_lh = qmat[:n_low, n_low:]
        q_hh = qmat[n_low:, n_low:]
        diag_h = diag[n_low:]
        h_shifts = np.arange(n_high, dtype=np.uint64)
        best_state, best_energy = 0, np.inf
        for h in range(1 << n_high):
            x_h = ((np.uint64(h) >> h_shifts) & np.uint64(1)).astype(np.float64)
            scalar = float(x_h @ diag_h + 0.5 * x_h @ q_hh @ x_h)
            e = base + x_low @ (q_lh @ x_h) + scalar
            j = int(np.argmin(e))
            if e[j] < best_energy:
                best_energy = float(e[j])
                best_state = (h << n_low) | j
    bits = np.array([(best_state >> i) & 1 for i in range(n)], dtype=np.uint8)
    return bits, best_energy + float(model.constant)
