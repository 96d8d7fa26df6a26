"""
Grover-QAOA Module
Periodic single-parameter search iteration and empirical query-scaling measurement.

One step applies W(gamma) = exp(-i pi H_M / n) exp(-i gamma H_P) exp(-i pi H_M / n) exp(-i gamma H_P),
rightmost factor first, with H_P the projector onto the target and H_M = mixer_scale * sum_j X_j.

Both oracle factors carry the same sign. With opposite signs, or with the bare sum of X (mixer_scale=1),
the uniform state only couples to states whose target overlap stays below ~0.4 and no gamma reaches
success 0.5. MIXER_SCALE puts the mixer at the hopping rate where the uniform state and the target
resonate for gamma near 0.6, which makes T track sqrt(N) * pi / (2 sqrt 2).
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from statevector import (DiagonalCost, StateSizeError, StateVector, _rx_all_inplace, apply_diagonal_phase,
                         apply_rx_all, new_uniform)

logger = logging.getLogger(__name__)

MIXER_SCALE = 0.225


class NoHitError(ValueError):
    """Some qubit counts never reached the success threshold within the step budget"""

    def __init__(self, missing: Sequence[int]):
        self.missing = list(missing)
        super().__init__(f"No gamma reached the threshold for n in {self.missing}")


@dataclass
class GroverRun:
    """trace[k] is the success probability after k+1 applications of W"""

    n: int
    target: int
    gamma: float
    trace: List[float] = field(default_factory=list)

    @property
    def baseline(self) -> float:
        return 2.0 ** (-self.n)


@dataclass
class ScalingFit:
    slope: float
    intercept: float
    per_n: List[Dict]
    runs: List[GroverRun] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {"slope": self.slope, "intercept": self.intercept, "per_n": self.per_n}


def target_cost(n: int, target: int) -> DiagonalCost:
    """Indicator of the target bitstring: f(x) = 1 only at x = target"""
    if target < 0 or target >= (1 << n):
        raise StateSizeError(f"Target {target} out of range for n={n}")
    values = np.zeros(1 << n)
    values[target] = 1.0
    return DiagonalCost(n, values)


def mixer_angle(n: int, mixer_scale: float = MIXER_SCALE) -> float:
    """Angle of each RX layer in W: pi / n times the H_M normalization"""
    return mixer_scale * math.pi / n


def grover_step(state: StateVector, target: int, gamma: float, mixer_scale: float = MIXER_SCALE) -> StateVector:
    """One application of W(gamma)"""
    oracle = target_cost(state.n, target)
    mix = mixer_angle(state.n, mixer_scale)
    out = apply_diagonal_phase(state, oracle, gamma)
    out = apply_rx_all(out, mix)
    out = apply_diagonal_phase(out, oracle, gamma)
    return apply_rx_all(out, mix)


def run_grover(n: int, target: int, gamma: float, max_steps: int, mixer_scale: float = MIXER_SCALE) -> GroverRun:
    """Apply W(gamma) max_steps times to the uniform state, recording |<target|state>|^2 after each"""
    if max_steps < 1:
        raise ValueError(f"max_steps must be >= 1, got {max_steps}")
    if target < 0 or target >= (1 << n):
        raise StateSizeError(f"Target {target} out of range for n={n}")

    amps = new_uniform(n).amps.copy()
    mix = mixer_angle(n, mixer_scale)
    kick = np.exp(-1j * gamma)
    trace = []
    for _ in range(max_steps):
        amps[target] *= kick
        _rx_all_inplace(amps, n, mix)
        amps[target] *= kick
        _rx_all_inplace(amps, n, mix)
        trace.append(min(float(abs(amps[target]) ** 2), 1.0))
    return GroverRun(n, target, float(gamma), trace)


def first_hit(run: GroverRun, threshold: float) -> Optional[int]:
    """Smallest k with trace[k-1] >= threshold, or None"""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"Threshold must lie in (0, 1), got {threshold}")
    for k, prob in enumerate(run.trace, start=1):
        if prob >= threshold:
            return k
    return None


def grover_gamma_grid(count: int) -> np.ndarray:
    """count uniform points on (0, pi]: k * pi / count for k = 1..count"""
    if count < 1:
        raise ValueError(f"Gamma scan needs at least one point, got {count}")
    return np.arange(1, count + 1) * (math.pi / count)


def default_max_steps(n: int) -> int:
    return int(math.ceil(4 * math.sqrt(2 ** n))) + 8


def best_run(n: int, target: int, gammas: Sequence[float], max_steps: int, threshold: float,
             threads: int = 1, mixer_scale: float = MIXER_SCALE) -> Tuple[Optional[int], Optional[float], Optional[GroverRun]]:
    """
    Run every gamma and keep the one with the earliest threshold crossing.
    Ties go to the smaller gamma; returns (None, None, None) when nothing crosses.
    """
    def one(gamma):
        return run_grover(n, target, gamma, max_steps, mixer_scale)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(one, gammas))
    else:
        runs = [one(g) for g in gammas]

    best_t, best = None, None
    for run in runs:
        t = first_hit(run, threshold)
        if t is not None and (best_t is None or t < best_t):
            best_t, best = t, run
    if best is None:
        return None, None, None
    return best_t, best.gamma, best


def fit_log2(ns: Sequence[int], ts: Sequence[float]) -> Tuple[float, float]:
    """Least-squares line through (n, log2 T); returns (slope, intercept)"""
    slope, intercept = np.polyfit(np.asarray(ns, dtype=float), np.log2(np.asarray(ts, dtype=float)), 1)
    return float(slope), float(intercept)


def scaling_fit(ns: Sequence[int], gamma_scan: int = 64, threshold: float = 0.5, target: int = 0,
                max_steps: Optional[int] = None, threads: int = 1, mixer_scale: float = MIXER_SCALE) -> ScalingFit:
    """
    Measure T(n) = min over scanned gamma of first_hit and fit log2 T(n) against n.

    Args:
        ns: Qubit counts (at least 4 distinct values)
        gamma_scan: Number of gamma grid points on (0, pi]
        threshold: Success probability defining a hit
        target: Marked bitstring (results do not depend on it)
        max_steps: Step budget per run; defaults to ceil(4 sqrt(N)) + 8 per n
        mixer_scale: H_M normalization (see module docstring)

    Returns:
        ScalingFit with slope, intercept and per-n T and gamma
    """
    ns = sorted(set(int(n) for n in ns))
    if len(ns) < 4:
        raise ValueError(f"Scaling fit needs at least 4 distinct n values, got {ns}")

    gammas = grover_gamma_grid(gamma_scan)
    per_n, runs, missing = [], [], []
    for n in ns:
        steps = max_steps or default_max_steps(n)
        t, _, run = best_run(n, target % (1 << n), gammas, steps, threshold, threads, mixer_scale)
        if t is None:
            missing.append(n)
            continue
        per_n.append({"n": n, "T": t, "gamma": run.gamma})
        runs.append(run)
        logger.info(f"n={n}: T={t} at gamma={run.gamma:.6f} (budget {steps} steps)")

    if missing:
        raise NoHitError(missing)

    slope, intercept = fit_log2([row["n"] for row in per_n], [row["T"] for row in per_n])
    logger.info(f"Grover scaling fit: slope={slope:.4f}, intercept={intercept:.4f}")
    return ScalingFit(slope, intercept, per_n, runs)


def scaling_frame(runs: Sequence[GroverRun]) -> pd.DataFrame:
    """Rows n,gamma,step,success_probability; step 0 is the uniform-state baseline"""
    records = []
    for run in runs:
        records.append({"n": run.n, "gamma": run.gamma, "step": 0, "success_probability": run.baseline})
        for k, prob in enumerate(run.trace, start=1):
            records.append({"n": run.n, "gamma": run.gamma, "step": k, "success_probability": prob})
    return pd.DataFrame.from_records(records, columns=["n", "gamma", "step", "success_probability"])
