"""
QAOA Engine Module
Assembles QAOA_p states, evaluates objectives, optimizes angles and scans parameter landscapes.

State: |gamma beta> = U_M(beta_p) U_P(gamma_p) ... U_M(beta_1) U_P(gamma_1) |init>
Cost tables are always minimized; tables built from maximization problems hold -cost.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from mixers import MixerSpec, _apply_inplace
from statevector import DiagonalCost, DimensionMismatchError, StateVector, _phase_inplace, expectation_diagonal

logger = logging.getLogger(__name__)


class UndefinedRatioError(ValueError):
    """Approximation ratio requested for a cost table without a usable optimum"""


@dataclass(frozen=True)
class QaoaParams:
    gammas: Tuple[float, ...]
    betas: Tuple[float, ...]

    def __post_init__(self):
        gammas = tuple(float(g) for g in self.gammas)
        betas = tuple(float(b) for b in self.betas)
        if len(gammas) != len(betas):
            raise ValueError(f"Need as many betas as gammas, got {len(gammas)} and {len(betas)}")
        if not all(np.isfinite(gammas)) or not all(np.isfinite(betas)):
            raise ValueError("QAOA angles must be finite")
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "betas", betas)

    @property
    def p(self) -> int:
        return len(self.gammas)

    @classmethod
    def from_vector(cls, vec: Sequence[float]) -> "QaoaParams":
        """[g1..gp, b1..bp] -> params"""
        vec = list(vec)
        p = len(vec) // 2
        return cls(tuple(vec[:p]), tuple(vec[p:]))


@dataclass
class QaoaResult:
    expectation: float
    ratio: Optional[float]
    best_params: QaoaParams
    evaluations: int
    restart_expectations: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "expectation": self.expectation,
            "ratio": self.ratio,
            "gammas": list(self.best_params.gammas),
            "betas": list(self.best_params.betas),
            "evaluations": self.evaluations,
        }


@dataclass
class OptimizerConfig:
    """
    Multi-start Nelder-Mead settings.

    beta_scale only matters when symmetric is set: betas are -beta_scale * reversed(gammas).
    The default 0.5 matches the -cut cost tables against the sum-of-X mixer.
    """

    restarts: int = 32
    seed: int = 0
    simplex_size: float = 0.3
    fatol: float = 1e-8
    xatol: float = 1e-6
    max_evals: int = 500
    symmetric: bool = False
    beta_scale: float = 0.5
    threads: int = 1


def _check_dims(cost: DiagonalCost, init: StateVector, mixer: MixerSpec):
    if cost.n != init.n:
        raise DimensionMismatchError(f"Cost table has {cost.n} qubits but initial state has {init.n}")
    mixer.validate(init.n)


def run_qaoa(cost: DiagonalCost, mixer: MixerSpec, init: StateVector, params: QaoaParams) -> StateVector:
    """Alternate phase and mixer layers (phase first, layer 1 first) starting from init"""
    _check_dims(cost, init, mixer)
    out = init.copy()
    for gamma, beta in zip(params.gammas, params.betas):
        _phase_inplace(out.amps, cost.values, gamma)
        _apply_inplace(out.amps, out.n, mixer, beta)
    return out


def expectation(cost: DiagonalCost, mixer: MixerSpec, init: StateVector, params: QaoaParams) -> float:
    return expectation_diagonal(run_qaoa(cost, mixer, init, params), cost)


def approximation_ratio(state: StateVector, cost: DiagonalCost) -> float:
    """
    <-cost> / (-min cost) for tables that store negated maximization objectives.
    Equivalently <cost> / min cost, which is <= 1 whenever the minimum is negative.
    """
    if cost.is_constant():
        raise UndefinedRatioError("Approximation ratio is undefined for a constant cost table")
    best = cost.min()
    if best == 0.0:
        raise UndefinedRatioError("Approximation ratio is undefined when the optimal cost is 0")
    return expectation_diagonal(state, cost) / best


def symmetric_lift(half: Sequence[float], beta_scale: float = 1.0) -> QaoaParams:
    """gammas = half; betas[i] = -beta_scale * half[p+1-i] (1-indexed)"""
    half = [float(g) for g in half]
    if not half:
        raise ValueError("symmetric_lift needs at least one angle")
    return QaoaParams(tuple(half), tuple(-beta_scale * g for g in reversed(half)))


def wrap_angle(a: float) -> float:
    """Map to (-pi, pi]"""
    return float(np.pi - np.mod(np.pi - a, 2 * np.pi))


def _report_params(params: QaoaParams, cost: DiagonalCost) -> QaoaParams:
    # phase layers are 2*pi periodic only for integer-valued tables
    gammas = [wrap_angle(g) for g in params.gammas] if cost.is_integer_valued() else list(params.gammas)
    return QaoaParams(tuple(gammas), tuple(wrap_angle(b) for b in params.betas))


def _params_from_search(x: np.ndarray, p: int, config: OptimizerConfig) -> QaoaParams:
    if config.symmetric:
        return symmetric_lift(x, config.beta_scale)
    return QaoaParams(tuple(x[:p]), tuple(x[p:]))


def _local_search(cost: DiagonalCost, mixer: MixerSpec, init: StateVector, p: int,
                  config: OptimizerConfig, x0: np.ndarray) -> Tuple[float, np.ndarray, int]:
    def objective(x):
        return expectation(cost, mixer, init, _params_from_search(x, p, config))

    dim = x0.size
    simplex = np.vstack([x0, x0 + config.simplex_size * np.eye(dim)])
    res = minimize(objective, x0, method="Nelder-Mead",
                   options={"initial_simplex": simplex, "fatol": config.fatol,
                            "xatol": config.xatol, "maxfev": config.max_evals})
    if not res.success:
        logger.debug(f"Nelder-Mead stopped early: {res.message}")
    return float(res.fun), np.asarray(res.x), int(res.nfev)


def optimize_params(cost: DiagonalCost, mixer: MixerSpec, init: StateVector, p: int,
                    config: Optional[OptimizerConfig] = None) -> QaoaResult:
    """
    Seeded multi-start Nelder-Mead over the QAOA angles.

    Args:
        cost: Table to minimize
        mixer: Mixer family
        init: Initial state
        p: Depth (>= 1)
        config: Optimizer settings; starts are drawn uniformly from [-pi, pi]^d with config.seed

    Returns:
        QaoaResult for the best restart (lowest expectation, then lowest restart index)
    """
    config = config or OptimizerConfig()
    if p < 1:
        raise ValueError(f"optimize_params needs p >= 1, got {p}")
    _check_dims(cost, init, mixer)

    dim = p if config.symmetric else 2 * p
    rng = np.random.default_rng(config.seed)
    starts = rng.uniform(-np.pi, np.pi, size=(config.restarts, dim))

    def run_start(x0):
        return _local_search(cost, mixer, init, p, config, x0)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            outcomes = list(pool.map(run_start, starts))
    else:
        outcomes = [run_start(x0) for x0 in starts]

    best_idx = 0
    for idx, (value, _, _) in enumerate(outcomes):
        if value < outcomes[best_idx][0]:
            best_idx = idx
    best_value, best_x, _ = outcomes[best_idx]
    evaluations = sum(nfev for _, _, nfev in outcomes)

    best_params = _params_from_search(best_x, p, config)
    final_state = run_qaoa(cost, mixer, init, best_params)
    try:
        ratio = approximation_ratio(final_state, cost)
    except UndefinedRatioError:
        ratio = None

    logger.info(f"QAOA p={p}: best expectation {best_value:.10g} from restart {best_idx} "
                f"({evaluations} evaluations, ratio={ratio})")
    return QaoaResult(
        expectation=best_value,
        ratio=ratio,
        best_params=_report_params(best_params, cost),
        evaluations=evaluations,
        restart_expectations=[value for value, _, _ in outcomes],
    )


# ---------------------------------------------------------------------------
# Landscapes
# ---------------------------------------------------------------------------

# Landscape coordinates are spin-1/2 angles: H_P and H_M written with S = sigma / 2 halve every circuit angle.
# On the ring of disagrees this makes [-pi, pi]^2 exactly one period of the p=2 symmetric landscape.
SPIN_HALF = 0.5


@dataclass
class LandscapeGrid:
    """values[i, j] is the expectation at (xs[i], ys[j])"""

    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    labels: Tuple[str, str]


def landscape_params(x: float, y: float, symmetric: bool, beta_scale: float = 0.5,
                     angle_scale: float = SPIN_HALF) -> QaoaParams:
    """Circuit angles for landscape coordinates (x, y)"""
    if symmetric:
        return symmetric_lift((angle_scale * x, angle_scale * y), beta_scale)
    return QaoaParams((angle_scale * x,), (angle_scale * y,))


def landscape_scan(cost: DiagonalCost, mixer: MixerSpec, init: StateVector,
                   axes: Tuple[Tuple[float, float, int], Tuple[float, float, int]],
                   symmetric: bool, beta_scale: float = 0.5, threads: int = 1,
                   angle_scale: float = SPIN_HALF) -> LandscapeGrid:
    """
    Expectation over a 2-D grid.

    symmetric=True: p=2, coordinates (gamma1, gamma2), betas from symmetric_lift.
    symmetric=False: p=1, coordinates (gamma, beta).
    Each axis is (low, high, count) with inclusive endpoints. The circuit runs at angle_scale
    times the coordinates (spin-1/2 units by default; 1.0 scans raw radians).
    """
    _check_dims(cost, init, mixer)
    for low, high, count in axes:
        if count < 2:
            raise ValueError(f"Landscape axes need at least 2 points, got {count}")
        if not (np.isfinite(low) and np.isfinite(high)) or low >= high:
            raise ValueError(f"Bad landscape range [{low}, {high}]")

    xs = np.linspace(axes[0][0], axes[0][1], int(axes[0][2]))
    ys = np.linspace(axes[1][0], axes[1][1], int(axes[1][2]))

    def row(x):
        return [expectation(cost, mixer, init, landscape_params(x, y, symmetric, beta_scale, angle_scale))
                for y in ys]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, xs))
    else:
        rows = [row(x) for x in xs]

    labels = ("gamma1", "gamma2") if symmetric else ("gamma", "beta")
    logger.info(f"Scanned {xs.size}x{ys.size} landscape ({labels[0]}, {labels[1]})")
    return LandscapeGrid(xs, ys, np.array(rows, dtype=np.float64), labels)


_NEIGHBORS = [(di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1) if (di, dj) != (0, 0)]


def landscape_minima(values: np.ndarray) -> List[Tuple[int, int]]:
    """Strict interior local minima against the 8-neighbourhood"""
    rows, cols = values.shape
    centre = values[1:-1, 1:-1]
    is_min = np.ones_like(centre, dtype=bool)
    for di, dj in _NEIGHBORS:
        is_min &= centre < values[1 + di:rows - 1 + di, 1 + dj:cols - 1 + dj]
    return [(int(i) + 1, int(j) + 1) for i, j in zip(*np.nonzero(is_min))]


def cluster_minima(points: Sequence[Tuple[int, int]]) -> List[List[Tuple[int, int]]]:
    """Group grid points into 8-connected clusters"""
    remaining = set(points)
    clusters = []
    for start in sorted(points):
        if start not in remaining:
            continue
        remaining.discard(start)
        stack, cluster = [start], []
        while stack:
            i, j = stack.pop()
            cluster.append((i, j))
            for di, dj in _NEIGHBORS:
                nb = (i + di, j + dj)
                if nb in remaining:
                    remaining.discard(nb)
                    stack.append(nb)
        clusters.append(sorted(cluster))
    return clusters


def is_saddle(values: np.ndarray, i: int, j: int) -> bool:
    """True when the 8-neighbourhood of (i, j) holds both higher and lower values"""
    centre = values[i, j]
    around = [values[i + di, j + dj] for di, dj in _NEIGHBORS]
    return any(v > centre for v in around) and any(v < centre for v in around)


def polish_minimum(cost: DiagonalCost, mixer: MixerSpec, init: StateVector, point: Tuple[float, float],
                   symmetric: bool, beta_scale: float = 0.5, angle_scale: float = SPIN_HALF,
                   xatol: float = 1e-9, fatol: float = 1e-12) -> Tuple[float, Tuple[float, float]]:
    """
    Nelder-Mead from a grid minimum, in landscape coordinates.

    Grid values sit up to O(spacing^2) above the basin floor, so minima that are equal in the
    continuum can differ on the grid; compare polished values instead.
    """
    _check_dims(cost, init, mixer)

    def objective(xy):
        return expectation(cost, mixer, init, landscape_params(xy[0], xy[1], symmetric, beta_scale, angle_scale))

    res = minimize(objective, np.asarray(point, dtype=float), method="Nelder-Mead",
                   options={"xatol": xatol, "fatol": fatol, "maxfev": 2000})
    logger.debug(f"Polished landscape minimum at {point} -> {tuple(res.x)}: {res.fun:.12g}")
    return float(res.fun), (float(res.x[0]), float(res.x[1]))
