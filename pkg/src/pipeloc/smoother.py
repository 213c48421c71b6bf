# Copyright (c) 2025 mrbooo895.
#
# This software is released under the MIT License.
# https://opensource.org/licenses/MIT

"""
One-dimensional Gaussian factor graph over the robot's position.

Every synced timestamp is a node. Calibrated odometry increments link
consecutive nodes, accepted rangefinder readings pin individual nodes, and a
tight prior holds node 0 at the launch point. All factors are linear, so the
maximum-likelihood trajectory is the solution of one symmetric positive
definite tridiagonal system, solved here with a banded Cholesky
factorization. The same factor gives the marginal variances.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded

from .calib import CalibConfig, CalibratedOdometry, calibrate_encoders
from .errors import InvalidConfig, MismatchedLengths, SingularSystem
from .filter import FilterConfig, FilterResult, filter_rangefinder
from .model import SensorLog

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FusionConfig:
    """Standard deviations, in inches, of the three factor types."""

    sigma_odom: float = 0.05
    sigma_range: float = 0.02
    sigma_prior: float = 1e-4

    def __post_init__(self):
        for name in ("sigma_odom", "sigma_range", "sigma_prior"):
            if not getattr(self, name) > 0:
                raise InvalidConfig(name, "must be positive")
        if not self.sigma_range < self.sigma_odom:
            raise InvalidConfig("sigma_range", "must be smaller than sigma_odom")


def _frozen(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class FactorGraph1D:
    """
    Linear-Gaussian factor graph with one scalar position per node.

    Odometry factor ``i`` connects nodes ``i`` and ``i + 1``; range factor
    ``j`` measures node ``range_nodes[j]`` directly. Factors carry their own
    sigma so graphs built outside the pipeline can mix uncertainties.
    """

    node_count: int
    odom_increments: np.ndarray
    odom_sigmas: np.ndarray
    range_nodes: np.ndarray
    range_values: np.ndarray
    range_sigmas: np.ndarray
    prior_sigma: float
    prior_mean: float = 0.0
    t: np.ndarray | None = None

    def __post_init__(self):
        for name in ("odom_increments", "odom_sigmas", "range_values", "range_sigmas"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        object.__setattr__(self, "range_nodes", _frozen(self.range_nodes, dtype=int))
        if self.t is not None:
            object.__setattr__(self, "t", _frozen(self.t))

        n = self.node_count
        if n < 1:
            raise ValueError("a factor graph needs at least one node")
        if self.odom_increments.shape != (n - 1,) or self.odom_sigmas.shape != (n - 1,):
            raise MismatchedLengths(f"{n} nodes need {n - 1} odometry factors")
        if not (self.range_values.shape == self.range_sigmas.shape == self.range_nodes.shape):
            raise MismatchedLengths("range factor arrays are not aligned")
        if self.range_nodes.size and (self.range_nodes.min() < 0 or self.range_nodes.max() >= n):
            raise ValueError("range factor node index out of bounds")
        if self.t is not None and self.t.shape != (n,):
            raise MismatchedLengths(f"{n} nodes but {self.t.shape[0]} timestamps")
        if not (self.prior_sigma > 0 and np.all(self.odom_sigmas > 0) and np.all(self.range_sigmas > 0)):
            raise ValueError("factor sigmas must be positive")

    @property
    def odom_factors(self) -> list[tuple[int, int, float, float]]:
        return [
            (i, i + 1, d, s)
            for i, (d, s) in enumerate(zip(self.odom_increments.tolist(), self.odom_sigmas.tolist()))
        ]

    @property
    def range_factors(self) -> list[tuple[int, float, float]]:
        return list(zip(self.range_nodes.tolist(), self.range_values.tolist(), self.range_sigmas.tolist()))


@dataclass(frozen=True)
class Trajectory:
    """Smoothed position and marginal standard deviation per timestamp, inches."""

    t: np.ndarray
    positions: np.ndarray
    marginal_std: np.ndarray

    def __post_init__(self):
        for name in ("t", "positions", "marginal_std"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if not (self.t.shape == self.positions.shape == self.marginal_std.shape):
            raise MismatchedLengths("trajectory arrays are not aligned")

    def __len__(self) -> int:
        return int(self.positions.shape[0])


@dataclass(frozen=True)
class PipelineResult:
    filter_result: FilterResult
    calibration: CalibratedOdometry
    graph: FactorGraph1D
    trajectory: Trajectory
    warnings: tuple[str, ...] = field(default_factory=tuple)


def build_graph(calib: CalibratedOdometry, filter_result: FilterResult, cfg: FusionConfig) -> FactorGraph1D:
    """
    Builds the factor graph for one run.

    :param CalibratedOdometry calib: Calibrated encoder odometry.
    :param FilterResult filter_result: Range verdicts for the same log.
    :param FusionConfig cfg: Factor standard deviations.
    :return: A graph with one odometry factor per consecutive pair, one range
             factor per accepted reading and a prior at node 0.
    :rtype: FactorGraph1D
    :raises MismatchedLengths: If the inputs come from different logs.
    """
    n = len(calib)
    if len(filter_result) != n:
        raise MismatchedLengths(f"calibration has {n} samples, filter result has {len(filter_result)}")
    nodes = filter_result.accepted_indices
    return FactorGraph1D(
        node_count=n,
        odom_increments=np.diff(calib.positions),
        odom_sigmas=np.full(n - 1, cfg.sigma_odom),
        range_nodes=nodes,
        range_values=filter_result.ranges[nodes],
        range_sigmas=np.full(nodes.size, cfg.sigma_range),
        prior_sigma=cfg.sigma_prior,
        t=filter_result.t,
    )


def information_system(graph: FactorGraph1D) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Assembles the information matrix in tridiagonal form.

    :return: ``(diagonal, off_diagonal, information_vector)``.
    """
    n = graph.node_count
    diag = np.zeros(n)
    rhs = np.zeros(n)
    w_prior = 1.0 / graph.prior_sigma**2
    diag[0] += w_prior
    rhs[0] += w_prior * graph.prior_mean

    w_odom = 1.0 / graph.odom_sigmas**2
    diag[:-1] += w_odom
    diag[1:] += w_odom
    rhs[:-1] -= w_odom * graph.odom_increments
    rhs[1:] += w_odom * graph.odom_increments

    w_range = 1.0 / graph.range_sigmas**2
    np.add.at(diag, graph.range_nodes, w_range)
    np.add.at(rhs, graph.range_nodes, w_range * graph.range_values)
    return diag, -w_odom, rhs


def _factorize(diag: np.ndarray, off: np.ndarray) -> np.ndarray:
    banded = np.zeros((2, diag.size))
    banded[0] = diag
    banded[1, :-1] = off
    try:
        return cholesky_banded(banded, lower=True)
    except LinAlgError as e:
        raise SingularSystem(f"information matrix is not positive definite: {e}") from e


def _marginal_variances(factor: np.ndarray) -> np.ndarray:
    """Diagonal of the inverse from a lower bidiagonal Cholesky factor."""
    lead = factor[0].tolist()
    sub = factor[1].tolist()
    n = len(lead)
    var = [0.0] * n
    var[-1] = 1.0 / lead[-1] ** 2
    for i in range(n - 2, -1, -1):
        ratio = sub[i] / lead[i]
        cross = -ratio * var[i + 1]
        var[i] = 1.0 / lead[i] ** 2 - ratio * cross
    return np.array(var)


def _node_times(graph: FactorGraph1D) -> np.ndarray:
    return graph.t if graph.t is not None else np.arange(graph.node_count, dtype=float)


def solve_map(graph: FactorGraph1D) -> Trajectory:
    """
    Solves the factor graph for the maximum-likelihood trajectory.

    :param FactorGraph1D graph: The graph to solve.
    :return: Positions and marginal standard deviations per node.
    :rtype: Trajectory
    :raises SingularSystem: If the information matrix is not positive definite.
    """
    diag, off, rhs = information_system(graph)
    if graph.node_count == 1:
        if not diag[0] > 0:
            raise SingularSystem("single node without information")
        return Trajectory(_node_times(graph), rhs / diag, np.sqrt(1.0 / diag))

    factor = _factorize(diag, off)
    positions = cho_solve_banded((factor, True), rhs)
    variances = _marginal_variances(factor)
    if not (np.all(np.isfinite(positions)) and np.all(variances > 0)):
        raise SingularSystem("solution is not finite")
    logger.debug(
        "solved %d nodes with %d range factors", graph.node_count, graph.range_nodes.size
    )
    return Trajectory(_node_times(graph), positions, np.sqrt(variances))


def objective(graph: FactorGraph1D, x) -> float:
    """Weighted sum of squared residuals of all factors at ``x``."""
    x = np.asarray(x, dtype=float)
    prior = ((x[0] - graph.prior_mean) / graph.prior_sigma) ** 2
    odom = ((np.diff(x) - graph.odom_increments) / graph.odom_sigmas) ** 2
    ranges = ((x[graph.range_nodes] - graph.range_values) / graph.range_sigmas) ** 2
    return float(prior + odom.sum() + ranges.sum())


def objective_gradient(graph: FactorGraph1D, x) -> np.ndarray:
    """Analytic gradient of `objective` at ``x``."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    grad[0] += 2.0 * (x[0] - graph.prior_mean) / graph.prior_sigma**2
    odom = 2.0 * (np.diff(x) - graph.odom_increments) / graph.odom_sigmas**2
    grad[1:] += odom
    grad[:-1] -= odom
    np.add.at(
        grad,
        graph.range_nodes,
        2.0 * (x[graph.range_nodes] - graph.range_values) / graph.range_sigmas**2,
    )
    return grad


def gauss_newton_step(graph: FactorGraph1D, x) -> np.ndarray:
    """Takes one Gauss-Newton step from ``x``; exact for this linear graph."""
    x = np.asarray(x, dtype=float)
    diag, off, _ = information_system(graph)
    gradient = objective_gradient(graph, x)
    if graph.node_count == 1:
        return x - 0.5 * gradient / diag
    factor = _factorize(diag, off)
    return x - 0.5 * cho_solve_banded((factor, True), gradient)


def solve_dense(graph: FactorGraph1D) -> np.ndarray:
    """
    Reference solver: whitened Jacobian and dense normal equations.

    Only meant for small graphs when checking `solve_map`.
    """
    n = graph.node_count
    n_odom = n - 1
    rows = 1 + n_odom + graph.range_nodes.size
    jacobian = np.zeros((rows, n))
    target = np.zeros(rows)

    jacobian[0, 0] = 1.0 / graph.prior_sigma
    target[0] = graph.prior_mean / graph.prior_sigma
    for i, (d, s) in enumerate(zip(graph.odom_increments, graph.odom_sigmas)):
        jacobian[1 + i, i] = -1.0 / s
        jacobian[1 + i, i + 1] = 1.0 / s
        target[1 + i] = d / s
    offset = 1 + n_odom
    for j, (node, r, s) in enumerate(zip(graph.range_nodes, graph.range_values, graph.range_sigmas)):
        jacobian[offset + j, node] = 1.0 / s
        target[offset + j] = r / s

    normal = jacobian.T @ jacobian
    return np.linalg.solve(normal, jacobian.T @ target)


def run_pipeline(
    log: SensorLog,
    f_cfg: FilterConfig,
    c_cfg: CalibConfig,
    fusion: FusionConfig,
    allow_uncalibrated: bool = False,
) -> PipelineResult:
    """
    Runs filter, calibration, graph construction and the solve on one log.

    :return: The trajectory together with every intermediate product.
    :rtype: PipelineResult
    """
    filter_result = filter_rangefinder(log, f_cfg)
    calibration = calibrate_encoders(filter_result, log, c_cfg, allow_uncalibrated)
    graph = build_graph(calibration, filter_result, fusion)
    trajectory = solve_map(graph)
    return PipelineResult(
        filter_result,
        calibration,
        graph,
        trajectory,
        filter_result.warnings + calibration.warnings,
    )


def estimate_trajectory(
    log: SensorLog, f_cfg: FilterConfig, c_cfg: CalibConfig, fusion: FusionConfig
) -> Trajectory:
    """
    Localizes one log end to end: filter, calibrate, build the graph, solve.

    :param SensorLog log: The synced sensor log.
    :param FilterConfig f_cfg: Rangefinder filter settings.
    :param CalibConfig c_cfg: Encoder calibration settings.
    :param FusionConfig fusion: Factor standard deviations.
    :return: The maximum-likelihood trajectory.
    :rtype: Trajectory
    """
    return run_pipeline(log, f_cfg, c_cfg, fusion).trajectory
