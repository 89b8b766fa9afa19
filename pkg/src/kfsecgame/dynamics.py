"""Linear-Gaussian dynamics, multi-sensor measurement models, and the Kalman recursion.

State convention for the tracking builder: x = [position (m), velocity (m/s)].
All covariance updates use the Joseph form with explicit symmetrization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _locked(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SystemModel:
    """Time-invariant linear plant x_{k+1} = F x_k + u + Gamma v_k, v_k ~ N(0, sigma_v^2).

    Q is the process noise covariance sigma_v^2 * Gamma Gamma^T. `input_term`
    is a known additive input per step (zero when omitted).
    """

    F: np.ndarray
    Gamma: np.ndarray
    sigma_v: float
    delta: float
    x0_hat: np.ndarray
    P0: np.ndarray
    input_term: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "F", _locked(np.atleast_2d(self.F)))
        object.__setattr__(self, "Gamma", _locked(np.reshape(self.Gamma, (-1,))))
        object.__setattr__(self, "x0_hat", _locked(np.reshape(self.x0_hat, (-1,))))
        object.__setattr__(self, "P0", _locked(np.atleast_2d(self.P0)))
        if self.input_term is not None:
            object.__setattr__(self, "input_term", _locked(np.reshape(self.input_term, (-1,))))
        n = self.F.shape[0]
        if self.F.shape != (n, n):
            raise ValueError("F must be square")
        if self.Gamma.shape != (n,):
            raise ValueError("Gamma must have one entry per state dimension")
        if self.x0_hat.shape != (n,):
            raise ValueError("x0_hat dimension mismatch")
        if self.P0.shape != (n, n):
            raise ValueError("P0 dimension mismatch")
        if not np.allclose(self.P0, self.P0.T):
            raise ValueError("P0 must be symmetric")
        if np.any(np.linalg.eigvalsh(self.P0) <= 0):
            raise ValueError("P0 must be positive definite")
        if self.sigma_v < 0:
            raise ValueError("sigma_v must be nonnegative")

    @property
    def state_dim(self) -> int:
        return self.F.shape[0]

    @property
    def Q(self) -> np.ndarray:
        """Process noise covariance sigma_v^2 * Gamma Gamma^T."""
        return self.sigma_v**2 * np.outer(self.Gamma, self.Gamma)


@dataclass(frozen=True)
class Sensor:
    """One scalar-output sensor: measurement row h and noise s.d. sigma_w (m)."""

    h_row: np.ndarray
    sigma_w: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "h_row", _locked(np.reshape(self.h_row, (-1,))))
        if self.sigma_w <= 0:
            raise ValueError("sigma_w must be positive")


@dataclass(frozen=True)
class SensorSuite:
    """Ordered collection of sensors; index 1 is the first sensor."""

    sensors: tuple[Sensor, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "sensors", tuple(self.sensors))
        if len(self.sensors) < 1:
            raise ValueError("suite needs at least one sensor")

    @property
    def size(self) -> int:
        return len(self.sensors)

    def sigma_w(self, index: int) -> float:
        """Noise s.d. of the 1-based sensor `index`."""
        return self.sensors[index - 1].sigma_w

    @property
    def noise_sds(self) -> np.ndarray:
        return np.array([s.sigma_w for s in self.sensors])


@dataclass(frozen=True, order=True)
class SensorSubset:
    """Nonempty set of 1-based sensor indices.

    Ordering/sorting of instances follows the canonical bitmask value
    (sensor 1 = lowest bit).
    """

    mask: int = field(init=False)
    indices: tuple[int, ...] = ()

    def __init__(self, indices) -> None:
        idx = tuple(sorted(set(int(i) for i in indices)))
        if not idx:
            raise ValueError("empty sensor subset")
        if idx[0] < 1:
            raise ValueError("sensor indices are 1-based")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "mask", sum(1 << (i - 1) for i in idx))

    def __contains__(self, index: int) -> bool:
        return index in self.indices

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    @property
    def label(self) -> str:
        """Display label, e.g. 'z1z3'."""
        return "".join(f"z{i}" for i in self.indices)

    def validate_for(self, suite: SensorSuite) -> None:
        if self.indices[-1] > suite.size:
            raise ValueError(
                f"subset {self.label} references sensor {self.indices[-1]} "
                f"but the suite has only {suite.size}"
            )


@dataclass(frozen=True)
class FilterState:
    """Kalman gain and posterior covariance after `step` measurement updates."""

    step: int
    subset: SensorSubset
    W: np.ndarray
    P: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "W", _locked(self.W))
        object.__setattr__(self, "P", _locked(self.P))


def build_dwna_example() -> tuple[SystemModel, SensorSuite]:
    """Reference tracking scenario: three position-only sensors, unit sampling interval.

    Returns the discrete white noise acceleration model with delta=1, sigma_v=0.5,
    initial belief x0_hat=[1,1], P0=[[0.25,0.25],[0.25,0.5]], and sensors with
    noise s.d. 3, 4, 5 m.
    """
    model = dwna_model(
        delta=1.0,
        sigma_v=0.5,
        x0_hat=[1.0, 1.0],
        P0=[[0.25, 0.25], [0.25, 0.5]],
    )
    suite = position_sensor_suite([3.0, 4.0, 5.0])
    return model, suite


def dwna_model(delta: float, sigma_v: float, x0_hat, P0) -> SystemModel:
    """Discrete white noise acceleration kinematic model for a given sampling interval."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    F = np.array([[1.0, delta], [0.0, 1.0]])
    Gamma = np.array([delta**2 / 2.0, delta])
    return SystemModel(F=F, Gamma=Gamma, sigma_v=sigma_v, delta=delta, x0_hat=x0_hat, P0=P0)


def position_sensor_suite(noise_sds) -> SensorSuite:
    """Suite of position-only sensors (h = [1, 0]) with the given noise s.d. values."""
    return SensorSuite(tuple(Sensor(h_row=[1.0, 0.0], sigma_w=float(s)) for s in noise_sds))


def stack_measurement_model(
    suite: SensorSuite, subset: SensorSubset
) -> tuple[np.ndarray, np.ndarray]:
    """Stack per-sensor rows of a subset into one vector measurement model.

    Returns (H, R): H has one row per selected sensor in ascending index order,
    R is diagonal with the matching noise variances.
    """
    subset.validate_for(suite)
    rows = [suite.sensors[i - 1].h_row for i in subset.indices]
    H = np.vstack(rows)
    R = np.diag([suite.sensors[i - 1].sigma_w ** 2 for i in subset.indices])
    return H, R


def kalman_step(
    model: SystemModel, H: np.ndarray, R: np.ndarray, P: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """One covariance predict/update cycle. Returns (W, P_posterior)."""
    Ppred = model.F @ P @ model.F.T + model.Q
    S = H @ Ppred @ H.T + R
    try:
        W = np.linalg.solve(S.T, (Ppred @ H.T).T).T
    except np.linalg.LinAlgError as exc:  # unreachable for positive R
        raise np.linalg.LinAlgError("singular innovation covariance") from exc
    IWH = np.eye(model.state_dim) - W @ H
    P_post = IWH @ Ppred @ IWH.T + W @ R @ W.T
    return W, 0.5 * (P_post + P_post.T)


def kalman_recursion(
    model: SystemModel, suite: SensorSuite, subset: SensorSubset, steps: int
) -> FilterState:
    """Run the covariance recursion from P0 for `steps` updates on a sensor subset."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    H, R = stack_measurement_model(suite, subset)
    P = np.array(model.P0)
    W = None
    for _ in range(steps):
        W, P = kalman_step(model, H, R, P)
    return FilterState(step=steps, subset=subset, W=W, P=P)


def kalman_gain_history(
    model: SystemModel, suite: SensorSuite, subset: SensorSubset, steps: int
) -> list[FilterState]:
    """Filter states after each of the first `steps` updates (index k-1 holds step k)."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    H, R = stack_measurement_model(suite, subset)
    P = np.array(model.P0)
    out = []
    for k in range(1, steps + 1):
        W, P = kalman_step(model, H, R, P)
        out.append(FilterState(step=k, subset=subset, W=W, P=P))
    return out


def simulate_trajectory(
    model: SystemModel, horizon: int, rng: np.random.Generator
) -> np.ndarray:
    """Sample a true state trajectory of length horizon+1 (row 0 is the initial state).

    The initial state is drawn from N(x0_hat, P0); each transition adds
    Gamma-shaped scalar process noise. Draw order: state_dim normals for the
    initial state, then one normal per step.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    n = model.state_dim
    chol = np.linalg.cholesky(model.P0)
    x = np.empty((horizon + 1, n))
    x[0] = model.x0_hat + chol @ rng.standard_normal(n)
    v = rng.standard_normal(horizon)
    u = model.input_term if model.input_term is not None else 0.0
    for k in range(1, horizon + 1):
        x[k] = model.F @ x[k - 1] + u + model.Gamma * (model.sigma_v * v[k - 1])
    return x
