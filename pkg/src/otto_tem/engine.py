"""Finite-time qubit Otto engine under five control-degradation models.

The working medium is a single qubit tracked by its Bloch vector
``r = (x, y, z)``.  One cycle is four strokes: hot isochore (dissipative
relaxation at the high longitudinal field), expansion (unitary ramp down),
cold isochore, compression (unitary ramp back up).  Integration is a plain
forward-Euler scheme with a fixed number of steps per stroke, so every
trajectory is bitwise reproducible from its seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

__all__ = [
    "EngineParams",
    "NoiseModel",
    "NoiseSpec",
    "BlochState",
    "OUState",
    "Trajectory",
    "COMBINED_WEIGHTS",
    "z_eq",
    "unitary_step",
    "dissipative_step",
    "ramp_fields",
    "ou_step",
    "sample_stroke_durations",
    "internal_energy",
    "run_trajectory",
    "work_stats",
]

# Per-cycle lower bound on any jittered stroke duration, as a fraction of the
# nominal duration.  Keeps durations positive for arbitrarily large draws.
DURATION_FLOOR_FRACTION = 0.05

# Hard lower bound on the sweep exponent; guards s**alpha against the
# singular limit alpha -> 0.
ALPHA_FLOOR = 0.01

# Combined-degradation channel weights: a master intensity lam maps to
# (sigma_tau, sigma_alpha, sigma_ou, sigma_ripple) = lam * COMBINED_WEIGHTS.
# Calibrated so the mixture is dominated by the band-limited channels while
# retaining a mild global timing/ramp component.
COMBINED_WEIGHTS = (0.01, 0.03, 0.3, 0.4)


@dataclass(frozen=True)
class EngineParams:
    """Physical and protocol constants of the Otto cycle."""

    omega_h: float = 2.0
    omega_c: float = 1.0
    T_h: float = 0.8
    T_c: float = 0.25
    gamma: float = 0.6
    omega_x_max: float = 1.0
    tau_h: float = 0.7
    tau_c: float = 0.7
    tau_1: float = 0.6
    tau_3: float = 0.6
    steps_per_stroke: int = 150

    def __post_init__(self):
        if not (self.omega_h > self.omega_c > 0.0):
            raise ValueError("require omega_h > omega_c > 0")
        if not (self.T_h > self.T_c > 0.0):
            raise ValueError("require T_h > T_c > 0")
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")
        if min(self.tau_h, self.tau_c, self.tau_1, self.tau_3) <= 0.0:
            raise ValueError("stroke durations must be positive")
        if self.steps_per_stroke < 1:
            raise ValueError("steps_per_stroke must be >= 1")

    @property
    def dephasing_rate(self) -> float:
        """Transverse relaxation rate (half the longitudinal rate)."""
        return self.gamma / 2.0

    @property
    def longitudinal_rate(self) -> float:
        return self.gamma

    def to_dict(self) -> dict:
        return {
            "omega_h": self.omega_h, "omega_c": self.omega_c,
            "T_h": self.T_h, "T_c": self.T_c, "gamma": self.gamma,
            "omega_x_max": self.omega_x_max,
            "tau_h": self.tau_h, "tau_c": self.tau_c,
            "tau_1": self.tau_1, "tau_3": self.tau_3,
            "steps_per_stroke": self.steps_per_stroke,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EngineParams":
        return cls(**d)


class NoiseModel(str, Enum):
    NONE = "none"
    TIMING_JITTER = "jitter"
    RAMP_DISTORTION = "ramp"
    OU_SWEEP = "ou"
    RIPPLE = "ripple"
    COMBINED = "combined"


@dataclass(frozen=True)
class NoiseSpec:
    """One degradation regime and its intensity.

    ``amplitude`` is sigma_tau, sigma_alpha, sigma_ou, sigma_ripple or the
    combined master intensity, depending on ``model``.
    """

    model: NoiseModel = NoiseModel.NONE
    amplitude: float = 0.0
    ou_theta: float = 50.0
    ou_mu: float = 1.0
    ripple_k_expand: int = 10
    ripple_k_compress: int = 2

    def __post_init__(self):
        if isinstance(self.model, str) and not isinstance(self.model, NoiseModel):
            object.__setattr__(self, "model", NoiseModel(self.model))
        if self.amplitude < 0.0:
            raise ValueError("noise amplitude must be nonnegative")
        if self.model is NoiseModel.NONE and self.amplitude != 0.0:
            raise ValueError("model 'none' forces amplitude 0")
        for k in (self.ripple_k_expand, self.ripple_k_compress):
            if k < 2 or k % 2 != 0:
                raise ValueError("ripple wave numbers must be even integers >= 2")
        if self.ou_theta < 0.0:
            raise ValueError("ou_theta must be nonnegative")

    def channel_sigmas(self) -> tuple[float, float, float, float]:
        """(sigma_tau, sigma_alpha, sigma_ou, sigma_ripple) for this spec."""
        a = self.amplitude
        m = self.model
        if m is NoiseModel.NONE:
            return (0.0, 0.0, 0.0, 0.0)
        if m is NoiseModel.TIMING_JITTER:
            return (a, 0.0, 0.0, 0.0)
        if m is NoiseModel.RAMP_DISTORTION:
            return (0.0, a, 0.0, 0.0)
        if m is NoiseModel.OU_SWEEP:
            return (0.0, 0.0, a, 0.0)
        if m is NoiseModel.RIPPLE:
            return (0.0, 0.0, 0.0, a)
        w = COMBINED_WEIGHTS
        return (a * w[0], a * w[1], a * w[2], a * w[3])

    def to_dict(self) -> dict:
        return {
            "model": self.model.value, "amplitude": self.amplitude,
            "ou_theta": self.ou_theta, "ou_mu": self.ou_mu,
            "ripple_k_expand": self.ripple_k_expand,
            "ripple_k_compress": self.ripple_k_compress,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpec":
        return cls(**d)


@dataclass(frozen=True)
class BlochState:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass
class OUState:
    """Current sweep exponent of the stochastically distorted ramp."""

    alpha: float = 1.0

    def __post_init__(self):
        if self.alpha < ALPHA_FLOOR:
            raise ValueError(f"alpha must be >= {ALPHA_FLOOR}")


@dataclass
class Trajectory:
    """Recorded window of one simulated run.

    ``samples`` has one row per integration step: (t, x, y, z, omega_x,
    omega_z), taken at the start of the step with the fields applied during
    it.  ``cycle_marks[i]`` is the sample index where recorded cycle i
    begins; ``cycle_work[i]`` is that cycle's net work over both unitary
    strokes.
    """

    samples: np.ndarray
    cycle_marks: np.ndarray
    cycle_work: np.ndarray
    seed: int
    noise: NoiseSpec
    params: EngineParams

    def __post_init__(self):
        t = self.samples[:, 0]
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("sample times must be strictly increasing")
        if len(self.cycle_marks) > 1 and not np.all(np.diff(self.cycle_marks) > 0):
            raise ValueError("cycle marks must be strictly increasing")
        if len(self.cycle_work) != len(self.cycle_marks):
            raise ValueError("one work value per recorded cycle expected")

    @property
    def x_series(self) -> np.ndarray:
        """The measured observable <sigma_x>(t), one value per sample."""
        return self.samples[:, 1]

    def cycle_index(self) -> np.ndarray:
        """Recorded-cycle number for every sample row."""
        idx = np.searchsorted(self.cycle_marks, np.arange(len(self.samples)),
                              side="right") - 1
        return idx.astype(np.int64)


def z_eq(omega_z: float, T: float) -> float:
    """Thermal fixed point of the longitudinal Bloch component."""
    if T <= 0.0:
        raise ValueError("temperature must be positive")
    return -math.tanh(omega_z / (2.0 * T))


def unitary_step(s: BlochState, omega_x: float, omega_z: float,
                 dt: float) -> BlochState:
    """One forward-Euler update of the coherent (work-stroke) dynamics."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    return BlochState(
        x=s.x - dt * omega_z * s.y,
        y=s.y + dt * (omega_z * s.x - omega_x * s.z),
        z=s.z + dt * omega_x * s.y,
    )


def dissipative_step(s: BlochState, omega_z: float, T: float, gamma: float,
                     dt: float) -> BlochState:
    """One forward-Euler update of the thermal-contact dynamics (omega_x=0).

    Transverse components relax at gamma/2, the longitudinal component at
    gamma toward ``z_eq(omega_z, T)``.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if gamma < 0.0:
        raise ValueError("gamma must be nonnegative")
    zeq = z_eq(omega_z, T)
    half = 0.5 * gamma
    return BlochState(
        x=s.x + dt * (-half * s.x - omega_z * s.y),
        y=s.y + dt * (omega_z * s.x - half * s.y),
        z=s.z - dt * gamma * (s.z - zeq),
    )


def ramp_fields(s: float, direction: str, alpha: float, ripple_delta: float,
                ripple_k: int, p: EngineParams) -> tuple[float, float]:
    """Control fields (omega_z, omega_x) at normalized stroke time s.

    ``direction`` is "expand" (omega_h -> omega_c) or "compress" (mirrored).
    The longitudinal ramp follows s**alpha plus a sinusoidal ripple of even
    wave number; the transverse envelope is omega_x_max * sin(pi s).
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError("normalized stroke time must lie in [0, 1]")
    if alpha < ALPHA_FLOOR:
        raise ValueError(f"alpha must be >= {ALPHA_FLOOR}")
    sa = s ** alpha
    if direction == "expand":
        omega_z = p.omega_h + (p.omega_c - p.omega_h) * sa
    elif direction == "compress":
        omega_z = p.omega_c + (p.omega_h - p.omega_c) * sa
    else:
        raise ValueError("direction must be 'expand' or 'compress'")
    omega_z += ripple_delta * math.sin(ripple_k * math.pi * s)
    omega_x = p.omega_x_max * math.sin(math.pi * s)
    return omega_z, omega_x


def ou_step(state: OUState, ds: float, sigma_ou: float, theta: float,
            mu: float, gaussian: float) -> OUState:
    """Euler-Maruyama update of the mean-reverting sweep exponent.

    The effective diffusion is 8*sigma_ou so that strong mean reversion does
    not quench the stationary fluctuations; the result is floored at
    ALPHA_FLOOR.
    """
    if ds <= 0.0:
        raise ValueError("ds must be positive")
    if theta < 0.0:
        raise ValueError("theta must be nonnegative")
    sigma_eff = 8.0 * sigma_ou
    alpha = state.alpha + theta * (mu - state.alpha) * ds \
        + sigma_eff * math.sqrt(ds) * gaussian
    return OUState(alpha=max(ALPHA_FLOOR, alpha))


def sample_stroke_durations(p: EngineParams, sigma_tau: float,
                            rng: np.random.Generator
                            ) -> tuple[float, float, float, float]:
    """Per-cycle jittered durations (tau_h, tau_1, tau_c, tau_3).

    Each nominal duration is scaled by (1 + delta) with independent Gaussian
    delta; results are floored at DURATION_FLOOR_FRACTION of nominal.
    """
    if sigma_tau < 0.0:
        raise ValueError("sigma_tau must be nonnegative")
    nominal = (p.tau_h, p.tau_1, p.tau_c, p.tau_3)
    if sigma_tau == 0.0:
        return nominal
    out = []
    for tau in nominal:
        scaled = tau * (1.0 + rng.normal(0.0, sigma_tau))
        out.append(max(DURATION_FLOOR_FRACTION * tau, scaled))
    return tuple(out)


def internal_energy(s: BlochState, omega_x: float, omega_z: float) -> float:
    """Expected energy of the qubit in the instantaneous control fields."""
    return 0.5 * (omega_z * s.z + omega_x * s.x)


def work_stats(works) -> tuple[float, float]:
    """Population mean and variance (1/N normalization) of per-cycle work."""
    w = np.asarray(works, dtype=np.float64)
    if w.size == 0:
        raise ValueError("work sequence must be nonempty")
    mean = float(w.mean())
    var = float(((w - mean) ** 2).mean())
    return mean, var


def run_trajectory(p: EngineParams, noise: NoiseSpec, burn_in: int,
                   record_cycles: int, seed: int) -> Trajectory:
    """Integrate burn_in + record_cycles cycles and record the final window.

    Draw schedule per cycle: the four duration factors (if timing jitter is
    active), then per unitary stroke a static exponent (ramp channel) and a
    ripple amplitude, then one OU increment per integration step.  The
    noiseless model consumes no draws at all, so the result is independent
    of the seed.  Identical (params, noise, seed) give bitwise-identical
    output.
    """
    if burn_in < 0:
        raise ValueError("burn_in must be nonnegative")
    if record_cycles < 1:
        raise ValueError("record_cycles must be >= 1")

    rng = np.random.default_rng(seed)
    s_tau, s_alpha, s_ou, s_rip = noise.channel_sigmas()
    steps = p.steps_per_stroke
    ds = 1.0 / steps

    x, y, z = 0.0, 0.0, z_eq(p.omega_h, p.T_h)
    gamma, half = p.gamma, 0.5 * p.gamma
    t = 0.0
    rows: list[tuple] = []
    marks: list[int] = []
    works: list[float] = []

    isochores = ((p.omega_h, p.T_h), (p.omega_c, p.T_c))
    ramp_dirs = ("expand", "compress")
    ripple_ks = (noise.ripple_k_expand, noise.ripple_k_compress)

    for cycle in range(burn_in + record_cycles):
        recording = cycle >= burn_in
        if recording:
            marks.append(len(rows))
        taus = sample_stroke_durations(p, s_tau, rng) if s_tau > 0.0 \
            else (p.tau_h, p.tau_1, p.tau_c, p.tau_3)
        cycle_w = 0.0

        for half_cycle in (0, 1):
            # --- isochore ----------------------------------------------
            omega_iso, T_iso = isochores[half_cycle]
            dt = taus[2 * half_cycle] / steps
            zeq = z_eq(omega_iso, T_iso)
            for _ in range(steps):
                if recording:
                    rows.append((t, x, y, z, 0.0, omega_iso))
                x, y, z = (x + dt * (-half * x - omega_iso * y),
                           y + dt * (omega_iso * x - half * y),
                           z - dt * gamma * (z - zeq))
                t += dt

            # --- unitary ramp ------------------------------------------
            direction = ramp_dirs[half_cycle]
            ripple_k = ripple_ks[half_cycle]
            dt = taus[2 * half_cycle + 1] / steps
            alpha_static = 1.0
            if s_alpha > 0.0:
                alpha_static = 1.0 + rng.normal(0.0, s_alpha)
            alpha_static = max(ALPHA_FLOOR, alpha_static)
            ripple_delta = rng.normal(0.0, s_rip) if s_rip > 0.0 else 0.0
            ou = OUState(alpha=alpha_static)
            e_start = None
            for k in range(steps):
                if s_ou > 0.0 and k > 0:
                    ou = ou_step(ou, ds, s_ou, noise.ou_theta, alpha_static,
                                 rng.normal())
                omega_z, omega_x = ramp_fields(k * ds, direction, ou.alpha,
                                               ripple_delta, ripple_k, p)
                if k == 0:
                    e_start = 0.5 * (omega_z * z + omega_x * x)
                if recording:
                    rows.append((t, x, y, z, omega_x, omega_z))
                x, y, z = (x - dt * omega_z * y,
                           y + dt * (omega_z * x - omega_x * z),
                           z + dt * omega_x * y)
                t += dt
            omega_z_end, omega_x_end = ramp_fields(1.0, direction, ou.alpha,
                                                   ripple_delta, ripple_k, p)
            cycle_w += 0.5 * (omega_z_end * z + omega_x_end * x) - e_start

        if recording:
            works.append(cycle_w)

    return Trajectory(
        samples=np.asarray(rows, dtype=np.float64),
        cycle_marks=np.asarray(marks, dtype=np.int64),
        cycle_work=np.asarray(works, dtype=np.float64),
        seed=int(seed),
        noise=noise,
        params=p,
    )


# --------------------------------------------------------------------------
# serialization: CSV of samples plus a JSON sidecar with run metadata
# --------------------------------------------------------------------------

TRAJECTORY_HEADER = "t,x,y,z,omega_x,omega_z,cycle_index"


def save_trajectory(traj: Trajectory, csv_path: str | Path) -> None:
    from .io import format_float

    csv_path = Path(csv_path)
    cyc = traj.cycle_index()
    lines = [TRAJECTORY_HEADER]
    for row, c in zip(traj.samples, cyc):
        lines.append(",".join(format_float(v) for v in row) + f",{c}")
    csv_path.write_text("\n".join(lines) + "\n")

    sidecar = {
        "params": traj.params.to_dict(),
        "noise": traj.noise.to_dict(),
        "seed": traj.seed,
        "cycle_work": [float(w) for w in traj.cycle_work],
        "cycle_marks": [int(m) for m in traj.cycle_marks],
    }
    from .io import dump_json

    dump_json(sidecar, csv_path.with_suffix(".json"))


def load_trajectory(csv_path: str | Path) -> Trajectory:
    csv_path = Path(csv_path)
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    meta = json.loads(csv_path.with_suffix(".json").read_text())
    return Trajectory(
        samples=data[:, :6],
        cycle_marks=np.asarray(meta["cycle_marks"], dtype=np.int64),
        cycle_work=np.asarray(meta["cycle_work"], dtype=np.float64),
        seed=int(meta["seed"]),
        noise=NoiseSpec.from_dict(meta["noise"]),
        params=EngineParams.from_dict(meta["params"]),
    )
