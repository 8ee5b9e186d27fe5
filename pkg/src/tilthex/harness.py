"""Closed-loop benchmark harness: runs, metrics, sweeps, CSV output.

A run pairs one controller (nominal MPC, adaptive-augmented MPC,
EKF-disturbance MPC, or PID) with one plant group (A-D) on the periodic
6-DOF reference. The loop is fixed step: one controller update per control
period, ten plant RK4 substeps underneath, tracking errors sampled at the
control instants, whole-run position/attitude RMSE at the end.

The MPC controllers keep an internal wrench command integrated from the
OCP wrench rates; the plant receives the commanded wrench through the
allocator round trip (or directly, in pure-numerical mode). A supervisor
can swap in the PID backup when the OCP solver fails hard and hand control
back after a configurable streak of successful solves.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import allocation
from .config import LabConfig
from .ekf import EkfConfig, EkfState, ekf_predict, ekf_update
from .fastsim import PlantSimulator
from .l1 import AdaptationError, L1State, l1_step
from .nmpc import NmpcSolver, OcpError, ReferenceWindow, SolveInfo
from .pid import PidController
from .quat import quat_error
from .trajectory import TrajectorySpec, reference
from .vehicle import Plant, PlantPerturbation, equilibrium_wrench

GROUPS = ("A", "B", "C", "D")
CONTROLLERS = ("nominal", "l1", "ekf", "pid")

# flag bits for the per-step CSV column
FLAG_DEGRADED = 1
FLAG_PID_ACTIVE = 2
FLAG_WRENCH_SAT = 4
FLAG_ROTOR_SAT = 8
FLAG_EKF_SKIP = 16
FLAG_DIVERGED = 32


@dataclass
class ExperimentSpec:
    group: str = "A"
    controller: str = "nominal"
    period: float = 15.0
    duration: float | None = None
    seed: int = 0
    out: str | Path | None = None

    def __post_init__(self):
        if self.group.upper() not in GROUPS:
            raise ValueError(f"group must be one of {GROUPS}")
        if self.controller not in CONTROLLERS:
            raise ValueError(f"controller must be one of {CONTROLLERS}")
        self.group = self.group.upper()
        if self.duration is None:
            self.duration = self.period


@dataclass
class RunMetrics:
    pos_rmse: float = np.nan
    quat_rmse: float = np.nan
    pos_rmse_axes: np.ndarray = field(default_factory=lambda: np.full(3, np.nan))
    quat_rmse_axes: np.ndarray = field(default_factory=lambda: np.full(3, np.nan))
    mean_err: np.ndarray = field(default_factory=lambda: np.full(3, np.nan))
    mean_solve_ms: float = 0.0
    max_solve_ms: float = 0.0
    saturation_count: int = 0
    pid_steps: int = 0
    degraded_steps: int = 0
    n_steps: int = 0
    failed: bool = False


def rmse(errors) -> float:
    """Root mean square of vector norms: sqrt(mean(|e_k|^2))."""
    errors = np.atleast_2d(np.asarray(errors, dtype=float))
    if errors.size == 0:
        raise ValueError("rmse of empty sequence")
    return float(np.sqrt(np.mean(np.sum(errors**2, axis=1))))


def sample_window(spec: TrajectorySpec, t: float, stages: int,
                  dt: float) -> ReferenceWindow:
    ts = t + np.arange(stages + 1) * dt
    p, q, v, w = reference(ts, spec)
    return ReferenceWindow(p=p, q=q, v=v, w=w)


# ---------------------------------------------------------------------------
# controller wrappers: uniform step(t, meas, window) -> (wrench, SolveInfo)


class NominalMpc:
    def __init__(self, solver: NmpcSolver, wrench0: np.ndarray):
        self.solver = solver
        self.w_cmd = wrench0.copy()
        self.period = None  # set by the loop

    def step(self, meas: np.ndarray, window: ReferenceWindow):
        x0 = np.concatenate([meas[:13], self.w_cmd])
        u0, info = self.solver.solve(x0, window)
        self.w_cmd = self.w_cmd + u0 * self.period
        return self.w_cmd.copy(), info

    def resync(self, wrench: np.ndarray):
        self.w_cmd = wrench.copy()
        self.solver.reset()


class AdaptiveMpc:
    """Nominal MPC plus the adaptive compensation layer."""

    def __init__(self, solver: NmpcSolver, l1cfg, params, z0, wrench0):
        self.solver = solver
        self.cfg = l1cfg
        self.params = params
        self.state = L1State.initial(z0, u_mpc0=wrench0)
        self.period = None

    def step(self, meas: np.ndarray, window: ReferenceWindow):
        x0 = np.concatenate([meas[:13], self.state.u_mpc])
        u0, info = self.solver.solve(x0, window)
        wrench, self.state = l1_step(meas, u0, self.state, self.cfg, self.params)
        return wrench, info

    def resync(self, wrench: np.ndarray):
        z = self.state.z_hat
        self.state = L1State.initial(z, u_mpc0=wrench)
        self.solver.reset()


class EkfMpc:
    """Nominal MPC over dynamics shifted by the estimated disturbance wrench."""

    def __init__(self, solver: NmpcSolver, ekf_cfg: EkfConfig, params,
                 meas0, wrench0):
        self.solver = solver
        self.cfg = ekf_cfg
        self.params = params
        self.filter = EkfState.initial(meas0, ekf_cfg)
        self.w_cmd = wrench0.copy()
        self.period = None
        self.update_ok = True

    def step(self, meas: np.ndarray, window: ReferenceWindow):
        self.filter = ekf_predict(self.filter, self.w_cmd, self.cfg,
                                  self.params, self.period)
        self.filter, self.update_ok = ekf_update(self.filter, meas[:13], self.cfg)
        dist = np.concatenate([self.filter.f_dist, self.filter.tau_dist])
        x0 = np.concatenate([meas[:13], self.w_cmd])
        u0, info = self.solver.solve(x0, window, dist=dist)
        self.w_cmd = self.w_cmd + u0 * self.period
        return self.w_cmd.copy(), info

    def resync(self, wrench: np.ndarray):
        self.w_cmd = wrench.copy()
        self.solver.reset()


class PidOnly:
    def __init__(self, pid: PidController):
        self.pid = pid
        self.period = None

    def step(self, meas: np.ndarray, window: ReferenceWindow):
        wrench = self.pid.wrench(meas, window.p[0], window.q[0],
                                 window.v[0], window.w[0])
        return wrench, SolveInfo(status="converged", solve_ms=0.0, kkt=0.0)


class BackupSupervisor:
    """Runs the primary controller, swapping in PID on hard failures.

    While engaged, the primary is still stepped each period so recovery can
    be detected; control returns after `recover_steps` consecutive clean
    solves inside the validity envelope.
    """

    def __init__(self, primary, pid: PidController, recover_steps: int,
                 error_radius: float):
        self.primary = primary
        self.pid = pid
        self.recover_steps = recover_steps
        self.error_radius = error_radius
        self.engaged = False
        self._streak = 0
        self.period = None

    def step(self, meas: np.ndarray, window: ReferenceWindow):
        self.primary.period = self.period
        self.pid.period = self.period
        in_envelope = (np.all(np.isfinite(meas))
                       and np.linalg.norm(window.p[0] - meas[:3]) < self.error_radius)
        wrench = None
        info = None
        try:
            if in_envelope:
                wrench, info = self.primary.step(meas, window)
                ok = np.all(np.isfinite(wrench))
            else:
                ok = False
        except (OcpError, AdaptationError):
            ok = False
        if not self.engaged:
            if ok:
                return wrench, info, False
            self.engaged = True
            self._streak = 0
        else:
            self._streak = self._streak + 1 if ok else 0
            if self._streak >= self.recover_steps:
                self.engaged = False
                self.primary.resync(self._last_pid_wrench)
                return wrench, info, False
        pid_wrench = self.pid.wrench(meas, window.p[0], window.q[0],
                                     window.v[0], window.w[0])
        self._last_pid_wrench = pid_wrench
        if info is None:
            info = SolveInfo(status="degraded", solve_ms=0.0)
        return pid_wrench, info, True


# ---------------------------------------------------------------------------


@dataclass
class RunResult:
    spec: ExperimentSpec
    metrics: RunMetrics
    columns: list
    data: np.ndarray

    def series(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def write_csv(self, path: str | Path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(render_csv(self.columns, self.data))

    def to_csv_bytes(self) -> bytes:
        return render_csv(self.columns, self.data).encode()


def render_csv(columns, data) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in data:
        writer.writerow([f"{v:.10g}" for v in row])
    return buf.getvalue()


def _csv_columns(controller: str) -> list:
    cols = (["t"]
            + [f"p_{a}" for a in "xyz"] + [f"q_{a}" for a in "wxyz"]
            + [f"v_{a}" for a in "xyz"] + [f"w_{a}" for a in "xyz"]
            + [f"p_ref_{a}" for a in "xyz"] + [f"q_ref_{a}" for a in "wxyz"]
            + [f"f_a_{a}" for a in "xyz"] + [f"tau_a_{a}" for a in "xyz"])
    if controller == "l1":
        cols += [f"u_l1_{i}" for i in range(6)] + [f"sigma_{i}" for i in range(6)]
    elif controller == "ekf":
        cols += [f"f_ekf_{i}" for i in range(6)]
    cols += ["solve_ms", "flags"]
    return cols


def build_controller(spec: ExperimentSpec, cfg: LabConfig, mats, x0):
    params = cfg.vehicle
    wrench0 = equilibrium_wrench(x0[3:7], x0[10:13], params)
    solver = NmpcSolver(params, cfg.weights, cfg.constraints, cfg.solver, mats)
    if spec.controller == "nominal":
        return NominalMpc(solver, wrench0)
    if spec.controller == "l1":
        z0 = np.concatenate([x0[7:10], x0[10:13]])
        return AdaptiveMpc(solver, cfg.l1, params, z0, wrench0)
    if spec.controller == "ekf":
        return EkfMpc(solver, cfg.ekf, params, x0[:13], wrench0)
    if spec.controller == "pid":
        return PidOnly(PidController(cfg.pid, params, cfg.sim.control_period))
    raise ValueError(spec.controller)


def run_experiment(spec: ExperimentSpec, cfg: LabConfig | None = None) -> RunResult:
    """Simulate one (group, controller, period) cell and collect metrics."""
    from .config import default_config

    cfg = cfg if cfg is not None else default_config()
    sim = cfg.sim
    traj = cfg.trajectory.scaled(spec.period)
    params = cfg.vehicle
    mats = allocation.build_matrices(cfg.geometry)
    pert = PlantPerturbation.for_group(spec.group, com_shift=sim.com_shift)
    if sim.allocation_mismatch:
        pert.allocation_mismatch = True
    plant = Plant(params, pert)
    stepper = PlantSimulator(plant, sim.plant_dt, sim.substeps,
                             use_jit=sim.use_jit_plant)
    rng = np.random.default_rng(spec.seed)
    noisy = bool(np.any(sim.meas_noise > 0.0))

    p0, q0, v0, w0 = reference(0.0, traj)
    wrench0 = equilibrium_wrench(q0, w0, params)
    x = np.concatenate([p0, q0, v0, w0, wrench0])

    controller = build_controller(spec, cfg, mats, x)
    controller.period = sim.control_period
    use_backup = sim.backup_enabled and spec.controller != "pid"
    if use_backup:
        backup = PidController(cfg.pid, params, sim.control_period)
        supervisor = BackupSupervisor(controller, backup,
                                      sim.backup_recover_steps,
                                      sim.backup_error_radius)
        supervisor.period = sim.control_period

    n_steps = round(spec.duration * sim.control_rate)
    shift_every = max(1, round(cfg.solver.dt / sim.control_period))
    columns = _csv_columns(spec.controller)
    data = np.zeros((n_steps, len(columns)))
    metrics = RunMetrics(n_steps=0)
    envelope = sim.wrench_envelope
    plant_substeps = 0
    controller_calls = 0

    for k in range(n_steps):
        t = k * sim.control_period
        meas = x[:13].copy()
        if noisy:
            noise = rng.normal(size=12) * sim.meas_noise
            meas[0:3] += noise[0:3]
            # small-angle attitude noise through the quaternion vector part
            meas[4:7] += 0.5 * noise[3:6]
            meas[3:7] /= np.linalg.norm(meas[3:7])
            meas[7:10] += noise[6:9]
            meas[10:13] += noise[9:12]
        window = sample_window(traj, t, cfg.solver.stages, cfg.solver.dt)
        if k > 0 and k % shift_every == 0 and hasattr(controller, "solver"):
            controller.solver.shift()

        flags = 0
        if use_backup:
            wrench, info, pid_active = supervisor.step(meas, window)
            if pid_active:
                flags |= FLAG_PID_ACTIVE
                metrics.pid_steps += 1
        else:
            wrench, info = controller.step(meas, window)
        controller_calls += 1
        if info.status == "degraded":
            flags |= FLAG_DEGRADED
            metrics.degraded_steps += 1
        if getattr(controller, "update_ok", True) is False:
            flags |= FLAG_EKF_SKIP

        clipped = np.clip(wrench, -envelope, envelope)
        if np.any(clipped != wrench):
            flags |= FLAG_WRENCH_SAT
            metrics.saturation_count += 1
        wrench = clipped
        if sim.use_allocation:
            if pert.allocation_mismatch:
                cmd = allocation.allocate_mismatched(wrench, mats)
            else:
                cmd = allocation.allocate(wrench, mats)
            if cmd.saturated:
                flags |= FLAG_ROTOR_SAT
                metrics.saturation_count += 1
            w_plant = allocation.forward_model(cfg.geometry, cmd)
        else:
            w_plant = wrench

        row = [t]
        row += list(x[:13])
        row += list(window.p[0]) + list(window.q[0])
        row += list(wrench)
        if spec.controller == "l1":
            row += list(controller.state.u_l1) + list(controller.state.sigma_hat)
        elif spec.controller == "ekf":
            row += list(controller.filter.f_dist) + list(controller.filter.tau_dist)
        row += [info.solve_ms, flags]
        data[k] = row

        x = stepper.step(x, w_plant)
        plant_substeps += sim.substeps
        metrics.n_steps = k + 1
        if not np.all(np.isfinite(x)) or np.linalg.norm(x[:3]) > sim.divergence_radius:
            data[k, columns.index("flags")] = flags | FLAG_DIVERGED
            metrics.failed = True
            data = data[:k + 1]
            break

    if plant_substeps != sim.substeps * controller_calls:
        raise AssertionError("plant/controller step ratio violated")

    skip = round(sim.rmse_skip * sim.control_rate)
    used = data[skip:] if len(data) > skip else data
    p_err = used[:, [columns.index(f"p_ref_{a}") for a in "xyz"]] \
        - used[:, [columns.index(f"p_{a}") for a in "xyz"]]
    q_cols = [columns.index(f"q_{a}") for a in "wxyz"]
    qr_cols = [columns.index(f"q_ref_{a}") for a in "wxyz"]
    q_err = quat_error(used[:, q_cols], used[:, qr_cols])
    metrics.pos_rmse = rmse(p_err)
    metrics.quat_rmse = rmse(q_err)
    metrics.pos_rmse_axes = np.sqrt(np.mean(p_err**2, axis=0))
    metrics.quat_rmse_axes = np.sqrt(np.mean(q_err**2, axis=0))
    metrics.mean_err = np.mean(p_err, axis=0)
    solve_col = data[:, columns.index("solve_ms")]
    metrics.mean_solve_ms = float(np.mean(solve_col))
    metrics.max_solve_ms = float(np.max(solve_col))

    result = RunResult(spec=spec, metrics=metrics, columns=columns, data=data)
    if spec.out is not None:
        result.write_csv(spec.out)
    return result


def sweep(specs, cfg: LabConfig | None = None, out_dir: str | Path | None = None):
    """Run a matrix of experiments; returns summary rows (one per run).

    Reduction percentages are relative to the nominal controller of the
    same (group, period) cell when that run is part of the sweep.
    """
    results = {}
    rows = []
    for spec in specs:
        if out_dir is not None and spec.out is None:
            name = f"{spec.group}_{spec.controller}_T{spec.period:g}.csv"
            spec.out = Path(out_dir) / name
        t0 = time.perf_counter()
        res = run_experiment(spec, cfg)
        wall = time.perf_counter() - t0
        results[(spec.group, spec.controller, spec.period)] = res
        rows.append({
            "group": spec.group,
            "controller": spec.controller,
            "period_s": spec.period,
            "duration_s": spec.duration,
            "pos_rmse_m": res.metrics.pos_rmse,
            "quat_rmse": res.metrics.quat_rmse,
            "pos_reduction_pct": "",
            "quat_reduction_pct": "",
            "mean_solve_ms": res.metrics.mean_solve_ms,
            "max_solve_ms": res.metrics.max_solve_ms,
            "saturation_count": res.metrics.saturation_count,
            "pid_steps": res.metrics.pid_steps,
            "failed": int(res.metrics.failed),
            "wall_s": round(wall, 2),
        })
    for row in rows:
        base = results.get((row["group"], "nominal", row["period_s"]))
        if base is None or row["controller"] == "nominal" or base.metrics.failed:
            continue
        row["pos_reduction_pct"] = round(
            100.0 * (1.0 - row["pos_rmse_m"] / base.metrics.pos_rmse), 2)
        row["quat_reduction_pct"] = round(
            100.0 * (1.0 - row["quat_rmse"] / base.metrics.quat_rmse), 2)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "summary.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()),
                                    lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
    return rows


def default_sweep_specs(cfg: LabConfig):
    out = []
    for group in cfg.sweep.groups:
        for period in cfg.sweep.periods:
            for controller in cfg.sweep.controllers:
                out.append(ExperimentSpec(group=group, controller=controller,
                                          period=period,
                                          duration=cfg.sweep.duration))
    return out
