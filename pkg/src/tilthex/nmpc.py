"""Receding-horizon optimal control of the 19-state wrench-rate model.

Direct multiple shooting over N stages with RK4 discretization, solved by
Gauss-Newton SQP:

  * iterate = full (X, U) trajectory with shooting defects,
  * condensed QP over the stacked controls (state sensitivities propagate
    the linearized dynamics, defects enter as affine corrections),
  * wrench-rate box constraints handled exactly by a projected-Newton QP,
  * velocity / body-rate / rotor-thrust limits as hinge-squared penalties,
  * backtracking line search on cost + defect merit (factor 0.5, max 8).

A single iteration with warm starting gives real-time-iteration behavior;
more iterations converge the full nonlinear problem. All operations run
batched over the horizon, which keeps a solve in the low milliseconds.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import vehicle
from .allocation import AllocationMatrices, thrust_output_jacobian
from .quat import (
    left_mul_matrix,
    quat_conj,
    quat_error,
    quat_mul,
    right_mul_matrix,
    rot_action_jacobian,
    skew,
)
from .vehicle import FA, NU, NX, P, Q, TA, V, VehicleParams, W

NE = 18  # tracking-error dimension (quaternion reduced to 3)


class OcpError(RuntimeError):
    """Hard solver failure (non-finite iterate); callers fall back to PID."""


@dataclass
class OcpWeights:
    """Diagonal stage/terminal state weights and control weight."""

    q_diag: np.ndarray
    r_diag: np.ndarray
    qn_diag: np.ndarray

    def __post_init__(self):
        self.q_diag = np.asarray(self.q_diag, dtype=float)
        self.r_diag = np.asarray(self.r_diag, dtype=float)
        self.qn_diag = np.asarray(self.qn_diag, dtype=float)
        if self.q_diag.shape != (NE,) or self.qn_diag.shape != (NE,):
            raise ValueError("state weights must have 18 entries")
        if self.r_diag.shape != (NU,):
            raise ValueError("control weight must have 6 entries")
        if np.any(self.q_diag < 0) or np.any(self.r_diag < 0) or np.any(self.qn_diag < 0):
            raise ValueError("weights must be nonnegative")

    @classmethod
    def from_blocks(cls, position=120.0, attitude=80.0, velocity=4.0,
                    body_rate=4.0, wrench=1e-3, rate=5e-4,
                    terminal_scale=10.0) -> "OcpWeights":
        q = np.concatenate([
            np.full(3, position), np.full(3, attitude),
            np.full(3, velocity), np.full(3, body_rate),
            np.full(6, wrench),
        ])
        qn = q.copy()
        qn[:12] *= terminal_scale
        return cls(q_diag=q, r_diag=np.full(NU, rate), qn_diag=qn)


@dataclass
class ConstraintSet:
    """Bounds on h = [v(3), w(3), F(6)] and on the wrench-rate control."""

    h_lb: np.ndarray
    h_ub: np.ndarray
    u_lb: np.ndarray
    u_ub: np.ndarray

    def __post_init__(self):
        self.h_lb = np.asarray(self.h_lb, dtype=float)
        self.h_ub = np.asarray(self.h_ub, dtype=float)
        self.u_lb = np.asarray(self.u_lb, dtype=float)
        self.u_ub = np.asarray(self.u_ub, dtype=float)
        if np.any(self.h_lb > self.h_ub) or np.any(self.u_lb > self.u_ub):
            raise ValueError("lower bounds must not exceed upper bounds")

    @classmethod
    def defaults(cls, v_max=8.0, w_max=6.0, thrust_out_max=324.0,
                 force_rate=150.0, torque_rate=50.0) -> "ConstraintSet":
        h_ub = np.concatenate([np.full(3, v_max), np.full(3, w_max),
                               np.full(6, thrust_out_max)])
        h_lb = np.concatenate([np.full(3, -v_max), np.full(3, -w_max), np.zeros(6)])
        u_ub = np.concatenate([np.full(3, force_rate), np.full(3, torque_rate)])
        return cls(h_lb=h_lb, h_ub=h_ub, u_lb=-u_ub, u_ub=u_ub)


@dataclass
class SolverConfig:
    horizon: float = 1.0
    stages: int = 20
    max_iters: int = 3
    kkt_tol: float = 1e-6
    penalty_weight: float = 100.0
    warm_start: bool = True
    merit_defect_weight: float = 1e3
    max_backtracks: int = 8

    def __post_init__(self):
        if self.stages < 2 or self.horizon <= 0.0:
            raise ValueError("need at least 2 stages and a positive horizon")

    @property
    def dt(self) -> float:
        return self.horizon / self.stages


@dataclass
class ReferenceWindow:
    """References sampled at the shooting nodes (stages + 1 rows each)."""

    p: np.ndarray
    q: np.ndarray
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.p = np.atleast_2d(np.asarray(self.p, dtype=float))
        self.q = np.atleast_2d(np.asarray(self.q, dtype=float))
        self.v = np.atleast_2d(np.asarray(self.v, dtype=float))
        self.w = np.atleast_2d(np.asarray(self.w, dtype=float))
        # keep adjacent quaternions on the same sheet of the double cover
        for i in range(1, len(self.q)):
            if np.dot(self.q[i], self.q[i - 1]) < 0.0:
                self.q[i] = -self.q[i]

    def __len__(self) -> int:
        return len(self.p)


@dataclass
class SolveInfo:
    """Solve diagnostics.

    status: "converged"  KKT below tolerance or step size at numerical floor,
            "max_iters"  iteration budget exhausted (normal in RTI mode),
            "degraded"   line search failed at a non-stationary point.
    """

    status: str = "converged"
    iterations: int = 0
    kkt: float = np.inf
    cost: float = np.inf
    solve_ms: float = 0.0
    penalty_violation: float = 0.0


def stage_error(x: np.ndarray, p_ref, q_ref, v_ref, w_ref) -> np.ndarray:
    """18-component tracking error [p_ref-p, q_err, v_ref-v, w_ref-w, f_a, tau_a]."""
    x = np.asarray(x, dtype=float)
    e = np.empty(x.shape[:-1] + (NE,))
    e[..., 0:3] = p_ref - x[..., P]
    e[..., 3:6] = quat_error(x[..., Q], q_ref)
    e[..., 6:9] = v_ref - x[..., V]
    e[..., 9:12] = w_ref - x[..., W]
    e[..., 12:18] = x[..., 13:19]
    return e


def _stage_errors(X: np.ndarray, refs: ReferenceWindow) -> np.ndarray:
    """Batch tracking errors (K,18)."""
    K = len(X)
    e = np.empty((K, NE))
    e[:, 0:3] = refs.p - X[:, P]
    e[:, 6:9] = refs.v - X[:, V]
    e[:, 9:12] = refs.w - X[:, W]
    e[:, 12:18] = X[:, 13:19]
    prod = quat_mul(X[:, Q], quat_conj(refs.q))
    sign = np.where(prod[:, :1] < 0.0, -1.0, 1.0)
    e[:, 3:6] = sign * prod[:, 1:]
    return e


def _stage_errors_and_jac(X: np.ndarray, refs: ReferenceWindow):
    """Batch errors (K,18) plus Jacobians dE/dx (K,18,19)."""
    K = len(X)
    e = np.empty((K, NE))
    E = np.zeros((K, NE, NX))
    e[:, 0:3] = refs.p - X[:, P]
    e[:, 6:9] = refs.v - X[:, V]
    e[:, 9:12] = refs.w - X[:, W]
    e[:, 12:18] = X[:, 13:19]
    prod = quat_mul(X[:, Q], quat_conj(refs.q))
    sign = np.where(prod[:, :1] < 0.0, -1.0, 1.0)
    e[:, 3:6] = sign * prod[:, 1:]
    rm = right_mul_matrix(quat_conj(refs.q))
    eye3 = np.eye(3)
    E[:, 0:3, P] = -eye3
    E[:, 3:6, Q] = sign[:, :, None] * rm[:, 1:4, :]
    E[:, 6:9, V] = -eye3
    E[:, 9:12, W] = -eye3
    E[:, 12:18, 13:19] = np.eye(6)
    return e, E


def _dyn_fast(X: np.ndarray, U: np.ndarray, params: VehicleParams,
              dist: np.ndarray | None, out: np.ndarray | None = None) -> np.ndarray:
    """Prediction-model derivative, written column-wise for speed.

    Matches vehicle.dynamics_nominal on unit quaternions; the rotation uses
    the homogeneous quadratic form so the analytic Jacobians are exact.
    """
    if out is None:
        out = np.empty_like(X)
    qw, qx, qy, qz = X[:, 3], X[:, 4], X[:, 5], X[:, 6]
    wx, wy, wz = X[:, 10], X[:, 11], X[:, 12]
    fx, fy, fz = X[:, 13], X[:, 14], X[:, 15]
    tx, ty, tz = X[:, 16], X[:, 17], X[:, 18]
    if dist is not None:
        fx = fx + dist[0]
        fy = fy + dist[1]
        fz = fz + dist[2]
        tx = tx + dist[3]
        ty = ty + dist[4]
        tz = tz + dist[5]
    out[:, 0:3] = X[:, 7:10]
    out[:, 3] = 0.5 * (-qx * wx - qy * wy - qz * wz)
    out[:, 4] = 0.5 * (qw * wx + qy * wz - qz * wy)
    out[:, 5] = 0.5 * (qw * wy + qz * wx - qx * wz)
    out[:, 6] = 0.5 * (qw * wz + qx * wy - qy * wx)
    # R(q) f in the quadratic form (w^2 - u.u) f + 2 (u.f) u + 2 w (u x f)
    wsq = qw * qw - (qx * qx + qy * qy + qz * qz)
    udotf = qx * fx + qy * fy + qz * fz
    cx = qy * fz - qz * fy
    cy = qz * fx - qx * fz
    cz = qx * fy - qy * fx
    g = params.gravity
    inv_m = 1.0 / params.mass
    out[:, 7] = g[0] + (wsq * fx + 2.0 * (udotf * qx + qw * cx)) * inv_m
    out[:, 8] = g[1] + (wsq * fy + 2.0 * (udotf * qy + qw * cy)) * inv_m
    out[:, 9] = g[2] + (wsq * fz + 2.0 * (udotf * qz + qw * cz)) * inv_m
    J = params.inertia
    jwx = J[0, 0] * wx + J[0, 1] * wy + J[0, 2] * wz
    jwy = J[1, 0] * wx + J[1, 1] * wy + J[1, 2] * wz
    jwz = J[2, 0] * wx + J[2, 1] * wy + J[2, 2] * wz
    d = params.d_com
    mx = tx - (d[1] * fz - d[2] * fy) - (wy * jwz - wz * jwy)
    my = ty - (d[2] * fx - d[0] * fz) - (wz * jwx - wx * jwz)
    mz = tz - (d[0] * fy - d[1] * fx) - (wx * jwy - wy * jwx)
    Ji = params.inertia_inv
    out[:, 10] = Ji[0, 0] * mx + Ji[0, 1] * my + Ji[0, 2] * mz
    out[:, 11] = Ji[1, 0] * mx + Ji[1, 1] * my + Ji[1, 2] * mz
    out[:, 12] = Ji[2, 0] * mx + Ji[2, 1] * my + Ji[2, 2] * mz
    out[:, 13:19] = U
    return out


def _dynamics_jacobians(X: np.ndarray, params: VehicleParams,
                        dist: np.ndarray | None):
    """Continuous-time A (K,19,19) and B (K,19,6) at the given states."""
    K = len(X)
    q = X[:, Q]
    w = X[:, W]
    f = X[:, FA]
    if dist is not None:
        f = f + dist[:3]
    A = np.zeros((K, NX, NX))
    B = np.zeros((K, NX, NU))
    eye3 = np.eye(3)
    A[:, 0:3, V] = eye3
    wq = np.concatenate([np.zeros((K, 1)), w], axis=-1)
    A[:, 3:7, Q] = 0.5 * right_mul_matrix(wq)
    A[:, 3:7, W] = 0.5 * left_mul_matrix(q)[:, :, 1:]
    A[:, 7:10, Q] = rot_action_jacobian(q, f) / params.mass
    # the sandwich rotation is homogeneous of degree 0, the quadratic form of
    # R(q) of degree 2; both agree on unit q where the solver renormalizes
    A[:, 7:10, FA] = _rot_matrices(q) / params.mass
    Jw = w @ params.inertia.T
    A[:, 10:13, W] = params.inertia_inv @ (skew(Jw) - skew(w) @ params.inertia)
    A[:, 10:13, FA] = -params.inertia_inv @ skew(params.d_com)
    A[:, 10:13, TA] = params.inertia_inv
    B[:, 13:19, :] = np.eye(6)
    return A, B


def _rot_matrices(q: np.ndarray) -> np.ndarray:
    from .quat import quat_to_rot

    return quat_to_rot(q)


def _rk4_defect_step(X, U, h, params, dist):
    """Batch RK4 over one shooting interval (no renormalization)."""

    def f(x):
        return _dyn_fast(x, U, params, dist)

    k1 = f(X)
    k2 = f(X + 0.5 * h * k1)
    k3 = f(X + 0.5 * h * k2)
    k4 = f(X + h * k3)
    return X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _rk4_with_jacobians(X, U, h, params, dist):
    """Batch RK4 step plus discrete Jacobians chained through the stages."""

    def f(x):
        return _dyn_fast(x, U, params, dist)

    def jac(x):
        return _dynamics_jacobians(x, params, dist)

    eye = np.eye(NX)
    k1 = f(X)
    A1, B1 = jac(X)
    X2 = X + 0.5 * h * k1
    k2 = f(X2)
    A2r, B2r = jac(X2)
    M2 = A2r @ (eye + 0.5 * h * A1)
    P2 = B2r + 0.5 * h * (A2r @ B1)
    X3 = X + 0.5 * h * k2
    k3 = f(X3)
    A3r, B3r = jac(X3)
    M3 = A3r @ (eye + 0.5 * h * M2)
    P3 = B3r + 0.5 * h * (A3r @ P2)
    X4 = X + h * k3
    k4 = f(X4)
    A4r, B4r = jac(X4)
    M4 = A4r @ (eye + h * M3)
    P4 = B4r + h * (A4r @ P3)
    Xn = X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    Ad = eye + (h / 6.0) * (A1 + 2.0 * M2 + 2.0 * M3 + M4)
    Bd = (h / 6.0) * (B1 + 2.0 * P2 + 2.0 * P3 + P4)
    return Xn, Ad, Bd


def shift_warm_start(X: np.ndarray, U: np.ndarray):
    """Advance a previous solution one stage, duplicating the tail."""
    Xs = np.vstack([X[1:], X[-1:]])
    Us = np.vstack([U[1:], U[-1:]]) if len(U) > 1 else U.copy()
    return Xs, Us


def solve_box_qp(H: np.ndarray, g: np.ndarray, lb: np.ndarray, ub: np.ndarray,
                 x0: np.ndarray | None = None, tol: float = 1e-12,
                 max_iters: int = 40):
    """Projected-Newton box QP: min 0.5 x'Hx + g'x, lb <= x <= ub.

    H must be positive definite. Returns (x, free-gradient norm).
    """
    n = len(g)
    x = np.clip(np.zeros(n) if x0 is None else x0, lb, ub)
    gnorm = np.inf
    for _ in range(max_iters):
        grad = g + H @ x
        # np.clip assigns bound values exactly, so equality tests are reliable
        clamped = ((x <= lb) & (grad > 0)) | ((x >= ub) & (grad < 0))
        free = ~clamped
        if not np.any(free):
            gnorm = 0.0
            break
        gnorm = float(np.max(np.abs(grad[free])))
        if gnorm < tol:
            break
        Hff = H[np.ix_(free, free)]
        step = np.zeros(n)
        step[free] = -np.linalg.solve(Hff, grad[free])
        base = 0.5 * x @ H @ x + g @ x
        alpha = 1.0
        improved = False
        for _ in range(12):
            xt = np.clip(x + alpha * step, lb, ub)
            ft = 0.5 * xt @ H @ xt + g @ xt
            if ft < base:
                x = xt
                improved = True
                break
            alpha *= 0.5
        if not improved:
            break
    return x, gnorm


class NmpcSolver:
    """Owns the linearization workspace and the warm-start trajectory."""

    def __init__(self, params: VehicleParams, weights: OcpWeights,
                 constraints: ConstraintSet, cfg: SolverConfig,
                 alloc: AllocationMatrices | None = None):
        self.params = params
        self.weights = weights
        self.constraints = constraints
        self.cfg = cfg
        self.alloc = alloc
        self._X: np.ndarray | None = None
        self._U: np.ndarray | None = None

    # -- warm start ------------------------------------------------------

    def reset(self):
        self._X = None
        self._U = None

    def shift(self):
        if self._X is not None:
            self._X, self._U = shift_warm_start(self._X, self._U)

    def _initial_guess(self, x0: np.ndarray):
        N = self.cfg.stages
        if self.cfg.warm_start and self._X is not None:
            X = self._X.copy()
            U = self._U.copy()
            X[0] = x0
        else:
            X = np.tile(x0, (N + 1, 1))
            U = np.zeros((N, NU))
        return X, U

    # -- cost / merit ------------------------------------------------------

    def _penalty_terms(self, X: np.ndarray):
        """Hinge values of the h constraints per node (excluding the fixed x0)."""
        cs = self.constraints
        K = len(X) - 1
        h = np.empty((K, 12))
        h[:, 0:3] = X[1:, V]
        h[:, 3:6] = X[1:, W]
        if self.alloc is not None:
            y = X[1:, 13:19] @ self.alloc.B_pinv.T
            h[:, 6:12] = y[:, 0::2] ** 2 + y[:, 1::2] ** 2
        else:
            h[:, 6:12] = 0.0
        over = np.maximum(0.0, h - cs.h_ub)
        under = np.maximum(0.0, cs.h_lb - h)
        return h, over, under

    def _cost(self, X: np.ndarray, U: np.ndarray, refs: ReferenceWindow) -> float:
        wts = self.weights
        e = _stage_errors(X, refs)
        c = float(np.sum(e[:-1] ** 2 @ wts.q_diag) + e[-1] ** 2 @ wts.qn_diag)
        c += float(np.sum(U**2 @ wts.r_diag))
        _, over, under = self._penalty_terms(X)
        c += self.cfg.penalty_weight * float(np.sum(over**2) + np.sum(under**2))
        return c

    def _merit(self, X, U, refs, dist):
        d = _rk4_defect_step(X[:-1], U, self.cfg.dt, self.params, dist) - X[1:]
        return self._cost(X, U, refs) + self.cfg.merit_defect_weight * float(
            np.sum(np.abs(d))
        ), d

    # -- main solve --------------------------------------------------------

    def solve(self, x0: np.ndarray, refs: ReferenceWindow,
              dist: np.ndarray | None = None):
        """Return (first-stage wrench rate, SolveInfo).

        Raises OcpError when the iterate turns non-finite.
        """
        t_start = time.perf_counter()
        cfg = self.cfg
        N = cfg.stages
        if len(refs) != N + 1:
            raise ValueError(f"reference window must have {N + 1} rows")
        x0 = np.asarray(x0, dtype=float)
        if not np.all(np.isfinite(x0)):
            raise OcpError("non-finite initial state")
        X, U = self._initial_guess(x0)

        wts = self.weights
        sq = np.sqrt(wts.q_diag)
        sqn = np.sqrt(wts.qn_diag)
        sr = np.sqrt(wts.r_diag)
        sp = np.sqrt(cfg.penalty_weight)
        nu_total = N * NU
        lbu = np.tile(self.constraints.u_lb, N)
        ubu = np.tile(self.constraints.u_ub, N)

        info = SolveInfo(status="max_iters", iterations=0)
        merit_cur = None

        for it in range(cfg.max_iters):
            info.iterations = it + 1
            # linearize the shooting map
            F, Ad, Bd = _rk4_with_jacobians(X[:-1], U, cfg.dt, self.params, dist)
            d = F - X[1:]
            if merit_cur is None:
                merit_cur = self._cost(X, U, refs) \
                    + cfg.merit_defect_weight * float(np.sum(np.abs(d)))
                if not np.isfinite(merit_cur):
                    raise OcpError("non-finite merit at initial guess")
            # sensitivities of every node wrt the stacked controls
            S = np.zeros((N + 1, NX, nu_total))
            csh = np.zeros((N + 1, NX))
            for k in range(N):
                S[k + 1] = Ad[k] @ S[k]
                S[k + 1][:, k * NU:(k + 1) * NU] += Bd[k]
                csh[k + 1] = Ad[k] @ csh[k] + d[k]

            e, E = _stage_errors_and_jac(X, refs)
            w_node = np.vstack([np.tile(sq, (N, 1)), sqn])
            ES = E @ S                       # (N+1, 18, nu)
            Ec = np.einsum("kij,kj->ki", E, csh)
            # residual model: W^(1/2) (e + E (S du + c)); E already carries the
            # (ref - x) signs on the kinematic blocks
            rows = [(w_node[:, :, None] * ES).reshape(-1, nu_total)]
            res = [(w_node * (e + Ec)).reshape(-1)]

            h, over, under = self._penalty_terms(X)
            if np.any(over > 0) or np.any(under > 0):
                Hx = np.zeros((N, 12, NX))
                eye3 = np.eye(3)
                Hx[:, 0:3, V] = eye3
                Hx[:, 3:6, W] = eye3
                if self.alloc is not None:
                    for k in range(N):
                        if np.any(over[k, 6:] > 0) or np.any(under[k, 6:] > 0):
                            Hx[k, 6:12, 13:19] = thrust_output_jacobian(
                                X[k + 1, 13:19], self.alloc)
                act_o = over > 0
                act_u = under > 0
                Hc = np.einsum("kij,kj->ki", Hx, csh[1:])
                HS = Hx @ S[1:]
                for k in range(N):
                    for j in range(12):
                        if act_o[k, j]:
                            rows.append(sp * HS[k, j:j + 1])
                            res.append(sp * np.atleast_1d(over[k, j] + Hc[k, j]))
                        elif act_u[k, j]:
                            rows.append(-sp * HS[k, j:j + 1])
                            res.append(sp * np.atleast_1d(under[k, j] - Hc[k, j]))

            Jmat = np.vstack(rows)
            rvec = np.concatenate(res)
            Hqp = Jmat.T @ Jmat
            gqp = Jmat.T @ rvec
            # control-weight block of the least squares, added directly
            rdiag = np.tile(wts.r_diag, N)
            Hqp[np.diag_indices_from(Hqp)] += rdiag + 1e-10
            gqp += rdiag * U.reshape(-1)

            # KKT residual of the current iterate: projected gradient + defects
            ufl = U.reshape(-1)
            pg = gqp.copy()
            pg[(ufl <= lbu + 1e-12) & (pg > 0)] = 0.0
            pg[(ufl >= ubu - 1e-12) & (pg < 0)] = 0.0
            kkt = max(float(np.max(np.abs(pg))), float(np.max(np.abs(d))))
            info.kkt = kkt
            if kkt < cfg.kkt_tol:
                info.status = "converged"
                break

            du, _ = solve_box_qp(Hqp, gqp, lbu - ufl, ubu - ufl)
            # stall detection: no meaningful QP decrease and negligible defects
            pred = -(gqp @ du + 0.5 * du @ Hqp @ du)
            if pred <= 1e-10 * (1.0 + abs(merit_cur)) and np.max(np.abs(d)) < 1e-8:
                info.status = "converged"
                break
            dX = np.einsum("kij,j->ki", S, du) + csh

            accepted = False
            alpha = 1.0
            for _ in range(cfg.max_backtracks):
                U_try = np.clip((ufl + alpha * du).reshape(N, NU),
                                self.constraints.u_lb, self.constraints.u_ub)
                X_try = X + alpha * dX
                qn = np.linalg.norm(X_try[:, Q], axis=-1, keepdims=True)
                X_try[:, Q] /= qn
                merit_try, _ = self._merit(X_try, U_try, refs, dist)
                if np.isfinite(merit_try) and merit_try < merit_cur:
                    X, U = X_try, U_try
                    merit_cur = merit_try
                    accepted = True
                    break
                alpha *= 0.5
            if not np.all(np.isfinite(X)) or not np.all(np.isfinite(U)):
                raise OcpError("non-finite iterate")
            if not accepted:
                # could not improve from a point that still looks non-stationary
                if info.kkt >= cfg.kkt_tol and np.max(np.abs(d)) >= 1e-8:
                    info.status = "degraded"
                else:
                    info.status = "converged"
                break

        info.cost = self._cost(X, U, refs)
        _, over, under = self._penalty_terms(X)
        info.penalty_violation = float(np.max(over, initial=0.0)
                                       + np.max(under, initial=0.0))
        u0 = np.clip(U[0], self.constraints.u_lb, self.constraints.u_ub)
        if not np.all(np.isfinite(u0)):
            raise OcpError("non-finite control")
        self._X, self._U = X, U
        info.solve_ms = (time.perf_counter() - t_start) * 1e3
        return u0, info

    @property
    def trajectory(self):
        """Last accepted (X, U) iterate, for inspection and tests."""
        return self._X, self._U
