"""Explicit Runge-Kutta baselines and brute-force validation oracles.

The Runge-Kutta methods integrate the same extended system as the splitting
methods so that energy comparisons are like for like. The oracle integrates
each subsystem ODE directly (assembled from the structure matrix and the
subsystem gradient, with no frozen-coordinate shortcuts) to certify the
closed-form flow maps.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernel
from .errors import ConfigurationError, IntegrationError, describe_error
from .extension import extend
from .flows import KSYM_METHODS, Trajectory, _kernel_args, _validate_run, integrate


@dataclass(frozen=True)
class ButcherTableau:
    """Coefficients of an explicit Runge-Kutta method."""

    name: str
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        s = len(self.b)
        if self.a.shape != (s, s) or self.c.shape != (s,):
            raise ConfigurationError("tableau arrays have inconsistent shapes")
        if abs(self.b.sum() - 1.0) > 1e-12:
            raise ConfigurationError(f"weights of {self.name} sum to {self.b.sum()!r}")
        if np.any(np.triu(self.a) != 0.0):
            raise ConfigurationError(f"tableau {self.name} is not explicit")
        if np.max(np.abs(self.a.sum(axis=1) - self.c)) > 1e-12:
            raise ConfigurationError(f"tableau {self.name} violates row-sum consistency")

    @property
    def stages(self):
        return len(self.b)


def make_rk3_heun():
    """Three-stage third-order method with nodes (0, 1/3, 2/3)."""
    a = np.zeros((3, 3))
    a[1, 0] = 1.0 / 3.0
    a[2, 1] = 2.0 / 3.0
    return ButcherTableau(
        name="rk3",
        a=a,
        b=np.array([0.25, 0.0, 0.75]),
        c=np.array([0.0, 1.0 / 3.0, 2.0 / 3.0]),
    )


def make_rk5_butcher():
    """Six-stage fifth-order method (classical sixth-stage Butcher tableau)."""
    a = np.zeros((6, 6))
    a[1, 0] = 1.0 / 4.0
    a[2, 0] = 1.0 / 8.0
    a[2, 1] = 1.0 / 8.0
    a[3, 1] = -1.0 / 2.0
    a[3, 2] = 1.0
    a[4, 0] = 3.0 / 16.0
    a[4, 3] = 9.0 / 16.0
    a[5, 0] = -3.0 / 7.0
    a[5, 1] = 2.0 / 7.0
    a[5, 2] = 12.0 / 7.0
    a[5, 3] = -12.0 / 7.0
    a[5, 4] = 8.0 / 7.0
    return ButcherTableau(
        name="rk5",
        a=a,
        b=np.array([7.0, 0.0, 32.0, 12.0, 32.0, 7.0]) / 90.0,
        c=np.array([0.0, 0.25, 0.25, 0.5, 0.75, 1.0]),
    )


TABLEAUS = {"rk3": make_rk3_heun, "rk5": make_rk5_butcher}

METHOD_NAMES = KSYM_METHODS + tuple(TABLEAUS)


def rk_step(tableau, field, y, tau):
    """One explicit Runge-Kutta step of an autonomous field, any state shape."""
    y = np.asarray(y, dtype=float)
    stages = []
    for i in range(tableau.stages):
        yi = y.copy()
        for j in range(i):
            if tableau.a[i, j] != 0.0:
                yi += tau * tableau.a[i, j] * stages[j]
        stages.append(np.asarray(field(yi), dtype=float))
    out = y.copy()
    for i, w in enumerate(tableau.b):
        if w != 0.0:
            out += tau * w * stages[i]
    return out


def integrate_rk(model, spec, tableau, z0, tau, t_final, record_every=1):
    """Run an explicit Runge-Kutta method on the extended system."""
    n_steps = _validate_run(tau, t_final, record_every)
    ext0 = extend(np.asarray(z0, dtype=float), spec.m)
    if model.kernel is not None:
        times, states, err, step, _, coord = _kernel.integrate_rk(
            ext0, float(tau), n_steps, int(record_every), tableau.a, tableau.b,
            *_kernel_args(model, spec))
        if err != 0:
            raise IntegrationError(
                f"{tableau.name} on {model.name} failed at step {step}: "
                f"{describe_error(err)}", step=int(step), coordinate=int(coord))
        return Trajectory(times=times, states=states, model=model, extension=spec,
                          method=tableau.name, tau=float(tau),
                          record_every=int(record_every))

    from .extension import extended_vector_field

    def field(ext):
        return extended_vector_field(model, spec, ext)

    n_rec = n_steps // record_every + 1 + (1 if n_steps % record_every else 0)
    times = np.empty(n_rec)
    states = np.empty((n_rec,) + ext0.shape)
    times[0] = 0.0
    states[0] = ext0
    ext = ext0
    r = 1
    for s in range(1, n_steps + 1):
        ext = rk_step(tableau, field, ext, tau)
        if s % record_every == 0 or s == n_steps:
            if not np.all(np.isfinite(ext)):
                raise IntegrationError(
                    f"{tableau.name} on {model.name} left the finite domain at step {s}",
                    step=s)
            times[r] = s * tau
            states[r] = ext
            r += 1
    return Trajectory(times=times, states=states, model=model, extension=spec,
                      method=tableau.name, tau=float(tau), record_every=int(record_every))


def integrate_method(model, spec, method, z0, tau, t_final, record_every=1, scheme=None):
    """Dispatch a method name to the splitting or Runge-Kutta integrator."""
    if method in KSYM_METHODS:
        return integrate(model, spec, method, z0, tau, t_final,
                         record_every=record_every, scheme=scheme)
    if method in TABLEAUS:
        return integrate_rk(model, spec, TABLEAUS[method](), z0, tau, t_final,
                            record_every=record_every)
    raise ConfigurationError(
        f"unknown method {method!r}; choose from {sorted(METHOD_NAMES)}")


def _subsystem_field_py(model, spec, index, ext):
    """Subsystem vector field assembled from the pair table and gradient."""
    d = model.dim
    grad = np.zeros_like(ext)
    if index < spec.m:
        table = spec.mixed_table()
        cols = np.arange(d)
        zstar = ext[table[index], cols]
        grad[table[index], cols] = model.gradient(zstar)
    else:
        term = spec.constraint_terms[index - spec.m]
        j = term.slot - 1
        a = term.anchor - 1
        acc = 0.0
        for b in term.partners:
            acc += ext[a, j] - ext[b - 1, j]
            grad[b - 1, j] = spec.omega * (ext[b - 1, j] - ext[a, j])
        grad[a, j] = spec.omega * acc
    pt = model.pair_table
    out = np.zeros_like(ext)
    for c in range(spec.m):
        for j in range(d):
            i = pt.partner[j]
            out[c, i] += pt.entry(j, ext[c, i], ext[c, j]) * grad[c, j]
    return out


def subflow_oracle_check(flow, ext, tau, substeps=10_000):
    """Max-norm gap between a closed-form flow map and brute-force integration.

    The reference is fixed-substep RK4 on the subsystem ODE; with the default
    substeps the reference error is far below the 1e-9 certification level.
    """
    if substeps < 100:
        raise ConfigurationError(f"need at least 100 substeps, got {substeps}")
    if flow.origin is None:
        raise ConfigurationError(f"subflow {flow.label} carries no origin to check against")
    model, spec, index = flow.origin
    ext = np.asarray(ext, dtype=float)
    closed = flow.map(ext, tau)
    if model.kernel is not None:
        ref = _kernel.oracle_rk4_subsystem(ext, index, float(tau), int(substeps),
                                           *_kernel_args(model, spec))
    else:
        ref = ext.copy()
        dt = tau / substeps
        for _ in range(int(substeps)):
            k1 = _subsystem_field_py(model, spec, index, ref)
            k2 = _subsystem_field_py(model, spec, index, ref + 0.5 * dt * k1)
            k3 = _subsystem_field_py(model, spec, index, ref + 0.5 * dt * k2)
            k4 = _subsystem_field_py(model, spec, index, ref + dt * k3)
            ref = ref + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return float(np.max(np.abs(closed - ref)))


def reference_solution(model, spec, z0, t_final, tau_ref=1e-5, method="ksym4"):
    """Step-size-converged endpoint used as ground truth in order studies."""
    if t_final == 0:
        return extend(np.asarray(z0, dtype=float), spec.m)
    n_steps = max(int(round(t_final / tau_ref)), 1)
    traj = integrate_method(model, spec, method, z0, tau_ref, t_final,
                            record_every=n_steps)
    return traj.states[-1]
