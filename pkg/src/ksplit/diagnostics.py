"""Trajectory diagnostics: energy errors, copy coherence, structure residuals,
convergence orders, and orbit geometry."""

import numpy as np

from .baselines import integrate_method, reference_solution
from .errors import ConfigurationError, DiagnosticError
from .extension import augmented_energy_series, extended_structure_inverse
from .flows import Trajectory  # noqa: F401  (diagnostic API re-export)


def relative_energy_error_series(traj, which="augmented"):
    """Per-record (E(t) - E(0)) / E(0) of the augmented or the original energy.

    The original energy is read out in the first copy of the variables.
    """
    model = traj.model
    spec = traj.extension
    if which == "augmented":
        energies = augmented_energy_series(model, spec, traj.states)
    elif which == "original_first_copy":
        energies = np.asarray(model.hamiltonian(traj.states[:, 0, :]), dtype=float)
    else:
        raise ConfigurationError(f"unknown energy selector {which!r}")
    e0 = energies[0]
    if e0 == 0.0:
        raise DiagnosticError("initial energy is zero; relative error undefined")
    return (energies - e0) / e0


def copy_divergence_series(traj):
    """Per-record max over slots and copy pairs of the copy disagreement."""
    if traj.states.shape[1] < 2:
        raise DiagnosticError("copy divergence needs at least two copies")
    spread = traj.states.max(axis=1) - traj.states.min(axis=1)
    return spread.max(axis=-1)


def two_half_maxima(times, series):
    """Max |series| over the first and second halves of the time window."""
    times = np.asarray(times, dtype=float)
    series = np.abs(np.asarray(series, dtype=float))
    if len(times) < 2:
        raise DiagnosticError("need at least two records to split a run in halves")
    mid = times[-1] / 2.0
    first = series[times <= mid]
    second = series[times > mid]
    if len(first) == 0 or len(second) == 0:
        raise DiagnosticError("degenerate half split")
    return float(first.max()), float(second.max())


def bounded_two_halves(times, series, factor=2.0):
    """No-secular-growth proxy: second-half max within factor of first-half max."""
    first, second = two_half_maxima(times, series)
    return second <= factor * first


def poisson_residual(step, model, ext, fd_step=1e-6):
    """Structure-preservation residual  max| J B J^T - B(step(s)) |.

    J is the central finite-difference Jacobian of the step map at the given
    extended state; an exact structure-preserving map leaves only the
    differencing noise.
    """
    if fd_step <= 0:
        raise ConfigurationError("finite-difference step must be positive")
    ext = np.asarray(ext, dtype=float)
    m, d = ext.shape
    n = m * d
    jac = np.empty((n, n))
    flat = ext.ravel()
    for k in range(n):
        zp = flat.copy()
        zm = flat.copy()
        zp[k] += fd_step
        zm[k] -= fd_step
        fp = np.asarray(step(zp.reshape(m, d)), dtype=float).ravel()
        fm = np.asarray(step(zm.reshape(m, d)), dtype=float).ravel()
        jac[:, k] = (fp - fm) / (2.0 * fd_step)
    b_here = extended_structure_inverse(model, ext)
    b_there = extended_structure_inverse(model, np.asarray(step(ext), dtype=float))
    return float(np.max(np.abs(jac @ b_here @ jac.T - b_there)))


def convergence_study(model, spec, method, taus, t_final, z0=None, reference=None):
    """Global max-norm errors against a converged reference, per step size."""
    taus = [float(t) for t in taus]
    if len(taus) < 3:
        raise ConfigurationError("order estimation needs at least three step sizes")
    for tau in taus:
        n = t_final / tau
        if abs(n - round(n)) > 1e-9 * max(1.0, abs(n)):
            raise ConfigurationError(f"step size {tau} does not divide t_final={t_final}")
    if z0 is None:
        z0 = model.default_initial
    ref = reference_solution(model, spec, z0, t_final) if reference is None else reference
    errors = []
    for tau in taus:
        traj = integrate_method(model, spec, method, z0, tau, t_final,
                                record_every=max(int(round(t_final / tau)), 1))
        errors.append(float(np.max(np.abs(traj.states[-1] - ref))))
    return np.array(taus), np.array(errors)


def convergence_order(model, spec, method, taus, t_final, z0=None, reference=None):
    """Least-squares slope of log(global error) against log(step size)."""
    taus, errors = convergence_study(model, spec, method, taus, t_final, z0=z0,
                                     reference=reference)
    if np.any(errors == 0.0):
        raise DiagnosticError("zero global error; order slope undefined")
    slope = np.polyfit(np.log(taus), np.log(errors), 1)[0]
    return float(slope)


def orbit_radius_stats(traj, slot_a, slot_b):
    """Radius statistics of the first-copy orbit projected onto two slots.

    Radii are measured about the time-mean center of the projection. Returns
    (mean radius, max relative deviation from the mean radius).
    """
    if len(traj) == 0:
        raise DiagnosticError("empty trajectory")
    pts = traj.states[:, 0, [slot_a, slot_b]]
    center = pts.mean(axis=0)
    radii = np.sqrt(np.sum((pts - center) ** 2, axis=-1))
    mean_r = float(radii.mean())
    if mean_r == 0.0:
        return 0.0, 0.0
    return mean_r, float(np.max(np.abs(radii - mean_r)) / mean_r)


def orbit_radius_growth(traj, slot_a, slot_b):
    """Relative growth of the projected radius from first to last record."""
    pts = traj.states[:, 0, [slot_a, slot_b]]
    center = pts.mean(axis=0)
    radii = np.sqrt(np.sum((pts - center) ** 2, axis=-1))
    if radii[0] == 0.0:
        raise DiagnosticError("initial projected radius is zero")
    return float((radii[-1] - radii[0]) / radii[0])
