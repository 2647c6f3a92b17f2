"""Compiled inner loops: scalar pair flows, split steps, integrators, oracles.

Every structure matrix handled by the fast path couples each coordinate to
exactly one partner, so each split subsystem reduces to scalar ODEs of the
form ds/dt = k(s, w) * c with the driver w and the rate c frozen. The solver
kinds cover the closed forms needed by the built-in models:

    TANPAIR   ds/dt = sgn * cos^2(s*w) * c
    RECIP     ds/dt = sgn * s^2 / (2 sin w) * c
    SINCOS    ds/dt = sgn * w^2 / (2 sin s) * c
    ALTAN     ds/dt = sgn * (1 + h^2 (s^2 + w^2)) * c
    LIN       ds/dt = sgn * c

All functions return an error code instead of raising; the Python wrappers
translate codes into exceptions (see :mod:`ksplit.errors`).
"""

import math

import numpy as np
from numba import njit

# Solver kinds.
KIND_TANPAIR = 0
KIND_RECIP = 1
KIND_SINCOS = 2
KIND_ALTAN = 3
KIND_LIN = 4

# Model kinds (gradient dispatch).
MODEL_POLYPROD = 0
MODEL_LATTICE = 1
MODEL_GYRO = 2

# Threshold below which the tangent-pair flow switches to its linear limit.
SMALL_DRIVER = 1e-8
# Tolerated overshoot of the arccos argument before flagging a domain exit.
ARCCOS_SLACK = 1e-12


@njit(cache=True)
def solve_pair(kind, sgn, si, sj, c, t, h):
    """Advance one coordinate; return (new value, error code)."""
    if t == 0.0:
        return si, 0
    rate = sgn * c
    if kind == KIND_TANPAIR:
        # theta = si*sj stays inside its tangent branch for all time, so
        # shift to the principal branch, advance tan(theta) linearly, and
        # shift back. Tiny drivers degenerate to uniform motion.
        if abs(sj) < SMALL_DRIVER:
            return si + rate * t, 0
        th0 = si * sj
        n = math.floor(th0 / math.pi + 0.5)
        tt = math.tan(th0 - n * math.pi)
        return (math.atan(tt + sj * rate * t) + n * math.pi) / sj, 0
    elif kind == KIND_RECIP:
        s = math.sin(sj)
        if s == 0.0:
            if rate == 0.0:
                return si, 0
            return si, 4
        den = 1.0 - si * rate * t / (2.0 * s)
        if den <= 0.0:
            return si, 1
        return si / den, 0
    elif kind == KIND_SINCOS:
        arg = math.cos(si) - rate * (sj * sj * 0.5) * t
        if arg > 1.0:
            if arg > 1.0 + ARCCOS_SLACK:
                return si, 2
            arg = 1.0
        elif arg < -1.0:
            if arg < -1.0 - ARCCOS_SLACK:
                return si, 2
            arg = -1.0
        return math.acos(arg), 0
    elif kind == KIND_ALTAN:
        al = math.sqrt(1.0 + h * h * sj * sj)
        th = math.atan(h * si / al) + al * h * rate * t
        if abs(th) >= 0.5 * math.pi:
            return si, 3
        return (al / h) * math.tan(th), 0
    else:
        return si + rate * t, 0


@njit(cache=True)
def k_entry(kind, sgn, si, sj, h):
    """Structure matrix entry coupling coordinate i = partner(j) to slot j."""
    if kind == KIND_TANPAIR:
        cz = math.cos(si * sj)
        return sgn * cz * cz
    elif kind == KIND_RECIP:
        return sgn * si * si / (2.0 * math.sin(sj))
    elif kind == KIND_SINCOS:
        return sgn * sj * sj / (2.0 * math.sin(si))
    elif kind == KIND_ALTAN:
        return sgn * (1.0 + h * h * (si * si + sj * sj))
    return sgn


@njit(cache=True)
def model_gradient(model_kind, mp, z, out):
    d = z.shape[0]
    if model_kind == MODEL_POLYPROD:
        x = z[0]
        y = z[1]
        w = z[2]
        u = z[3]
        s = x * x + y * y + w * w
        g = 5.0 * s * math.sqrt(s)
        out[0] = x * g
        out[1] = y * g + u
        out[2] = w * g
        out[3] = y
    elif model_kind == MODEL_LATTICE:
        h = mp[0]
        n = d // 2
        ih2 = 1.0 / (h * h)
        for k in range(n):
            km = k - 1 if k > 0 else n - 1
            kp = k + 1 if k < n - 1 else 0
            dk = 1.0 + h * h * (z[k] * z[k] + z[n + k] * z[n + k])
            out[k] = ih2 * (z[kp] + z[km]) - 2.0 * z[k] * ih2 / dk
            out[n + k] = ih2 * (z[n + kp] + z[n + km]) - 2.0 * z[n + k] * ih2 / dk
    else:
        mu = mp[0]
        phi = mp[1]
        x = z[0]
        y = z[1]
        w = z[2]
        u = z[3]
        cxy = math.cos(x * y)
        sec2 = 1.0 / (cxy * cxy)
        tn = math.tan(x * y)
        r = math.sqrt(x * x + y * y + w * w)
        pr = phi / r
        out[0] = 2.0 * mu * sec2 * tn * y + pr * x
        out[1] = 2.0 * mu * sec2 * tn * x + pr * y
        out[2] = pr * w
        out[3] = u


@njit(cache=True)
def apply_flow(ext, flow, tau, model_kind, mp, partner, kindt, sgn, mixed, con, omega):
    """Apply one split subsystem flow in place; return (err, coordinate)."""
    m, d = ext.shape
    n_mixed = mixed.shape[0]
    hpar = mp[0] if model_kind == MODEL_LATTICE else 0.0
    if flow < n_mixed:
        zstar = np.empty(d)
        for j in range(d):
            zstar[j] = ext[mixed[flow, j], j]
        g = np.empty(d)
        model_gradient(model_kind, mp, zstar, g)
        for j in range(d):
            if not np.isfinite(g[j]):
                return 5, j
        for j in range(d):
            cpy = mixed[flow, j]
            i = partner[j]
            nv, err = solve_pair(kindt[j], sgn[j], ext[cpy, i], zstar[j], g[j], tau, hpar)
            if err != 0:
                return err, i
            ext[cpy, i] = nv
        return 0, -1
    kc = flow - n_mixed
    j = con[kc, 0]
    a = con[kc, 1]
    i = partner[j]
    sa = ext[a, j]
    ra = 0.0
    for b in range(a + 1, m):
        ra += sa - ext[b, j]
        rb = omega * (ext[b, j] - sa)
        nv, err = solve_pair(kindt[j], sgn[j], ext[b, i], ext[b, j], rb, tau, hpar)
        if err != 0:
            return err, i
        ext[b, i] = nv
    nv, err = solve_pair(kindt[j], sgn[j], ext[a, i], sa, omega * ra, tau, hpar)
    if err != 0:
        return err, i
    ext[a, i] = nv
    return 0, -1


@njit(cache=True)
def splitting_pass(ext, tau, forward, model_kind, mp, partner, kindt, sgn, mixed, con, omega):
    """One base (forward) or adjoint (reversed) pass over all subsystem flows."""
    n_flows = mixed.shape[0] + con.shape[0]
    if forward:
        for k in range(n_flows):
            err, ci = apply_flow(ext, k, tau, model_kind, mp, partner, kindt, sgn, mixed, con, omega)
            if err != 0:
                return err, k, ci
    else:
        for k in range(n_flows - 1, -1, -1):
            err, ci = apply_flow(ext, k, tau, model_kind, mp, partner, kindt, sgn, mixed, con, omega)
            if err != 0:
                return err, k, ci
    return 0, -1, -1


@njit(cache=True)
def composition_step(ext, tau, dirs, coefs, model_kind, mp, partner, kindt, sgn, mixed, con, omega):
    """One step of a composition method given stage directions and coefficients."""
    for s in range(coefs.shape[0]):
        err, k, ci = splitting_pass(
            ext, coefs[s] * tau, dirs[s] == 1,
            model_kind, mp, partner, kindt, sgn, mixed, con, omega,
        )
        if err != 0:
            return err, k, ci
    return 0, -1, -1


@njit(cache=True)
def integrate_splitting(ext0, tau, n_steps, record_every, dirs, coefs,
                        model_kind, mp, partner, kindt, sgn, mixed, con, omega):
    m, d = ext0.shape
    n_rec = n_steps // record_every + 1
    if n_steps % record_every != 0:
        n_rec += 1
    times = np.empty(n_rec)
    states = np.empty((n_rec, m, d))
    ext = ext0.copy()
    times[0] = 0.0
    states[0] = ext
    r = 1
    for s in range(1, n_steps + 1):
        err, k, ci = composition_step(ext, tau, dirs, coefs,
                                      model_kind, mp, partner, kindt, sgn, mixed, con, omega)
        if err != 0:
            return times[:r], states[:r], err, s, k, ci
        if s % record_every == 0 or s == n_steps:
            times[r] = s * tau
            states[r] = ext
            r += 1
    return times, states, 0, -1, -1, -1


@njit(cache=True)
def extended_gradient(ext, out, model_kind, mp, mixed, omega):
    """Gradient of the augmented Hamiltonian over the whole extended state."""
    m, d = ext.shape
    out[:] = 0.0
    zstar = np.empty(d)
    g = np.empty(d)
    for i in range(mixed.shape[0]):
        for j in range(d):
            zstar[j] = ext[mixed[i, j], j]
        model_gradient(model_kind, mp, zstar, g)
        for j in range(d):
            out[mixed[i, j], j] += g[j]
    for j in range(d):
        tot = 0.0
        for c in range(m):
            tot += ext[c, j]
        for c in range(m):
            out[c, j] += omega * (m * ext[c, j] - tot)


@njit(cache=True)
def extended_field(ext, out, scratch, model_kind, mp, partner, kindt, sgn, mixed, con, omega):
    """Vector field of the extended system, block structure exploited."""
    m, d = ext.shape
    extended_gradient(ext, scratch, model_kind, mp, mixed, omega)
    hpar = mp[0] if model_kind == MODEL_LATTICE else 0.0
    out[:] = 0.0
    for c in range(m):
        for j in range(d):
            i = partner[j]
            out[c, i] += k_entry(kindt[j], sgn[j], ext[c, i], ext[c, j], hpar) * scratch[c, j]


@njit(cache=True)
def rk_step_inplace(ext, tau, a, b, stages,
                    model_kind, mp, partner, kindt, sgn, mixed, con, omega):
    m, d = ext.shape
    s = b.shape[0]
    yy = np.empty((m, d))
    scratch = np.empty((m, d))
    for st in range(s):
        yy[:] = ext
        for j2 in range(st):
            w = a[st, j2]
            if w != 0.0:
                for c in range(m):
                    for j in range(d):
                        yy[c, j] += tau * w * stages[j2, c, j]
        extended_field(yy, stages[st], scratch,
                       model_kind, mp, partner, kindt, sgn, mixed, con, omega)
    for st in range(s):
        w = b[st]
        for c in range(m):
            for j in range(d):
                ext[c, j] += tau * w * stages[st, c, j]


@njit(cache=True)
def integrate_rk(ext0, tau, n_steps, record_every, a, b,
                 model_kind, mp, partner, kindt, sgn, mixed, con, omega):
    m, d = ext0.shape
    n_rec = n_steps // record_every + 1
    if n_steps % record_every != 0:
        n_rec += 1
    times = np.empty(n_rec)
    states = np.empty((n_rec, m, d))
    ext = ext0.copy()
    times[0] = 0.0
    states[0] = ext
    stages = np.empty((b.shape[0], m, d))
    r = 1
    for s in range(1, n_steps + 1):
        rk_step_inplace(ext, tau, a, b, stages,
                        model_kind, mp, partner, kindt, sgn, mixed, con, omega)
        if s % record_every == 0 or s == n_steps:
            for c in range(m):
                for j in range(d):
                    if not np.isfinite(ext[c, j]):
                        return times[:r], states[:r], 5, s, -1, j
            times[r] = s * tau
            states[r] = ext
            r += 1
    return times, states, 0, -1, -1, -1


@njit(cache=True)
def subsystem_gradient(ext, flow, out, model_kind, mp, mixed, con, omega):
    """Gradient of a single subsystem Hamiltonian over the full extended state.

    Evaluated afresh from the current state; no frozen-coordinate shortcuts,
    so brute-force integration of this field is independent of the closed
    forms in solve_pair.
    """
    m, d = ext.shape
    out[:] = 0.0
    n_mixed = mixed.shape[0]
    if flow < n_mixed:
        zstar = np.empty(d)
        for j in range(d):
            zstar[j] = ext[mixed[flow, j], j]
        g = np.empty(d)
        model_gradient(model_kind, mp, zstar, g)
        for j in range(d):
            out[mixed[flow, j], j] = g[j]
    else:
        kc = flow - n_mixed
        j = con[kc, 0]
        a = con[kc, 1]
        acc = 0.0
        for b in range(a + 1, m):
            acc += ext[a, j] - ext[b, j]
            out[b, j] = omega * (ext[b, j] - ext[a, j])
        out[a, j] = omega * acc


@njit(cache=True)
def subsystem_field(ext, flow, out, scratch, model_kind, mp, partner, kindt, sgn, mixed, con, omega):
    m, d = ext.shape
    subsystem_gradient(ext, flow, scratch, model_kind, mp, mixed, con, omega)
    hpar = mp[0] if model_kind == MODEL_LATTICE else 0.0
    out[:] = 0.0
    for c in range(m):
        for j in range(d):
            i = partner[j]
            out[c, i] += k_entry(kindt[j], sgn[j], ext[c, i], ext[c, j], hpar) * scratch[c, j]


@njit(cache=True)
def oracle_rk4_subsystem(ext0, flow, tau, substeps,
                         model_kind, mp, partner, kindt, sgn, mixed, con, omega):
    """Brute-force RK4 integration of one subsystem over [0, tau]."""
    m, d = ext0.shape
    ext = ext0.copy()
    k1 = np.empty((m, d))
    k2 = np.empty((m, d))
    k3 = np.empty((m, d))
    k4 = np.empty((m, d))
    yy = np.empty((m, d))
    scratch = np.empty((m, d))
    dt = tau / substeps
    for _ in range(substeps):
        subsystem_field(ext, flow, k1, scratch, model_kind, mp, partner, kindt, sgn, mixed, con, omega)
        for c in range(m):
            for j in range(d):
                yy[c, j] = ext[c, j] + 0.5 * dt * k1[c, j]
        subsystem_field(yy, flow, k2, scratch, model_kind, mp, partner, kindt, sgn, mixed, con, omega)
        for c in range(m):
            for j in range(d):
                yy[c, j] = ext[c, j] + 0.5 * dt * k2[c, j]
        subsystem_field(yy, flow, k3, scratch, model_kind, mp, partner, kindt, sgn, mixed, con, omega)
        for c in range(m):
            for j in range(d):
                yy[c, j] = ext[c, j] + dt * k3[c, j]
        subsystem_field(yy, flow, k4, scratch, model_kind, mp, partner, kindt, sgn, mixed, con, omega)
        for c in range(m):
            for j in range(d):
                ext[c, j] += dt / 6.0 * (k1[c, j] + 2.0 * k2[c, j] + 2.0 * k3[c, j] + k4[c, j])
    return ext
