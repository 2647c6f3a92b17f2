"""Closed-form subsystem flows and the composition methods built from them.

The augmented system splits into subsystems whose Hamiltonians depend only
on coordinates their own flow freezes, so each flow is exact and conserves
its own Hamiltonian identically. Composing all subsystem flows once gives
the first-order method; the adjoint is the reversed composition; symmetric
compositions of the two raise the order to 2 and 4.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from . import _kernel
from .errors import ConfigurationError, IntegrationError, describe_error
from .extension import extend
from .models import ExtensionStrategy


@dataclass(frozen=True, eq=False)
class SubFlow:
    """One exactly solvable piece of the split: its Hamiltonian and flow map.

    ``origin`` records (model, extension spec, flow index) so oracles can
    rebuild the subsystem ODE this flow claims to solve.
    """

    label: str
    own_hamiltonian: Callable[[np.ndarray], float]
    map: Callable[[np.ndarray, float], np.ndarray]
    origin: Optional[tuple] = None


@dataclass(frozen=True)
class CompositionScheme:
    """Ordered (direction, coefficient) stages applied left to right.

    Direction "base" applies the first-order splitting pass, "adjoint" the
    reversed pass. Coefficients must sum to 1 for consistency.
    """

    stages: Tuple[Tuple[str, float], ...]
    order: int

    def __post_init__(self):
        for direction, _ in self.stages:
            if direction not in ("base", "adjoint"):
                raise ConfigurationError(f"unknown stage direction {direction!r}")
        total = sum(c for _, c in self.stages)
        if abs(total - 1.0) > 1e-12:
            raise ConfigurationError(
                f"composition coefficients sum to {total!r}, expected 1")

    def is_symmetric(self):
        flipped = tuple(
            ("adjoint" if d == "base" else "base", c) for d, c in reversed(self.stages))
        return all(
            d1 == d2 and abs(c1 - c2) < 1e-14
            for (d1, c1), (d2, c2) in zip(self.stages, flipped))

    def as_arrays(self):
        dirs = np.array([1 if d == "base" else 0 for d, _ in self.stages], dtype=np.int64)
        coefs = np.array([c for _, c in self.stages], dtype=float)
        return dirs, coefs


def strang_composition(gammas, order):
    """Palindromic base/adjoint ladder from Strang-substep weights."""
    stages = []
    for g in gammas:
        stages.append(("base", g / 2.0))
        stages.append(("adjoint", g / 2.0))
    return CompositionScheme(stages=tuple(stages), order=order)


def suzuki_gammas():
    g = 1.0 / (4.0 - 4.0 ** (1.0 / 3.0))
    return (g, g, 1.0 - 4.0 * g, g, g)


SCHEME_KSYM1 = CompositionScheme(stages=(("base", 1.0),), order=1)
SCHEME_KSYM2 = strang_composition((1.0,), order=2)
SCHEME_KSYM4 = strang_composition(suzuki_gammas(), order=4)

_SCHEMES = {"ksym1": SCHEME_KSYM1, "ksym2": SCHEME_KSYM2, "ksym4": SCHEME_KSYM4}

KSYM_METHODS = tuple(_SCHEMES)


def scheme_for_method(method, scheme=None):
    if scheme is not None:
        return scheme
    if method not in _SCHEMES:
        raise ConfigurationError(
            f"unknown splitting method {method!r}; choose from {sorted(_SCHEMES)}")
    return _SCHEMES[method]


def _kernel_args(model, spec):
    kt = model.kernel
    return (kt.model_kind, kt.params, kt.partner, kt.kinds, kt.sgns,
            spec.mixed_table(), spec.constraint_table(), spec.omega)


def flow_labels(model, spec):
    if model.extension_strategy is ExtensionStrategy.TWO_COPY_SPECIAL:
        labels = ["H_A", "H_B"]
    else:
        labels = [f"H_{i + 1}" for i in range(spec.m)]
    labels += [f"H_{len(labels) + k + 1}" for k in range(len(spec.constraint_terms))]
    return labels


def _check_compatible(model, spec):
    if spec.m != model.copy_count:
        raise ConfigurationError(
            f"extension has {spec.m} copies but model {model.name} declares {model.copy_count}")
    if spec.mixup.strategy is not model.extension_strategy:
        raise ConfigurationError(
            f"extension strategy {spec.mixup.strategy} does not match model "
            f"{model.name} ({model.extension_strategy})")
    if spec.mixup.d != model.dim:
        raise ConfigurationError("extension dimension does not match the model")


def _apply_flow_generic(model, spec, ext, index, tau):
    """Pure-Python twin of the kernel flow application (any PairTable model)."""
    d = model.dim
    table = spec.mixed_table()
    pt = model.pair_table
    out = np.array(ext, dtype=float)
    if index < spec.m:
        cols = np.arange(d)
        zstar = out[table[index], cols]
        grad = np.asarray(model.gradient(zstar), dtype=float)
        if not np.all(np.isfinite(grad)):
            raise IntegrationError(describe_error(5), flow=index)
        for j in range(d):
            cpy = table[index, j]
            i = pt.partner[j]
            out[cpy, i] = pt.solve(j, out[cpy, i], zstar[j], grad[j], tau)
        return out
    term = spec.constraint_terms[index - spec.m]
    j = term.slot - 1
    a = term.anchor - 1
    i = pt.partner[j]
    frozen = out[:, j].copy()
    rate_anchor = spec.omega * sum(frozen[a] - frozen[b - 1] for b in term.partners)
    for b in term.partners:
        rb = spec.omega * (frozen[b - 1] - frozen[a])
        out[b - 1, i] = pt.solve(j, out[b - 1, i], frozen[b - 1], rb, tau)
    out[a, i] = pt.solve(j, out[a, i], frozen[a], rate_anchor, tau)
    return out


def build_subflows(model, spec):
    """Ordered list of exactly solvable subsystem flows for (model, extension).

    Mixed Hamiltonians come first in index order, then the restraint terms in
    their listed order; the first-order method composes the list front to
    back.
    """
    _check_compatible(model, spec)
    labels = flow_labels(model, spec)
    table = spec.mixed_table()
    cols = np.arange(model.dim)
    use_kernel = model.kernel is not None
    kargs = _kernel_args(model, spec) if use_kernel else None

    flows = []
    for index, label in enumerate(labels):
        if index < spec.m:
            def own(ext, _i=index):
                zstar = np.asarray(ext, dtype=float)[table[_i], cols]
                return float(model.hamiltonian(zstar))
        else:
            def own(ext, _t=spec.constraint_terms[index - spec.m]):
                return float(_t.value(np.asarray(ext, dtype=float), spec.omega))

        if use_kernel:
            def fmap(ext, tau, _i=index, _label=label):
                out = np.array(ext, dtype=float)
                err, ci = _kernel.apply_flow(out, _i, float(tau), *kargs)
                if err != 0:
                    raise IntegrationError(
                        f"subflow {_label} failed at coordinate {ci + 1}: "
                        f"{describe_error(err)}", flow=_label, coordinate=int(ci))
                return out
        else:
            def fmap(ext, tau, _i=index, _label=label):
                try:
                    return _apply_flow_generic(model, spec, ext, _i, float(tau))
                except IntegrationError as exc:
                    raise IntegrationError(
                        f"subflow {_label} failed: {exc}", flow=_label) from exc

        flows.append(SubFlow(label=label, own_hamiltonian=own, map=fmap,
                             origin=(model, spec, index)))
    return flows


def apply_subflow(flow, ext, tau):
    """Exact time-tau map of one subsystem."""
    return flow.map(ext, tau)


def first_order_step(flows, ext, tau):
    """Compose all subsystem flows front to back with the full step."""
    for f in flows:
        ext = f.map(ext, tau)
    return ext


def adjoint_first_order_step(flows, ext, tau):
    """Adjoint of the base step: same flows, reversed order (exact flows are
    self-adjoint)."""
    for f in reversed(flows):
        ext = f.map(ext, tau)
    return ext


def strang_step(flows, ext, tau):
    """Symmetric second-order step: adjoint half step after base half step."""
    return adjoint_first_order_step(flows, first_order_step(flows, ext, tau / 2.0), tau / 2.0)


def fourth_order_step(flows, ext, tau, scheme=SCHEME_KSYM4):
    """Fourth-order composition of base and adjoint passes."""
    if scheme.order != 4:
        raise ConfigurationError(f"scheme declares order {scheme.order}, expected 4")
    if not scheme.is_symmetric():
        raise ConfigurationError("fourth-order composition must be symmetric")
    return composition_step(flows, ext, tau, scheme)


def composition_step(flows, ext, tau, scheme):
    for direction, coef in scheme.stages:
        if direction == "base":
            ext = first_order_step(flows, ext, coef * tau)
        else:
            ext = adjoint_first_order_step(flows, ext, coef * tau)
    return ext


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded run: uniformly spaced times and extended-state snapshots."""

    times: np.ndarray
    states: np.ndarray
    model: object
    extension: object
    method: str
    tau: float
    record_every: int

    @property
    def omega(self):
        return self.extension.omega

    def __len__(self):
        return len(self.times)


def _validate_run(tau, t_final, record_every):
    if tau <= 0:
        raise ConfigurationError(f"step size must be positive, got {tau}")
    if t_final < 0:
        raise ConfigurationError(f"final time must be nonnegative, got {t_final}")
    if record_every < 1:
        raise ConfigurationError(f"record_every must be >= 1, got {record_every}")
    return int(round(t_final / tau)) if t_final > 0 else 0


def integrate(model, spec, method, z0, tau, t_final, record_every=1, scheme=None):
    """Iterate a splitting method from the duplicated initial condition.

    Parameters
    ----------
    model, spec : ModelSpec, ExtensionSpec
        System and extension to integrate.
    method : str
        One of "ksym1", "ksym2", "ksym4" (ignored if `scheme` is given,
        except as the recorded method name).
    z0 : array_like
        Initial point in the original phase space.
    tau : float
        Time step.
    t_final : float
        Integration horizon; the number of steps is round(t_final / tau).
    record_every : int
        Snapshot stride in steps; the initial and final states are always
        recorded.

    Returns
    -------
    Trajectory
    """
    _check_compatible(model, spec)
    sch = scheme_for_method(method, scheme)
    n_steps = _validate_run(tau, t_final, record_every)
    ext0 = extend(np.asarray(z0, dtype=float), spec.m)
    dirs, coefs = sch.as_arrays()

    if model.kernel is not None:
        times, states, err, step, flow_idx, coord = _kernel.integrate_splitting(
            ext0, float(tau), n_steps, int(record_every), dirs, coefs,
            *_kernel_args(model, spec))
        if err != 0:
            label = flow_labels(model, spec)[flow_idx] if flow_idx >= 0 else "?"
            raise IntegrationError(
                f"integration of {model.name} with {method} failed at step {step} "
                f"in subflow {label}, coordinate {coord + 1}: {describe_error(err)}",
                step=int(step), flow=label, coordinate=int(coord))
        return Trajectory(times=times, states=states, model=model, extension=spec,
                          method=method, tau=float(tau), record_every=int(record_every))

    flows = build_subflows(model, spec)
    n_rec = n_steps // record_every + 1 + (1 if n_steps % record_every else 0)
    times = np.empty(n_rec)
    states = np.empty((n_rec,) + ext0.shape)
    times[0] = 0.0
    states[0] = ext0
    ext = ext0
    r = 1
    for s in range(1, n_steps + 1):
        try:
            ext = composition_step(flows, ext, tau, sch)
        except IntegrationError as exc:
            raise IntegrationError(f"step {s}: {exc}", step=s, flow=exc.flow,
                                   coordinate=exc.coordinate) from exc
        if s % record_every == 0 or s == n_steps:
            times[r] = s * tau
            states[r] = ext
            r += 1
    return Trajectory(times=times, states=states, model=model, extension=spec,
                      method=method, tau=float(tau), record_every=int(record_every))
