"""Non-canonical model definitions: Hamiltonians, gradients, structure matrices.

A model is an ODE  dz/dt = B(z) grad H(z)  with B skew-symmetric and state
dependent. The three built-in models share one property that the splitting
machinery relies on: every row of B has a single nonzero entry, so B is fully
described by a coordinate pairing plus a scalar entry function per column.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import _kernel
from .errors import ConfigurationError, DomainError, IntegrationError, describe_error


class ExtensionStrategy(Enum):
    """How the phase space is replicated to make the Hamiltonian separable."""

    TWO_COPY_SPECIAL = "two_copy_special"
    D_COPY_GENERAL = "d_copy_general"


@dataclass(frozen=True, eq=False)
class PairTable:
    """Sparse description of B: column j couples only to row ``partner[j]``.

    ``solve(j, si, sj, c, t)`` advances coordinate i = partner[j] under
    ds_i/dt = B[i, j](s_i, s_j) * c with s_j and c frozen, in closed form.
    ``entry(j, si, sj)`` evaluates B[partner[j], j].
    """

    partner: np.ndarray
    solve: Callable[[int, float, float, float, float], float]
    entry: Callable[[int, float, float], float]


@dataclass(frozen=True, eq=False)
class KernelTables:
    """Arrays consumed by the compiled fast path."""

    model_kind: int
    params: np.ndarray
    partner: np.ndarray
    kinds: np.ndarray
    sgns: np.ndarray


@dataclass(frozen=True, eq=False)
class SpecialPairStructure:
    """Conjugate-pair view of a block structure matrix with diagonal coupling.

    For models whose B couples coordinate i only to i+n (n = d/2), pair i
    carries a scalar function g_i(p_i, q_i) and two closed-form steppers that
    advance p_i (resp. q_i) under a constant-rate scalar ODE driven by g_i.
    """

    n_pairs: int
    pair_functions: tuple
    advance_first: Callable[[int, float, float, float, float], float]
    advance_second: Callable[[int, float, float, float, float], float]


@dataclass(frozen=True, eq=False)
class ALParams:
    """Lattice size and space step of the discrete Schroedinger chain."""

    N: int
    h: float


@dataclass(frozen=True, eq=False)
class GyroParams:
    """Magnetic moment and scalar-potential coefficient of the gyrocenter model."""

    mu: float = 1.0
    phi_coeff: float = 1e-2


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Immutable bundle describing one non-canonical Hamiltonian system.

    ``hamiltonian`` and ``gradient`` broadcast over leading axes; the last
    axis is the coordinate axis of length ``dim``. ``structure_inverse``
    maps a single state to the dense d x d matrix B(z). ``domain_guard``
    accepts a single state and returns whether it is admissible.
    """

    name: str
    dim: int
    hamiltonian: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    structure_inverse: Callable[[np.ndarray], np.ndarray]
    extension_strategy: ExtensionStrategy
    copy_count: int
    default_initial: np.ndarray
    domain_guard: Callable[[np.ndarray], bool]
    pair_table: PairTable
    pair_structure: Optional[SpecialPairStructure] = None
    params: object = None
    kernel: Optional[KernelTables] = field(default=None, repr=False)


def as_state(model, z):
    """Validate and convert a phase-space point to a float vector of length d."""
    z = np.asarray(z, dtype=float)
    if z.shape != (model.dim,):
        raise ConfigurationError(
            f"state has shape {z.shape}, expected ({model.dim},) for model {model.name}")
    if not np.all(np.isfinite(z)):
        raise DomainError(f"state contains non-finite entries: {z}")
    return z


def _require_admissible(model, z):
    if not model.domain_guard(z):
        raise DomainError(f"state {z} violates the admissible domain of model {model.name}")


def hamiltonian_value(model, z):
    """Evaluate H(z) after checking admissibility."""
    z = as_state(model, z)
    _require_admissible(model, z)
    return float(model.hamiltonian(z))


def hamiltonian_gradient(model, z):
    """Evaluate the analytic gradient of H at z."""
    z = as_state(model, z)
    _require_admissible(model, z)
    return np.asarray(model.gradient(z), dtype=float)


def gradient_fd_oracle(model, z, step=1e-6):
    """Central-difference gradient, the independent check on model.gradient."""
    if step <= 0:
        raise ConfigurationError("finite-difference step must be positive")
    z = as_state(model, z)
    out = np.empty(model.dim)
    for i in range(model.dim):
        zp = z.copy()
        zm = z.copy()
        zp[i] += step
        zm[i] -= step
        _require_admissible(model, zp)
        _require_admissible(model, zm)
        out[i] = (float(model.hamiltonian(zp)) - float(model.hamiltonian(zm))) / (2.0 * step)
    return out


def structure_inverse(model, z):
    """Dense skew-symmetric structure matrix B(z)."""
    z = as_state(model, z)
    _require_admissible(model, z)
    return model.structure_inverse(z)


def vector_field(model, z):
    """B(z) grad H(z)."""
    z = as_state(model, z)
    _require_admissible(model, z)
    return model.structure_inverse(z) @ model.gradient(z)


def _dense_from_pairs(pair_table, dim):
    partner = pair_table.partner
    entry = pair_table.entry

    def build(z):
        out = np.zeros((dim, dim))
        for j in range(dim):
            i = partner[j]
            out[i, j] = entry(j, z[i], z[j])
        return out

    return build


def _pair_table_from_kernel(kt):
    partner = kt.partner
    kinds = kt.kinds
    sgns = kt.sgns
    h = kt.params[0] if kt.model_kind == _kernel.MODEL_LATTICE else 0.0

    def solve(j, si, sj, c, t):
        nv, err = _kernel.solve_pair(kinds[j], sgns[j], si, sj, c, t, h)
        if err != 0:
            raise IntegrationError(describe_error(err), coordinate=int(partner[j]))
        return nv

    def entry(j, si, sj):
        return _kernel.k_entry(kinds[j], sgns[j], si, sj, h)

    return PairTable(partner=partner, solve=solve, entry=entry)


def _special_pairs(pair_table, dim):
    n = dim // 2
    solve = pair_table.solve
    entry = pair_table.entry

    def g_for(i):
        return lambda p, q: entry(i, q, p)

    def advance_first(i, p, q, c, t):
        # dp/dt = g_i(p, q) * c; column i+n couples back with opposite sign.
        return solve(i + n, p, q, -c, t)

    def advance_second(i, p, q, c, t):
        # dq/dt = g_i(p, q) * c.
        return solve(i, q, p, c, t)

    return SpecialPairStructure(
        n_pairs=n,
        pair_functions=tuple(g_for(i) for i in range(n)),
        advance_first=advance_first,
        advance_second=advance_second,
    )


GUARD_MARGIN = 1e-9


def make_model1():
    """Four dimensional system with H = (x^2+y^2+z^2)^{5/2} + y*u."""

    def ham(z):
        z = np.asarray(z, dtype=float)
        x, y, w, u = z[..., 0], z[..., 1], z[..., 2], z[..., 3]
        s = x * x + y * y + w * w
        return s ** 2.5 + y * u

    def grad(z):
        z = np.asarray(z, dtype=float)
        x, y, w, u = z[..., 0], z[..., 1], z[..., 2], z[..., 3]
        s = x * x + y * y + w * w
        g = 5.0 * s ** 1.5
        return np.stack([x * g, y * g + u, w * g, y], axis=-1)

    def guard(z):
        z = np.asarray(z, dtype=float)
        if z.shape != (4,) or not np.all(np.isfinite(z)):
            return False
        y = z[1]
        return 0.0 < y < math.pi and abs(z[0] * z[2]) < math.pi / 2 - GUARD_MARGIN

    kt = KernelTables(
        model_kind=_kernel.MODEL_POLYPROD,
        params=np.zeros(1),
        partner=np.array([2, 3, 0, 1], dtype=np.int64),
        kinds=np.array([_kernel.KIND_TANPAIR, _kernel.KIND_RECIP,
                        _kernel.KIND_TANPAIR, _kernel.KIND_SINCOS], dtype=np.int64),
        sgns=np.array([-1.0, -1.0, 1.0, 1.0]),
    )
    pt = _pair_table_from_kernel(kt)
    return ModelSpec(
        name="model1",
        dim=4,
        hamiltonian=ham,
        gradient=grad,
        structure_inverse=_dense_from_pairs(pt, 4),
        extension_strategy=ExtensionStrategy.TWO_COPY_SPECIAL,
        copy_count=2,
        default_initial=np.array([0.2, 0.4, 0.3, 0.5]),
        domain_guard=guard,
        pair_table=pt,
        pair_structure=_special_pairs(pt, 4),
        kernel=kt,
    )


_AL_INITIAL_U = (0.2, 0.4, 0.3, 0.5)
_AL_INITIAL_V = (0.3, 0.2, 0.3, 0.2)


def make_ablowitz_ladik(N=4):
    """Discrete Schroedinger lattice with N sites under periodic closure."""
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise ConfigurationError(f"lattice size must be an integer >= 2, got {N!r}")
    N = int(N)
    h = 1.0 / N
    d = 2 * N

    def ham(z):
        z = np.asarray(z, dtype=float)
        u = z[..., :N]
        v = z[..., N:]
        quad = np.sum(u * np.roll(u, 1, axis=-1) + v * np.roll(v, 1, axis=-1), axis=-1)
        gauge = np.sum(np.log1p(h * h * (u * u + v * v)), axis=-1)
        return quad / h ** 2 - gauge / h ** 4

    def grad(z):
        z = np.asarray(z, dtype=float)
        u = z[..., :N]
        v = z[..., N:]
        dk = 1.0 + h * h * (u * u + v * v)
        gu = (np.roll(u, 1, axis=-1) + np.roll(u, -1, axis=-1)) / h ** 2 - 2.0 * u / (h ** 2 * dk)
        gv = (np.roll(v, 1, axis=-1) + np.roll(v, -1, axis=-1)) / h ** 2 - 2.0 * v / (h ** 2 * dk)
        return np.concatenate([gu, gv], axis=-1)

    def guard(z):
        z = np.asarray(z, dtype=float)
        return z.shape == (d,) and bool(np.all(np.isfinite(z)))

    partner = np.concatenate([np.arange(N, 2 * N), np.arange(0, N)]).astype(np.int64)
    kt = KernelTables(
        model_kind=_kernel.MODEL_LATTICE,
        params=np.array([h]),
        partner=partner,
        kinds=np.full(d, _kernel.KIND_ALTAN, dtype=np.int64),
        sgns=np.concatenate([np.ones(N), -np.ones(N)]),
    )
    pt = _pair_table_from_kernel(kt)
    initial = np.array([_AL_INITIAL_U[k % 4] for k in range(N)]
                       + [_AL_INITIAL_V[k % 4] for k in range(N)])
    return ModelSpec(
        name=f"ablowitz_ladik_{N}",
        dim=d,
        hamiltonian=ham,
        gradient=grad,
        structure_inverse=_dense_from_pairs(pt, d),
        extension_strategy=ExtensionStrategy.TWO_COPY_SPECIAL,
        copy_count=2,
        default_initial=initial,
        domain_guard=guard,
        pair_table=pt,
        pair_structure=_special_pairs(pt, d),
        params=ALParams(N=N, h=h),
        kernel=kt,
    )


def make_gyrocenter(mu=1.0, phi_coeff=1e-2):
    """Gyrocenter model in the field B = (0, 0, sec^2(xy)) with b = (0, 0, 1).

    With a constant unit field direction the off-pair couplings vanish and
    the assembled structure matrix reduces to two decoupled blocks: a
    cos^2(xy) rotation pair (x, y) and a unit shear pair (z, u). The vector
    potential itself never enters, only the curl component sec^2(xy) does.
    """

    def ham(z):
        z = np.asarray(z, dtype=float)
        x, y, w, u = z[..., 0], z[..., 1], z[..., 2], z[..., 3]
        r = np.sqrt(x * x + y * y + w * w)
        return mu / np.cos(x * y) ** 2 + phi_coeff * r + 0.5 * u * u

    def grad(z):
        z = np.asarray(z, dtype=float)
        x, y, w, u = z[..., 0], z[..., 1], z[..., 2], z[..., 3]
        sec2 = 1.0 / np.cos(x * y) ** 2
        tn = np.tan(x * y)
        r = np.sqrt(x * x + y * y + w * w)
        pr = phi_coeff / r
        return np.stack([
            2.0 * mu * sec2 * tn * y + pr * x,
            2.0 * mu * sec2 * tn * x + pr * y,
            pr * w,
            u,
        ], axis=-1)

    def guard(z):
        z = np.asarray(z, dtype=float)
        if z.shape != (4,) or not np.all(np.isfinite(z)):
            return False
        if abs(z[0] * z[1]) >= math.pi / 2 - GUARD_MARGIN:
            return False
        return float(np.dot(z[:3], z[:3])) > 0.0

    kt = KernelTables(
        model_kind=_kernel.MODEL_GYRO,
        params=np.array([mu, phi_coeff]),
        partner=np.array([1, 0, 3, 2], dtype=np.int64),
        kinds=np.array([_kernel.KIND_TANPAIR, _kernel.KIND_TANPAIR,
                        _kernel.KIND_LIN, _kernel.KIND_LIN], dtype=np.int64),
        sgns=np.array([1.0, -1.0, -1.0, 1.0]),
    )
    pt = _pair_table_from_kernel(kt)
    return ModelSpec(
        name="gyrocenter",
        dim=4,
        hamiltonian=ham,
        gradient=grad,
        structure_inverse=_dense_from_pairs(pt, 4),
        extension_strategy=ExtensionStrategy.D_COPY_GENERAL,
        copy_count=4,
        default_initial=np.array([0.003, 0.002, 0.004, 0.005]),
        domain_guard=guard,
        pair_table=pt,
        params=GyroParams(mu=mu, phi_coeff=phi_coeff),
        kernel=kt,
    )


BUILTIN_MODELS = {
    "model1": make_model1,
    "ablowitz_ladik": make_ablowitz_ladik,
    "gyrocenter": make_gyrocenter,
}

_MODEL_ALIASES = {"al": "ablowitz_ladik", "gyro": "gyrocenter"}


def make_model(name, **kwargs):
    """Instantiate a built-in model by name (aliases: al, gyro)."""
    key = _MODEL_ALIASES.get(name, name)
    if key not in BUILTIN_MODELS:
        raise ConfigurationError(
            f"unknown model {name!r}; choose from {sorted(BUILTIN_MODELS)}")
    return BUILTIN_MODELS[key](**kwargs)


def sample_states(model, n, rng):
    """Draw n random admissible states, kept well inside the domain guards.

    Ranges are conservative enough that every subsystem flow exists over a
    test step of 0.01 (the quintic growth of the first model makes the
    reciprocal and arccos flows genuinely blow up for wilder states).
    """
    out = np.empty((n, model.dim))
    if model.name == "model1":
        out[:, 0] = rng.uniform(-0.5, 0.5, n)
        out[:, 1] = rng.uniform(0.6, 1.6, n)
        out[:, 2] = rng.uniform(-0.5, 0.5, n)
        out[:, 3] = rng.uniform(-0.8, 0.8, n)
    elif model.name == "gyrocenter":
        out[:, 0] = rng.uniform(-0.9, 0.9, n)
        out[:, 1] = rng.uniform(-0.9, 0.9, n)
        out[:, 2] = rng.uniform(0.2, 1.0, n) * rng.choice([-1.0, 1.0], n)
        out[:, 3] = rng.uniform(-1.0, 1.0, n)
    else:
        out[:] = rng.uniform(-1.0, 1.0, (n, model.dim))
    for row in out:
        if not model.domain_guard(row):
            raise ConfigurationError("sampler produced an inadmissible state")
    return out
