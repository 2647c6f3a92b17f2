"""Extended phase space: copies, mix-up assignments, and the copy restraint.

The extended state is an (m, d) array, one row per copy of the original
phase space; row-major raveling gives the copy-major flat layout. The
augmented Hamiltonian is a sum of m mixed-variable evaluations of the
original H plus a quadratic restraint binding the copies pairwise.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ConfigurationError, DomainError
from .models import ExtensionStrategy

DEFAULT_OMEGA = 20.0


def extend(z, m):
    """Duplicate a phase-space point into m identical copies."""
    if m < 2:
        raise ConfigurationError(f"copy count must be >= 2, got {m}")
    z = np.asarray(z, dtype=float)
    return np.tile(z, (int(m), 1))


def readout(ext):
    """Project an extended state back to the original space: the first copy."""
    ext = np.asarray(ext, dtype=float)
    return ext[0].copy()


def mixup_copy_index(i, j, d):
    """Copy supplying argument slot j of the i-th mixed Hamiltonian (1-based).

    The assignment cycles so that each mixed Hamiltonian takes exactly one
    slot from each copy and each copy donates each slot exactly once.
    """
    if not (1 <= i <= d and 1 <= j <= d):
        raise ValueError(f"indices out of range: i={i}, j={j}, d={d}")
    return (j - i - 1) % d + 1


@dataclass(frozen=True, eq=False)
class MixupAssignment:
    """Slot-to-copy routing for the mixed Hamiltonians H_1 .. H_m."""

    strategy: ExtensionStrategy
    m: int
    d: int

    def copy_of(self, i, j):
        """1-based copy index supplying slot j of mixed Hamiltonian i."""
        if not (1 <= i <= self.m and 1 <= j <= self.d):
            raise ValueError(f"indices out of range: i={i}, j={j}")
        if self.strategy is ExtensionStrategy.TWO_COPY_SPECIAL:
            half_first = j <= self.d // 2
            if i == 1:
                return 1 if half_first else 2
            return 2 if half_first else 1
        return mixup_copy_index(i, j, self.d)

    def table(self):
        """0-based (m, d) assignment array."""
        out = np.empty((self.m, self.d), dtype=np.int64)
        for i in range(self.m):
            for j in range(self.d):
                out[i, j] = self.copy_of(i + 1, j + 1) - 1
        return out


@dataclass(frozen=True, eq=False)
class ConstraintTerm:
    """One split piece of the restraint: a slot, an anchor copy, its partners."""

    slot: int
    anchor: int
    partners: Tuple[int, ...]

    def value(self, ext, omega):
        j = self.slot - 1
        a = self.anchor - 1
        va = ext[a, j]
        return omega * sum((va - ext[b - 1, j]) ** 2 for b in self.partners) / 2.0


@dataclass(frozen=True, eq=False)
class ExtensionSpec:
    """Copy count, restraint strength, mix-up routing and restraint splitting."""

    m: int
    omega: float
    mixup: MixupAssignment
    constraint_terms: Tuple[ConstraintTerm, ...]

    def __post_init__(self):
        if self.omega <= 0:
            raise ConfigurationError(f"restraint strength must be positive, got {self.omega}")
        if self.m != self.mixup.m:
            raise ConfigurationError("copy count disagrees with the mix-up assignment")

    def mixed_table(self):
        return self.mixup.table()

    def constraint_table(self):
        """0-based (n_terms, 2) array of (slot, anchor)."""
        out = np.empty((len(self.constraint_terms), 2), dtype=np.int64)
        for k, term in enumerate(self.constraint_terms):
            out[k, 0] = term.slot - 1
            out[k, 1] = term.anchor - 1
        return out


def make_extension(model, omega=DEFAULT_OMEGA):
    """Build the extension spec matching a model's declared strategy."""
    m = model.copy_count
    d = model.dim
    mixup = MixupAssignment(strategy=model.extension_strategy, m=m, d=d)
    terms = tuple(
        ConstraintTerm(slot=j, anchor=a, partners=tuple(range(a + 1, m + 1)))
        for a in range(1, m)
        for j in range(1, d + 1)
    )
    return ExtensionSpec(m=m, omega=float(omega), mixup=mixup, constraint_terms=terms)


def _check_ext(model, spec, ext):
    ext = np.asarray(ext, dtype=float)
    if ext.shape != (spec.m, model.dim):
        raise ConfigurationError(
            f"extended state has shape {ext.shape}, expected ({spec.m}, {model.dim})")
    return ext


def mixed_arguments(model, spec, ext, i):
    """Argument vector of the i-th (1-based) mixed Hamiltonian."""
    ext = _check_ext(model, spec, ext)
    table = spec.mixed_table()
    return ext[table[i - 1], np.arange(model.dim)]


def extended_structure_inverse(model, ext):
    """Block-diagonal structure matrix of the extended system."""
    ext = np.asarray(ext, dtype=float)
    m, d = ext.shape
    out = np.zeros((m * d, m * d))
    for c in range(m):
        z = ext[c]
        if not model.domain_guard(z):
            raise DomainError(f"copy {c + 1} is outside the admissible domain: {z}")
        out[c * d:(c + 1) * d, c * d:(c + 1) * d] = model.structure_inverse(z)
    return out


def constraint_value(spec, ext):
    """Sum over copy pairs a < b of |copy_a - copy_b|^2 / 2 (no omega factor)."""
    ext = np.asarray(ext, dtype=float)
    total = 0.0
    for a in range(spec.m):
        for b in range(a + 1, spec.m):
            diff = ext[a] - ext[b]
            total += 0.5 * float(diff @ diff)
    return total


def augmented_hamiltonian(model, spec, ext):
    """Sum of the mixed Hamiltonians plus omega times the restraint."""
    ext = _check_ext(model, spec, ext)
    table = spec.mixed_table()
    cols = np.arange(model.dim)
    total = 0.0
    for i in range(spec.m):
        zstar = ext[table[i], cols]
        if not model.domain_guard(zstar):
            raise DomainError(
                f"mixed argument state of H_{i + 1} is inadmissible: {zstar}")
        total += float(model.hamiltonian(zstar))
    return total + spec.omega * constraint_value(spec, ext)


def augmented_energy_series(model, spec, states):
    """Vectorized augmented Hamiltonian over a (n, m, d) stack of states."""
    states = np.asarray(states, dtype=float)
    table = spec.mixed_table()
    cols = np.arange(model.dim)
    total = np.zeros(states.shape[0])
    for i in range(spec.m):
        total += model.hamiltonian(states[:, table[i], cols])
    for a in range(spec.m):
        for b in range(a + 1, spec.m):
            diff = states[:, a, :] - states[:, b, :]
            total += 0.5 * spec.omega * np.sum(diff * diff, axis=-1)
    return total


def augmented_gradient(model, spec, ext):
    """Gradient of the augmented Hamiltonian, shaped like the extended state."""
    ext = _check_ext(model, spec, ext)
    table = spec.mixed_table()
    cols = np.arange(model.dim)
    out = np.zeros_like(ext)
    for i in range(spec.m):
        zstar = ext[table[i], cols]
        out[table[i], cols] += model.gradient(zstar)
    out += spec.omega * (spec.m * ext - ext.sum(axis=0, keepdims=True))
    return out


def extended_vector_field(model, spec, ext):
    """Vector field of the extended system, one block per copy."""
    ext = _check_ext(model, spec, ext)
    grad = augmented_gradient(model, spec, ext)
    out = np.empty_like(ext)
    for c in range(spec.m):
        out[c] = model.structure_inverse(ext[c]) @ grad[c]
    return out
