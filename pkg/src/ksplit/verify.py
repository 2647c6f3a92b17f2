"""Named verification suites: structural invariants, oracle agreement,
structure preservation, and measured convergence orders.

Each check returns a CheckResult so callers (CLI, tests) can print one
pass/fail line per property with the measured value and its threshold.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import baselines, diagnostics, extension, flows, models
from .errors import ConfigurationError, IntegrationError

DEFAULT_SEED = 12345


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float
    comparison: str  # "<=" or ">="
    passed: bool


def _check(name, value, threshold, comparison="<="):
    if comparison == "<=":
        ok = value <= threshold
    elif comparison == ">=":
        ok = value >= threshold
    else:
        raise ConfigurationError(f"unknown comparison {comparison!r}")
    return CheckResult(name=name, value=float(value), threshold=float(threshold),
                       comparison=comparison, passed=bool(ok))


def _verification_models():
    return [models.make_model1(), models.make_ablowitz_ladik(4), models.make_gyrocenter()]


def _random_extended(model, spec, rng, n):
    """Random extended states whose copies are all admissible."""
    states = models.sample_states(model, n * spec.m, rng)
    return states.reshape(n, spec.m, model.dim)


def suite_invariants(seed=DEFAULT_SEED, n_states=100):
    rng = np.random.default_rng(seed)
    results = []
    for model in _verification_models():
        zs = models.sample_states(model, n_states, rng)

        worst_skew = 0.0
        worst_grad = 0.0
        for z in zs:
            b = models.structure_inverse(model, z)
            worst_skew = max(worst_skew, float(np.max(np.abs(b + b.T))))
            ga = models.hamiltonian_gradient(model, z)
            gf = models.gradient_fd_oracle(model, z, 1e-6)
            worst_grad = max(worst_grad,
                             float(np.max(np.abs(ga - gf)) / max(1.0, np.max(np.abs(ga)))))
        results.append(_check(f"{model.name}: skew-symmetry of B", worst_skew, 1e-15))
        results.append(_check(f"{model.name}: analytic vs FD gradient", worst_grad, 1e-6))

        spec = extension.make_extension(model)
        worst_diag_h = 0.0
        worst_diag_f = 0.0
        worst_part = 0.0
        for z in zs:
            ext = extension.extend(z, spec.m)
            hbar = extension.augmented_hamiltonian(model, spec, ext)
            h0 = models.hamiltonian_value(model, z)
            worst_diag_h = max(worst_diag_h,
                               abs(hbar - spec.m * h0) / max(1.0, abs(hbar)))
            f_ext = extension.extended_vector_field(model, spec, ext)[0]
            f_orig = models.vector_field(model, z)
            worst_diag_f = max(worst_diag_f,
                               float(np.max(np.abs(f_ext - f_orig))
                                     / max(1.0, np.max(np.abs(f_orig)))))
        for ext in _random_extended(model, spec, rng, 20):
            total = sum(t.value(ext, spec.omega) for t in spec.constraint_terms)
            ref = spec.omega * extension.constraint_value(spec, ext)
            worst_part = max(worst_part, abs(total - ref) / max(1.0, abs(ref)))
        results.append(_check(f"{model.name}: diagonal augmented H = m*H", worst_diag_h, 1e-14))
        results.append(_check(f"{model.name}: diagonal field matches original", worst_diag_f, 1e-13))
        results.append(_check(f"{model.name}: restraint term partition", worst_part, 1e-14))

    # Mix-up routing is a family of exact bijections.
    worst_bij = 0.0
    for d in range(2, 9):
        for i in range(1, d + 1):
            cols = {extension.mixup_copy_index(i, j, d) for j in range(1, d + 1)}
            if cols != set(range(1, d + 1)):
                worst_bij = 1.0
        for j in range(1, d + 1):
            rows = {extension.mixup_copy_index(i, j, d) for i in range(1, d + 1)}
            if rows != set(range(1, d + 1)):
                worst_bij = 1.0
    results.append(_check("mix-up assignment bijectivity (d=2..8)", worst_bij, 0.0))

    # Lattice gauge entries stay >= 1; gyro structure reduces to two blocks.
    al = models.make_ablowitz_ladik(4)
    n = al.params.N
    min_dk = math.inf
    for z in models.sample_states(al, n_states, rng):
        b = models.structure_inverse(al, z)
        min_dk = min(min_dk, float(np.min(np.diag(b[n:, :n]))))
    results.append(_check("lattice: diagonal entries d_k", min_dk, 1.0, ">="))

    gyro = models.make_gyrocenter()
    worst_red = 0.0
    for z in models.sample_states(gyro, n_states, rng):
        c2 = math.cos(z[0] * z[1]) ** 2
        expected = np.array([
            [0.0, -c2, 0.0, 0.0],
            [c2, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0, 0.0],
        ])
        worst_red = max(worst_red,
                        float(np.max(np.abs(models.structure_inverse(gyro, z) - expected))))
    results.append(_check("gyrocenter: reduced block structure", worst_red, 1e-14))
    return results


def suite_subflows(seed=DEFAULT_SEED, n_states=20, tau=0.01, substeps=10_000,
                   oracle_tol=1e-9, conservation_tol=1e-12):
    rng = np.random.default_rng(seed)
    results = []
    for model in _verification_models():
        spec = extension.make_extension(model)
        subflows = flows.build_subflows(model, spec)
        exts = [extension.extend(model.default_initial, spec.m)]
        exts.extend(_random_extended(model, spec, rng, n_states))
        worst_oracle = 0.0
        worst_cons = 0.0
        for f in subflows:
            for ext in exts:
                gap = baselines.subflow_oracle_check(f, ext, tau, substeps)
                worst_oracle = max(worst_oracle, gap)
                h_before = f.own_hamiltonian(ext)
                h_after = f.own_hamiltonian(f.map(ext, tau))
                worst_cons = max(worst_cons,
                                 abs(h_after - h_before) / (1.0 + abs(h_before)))
        results.append(_check(
            f"{model.name}: closed forms vs brute-force oracle ({len(subflows)} flows)",
            worst_oracle, oracle_tol))
        results.append(_check(
            f"{model.name}: per-subflow energy conservation", worst_cons, conservation_tol))
    return results


def suite_poisson(seed=DEFAULT_SEED, n_states=10, tau=0.01, fd_step=1e-6):
    rng = np.random.default_rng(seed)
    results = []
    rk3 = baselines.make_rk3_heun()
    for model in (models.make_model1(), models.make_gyrocenter()):
        spec = extension.make_extension(model)
        subflows = flows.build_subflows(model, spec)

        def ksym2_step(ext):
            return flows.strang_step(subflows, ext, tau)

        def rk3_step(ext):
            return baselines.rk_step(
                rk3, lambda s: extension.extended_vector_field(model, spec, s), ext, tau)

        worst_ksym = 0.0
        min_margin = math.inf
        for ext in _random_extended(model, spec, rng, n_states):
            r_ksym = diagnostics.poisson_residual(ksym2_step, model, ext, fd_step)
            r_rk = diagnostics.poisson_residual(rk3_step, model, ext, fd_step)
            worst_ksym = max(worst_ksym, r_ksym)
            min_margin = min(min_margin, r_rk / r_ksym)
        results.append(_check(
            f"{model.name}: strang step structure residual", worst_ksym, 1e-5))
        results.append(_check(
            f"{model.name}: rk3/strang residual ratio", min_margin, 1.0, ">="))
    return results


ORDER_BANDS = {
    "ksym1": (1.0, 0.2),
    "ksym2": (2.0, 0.2),
    "ksym4": (4.0, 0.5),
    "rk3": (3.0, 0.3),
    "rk5": (5.0, 0.5),
}

ORDER_TAUS = (0.02, 0.01, 0.005, 0.0025)
ORDER_OMEGA = 5.0


def suite_orders(t_final=1.0, taus=ORDER_TAUS, omega=ORDER_OMEGA):
    """Measured orders at the fixed step-size ladder.

    The restraint strength is deliberately gentler than the long-run default
    so the ladder sits in the asymptotic regime of the low-order methods.
    """
    results = []
    for model in (models.make_model1(), models.make_ablowitz_ladik(4)):
        spec = extension.make_extension(model, omega=omega)
        ref = baselines.reference_solution(model, spec, model.default_initial, t_final)
        for method, (target, band) in ORDER_BANDS.items():
            try:
                slope = diagnostics.convergence_order(model, spec, method, taus,
                                                      t_final, reference=ref)
                deviation = abs(slope - target)
            except IntegrationError:
                deviation = math.inf  # a run diverged; no slope to measure
            results.append(_check(
                f"{model.name}: measured order of {method}", deviation, band))
    return results


SUITES = {
    "invariants": suite_invariants,
    "subflows": suite_subflows,
    "poisson": suite_poisson,
    "orders": suite_orders,
}


def run_suite(name, seed=DEFAULT_SEED):
    """Run one named suite (or "all"); returns the list of check results."""
    if name == "all":
        results = []
        results += suite_invariants(seed)
        results += suite_subflows(seed)
        results += suite_poisson(seed)
        results += suite_orders()
        return results
    if name not in SUITES:
        raise ConfigurationError(
            f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all']}")
    if name == "orders":
        return suite_orders()
    return SUITES[name](seed)
