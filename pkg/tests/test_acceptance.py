"""End-to-end acceptance gate.

Each criterion is a function returning ``(passed, detail)``. Under pytest every
criterion prints one PASS/FAIL line and the full list is repeated in the
terminal summary. Run directly with ``python3 tests/test_acceptance.py``.
"""
import math
import sys
import time

import numpy as np
import pytest

from povmlab.channels import (
    ChannelSpec,
    compose_channel,
    depolarize,
    equivalence_time,
    integrate_master_equation,
    iterate_channel,
    povm_channel_analytic,
    povm_channel_monte_carlo,
)
from povmlab.circuits import (
    direct_protocol,
    lcu_decomposition,
    lcu_protocol,
    swap_test_protocol,
)
from povmlab.coherent import OmegaAngles, povm_completeness
from povmlab.linalg import (
    basis_projector,
    maximally_mixed,
    random_density_matrix,
    random_pure_state,
    trace_distance,
)
from povmlab.phase_space import (
    SWParams,
    classify_single_shot,
    grid_w,
    n_critical,
    quasiprob,
    s_min,
    sw_kernel,
    w0_min_paper,
    w_evolution,
    w_min_physical,
)
from povmlab.sun_algebra import bloch_compose, expectation_vector, generator_basis

RESULTS = {}


def random_angles(n, g):
    return OmegaAngles(g.uniform(0, np.pi, n - 1), g.uniform(0, 2 * np.pi, n - 1))


def _z_ratio(dev, err):
    """Largest ``|dev| / err``; entries with zero error must match exactly."""
    dev = np.abs(dev)
    if (dev[err == 0] > 0).any():
        return math.inf
    return float((dev[err > 0] / err[err > 0]).max(initial=0.0))


def criterion_1():
    worst, slowest = 0.0, 0.0
    for n in (2, 3, 4):
        start = time.perf_counter()
        avg = povm_completeness(n, 100_000, seed=1000 + n)
        slowest = max(slowest, time.perf_counter() - start)
        dev = avg.mean - np.eye(n)
        worst = max(worst, _z_ratio(dev.real, avg.stderr_re), _z_ratio(dev.imag, avg.stderr_im))
    ok = worst <= 5 and slowest < 10
    return ok, f"max |dev|/stderr = {worst:.2f} (<= 5), slowest N {slowest:.2f} s (< 10 s)"


def criterion_2():
    g = np.random.default_rng(2)
    worst = 0.0
    for n in range(2, 9):
        rho0 = random_density_matrix(n, g)
        for k in range(6):
            closed = maximally_mixed(n) + (rho0 - maximally_mixed(n)) / (n + 1) ** k
            worst = max(worst, np.abs(compose_channel(rho0, k) - closed).max(),
                        np.abs(iterate_channel(rho0, k) - closed).max())
    mc_worst = 0.0
    for n in (2, 3):
        rho = random_density_matrix(n, g)
        avg = povm_channel_monte_carlo(rho, 1_000_000, seed=200 + n)
        dev = avg.mean - povm_channel_analytic(rho)
        mc_worst = max(mc_worst, _z_ratio(dev.real, avg.stderr_re), _z_ratio(dev.imag, avg.stderr_im))
    ok = worst <= 1e-12 and mc_worst <= 3
    return ok, f"closed-form error {worst:.2e} (<= 1e-12), MC max |dev|/stderr {mc_worst:.2f} (<= 3)"


def criterion_3():
    g = np.random.default_rng(3)
    worst = 0.0
    for n in range(2, 9):
        for gamma in (0.1, 1.0, 10.0):
            spec = ChannelSpec(n, gamma)
            for k in range(6):
                t = equivalence_time(k, spec)
                for _ in range(50):
                    rho0 = random_density_matrix(n, g)
                    worst = max(worst, trace_distance(iterate_channel(rho0, k),
                                                      depolarize(rho0, spec, t)))
    rk_worst = 0.0
    for n in (2, 3, 5):
        spec = ChannelSpec(n, 1.0)
        rho0 = random_density_matrix(n, g)
        t = equivalence_time(3, spec)
        rho = integrate_master_equation(rho0, spec, t, 2000, generator_basis(n))
        rk_worst = max(rk_worst, np.abs(rho - depolarize(rho0, spec, t)).max())
    ok = worst <= 1e-12 and rk_worst <= 1e-8
    return ok, f"max trace distance {worst:.2e} (<= 1e-12), RK4 error {rk_worst:.2e} (<= 1e-8)"


def criterion_4():
    err = abs(w0_min_paper(SWParams(2, 0.0)) - (1 - math.sqrt(3)) / 2)
    at_min = max(abs(w0_min_paper(SWParams(n, s_min(n)))) for n in range(3, 11))
    ok = err <= 1e-15 and at_min <= 1e-12
    return ok, f"|W0min(2,0) - (1-sqrt3)/2| = {err:.1e}, max |W0min at s_min| = {at_min:.1e}"


def _brute_rounds(params):
    w0 = w0_min_paper(params)
    k = 1
    while w_evolution(w0, params, rounds=k) < -1e-12:
        k += 1
    return k


def criterion_5():
    at_zero = [n_critical(SWParams(n, 0.0)) for n in range(2, 21)]
    ok_zero = at_zero == [1, 1] + [2] * 17
    bad = [(n, s) for n in range(2, 21) for s in (-1.5, -1.0, -0.5, 0.0, 0.5, 1.0)
           if n_critical(SWParams(n, s)) != _brute_rounds(SWParams(n, s))]
    return ok_zero and not bad, f"n_c(s=0) = {at_zero}, brute-force mismatches: {bad}"


def criterion_6():
    params = SWParams(2, 0.0)
    rho0 = basis_projector(2, 1)
    g0 = grid_w(rho0, params, resolution=256)
    g1 = grid_w(iterate_channel(rho0, 1), params, resolution=256)
    ok = (abs(g0.minimum + 0.36603) <= 1e-5 and abs(g1.minimum - 0.21132) <= 1e-5
          and bool((g1.values >= 0).all()))
    return ok, f"min W n=0 {g0.minimum:.6f}, n=1 {g1.minimum:.6f}, negative cells at n=1: " \
               f"{int((g1.values < 0).sum())}"


def _numeric_w1(n, s, basis):
    """Evolve the anti-parallel operator by one round in matrix form and read W at the ground point."""
    params = SWParams(n, s)
    om = OmegaAngles.ground(n)
    r = expectation_vector(basis_projector(n, 0)[:, 0], basis)
    b = -r / np.linalg.norm(r) * math.sqrt(2 * (n - 1) / n)
    a0 = bloch_compose(b, basis)
    a1 = bloch_compose(b / (n + 1), basis)
    kernel = sw_kernel(om, params, basis).matrix
    return np.trace(a0 @ kernel).real, np.trace(a1 @ kernel).real


def criterion_7():
    s_grid = [round(-3 + 0.05 * i, 10) for i in range(81)]
    cells = mismatches = boundary = 0
    worst_boundary = 0.0
    for n in range(2, 14):
        basis = generator_basis(n)
        for s in s_grid:
            rec = classify_single_shot(n, s)
            w0, w1 = _numeric_w1(n, s, basis)
            numeric = w0 < -1e-10 and w1 >= -1e-10
            region = rec.s_min < s <= rec.s_max
            cells += 1
            mismatches += numeric != region or rec.single_shot_paper != region
            if abs(s - rec.s_max) <= 1e-9:
                boundary += 1
                worst_boundary = max(worst_boundary, abs(w1))
    ok = mismatches == 0 and worst_boundary <= 1e-10
    return ok, f"{cells} cells, {mismatches} mismatches, {boundary} boundary cells with " \
               f"max |W1| = {worst_boundary:.1e} (<= 1e-10)"


def criterion_8():
    g = np.random.default_rng(8)
    worst = mixed = 0.0
    shot_ratio = 0.0
    for n in range(2, 6):
        for i in range(100):
            rho = random_density_matrix(n, g)
            om = random_angles(n, g)
            worst = max(worst, abs(swap_test_protocol(rho, om).expectation
                                   - direct_protocol(rho, om).expectation))
        om = random_angles(n, g)
        mixed = max(mixed, abs(swap_test_protocol(maximally_mixed(n), om).expectation - 1 / n))
        for shots in (1_000, 10_000, 100_000):
            res = swap_test_protocol(random_density_matrix(n, g), om, shots=shots, seed=n * shots)
            shot_ratio = max(shot_ratio, abs(res.empirical_estimate - res.expectation)
                             * math.sqrt(shots) / 5)
    ok = worst <= 1e-12 and mixed <= 1e-12 and shot_ratio <= 1
    return ok, f"|swap - direct| {worst:.1e}, mixed error {mixed:.1e}, " \
               f"worst shot error {shot_ratio:.2f} x 5/sqrt(shots)"


def criterion_9():
    g = np.random.default_rng(9)
    worst = 0.0
    alphas = []
    for n in range(2, 5):
        for i in range(100):
            params = SWParams(n, (-1.0, 0.0, 0.5)[i % 3])
            rho = random_density_matrix(n, g)
            om = random_angles(n, g)
            res = lcu_protocol(rho, om, params)
            worst = max(worst, abs(res.expectation - quasiprob(rho, om, params)))
            alphas.append(res.alpha)
    weighted = lcu_decomposition(sw_kernel(OmegaAngles.ground(2), SWParams(2, 0.0)), "paper-weights")
    ok = worst <= 1e-10 and weighted.residual > 0
    return ok, f"max |LCU - W| {worst:.1e} (<= 1e-10), alpha in [{min(alphas):.3f}, " \
               f"{max(alphas):.3f}], generator-weight residual {weighted.residual:.4f} (reported)"


def criterion_10():
    params = SWParams(3, 0.0)
    eig = np.linalg.eigvalsh(sw_kernel(OmegaAngles.ground(3), params).matrix).min()
    g = np.random.default_rng(10)
    kernel = sw_kernel(OmegaAngles.ground(3), params).matrix
    search = min(np.vdot(psi, kernel @ psi).real
                 for psi in (random_pure_state(3, g) for _ in range(10_000)))
    gaps = {n: w_min_physical(SWParams(n, 0.0)) - w0_min_paper(SWParams(n, 0.0))
            for n in range(2, 11)}
    ok = (abs(w_min_physical(params) + 1 / 3) <= 1e-12 and abs(eig + 1 / 3) <= 1e-12
          and abs(search + 1 / 3) <= 1e-3 and search >= -1 / 3 - 1e-12
          and w0_min_paper(params) == pytest.approx(-1, abs=1e-15) and abs(gaps[2]) <= 1e-15)
    table = ", ".join(f"N={n}: {v:.4f}" for n, v in gaps.items())
    return ok, f"eigenvalue {eig:.12f}, search {search:.6f}, anti-parallel bound " \
               f"{w0_min_paper(params):.1f}; gap at s=0 {table}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def _line(k, ok, detail):
    return f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("k", range(1, len(CRITERIA) + 1))
def test_criterion(k):
    ok, detail = CRITERIA[k - 1]()
    RESULTS[k] = _line(k, ok, detail)
    print(RESULTS[k])
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for k, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        failed += not ok
        print(_line(k, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
