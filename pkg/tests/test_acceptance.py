"""Desk-scale acceptance criteria, one test per criterion.

Each test records a one-line PASS/FAIL verdict with its measured figures;
the lines are printed in the terminal summary of every pytest run.
"""

import math
import time

import numpy as np
from hypothesis import given, settings, strategies as st

from casimirlab import certifier as ct
from casimirlab import cutoffs as co
from casimirlab import heat_kernel as hk
from casimirlab import reference_models as rm
from casimirlab import regularization as reg
from casimirlab import spectra
from casimirlab.certifier import BodyGeometry, Configuration
from casimirlab.cutoffs import CutoffSpec

from conftest import piston_pair

VERDICTS = {}
ERFC = CutoffSpec.erfc()
PISTON_GRID = np.geomspace(10.0, 400.0, 16)


def verdict(n, ok, detail):
    VERDICTS[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, VERDICTS[n]


def zeta_piston_energy(a, L):
    return -(math.pi / 24) * (1 / a + 1 / (L - a) - 4 / L)


def test_criterion_1_piston_energy():
    start = time.perf_counter()
    moved, centred = piston_pair(1.0, 10.0)
    res = reg.extrapolate_finite_part(reg.difference_sweep(moved, centred, ERFC, PISTON_GRID), 1)
    elapsed = time.perf_counter() - start
    oracle = zeta_piston_energy(1.0, 10.0)
    rel = abs(res.energy - oracle) / abs(oracle)
    verdict(1, res.converged and rel < 5e-3 and elapsed < 10,
            f"energy={res.energy:.10g} oracle={oracle:.10g} rel={rel:.2e} time={elapsed:.2f}s")


def test_criterion_2_identities():
    start = time.perf_counter()
    grid = np.geomspace(1e-2, 1e2, 20)
    lemma = max(reg.verify_lemma1(w, c) for w in grid for c in grid)
    erfc = max(reg.verify_erfc_identity(w, c) for w in grid for c in grid)
    elapsed = time.perf_counter() - start
    verdict(2, lemma < 1e-9 and erfc < 1e-9 and elapsed < 30,
            f"lemma1={lemma:.2e} erfc={erfc:.2e} time={elapsed:.2f}s")


def test_criterion_3_sdw_recovery():
    worst0 = worst_half = 0.0
    for L in (1.0, math.pi, 2 * math.pi):
        fit = hk.sdw_fit(spectra.interval_spectrum(L, "dirichlet", 4000), 1, 1)
        worst0 = max(worst0, abs(fit.coefficient(0) - L) / L)
        worst_half = max(worst_half,
                         abs(fit.coefficient(0.5) + math.sqrt(math.pi)) / math.sqrt(math.pi))
    periodic = max(abs(hk.sdw_fit(spectra.interval_spectrum(L, "periodic", 4000), 1, 1)
                       .coefficient(0.5)) for L in (1.0, math.pi, 2 * math.pi))
    verdict(3, worst0 < 1e-4 and worst_half < 1e-3 and periodic < 1e-6,
            f"a0 rel={worst0:.1e} a1/2 rel={worst_half:.1e} periodic a1/2={periodic:.1e}")


def test_criterion_4_log_coefficient_cutoff_independent():
    s = spectra.massive_spectrum(
        spectra.interval_spectrum(2 * math.pi, "periodic", 16000), 1.0)
    g = np.geomspace(10, 400, 20)
    fits = [hk.divergence_fit(reg.combination_sweep([(1.0, s)], c, g), 1)
            for c in (ERFC, CutoffSpec.exponential(), CutoffSpec.gaussian())]
    logs = [f.log_coefficient for f in fits]
    spread = max(abs(x - y) / max(abs(x), abs(y)) for x in logs for y in logs)
    power_spread = max(
        max(abs(f.power_coefficients[j]) for f in fits)
        / min(abs(f.power_coefficients[j]) for f in fits) - 1
        for j in range(2) if min(abs(f.power_coefficients[j]) for f in fits) > 0)
    verdict(4, spread < 0.02 and power_spread > 0.1,
            f"log coefficients={[round(x, 6) for x in logs]} spread={spread:.1e} "
            f"power spread={power_spread:.2f}")


def _body(volume=0.0, area=0.0, int_v=0.0):
    return BodyGeometry(volume=volume, surface_area=area, potential_integrals=(int_v, 0.0),
                        exact=True)


def _system(d, **kw):
    return Configuration((_body(**kw),), BodyGeometry.ir_box((100.0,) * d), dimension_d=d)


def _expected_term(d, slot):
    return "ln(Omega^2)" if slot == d + 1 else f"Omega^{d + 1 - slot}"


def _violations(rng):
    """Pairs of constructible spectra differing in exactly one slot, with
    the descriptor pair the certifier sees."""
    g1, g2 = np.geomspace(10, 400, 16), np.geomspace(10, 320, 12)
    for k in range(40):
        kind = k % 4
        if kind == 0:  # d=1 Dirichlet lengths: volume
            l1, l2 = rng.uniform(0.5, 2.0, 2)
            build = lambda ell: spectra.interval_spectrum(ell, "dirichlet",
                                                         int(6 * 400 * ell / math.pi) + 5)
            yield (build(l1), build(l2), 1, g1,
                   _system(1, volume=l1, area=2.0), _system(1, volume=l2, area=2.0))
        elif kind == 1:  # d=1 periodic masses: int V
            L = rng.uniform(1.0, 8.0)
            m1, m2 = rng.uniform(0.2, 3.0, 2)
            base = spectra.interval_spectrum(L, "periodic", int(6 * 400 * L / (2 * math.pi)) + 5)
            yield (spectra.massive_spectrum(base, m1), spectra.massive_spectrum(base, m2), 1, g1,
                   _system(1, volume=L, int_v=m1 * L), _system(1, volume=L, int_v=m2 * L))
        elif kind == 2:  # d=2 rectangles of equal perimeter: area
            half = rng.uniform(1.5, 3.0)
            x1, x2 = rng.uniform(0.5, half - 0.5, 2)
            rect = lambda x: spectra.box_spectrum((x, half - x), "dirichlet", 6 * 320 * 1.001)
            yield (rect(x1), rect(x2), 2, g2,
                   _system(2, volume=x1 * (half - x1), area=2 * half),
                   _system(2, volume=x2 * (half - x2), area=2 * half))
        else:  # d=2 rectangles of equal area: perimeter
            A = rng.uniform(0.5, 2.0)
            y1, y2 = rng.uniform(0.6, 1.6, 2) * math.sqrt(A)
            rect = lambda y: spectra.box_spectrum((y, A / y), "dirichlet", 6 * 320 * 1.001)
            yield (rect(y1), rect(y2), 2, g2,
                   _system(2, volume=A, area=2 * (y1 + A / y1)),
                   _system(2, volume=A, area=2 * (y2 + A / y2)))


def test_criterion_5_certifier_soundness_and_completeness():
    # (a) rigid motions and TE/TM-paired thin spheres certify
    box = BodyGeometry.ir_box((20.0, 20.0, 20.0))
    two = Configuration((BodyGeometry.sphere(1.0, thin_shell=False),
                         BodyGeometry.box((1.0, 2.0, 0.5), position=(5.0, 0.0, 0.0))), box)
    a_ok = all(ct.certify_finiteness(two, ct.rigid_motion(two, i, (0.3, -1.0, 2.0))).certified
               for i in range(2))
    paired = lambda r: Configuration((BodyGeometry.sphere(r),), box, te_tm_paired=True)
    a_ok &= all(ct.certify_finiteness(paired(1.0), paired(r)).certified for r in (0.5, 2.0, 5.0))

    # (b) certified pairs with spectra: the difference stops moving once
    # Omega is doubled
    worst_b = 0.0
    for a in (1.0, 2.5, 4.0):
        walls = lambda x: Configuration((BodyGeometry.plate(1.0, position=(x,)),),
                                        BodyGeometry.ir_box((10.0,)), dimension_d=1)
        assert ct.certify_finiteness(walls(a), walls(5.0)).certified
        moved, centred = piston_pair(a, 10.0, omega_top=6 * 800 + 10)
        for m2 in (0.0, 1.0):
            sa = spectra.massive_spectrum(moved, m2) if m2 else moved
            sb = spectra.massive_spectrum(centred, m2) if m2 else centred
            v = reg.difference_sweep(sa, sb, ERFC, np.array([400.0, 800.0])).values
            worst_b = max(worst_b, abs(v[1] - v[0]) / abs(v[0]))

    # (c) single-slot violations: the certifier names the slot and the fit
    # finds the matching divergent term
    rng = np.random.default_rng(20240601)
    hits = agree = 0
    for sa, sb, d, grid, ca, cb in _violations(rng):
        cert = ct.certify_finiteness(ca, cb)
        bad = [i for i in cert.required_slots if not cert.delta_slots[i].all_zero]
        if len(bad) != 1:
            continue
        agree += 1
        fit = hk.divergence_fit(reg.difference_sweep(sa, sb, ERFC, grid), d)
        hits += fit.dominant_term(grid[-1]) == _expected_term(d, bad[0])
    rate = hits / 40
    verdict(5, a_ok and worst_b < 1e-4 and agree == 40 and rate >= 0.95,
            f"(a)={'ok' if a_ok else 'fail'} (b) max rel change={worst_b:.1e} "
            f"(c) {hits}/40 dominant terms matched")


def test_criterion_6_post_inversion():
    exact = all(co.post_invert(co.rational_transform(), z, n) == 1.0
                for n in range(1, 61) for z in (0.25, 1.0, 4.0))
    g = co.rational_transform(shift=1.0)
    errs = [abs(co.post_invert(g, 1.0, n) - math.exp(-1)) / math.exp(-1) for n in (10, 20, 40)]
    trips = {c.name: co.recover_weight(c, n=40).info["roundtrip_error"]
             for c in (ERFC, CutoffSpec.exponential(), CutoffSpec.gaussian())}
    ok = exact and errs[2] < 0.05 and errs[0] > errs[1] > errs[2] and max(trips.values()) < 0.02
    verdict(6, ok, f"1/s exact={exact} 1/(s+1) rel errs={[f'{e:.3%}' for e in errs]} "
            f"round trips={ {k: f'{v:.2%}' for k, v in trips.items()} }")


CS_FAILURES = []
CS_CHECKED = []


@settings(max_examples=500, deadline=None, derandomize=True, database=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=16))
def _cauchy_schwarz(values):
    edges = np.linspace(0.0, 1.0, len(values) + 1)
    avg = rm.average_potential(rm.piecewise_constant(edges, values), 1.0, 64 * len(values))
    CS_CHECKED.append(values)
    if avg.v2_bar - avg.v_bar ** 2 < 0:
        CS_FAILURES.append(values)


def test_criterion_7_reference_models():
    _cauchy_schwarz()
    cs_ok = not CS_FAILURES and len(CS_CHECKED) >= 500

    rng = np.random.default_rng(7)
    worst_slot = 0.0
    for _ in range(20):
        c = rng.normal(size=4)
        V = lambda x, y, z: 2 + c[0] * np.sin(x) + c[1] * np.cos(2 * y) + c[2] * x * z + c[3] * y
        avg = rm.average_potential(V, tuple(rng.uniform(0.5, 3.0, 3)), 64)
        cert = ct.combination_check(rm.target_slot_map(avg),
                                    rm.reference_slot_maps(avg, rm.solve_masses(avg)),
                                    [0.5, 0.5], tolerance=1e-12)
        worst_slot = max(worst_slot, max(abs(x) for s in cert.delta_slots.values()
                                         for x in s.differences))

    L = 2 * math.pi
    ratios = []
    for N in (512, 1024, 2048):
        spec = spectra.OperatorSpec1D(L, lambda x: np.sin(2 * math.pi * x / L) ** 2,
                                      spectra.BoundaryCondition.PERIODIC, N)
        a = spectra.schrodinger_spectrum_1d(spec, N // 4)
        ref = rm.reference_operator_1d(rm.average_on_grid(spec), L, N // 8 + 1, grid_points=N)
        g = reg.auto_omega_grid([a, ref], ERFC, decades=1.0, points=16)
        v = reg.difference_sweep(a, ref, ERFC, g).values
        ratios.append(np.max(np.abs(v)) / abs(v[len(v) // 2]))
    verdict(7, cs_ok and worst_slot <= 1e-12 and max(ratios) < 2,
            f"Cauchy-Schwarz violations={len(CS_FAILURES)}/{len(CS_CHECKED)} slot residual={worst_slot:.1e} "
            f"sup/midpoint={[round(float(r), 3) for r in ratios]}")


def test_criterion_8_resummation_consistency(piston):
    moved, centred = piston
    vals = {m: reg.resum_difference(moved, centred, m).value
            for m in ("erfc-extrapolate", "abel", "riesz:2")}
    spread = max(abs(x - y) / max(abs(x), abs(y)) for x in vals.values() for y in vals.values())
    verdict(8, spread < 0.01,
            f"{ {k: round(float(v), 9) for k, v in vals.items()} } spread={spread:.1e}")
