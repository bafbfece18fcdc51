"""Acceptance criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion.  Criterion 4 asserts the robustness-separation factor of 5 from
the build contract verbatim; with the exact two-qubit concurrence standing
in for the experimentally measured lower bound, the achievable factor at
tJ = 10 is about 3.7, so that single check is expected to fail (see the
analysis in its docstring).
"""

import time

import numpy as np
import pytest

import sepcert as sc
from sepcert.momentmat import SchemeKind
from sepcert.seporacle import make_rng

from oracles import entangled_state_dataset, random_state_dataset


def _report(num, ok, detail):
    print(f"\n[criterion {num:02d}] {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


@pytest.fixture(scope="module")
def quench64():
    amps = sc.quench_amplitudes(64, 10.0)
    ds = sc.quench_dataset(amps)
    t0 = time.time()
    sol, prob = sc.certify(ds)
    elapsed = time.time() - t0
    assert sol.status is sc.SdpStatus.OPTIMAL
    return {"amps": amps, "ds": ds, "sol": sol, "prob": prob, "solve_seconds": elapsed}


def test_c01_werner_threshold():
    t0 = time.time()
    results = {}
    for lam in np.arange(0.0, 1.0 + 1e-9, 0.05):
        sol, _ = sc.certify(sc.werner_dataset(lam))
        assert sol.status is sc.SdpStatus.OPTIMAL
        results[round(float(lam), 2)] = sol
    elapsed = time.time() - t0
    for lam, sol in results.items():
        assert sol.entangled == (lam < 2.0 / 3.0), (lam, sol.lambda_star)
    lam0 = results[0.0].lambda_star
    assert abs(lam0 - 2.0 / 3.0) <= 1e-6
    assert elapsed < 1.0, f"werner grid took {elapsed:.2f}s"
    _report(1, True, f"entangled iff lam < 2/3 on 21-point grid; "
                     f"lambda*(0) = {lam0:.9f}; {elapsed:.2f}s")


def test_c02_two_qubit_analytic_equivalence():
    t0 = time.time()
    grid = sorted(set(np.linspace(-3.0, 3.0, 41)) | {-1.0, 1.0})
    worst = 0.0
    for c in grid:
        sol, _ = sc.certify(sc.sum_triple_dataset(c))
        assert sol.entangled == (abs(c) > 1.0 + 1e-9), (c, sol.lambda_star)
        expect = max(0.0, 1.0 - 1.0 / abs(c)) if c != 0 else 0.0
        worst = max(worst, abs(sol.lambda_star - expect))
    elapsed = time.time() - t0
    assert worst <= 1e-6
    assert elapsed < 5.0, f"two-qubit grid took {elapsed:.2f}s"
    _report(2, True, f"verdict matches |c| > 1 on {len(grid)} points, "
                     f"max |lambda* - analytic| = {worst:.2e}; {elapsed:.2f}s")


def test_c03_duality_certificate_suite(quench64):
    corpus = [
        ("werner lam=0", sc.werner_dataset(0.0)),
        ("werner lam=0.3", sc.werner_dataset(0.3)),
        ("two-qubit c=2.5", sc.sum_triple_dataset(2.5)),
        ("two-qubit c=-2", sc.sum_triple_dataset(-2.0)),
        ("quench n=16 t=4", sc.quench_dataset(sc.quench_amplitudes(16, 4.0))),
        ("heisenberg n=8 T=0.5",
         sc.thermal_dataset_ed(sc.ModelSpec(kind="heisenberg", n=8), 0.5)),
        ("ising n=8 g=1 T=0.05",
         sc.thermal_dataset_ed(sc.ModelSpec(kind="ising", n=8, g=1.0), 0.05)),
        ("random 3-qubit state", entangled_state_dataset(3, 1234)[0]),
    ]
    solved = [(name, *sc.certify(ds)) for name, ds in corpus]
    solved.append(("quench n=64 t=10", quench64["sol"], quench64["prob"]))
    worst_gap = worst_wc = worst_feas = 0.0
    for name, sol, prob in solved:
        assert sol.entangled, f"{name} should be entangled"
        worst_gap = max(worst_gap, sol.duality_gap)
        worst_wc = max(worst_wc, abs(sol.w_dot_c - 1.0))
        slack = prob.dual_slack_blocks(sol.w_data, sol.w_pauli)
        resid = max(0.0, -float(slack[0][0, 0]),
                    -float(np.linalg.eigvalsh(0.5 * (slack[1] + slack[1].T))[0]))
        worst_feas = max(worst_feas, resid)
        assert sol.duality_gap <= 1e-6, name
        assert abs(sol.w_dot_c - 1.0) <= 1e-6, name
        assert resid <= 1e-8, (name, resid)
    _report(3, True, f"{len(solved)} entangled instances: max gap {worst_gap:.2e}, "
                     f"max |w.C-1| {worst_wc:.2e}, max dual residual {worst_feas:.2e}")


def test_c04_quench_robustness_separation(quench64):
    """Spec-mandated factor-5 separation between the SDP robustness and the
    exact-concurrence robustness at n=64, tJ=10.

    The paper's order-of-magnitude figure compares against the measured
    concurrence lower bound, which decays like sqrt(noise) once the
    double-occupancy term turns on; the exact two-qubit concurrence mandated
    here is much more robust (0.048 vs about 0.02), leaving a separation of
    about 3.7.  Both quantities are verified independently (exact-state
    correlators, closed-form X-state robustness), so the factor-5 bound is
    recorded as unattainable under the substituted definition.
    """
    t0 = time.time()
    conc = sc.concurrence_noise_robustness(quench64["amps"])
    elapsed = quench64["solve_seconds"] + (time.time() - t0)
    lam = quench64["sol"].lambda_star
    ratio = lam / conc
    assert elapsed <= 300.0, f"time point took {elapsed:.1f}s"
    ok = ratio >= 5.0
    _report(4, ok, f"lambda*={lam:.6f}, concurrence robustness={conc:.6f}, "
                   f"ratio={ratio:.2f} (required >= 5); {elapsed:.1f}s")


def test_c05_pt_invariance():
    rng = make_rng(2024)
    worst = 0.0
    for trial in range(20):
        n = int(rng.integers(2, 6))
        ds = random_state_dataset(n, rng)
        if rng.random() < 0.4:  # partial datasets exercise free-variable paths
            keep_two = {k: v for k, v in ds.two_items() if rng.random() > 0.3}
            ds = sc.CorrelationDataset(n, ds.one_body, keep_two)
        subset = {int(s) for s in
                  rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)}
        a, _ = sc.certify(ds)
        b, _ = sc.certify(ds.partial_transpose(subset))
        worst = max(worst, abs(a.lambda_star - b.lambda_star))
    assert worst <= 1e-6
    _report(5, True, f"20 random datasets/subsets: max |lambda* - lambda*_PT| = {worst:.2e}")


def test_c06_separable_side_soundness():
    t0 = time.time()
    rng = make_rng(606)
    total = 10000
    worst_lambda = 0.0
    worst_margins = {"phase": np.inf, "structure": np.inf, "bipartite": np.inf,
                     "squeezing": -np.inf, "cmc": np.inf}
    for trial in range(total):
        n = 4 if trial % 2 == 0 else 8
        state = sc.random_product_state(n, rng)
        ds = sc.dataset_of(state)
        sol, _ = sc.certify(ds)
        worst_lambda = max(worst_lambda, sol.lambda_star)
        assert sol.lambda_star <= 1e-7, (trial, sol.lambda_star)

        phase_vals = [sc.phase_witness_value(ds).value]
        for _ in range(2):
            phases = rng.uniform(-np.pi, np.pi, size=(n, 3))
            phase_vals.append(sc.phase_witness_value(ds, phases).value)
        worst_margins["phase"] = min(worst_margins["phase"],
                                     min(phase_vals) + n)
        assert min(phase_vals) >= -n - 1e-9

        sw = sc.optimal_structure_witness(ds, sc.commensurate_grid(n)).value
        worst_margins["structure"] = min(worst_margins["structure"], sw - 2.0)
        assert sw >= 2.0 - 1e-9

        bip_vals = [sc.bipartite_witness_value(ds).value]
        bip_vals.append(sc.bipartite_witness_value(
            ds, rng.uniform(-np.pi, np.pi, size=(n, 3))).value)
        worst_margins["bipartite"] = min(worst_margins["bipartite"],
                                         min(bip_vals) + n / 2.0)
        assert min(bip_vals) >= -n / 2.0 - 1e-9

        sq = sc.spin_squeezing_check(ds.collective_moments())
        worst_margins["squeezing"] = max(worst_margins["squeezing"],
                                         max(r.lhs for r in sq))
        assert all(r.lhs <= 1.0 + 1e-9 for r in sq)

        sub = sc.CorrelationDataset(
            3,
            {k: v for k, v in ds.one_items() if k[0] < 3},
            {k: v for k, v in ds.two_items() if k[1] < 3})
        cmc = sc.cmc_check(sub)
        worst_margins["cmc"] = min(worst_margins["cmc"], cmc.margin)
        assert cmc.margin >= -1e-9, (trial, cmc.margin)
    elapsed = time.time() - t0
    assert elapsed <= 600.0, f"separable suite took {elapsed:.0f}s"
    _report(6, True, f"{total} product datasets: max lambda* {worst_lambda:.2e}, "
                     f"min family margins {{phase: {worst_margins['phase']:.3f}, "
                     f"structure: {worst_margins['structure']:.3f}, "
                     f"bipartite: {worst_margins['bipartite']:.3f}, "
                     f"squeezing lhs max: {worst_margins['squeezing']:.3f}, "
                     f"cmc: {worst_margins['cmc']:.3f}}}; {elapsed:.0f}s")


def test_c07_kernel_identity():
    from sepcert.witnesslab import bipartite_kernel_closed_form
    worst = 0.0
    count = 0
    for n in (8, 16, 64):
        kern = sc.bipartite_kernel(n)
        for r in range(-n + 1, n):
            if r % 2 == 0:
                continue
            worst = max(worst, abs(kern.k(r) - bipartite_kernel_closed_form(n, r)))
            count += 1
    assert worst <= 1e-12
    _report(7, True, f"closed form vs direct sum on {count} odd offsets: "
                     f"max deviation {worst:.2e}")


def test_c08_hierarchy_monotonicity():
    worst = np.inf
    for seed in range(20):
        ds, sol1, _ = entangled_state_dataset(3, 8000 + 17 * seed)
        sol2, _ = sc.certify(ds, level=2)
        assert sol2.status is sc.SdpStatus.OPTIMAL
        gain = sol2.lambda_star - sol1.lambda_star
        worst = min(worst, gain)
        assert gain >= -1e-7, (seed, gain)
    _report(8, True, f"20 entangled 3-qubit datasets: min(lambda*_2 - lambda*_1) "
                     f"= {worst:.2e} >= -1e-7")


def test_c09_implication_suites():
    rng = make_rng(909)
    worst_sq = -np.inf
    worst_cmc = np.inf
    for trial in range(100):
        mix = sc.random_separable_mixture(3, int(rng.integers(1, 7)), rng)
        ds = sc.dataset_of(mix)
        sol, _ = sc.certify(ds)
        assert sol.lambda_star <= 1e-7
        sq = sc.spin_squeezing_check(ds.collective_moments())
        worst_sq = max(worst_sq, max(r.lhs for r in sq))
        assert all(r.lhs <= 1.0 + 1e-8 for r in sq)
        cmc = sc.cmc_check(ds)
        worst_cmc = min(worst_cmc, cmc.margin)
        assert cmc.margin >= -1e-8
    _report(9, True, f"100 feasible datasets: max squeezing lhs {worst_sq:.4f} <= 1+1e-8, "
                     f"min cmc margin {worst_cmc:.4f} >= -1e-8")


def test_c10_small_n_thermal_checks():
    t0 = time.time()
    spec = sc.ModelSpec(kind="heisenberg", n=8)
    cold = sc.thermal_dataset_ed(spec, 0.5)
    hot = sc.thermal_dataset_ed(spec, 5.0)
    s_cold = sum(sc.structure_factor(cold, 0.0, a).value for a in sc.AXES)
    s_hot = sum(sc.structure_factor(hot, 0.0, a).value for a in sc.AXES)
    assert s_cold < 2.0 < s_hot, (s_cold, s_hot)
    sol_cold, _ = sc.certify(cold)
    assert sol_cold.entangled  # SDP detects wherever the family witness does
    ising = sc.thermal_dataset_ed(sc.ModelSpec(kind="ising", n=8, g=1.0), 0.05)
    opt = sc.optimal_structure_witness(ising, sc.commensurate_grid(8))
    assert (abs(opt.k_x - np.pi) <= 1e-12 and abs(opt.k_y) <= 1e-12
            and abs(opt.k_z - np.pi) <= 1e-12), (opt.k_x, opt.k_y, opt.k_z)
    elapsed = time.time() - t0
    assert elapsed <= 120.0
    _report(10, True, f"heisenberg n=8: sum S_0 = {s_cold:.3f} (T=0.5) "
                      f"/ {s_hot:.3f} (T=5), lambda*(T=0.5) = "
                      f"{sol_cold.lambda_star:.4f}; ising argmins (pi, 0, pi); "
                      f"{elapsed:.0f}s")


def test_c11_bound_tightness(quench64):
    exact_corpus = []
    for name, ds in [("werner lam=0", sc.werner_dataset(0.0)),
                     ("werner lam=0.3", sc.werner_dataset(0.3)),
                     ("two-qubit c=-3", sc.sum_triple_dataset(-3.0)),
                     ("two-qubit c=-2", sc.sum_triple_dataset(-2.0)),
                     ("two-qubit c=2.5", sc.sum_triple_dataset(2.5))]:
        sol, prob = sc.certify(ds)
        exact_corpus.append((name, ds.n_sites, sol, prob))
    unmatched_exact = []
    for name, n, sol, prob in exact_corpus:
        wit = sc.extract_witness(sol, prob)
        best, _ = sc.max_over_product_states(wit, n, restarts=1000, seed=11)
        if abs(best - (1.0 - sol.lambda_star)) > 1e-4:
            unmatched_exact.append((name, best, 1.0 - sol.lambda_star))
    assert not unmatched_exact, unmatched_exact

    quench_corpus = [("quench n=64 t=10", quench64["sol"], quench64["prob"])]
    sol6, prob6 = sc.certify(sc.quench_dataset(sc.quench_amplitudes(64, 6.0)))
    quench_corpus.append(("quench n=64 t=6", sol6, prob6))
    unmatched_quench = []
    gaps = []
    for name, sol, prob in quench_corpus:
        wit = sc.extract_witness(sol, prob)
        best, _ = sc.max_over_product_states(wit, 64, restarts=1000, seed=11)
        gaps.append(abs(best - (1.0 - sol.lambda_star)))
        if gaps[-1] > 1e-4:
            unmatched_quench.append((name, best, 1.0 - sol.lambda_star))
    allowed = int(0.05 * len(quench_corpus))
    assert len(unmatched_quench) <= allowed, unmatched_quench
    _report(11, True, f"{len(exact_corpus)} exact-corpus witnesses matched to 1e-4; "
                      f"quench witnesses matched with max gap {max(gaps):.2e} "
                      f"({len(unmatched_quench)}/{len(quench_corpus)} unmatched, "
                      f"allowed {allowed})")
