"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import itertools
import json
import math
import time

import numpy as np
import pytest

import corpus
from mixcover import io
from mixcover.bench import fit_slope, run_ladder
from mixcover.checks import check_solution, verify_infeasibility, verify_lower_bound
from mixcover.cli import main
from mixcover.covering import solve_covering
from mixcover.facility import best_star, check_top_up, hochbaum_expand, solve_fl_parallel, solve_fl_sequential, top_up
from mixcover.generators import random_facility
from mixcover.instances import normalize
from mixcover.mpc import solve_mpc, solve_sequential
from mixcover.oracle import covering_optimum, covering_optimum_by_vertices
from mixcover.report import InfeasibilityCertificate

N_MIXED = len(corpus.MIXED_SPECS)
FL_CORPUS = [("tiny", k) for k in range(30)] + [("fl", k) for k in range(40)]


def _fl(kind, k):
    return corpus.tiny_fl(k) if kind == "tiny" else corpus.fl(k)


def _outcome(record_property, crit, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {crit}: {detail}"
    print(line)
    record_property("detail", detail)
    assert ok, line


@pytest.fixture(scope="module")
def mixed_runs():
    """Every corpus instance solved by the three mpc solvers at both eps values."""
    runs = {}
    t0 = time.perf_counter()
    for eps in (0.1, 0.03):
        for algo in ("reference", "sequential", "parallel"):
            for k in range(N_MIXED):
                inst, _ = corpus.mixed(k)
                runs[algo, eps, k] = solve_mpc(inst, eps, algo=algo)
    return runs, time.perf_counter() - t0


def test_criterion_01_mixed_feasibility(mixed_runs, record_property):
    runs, elapsed = mixed_runs
    bad, worst_c, worst_p = [], math.inf, 0.0
    for (algo, eps, k), rep in runs.items():
        inst, _ = corpus.mixed(k)
        fr = check_solution(inst, rep.x, tolerance=1e-9, ratio_bound=5 * eps)
        worst_c = min(worst_c, fr.min_cover)
        worst_p = max(worst_p, fr.max_pack / (1 + 5 * eps))
        if not (rep.solved and fr.passed):
            bad.append((algo, eps, k))
    largest = max(corpus.mixed(k)[0].nnz for k in range(N_MIXED))
    ok = not bad and elapsed < 600
    _outcome(record_property, 1, ok,
             f"{len(runs) - len(bad)}/{len(runs)} runs feasible (largest N={largest}), min Cx={worst_c:.12f}, "
             f"max Px/(1+5eps)={worst_p:.4f}, solve time {elapsed:.0f}s")


def test_criterion_02_estimate_invariant(record_property):
    ks = corpus.mixed_small(2000)
    viol = boundary = 0
    for eps in (0.1, 0.03):
        for k in ks:
            rep = solve_sequential(corpus.mixed(k)[0], eps, debug=True)
            viol += rep.counters["invariant_violations"]
            boundary += rep.counters["run_boundary_violations"]
    _outcome(record_property, 2, viol == 0 and boundary == 0,
             f"{2 * len(ks)} instrumented runs with N<=2000: {viol} bracket violations, "
             f"{boundary} run-boundary mismatches")


def test_criterion_03_group_lag(record_property):
    ks = corpus.mixed_small(500)
    viol = 0
    for eps in (0.1, 0.03):
        for k in ks:
            viol += solve_sequential(corpus.mixed(k)[0], eps, debug=True).counters["group_lag_violations"]
    _outcome(record_property, 3, viol == 0, f"{2 * len(ks)} instrumented runs with N<=500: {viol} lag violations")


def test_criterion_04_phase_bounds(mixed_runs, record_property):
    runs, _ = mixed_runs
    worst = {}

    def note(name, count, U):
        worst[name] = max(worst.get(name, 0.0), count / U)

    for (algo, eps, k), rep in runs.items():
        if algo in ("reference", "sequential"):
            note("mpc", rep.counters["scalings"], rep.U)
        else:
            note("parallel", rep.counters["phases"], rep.U)
    for eps in (0.1, 0.03):
        for k in range(50):
            rep = solve_covering(corpus.cover(k), eps)
            note("covering", rep.counters["scalings"], rep.U)
        for kind, k in FL_CORPUS:
            rep = solve_fl_parallel(_fl(kind, k), eps)
            note("fl-parallel", rep.counters["phases"], rep.U)
    ok = all(v <= 4 for v in worst.values())
    _outcome(record_property, 4, ok, "max scalings/U: " + ", ".join(f"{k}={v:.3f}" for k, v in worst.items()))


def test_criterion_05_near_linear_work(record_property):
    sizes = [2 ** e for e in range(12, 18)]
    rows = run_ladder("mpc", sizes, [0.1, 0.05], ["sequential"], seed=0)
    assert all(r.status == "solved" for r in rows)
    slope = fit_slope([r for r in rows if r.eps == 0.1])
    work = {(r.N, r.eps): r.work for r in rows}
    ratios = [work[N, 0.05] / work[N, 0.1] for N in sizes]
    ok = 0.85 <= slope <= 1.2 and all(3 <= q <= 6 for q in ratios)
    _outcome(record_property, 5, ok,
             f"slope={slope:.3f} over N=2^12..2^17, eps-halving work ratios {min(ratios):.2f}..{max(ratios):.2f}")


def test_criterion_06_covering_certificate(record_property):
    worst, runs, bad_lb, bad_cert = 0.0, 0, 0, 0
    for eps in (0.1, 0.05, 0.03):
        for k in range(50):
            inst = corpus.cover(k)
            rep = solve_covering(inst, eps)
            runs += 1
            worst = max(worst, rep.ratio / (1 + 5 * eps))
            bad_cert += not (rep.solved and check_solution(inst, rep.x).passed and verify_lower_bound(inst, rep.certificate))
        for k in range(60):
            inst = corpus.tiny_cover(k)
            rep = solve_covering(inst, eps)
            runs += 1
            worst = max(worst, rep.ratio / (1 + 5 * eps))
            opt = float(covering_optimum_by_vertices(inst.A, inst.w))
            bad_lb += rep.lower_bound > opt * (1 + 1e-9)
            bad_cert += not (rep.solved and verify_lower_bound(inst, rep.certificate))
    ok = worst <= 1 and bad_lb == 0 and bad_cert == 0
    _outcome(record_property, 6, ok,
             f"{runs} runs, max (cost/LB)/(1+5eps)={worst:.4f}, {bad_lb} tiny bounds above optimum, "
             f"{bad_cert} failed checks")


def test_criterion_07_fl_vs_expansion_oracle(record_property):
    eps, worst, bad = 0.05, 0.0, 0
    for k in range(30):
        inst = corpus.tiny_fl(k)
        cov = hochbaum_expand(inst)
        opt = float(covering_optimum(cov.A, cov.w)[0])
        for solve in (solve_fl_sequential, solve_fl_parallel):
            rep = solve(inst, eps)
            cover_ok = np.all(inst.coverage(rep.x) >= 1 - 1e-9) and np.all(rep.x <= rep.y[inst.facility] + 1e-12)
            bad += not (rep.solved and cover_ok and rep.cost <= (1 + 6 * eps) * opt * (1 + 1e-12))
            worst = max(worst, rep.cost / opt if opt > 0 else 1.0)
    _outcome(record_property, 7, bad == 0, f"60 runs, max cost/opt={worst:.4f} (bound {1 + 6 * eps:.2f}), {bad} failures")


def test_criterion_08_top_up(record_property):
    calls = viol = nonidem = 0
    for seed in range(500):
        rng = np.random.default_rng(seed)
        inst = random_facility(int(rng.integers(1, 8)), int(rng.integers(1, 12)), seed=seed,
                               zero_cost_prob=0.1 if seed % 3 == 0 else 0.0)
        y = rng.uniform(0, 3, size=inst.n_facilities)
        x = y[inst.facility] * rng.uniform(0, 1, size=inst.nnz) * (rng.random(inst.nnz) < 0.7)
        eps = float(rng.choice([0.01, 0.05, 0.1]))
        U, lam0 = float(rng.uniform(2, 60)), float(rng.uniform(0.05, 20))
        top_up(inst, x, y, lam0, eps, U)
        calls += 1
        viol += check_top_up(inst, x, y, lam0, eps, U)
        again = x.copy()
        top_up(inst, again, y, lam0, eps, U)
        nonidem += not np.array_equal(again, x)
    in_solver = 0
    for kind, k in FL_CORPUS:
        rep = solve_fl_parallel(_fl(kind, k), 0.1)
        in_solver += rep.counters["phases"]
        viol += rep.counters["topup_violations"]
    _outcome(record_property, 8, viol == 0 and nonidem == 0,
             f"{calls} direct calls and {in_solver} in-solver calls: {viol} postcondition violations, "
             f"{nonidem} non-idempotent")


def test_criterion_09_infeasibility_certificates(tmp_path, record_property, capsys):
    ok_runs, total = 0, 0
    for seed in range(50):
        path = tmp_path / f"inf{seed}.json"
        io.save_instance(corpus.infeasible(seed), path)
        inst = normalize(io.load_instance(path))
        for algo in ("reference", "sequential", "parallel"):
            out = tmp_path / f"sol{seed}{algo}.json"
            code = main(["solve-mpc", "--input", str(path), "--algo", algo, "--eps", "0.1", "--out", str(out)])
            total += 1
            if code != 2:
                continue
            cert = InfeasibilityCertificate.from_json(json.loads(out.read_text())["certificate"])
            ok_runs += verify_infeasibility(inst, cert)
    capsys.readouterr()
    _outcome(record_property, 9, ok_runs == total, f"{ok_runs}/{total} runs (50 seeds x 3 solvers) exit 2 with a verified certificate")


def _solution_bytes(rep, inst):
    return io.dumps(io.solution_to_json(rep, inst)).encode()


def test_criterion_10_parallel_determinism(record_property):
    differ, checked = [], 0
    for eps in (0.1,):
        for k in range(N_MIXED):
            inst, _ = corpus.mixed(k)
            files = {t: _solution_bytes(solve_mpc(inst, eps, algo="parallel", threads=t), inst) for t in (1, 2, 8)}
            checked += 1
            if len(set(files.values())) != 1:
                differ.append(("mpc", k))
    for kind, k in FL_CORPUS:
        inst = _fl(kind, k)
        files = {t: _solution_bytes(solve_fl_parallel(inst, 0.1, threads=t), inst) for t in (1, 2, 8)}
        checked += 1
        if len(set(files.values())) != 1:
            differ.append((kind, k))
    _outcome(record_property, 10, not differ,
             f"{checked} instances at threads 1/2/8: {len(differ)} with differing solution files")


def _brute_min_price(inst, j, Ax, eps, U):
    idx = inst.by_facility[inst.fac_ptr[j]:inst.fac_ptr[j + 1]]
    a = np.where(Ax < U, (1 - eps) ** Ax, 0.0)
    best = math.inf
    for r in range(1, len(idx) + 1):
        for S in itertools.combinations(idx, r):
            den = sum(a[inst.client[p]] for p in S)
            if den > 0:
                best = min(best, (inst.open_cost[j] + sum(inst.cost[p] for p in S)) / den)
    return best


def test_criterion_11_best_star(record_property):
    rng = np.random.default_rng(11)
    checks = disagree = 0
    for t in range(300):
        m = int(rng.integers(1, 11))
        nf = int(rng.integers(1, 4))
        inst = random_facility(nf, m, int(rng.integers(m, nf * m + 1)), seed=t, zero_cost_prob=0.1)
        eps = float(rng.choice([0.03, 0.1]))
        U = 20.0
        Ax = np.where(rng.random(m) < 0.2, U, rng.uniform(0, U, size=m))
        for j in range(nf):
            brute = _brute_min_price(inst, j, Ax, eps, U)
            base = brute if np.isfinite(brute) else 5.0
            for T in np.concatenate([base * rng.uniform(0.3, 3.0, size=4), base * np.array([1 - 1e-6, 1 + 1e-6])]):
                _, price = best_star(inst, j, float(T), Ax, eps, U)
                checks += 1
                disagree += (price <= T) != (brute <= T)
    _outcome(record_property, 11, disagree == 0, f"{checks} threshold decisions, {disagree} disagreements")
