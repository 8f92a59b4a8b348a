"""End-to-end acceptance checks.

Every test records one PASS/FAIL line (printed in the terminal summary) and
then asserts on the same verdict, so a FAIL line always matches a failing
test. Runtime limits are part of each verdict.
"""
import csv
import math
import time
from decimal import ROUND_HALF_UP, Decimal

import numpy as np
import pytest
from scipy.stats import spearmanr

from wavecast import cli
from wavecast.analysis import fit_beta_curve, nmi_model, reg_inc_beta
from wavecast.compression import (
    CompressedSignal,
    compress,
    decompress,
    deserialize,
    measure_lossless,
    serialize,
)
from wavecast.data import SyntheticConfig, generate_synthetic
from wavecast.experiment import DEFAULT_RATES
from wavecast.forecasting import GbtModel, LagSpec, LinearModel, build_design, predict_direct, rollout
from wavecast.infometrics import ksg_mi, logit_rates, nmi_curve
from wavecast.wavelet import WAVELETS, dwt_single, filter_bank, wavedec, waverec

pytestmark = pytest.mark.slow

PREPARE = ["--synthetic-days", "30", "--min-days", "2.5", "--max-days", "5", "--seed", "0"]
RUN = [
    "--lag-thin", "1", "--past-lag-thin", "30", "--lead-thin", "5", "--gbt-lag-thin", "10",
    "--train-stride", "5", "--test-stride", "60",
    "--gbt-rounds", "30", "--gbt-depth", "3", "--gbt-learning-rate", "0.2", "--gbt-split", "hist",
]


def _signals(n, count, seed):
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    return [
        np.cumsum(rng.standard_normal(n)) + 5 * np.sin(2 * np.pi * t / rng.uniform(50, 500)) + rng.standard_normal(n)
        for _ in range(count)
    ]


# ---------------------------------------------------------------- 1-8, 12


def test_01_perfect_reconstruction(acceptance):
    start = time.perf_counter()
    worst = 0.0
    for w in WAVELETS:
        bank = filter_bank(w)
        for n in (64, 100, 1000, 7200):
            for x in _signals(n, 10, seed=n):
                worst = max(worst, np.max(np.abs(waverec(wavedec(x, bank)) - x)))
    elapsed = time.perf_counter() - start
    ok = acceptance(1, "perfect reconstruction", worst < 1e-9 and elapsed < 10,
                    f"max error {worst:.2e} (< 1e-9), {elapsed:.1f}s (< 10s)")
    assert ok


def test_02_vanishing_moments(acceptance):
    # monomials on a grid with ~filter-length samples per unit, so an
    # unannihilated moment shows up well above rounding noise
    start = time.perf_counter()
    worst, control = {}, {}
    for w in WAVELETS:
        bank = filter_bank(w)
        n = 8 * bank.filter_length
        t = (np.arange(n) - n / 2) / bank.filter_length
        margin = bank.filter_length
        for degree, out in ((bank.nd - 1, worst), (bank.nr - 1, control)):
            detail = dwt_single(t**degree, bank)[1]
            out[w] = float(np.max(np.abs(detail[margin:-margin])))
    elapsed = time.perf_counter() - start
    failing = [w for w, v in worst.items() if v >= 1e-9]
    ok = acceptance(2, "vanishing moments (degree nd-1)", not failing and elapsed < 5,
                    "max interior detail " + ", ".join(f"{w} {v:.1e}" for w, v in worst.items())
                    + f" (< 1e-9); at degree nr-1 max {max(control.values()):.1e}; {elapsed:.2f}s (< 5s)")
    assert ok, f"analysis high-pass does not annihilate degree nd-1 for {failing}"


def test_03_rate_exactness(acceptance):
    start = time.perf_counter()
    rates = (0.4, 0.6, 0.8, 0.9, 0.95, 0.99, 0.999)
    mismatches = []
    checked = 0
    for w in WAVELETS:
        for n in (1000, 7200, 14400):
            x = _signals(n, 1, seed=n)[0]
            for r in rates:
                cs = compress(x, w, r)
                total = len(wavedec(x, w).flatten())
                zeros = int((Decimal(str(r)) * n).quantize(Decimal(1), rounding=ROUND_HALF_UP))
                expected = total - min(max(total - zeros, 1), total)
                checked += 1
                if total - len(cs.indices) != expected:
                    mismatches.append((w, n, r))
    elapsed = time.perf_counter() - start
    ok = acceptance(3, "rate exactness", not mismatches and elapsed < 10,
                    f"{checked - len(mismatches)}/{checked} cells exact, {elapsed:.1f}s (< 10s)")
    assert ok, mismatches


def test_04_error_monotone_in_rate(acceptance):
    start = time.perf_counter()
    violations = 0
    for w in WAVELETS:
        for x in _signals(2000, 10, seed=4):
            errors = [np.linalg.norm(decompress(compress(x, w, r)) - x) for r in DEFAULT_RATES]
            violations += int(np.any(np.diff(errors) < 0))
    elapsed = time.perf_counter() - start
    ok = acceptance(4, "reconstruction error monotone in rate", violations == 0 and elapsed < 30,
                    f"{violations} non-monotone of 50 signals, {elapsed:.1f}s (< 30s)")
    assert ok


def test_05_mi_oracle(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    errors = {}
    for rho in (0.0, 0.5, 0.9):
        cov = [[1.0, rho], [rho, 1.0]]
        xy = rng.multivariate_normal([0.0, 0.0], cov, size=10000)
        truth = -0.5 * math.log(1 - rho**2)
        errors[rho] = ksg_mi(xy[:, 0], xy[:, 1], k=10).value - truth
    elapsed = time.perf_counter() - start
    worst = max(abs(e) for e in errors.values())
    ok = acceptance(5, "KSG Gaussian oracle", worst <= 0.05 and elapsed < 60,
                    "errors " + ", ".join(f"rho={r} {e:+.4f}" for r, e in errors.items())
                    + f" nats (|.| <= 0.05), {elapsed:.1f}s (< 60s)")
    assert ok


def test_06_nmi_endpoints_and_trend(acceptance):
    start = time.perf_counter()
    frames = generate_synthetic(SyntheticConfig(days=7), seed=0)
    assert len(frames) == 1
    y = frames[0].target
    rates = [0.0] + list(logit_rates())
    at_zero, at_max, rho = {}, {}, {}
    for w in WAVELETS:
        values = [p.nmi for p in nmi_curve(y, w, rates, k=10)]
        at_zero[w], at_max[w] = values[0], values[-1]
        rho[w] = spearmanr(rates, values).statistic
    elapsed = time.perf_counter() - start
    ok = (
        all(v == 1.0 for v in at_zero.values())
        and all(v < 0.2 for v in at_max.values())
        and all(r <= 0 for r in rho.values())
        and elapsed < 300
    )
    detail = (
        f"NMI(0)=1 for {sum(v == 1.0 for v in at_zero.values())}/5, "
        f"NMI({rates[-1]:.4g}) max {max(at_max.values()):.3f} (< 0.2), "
        f"Spearman max {max(rho.values()):.3f} (<= 0), {elapsed:.0f}s (< 300s)"
    )
    assert acceptance(6, "NMI endpoints and trend", ok, detail)


def test_07_incomplete_beta_and_fit(acceptance):
    start = time.perf_counter()
    xs = np.linspace(0.01, 0.99, 25)
    closed = max(
        max(abs(reg_inc_beta(x, 1, 1) - x) for x in xs),
        max(abs(reg_inc_beta(x, 2, 1) - x**2) for x in xs),
        max(abs(reg_inc_beta(0.5, a, a) - 0.5) for a in (0.5, 1, 2, 3.7, 10, 50)),
    )
    rates = logit_rates()
    fit = fit_beta_curve(list(zip(rates, nmi_model(rates, 2.0, 5.0))))
    fit_err = max(abs(fit.alpha - 2.0), abs(fit.beta - 5.0))
    elapsed = time.perf_counter() - start
    ok = closed < 1e-12 and fit_err < 1e-4 and elapsed < 5
    assert acceptance(7, "incomplete beta and curve fit", ok,
                      f"closed-form error {closed:.1e} (< 1e-12), fit ({fit.alpha:.6f}, {fit.beta:.6f}) "
                      f"error {fit_err:.1e} (< 1e-4), {elapsed:.2f}s (< 5s)")


def test_08_forecaster_sanity(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(8)
    X = rng.standard_normal((500, 10))
    W = rng.standard_normal((10, 4))
    ols_err = np.max(np.abs(LinearModel().fit(X, X @ W + 0.5).coef_ - W))

    y = np.zeros(5001)
    for t in range(1, 5001):
        y[t] = 0.5 * y[t - 1] + rng.standard_normal()
    ar = LinearModel().fit(y[:-1, None], y[1:]).coef_[0, 0]

    Y = np.column_stack([np.sin(X[:, 0]) + X[:, 1] ** 2, X[:, 2] * X[:, 3]])
    gbt = GbtModel(n_rounds=50, max_depth=3).fit(X, Y)
    loss_ok = all(np.all(np.diff(l) <= 0) for l in gbt.staged_loss())

    from wavecast.data import TimeSeriesFrame

    n = 400
    frame = TimeSeriesFrame(60 * np.arange(n), np.cumsum(rng.standard_normal(n)),
                            {"p": rng.standard_normal(n)}, {"f": rng.standard_normal(n)}, 60, "y")
    spec = LagSpec(12, 4, 4)
    d = build_design([frame], spec)
    exact = True
    for model in (LinearModel().fit(d.X, d.Y), GbtModel(n_rounds=10, max_depth=3).fit(d.X, d.Y)):
        for i in range(0, len(d.X), 7):
            got = rollout(model, frame, d.origins[i], spec).predictions[0]
            exact &= got.tobytes() == predict_direct(model, d.X[i]).tobytes()
    elapsed = time.perf_counter() - start
    ok = ols_err < 1e-8 and abs(ar - 0.5) <= 0.02 and loss_ok and exact and elapsed < 120
    assert acceptance(8, "forecaster sanity", ok,
                      f"OLS error {ols_err:.1e} (< 1e-8), AR(1) {ar:.4f} (0.5 +- 0.02), "
                      f"GBT loss non-increasing {loss_ok}, rollout == direct {exact}, {elapsed:.1f}s (< 120s)")


def test_12_serialization(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(12)
    bad = 0
    for _ in range(1000):
        n = int(rng.integers(2, 3000))
        cs = compress(rng.standard_normal(n) * 10 ** rng.uniform(-3, 3), WAVELETS[rng.integers(5)],
                      float(rng.uniform(0, 0.999)), mode=("symmetric", "periodization")[rng.integers(2)])
        blob = serialize(cs)
        back = deserialize(blob)
        same = (
            isinstance(back, CompressedSignal)
            and serialize(back) == blob
            and back.indices.tobytes() == cs.indices.astype(back.indices.dtype).tobytes()
            and back.values.tobytes() == cs.values.tobytes()
            and (back.wavelet, back.boundary_mode, back.levels, back.original_length)
            == (cs.wavelet, cs.boundary_mode, cs.levels, cs.original_length)
        )
        bad += not same
    zeros = measure_lossless(bytes(1 << 20))
    elapsed = time.perf_counter() - start
    ok = bad == 0 and zeros.rate > 0.99 and elapsed < 10
    assert acceptance(12, "serialization and lossless codec", ok,
                      f"{1000 - bad}/1000 bit-exact round trips, 1 MiB zeros reduced by {zeros.rate:.5f} "
                      f"(> 0.99), {elapsed:.1f}s (< 10s)")


# ---------------------------------------------------------------- 9-11: the synthetic grid


@pytest.fixture(scope="module")
def grid_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("acceptance")
    assert cli.main(["prepare", *PREPARE, "--out", str(root / "data")]) == 0
    runs = []
    for name in ("run1", "run2"):
        start = time.perf_counter()
        code = cli.main(["run", "--data", str(root / "data"), "--out", str(root / name), *RUN])
        runs.append((root / name, code, time.perf_counter() - start))
    return runs


def _results(path):
    with open(path / "results.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {(r["wavelet"], float(r["r_lossy"]), r["model"]): r for r in rows}


def _rmse(rows, wavelet, rate, model):
    return float(rows[(wavelet, rate, model)]["rmse"])


def test_09_directional_reproduction(grid_runs, acceptance):
    path, code, elapsed = grid_runs[0]
    assert code == 0
    rows = _results(path)
    gbt0 = _rmse(rows, "none", 0.0, "gbt")
    ols0 = _rmse(rows, "none", 0.0, "ols")
    stable = max(_rmse(rows, "bior1.1", r, "gbt") for r in DEFAULT_RATES if r <= 0.95) / gbt0
    degrade = {w: _rmse(rows, w, 0.999, "gbt") / gbt0 for w in WAVELETS}
    sens = {w: _rmse(rows, w, 0.95, "ols") / ols0 for w in ("bior1.1", "bior6.8")}
    ok_a = stable <= 1.25
    ok_b = all(v >= 1.5 for v in degrade.values())
    ok_c = sens["bior6.8"] > sens["bior1.1"]
    ok = ok_a and ok_b and ok_c and elapsed < 1200
    assert acceptance(9, "directional grid reproduction", ok,
                      f"(a) bior1.1 GBT max ratio r<=0.95 {stable:.3f} (<= 1.25); "
                      f"(b) GBT ratio at 0.999 " + ", ".join(f"{w} {v:.2f}" for w, v in degrade.items())
                      + " (>= 1.5); "
                      f"(c) OLS ratio at 0.95 bior6.8 {sens['bior6.8']:.3g} > bior1.1 {sens['bior1.1']:.3g}; "
                      f"{elapsed:.0f}s (< 1200s)")


def test_10_rmse_nmi_coupling(grid_runs, acceptance):
    rows = _results(grid_runs[0][0])
    cells = [r for (w, _, m), r in rows.items() if m == "gbt" and w != "none" and r["status"] == "ok"]
    rho = spearmanr([float(r["rmse"]) for r in cells], [float(r["nmi"]) for r in cells]).statistic
    assert acceptance(10, "RMSE-NMI coupling", rho <= -0.5,
                      f"Spearman(GBT RMSE, NMI) over {len(cells)} cells {rho:.3f} (<= -0.5)")


def test_11_determinism(grid_runs, acceptance):
    (a, code_a, t_a), (b, code_b, t_b) = grid_runs
    names = ("results.csv", "table.csv", "rmse_vs_rate.csv", "rmse_vs_nmi.csv", "report.json")
    same = [n for n in names if (a / n).read_bytes() == (b / n).read_bytes()]
    ok = code_a == code_b == 0 and len(same) == len(names) and t_a + t_b < 2 * 1200
    assert acceptance(11, "determinism", ok,
                      f"{len(same)}/{len(names)} report files byte-identical, both runs {t_a + t_b:.0f}s")
