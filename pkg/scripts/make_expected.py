"""Produce tests/data/expected_<contrast>.csv for the checked-in example.

The expected values come from a brute-force implementation that shares no
code with the package: scipy's t test and noncentral-t density, a 1e-3
grid over theta refined by a 1e-6 grid around the best coarse cells, and a
2-D grid plus bounded scalar search for the mixture. Values are written
with 8 decimals; the end-to-end test compares real fields at 1e-4 and
discrete fields exactly.
"""
import csv
import math
from pathlib import Path

import numpy as np
from scipy import optimize, stats

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data" / "example_proteins.csv"
OUT = ROOT / "tests" / "data"
CONTROL = "healthy"
CONTRASTS = ("caseA", "caseB")
LN2 = math.log(2.0)


def load():
    values = {}
    with DATA.open(newline="") as fh:
        for row in csv.DictReader(fh):
            values.setdefault(row["feature_id"], {}).setdefault(row["group"], []).append(float(row["value"]))
    return values


def folded_logpdf(t, df, nc):
    with np.errstate(divide="ignore"):
        return np.log(stats.nct.pdf(t, df, nc) + stats.nct.pdf(-t, df, nc))


def argmax_zoom(objective, hi, n_best=5, step=1e-3, fine=1e-6):
    """Global argmax of a 1-D function on [0, hi]: coarse grid, then fine grids."""
    coarse = np.arange(0.0, hi + step / 2, step)
    vals = objective(coarse)
    peaks = [k for k in range(len(coarse))
             if vals[k] >= vals[max(k - 1, 0)] and vals[k] >= vals[min(k + 1, len(coarse) - 1)]]
    peaks = sorted(peaks, key=lambda k: -vals[k])[:n_best]
    best_x, best_v = coarse[peaks[0]], vals[peaks[0]]
    for k in peaks:
        lo = max(coarse[k] - 1.5 * step, 0.0)
        grid = np.arange(lo, min(coarse[k] + 1.5 * step, hi) + fine / 2, fine)
        v = objective(grid)
        j = int(np.argmax(v))
        if v[j] > best_v + 1e-12 * (1 + abs(best_v)) or (abs(v[j] - best_v) <= 1e-12 * (1 + abs(best_v)) and grid[j] < best_x):
            best_x, best_v = grid[j], v[j]
    return float(best_x), float(best_v)


def analyse(values, case):
    # preprocessing: ln(v + Q1), Q1 = type-7 first quartile of all control values
    q1 = np.quantile(np.concatenate([np.array(v[CONTROL]) for v in values.values()]), 0.25)
    rows, T, scale, df = [], [], [], []
    for fid, by in values.items():
        x = np.log(np.array(by[case]) + q1)
        y = np.log(np.array(by[CONTROL]) + q1)
        if np.ptp(x) == 0 and np.ptp(y) == 0:
            rows.append({"feature_id": fid, "status": "error"})
            continue
        t = stats.ttest_ind(x, y, equal_var=True).statistic
        rows.append({"feature_id": fid, "status": "ok", "T": abs(t)})
        T.append(abs(t))
        scale.append(1.0 / math.sqrt(1.0 / len(x) + 1.0 / len(y)))
        df.append(len(x) + len(y) - 2)
    T, scale, df = map(np.array, (T, scale, df))
    n = T.size
    theta_max = max(10.0, float(np.max((T + 6.0) / scale)))

    def loglik(theta):  # (len(theta), n)
        return folded_logpdf(T[None, :], df[None, :], scale[None, :] * np.asarray(theta)[:, None])

    ell0 = loglik([0.0])[0]
    mle = np.array([argmax_zoom(lambda th, j=j: loglik(th)[:, j], theta_max)[0] for j in range(n)])

    def capped_sum(th, drop=None):
        cap = np.maximum(loglik(th), ell0[None, :])
        if drop is not None:
            cap = np.delete(cap, drop, axis=1)
        return cap.sum(axis=1)

    theta_approx = argmax_zoom(capped_sum, theta_max)[0]
    theta_exact = np.array([argmax_zoom(lambda th, i=i: capped_sum(th, i), theta_max)[0] for i in range(n)])

    def bits(ell):
        return -ell / LN2

    L0 = bits(ell0)
    L_approx = bits(loglik([theta_approx])[0])
    L_exact = bits(np.array([loglik([theta_exact[i]])[0, i] for i in range(n)]))
    d_approx = L_approx - L0
    d_exact = L_exact - L0
    p_approx = np.mean(d_approx >= 0)
    p_exact = np.array([np.mean(np.delete(d_exact, i) >= 0) for i in range(n)])

    def total(d, p):
        with np.errstate(divide="ignore"):
            return d + np.log2(p) - np.log2(1.0 - p)

    tot_a = total(d_approx, p_approx)
    tot_e = total(d_exact, p_exact)

    # mixture: 2-D grid, then theta on a fine grid with pi0 by bounded search
    def mix(theta, pi0):
        ell = loglik([theta])[0]
        with np.errstate(divide="ignore"):
            return float(np.sum(np.logaddexp(np.log(pi0) + ell0, np.log1p(-pi0) + ell)))

    th_grid = np.arange(0.0, theta_max + 5e-3, 1e-2)
    pi_grid = np.arange(0.0, 1.0 + 5e-3, 1e-2)
    ells = loglik(th_grid)
    with np.errstate(divide="ignore"):
        surf = np.array([np.sum(np.logaddexp(np.log(p) + ell0[None, :], np.log1p(-p) + ells), axis=1)
                         for p in pi_grid])
    ip, it = np.unravel_index(np.argmax(surf), surf.shape)

    def best_pi(theta):
        res = optimize.minimize_scalar(lambda p: -mix(theta, p), bounds=(0.0, 1.0),
                                       method="bounded", options={"xatol": 1e-12})
        cands = [(res.fun, res.x), (-mix(theta, 0.0), 0.0), (-mix(theta, 1.0), 1.0)]
        f, p = min(cands)
        return p, -f

    fine = np.arange(max(th_grid[it] - 2e-2, 0.0), th_grid[it] + 2e-2, 1e-4)
    prof = [best_pi(th)[1] for th in fine]
    th0 = fine[int(np.argmax(prof))]
    finer = np.arange(max(th0 - 2e-4, 0.0), th0 + 2e-4, 1e-6)
    prof = [best_pi(th)[1] for th in finer]
    theta_mix = float(finer[int(np.argmax(prof))])
    pi0_mix = best_pi(theta_mix)[0]
    ell_mix = loglik([theta_mix])[0]
    log_odds = math.log(pi0_mix) + ell0 - math.log1p(-pi0_mix) - ell_mix
    lfdr = 1.0 / (1.0 + np.exp(-log_odds))

    k = 0
    for row in rows:
        if row["status"] != "ok":
            continue
        row.update(theta_hat=mle[k], L0=L0[k], L_approx=L_approx[k], delta_approx=d_approx[k],
                   total_delta_approx=tot_a[k], selected_approx="null" if tot_a[k] >= 0 else "alternative",
                   theta_exact=theta_exact[k], delta_exact=d_exact[k], p_null_exact=p_exact[k],
                   total_delta_exact=tot_e[k], selected_exact="null" if tot_e[k] >= 0 else "alternative",
                   lfdr=lfdr[k], mixture_delta=log_odds[k] / LN2)
        k += 1
    glob = {"theta_approx": theta_approx, "p_null_approx": p_approx,
            "theta_mixture": theta_mix, "pi0_mixture": pi0_mix}
    return glob, rows


COLUMNS = ["feature_id", "status", "T", "theta_hat", "L0", "L_approx", "delta_approx",
           "total_delta_approx", "selected_approx", "theta_exact", "delta_exact", "p_null_exact",
           "total_delta_exact", "selected_exact", "lfdr", "mixture_delta"]


def fmt(v):
    return f"{v:.8f}" if isinstance(v, (float, np.floating)) else str(v)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    values = load()
    for case in CONTRASTS:
        glob, rows = analyse(values, case)
        with (OUT / f"expected_{case}.csv").open("w", newline="") as fh:
            for key, value in glob.items():
                fh.write(f"# {key}={fmt(float(value))}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS)
            for row in rows:
                w.writerow([fmt(row[c]) if c in row else "" for c in COLUMNS])
        print(OUT / f"expected_{case}.csv", glob)


if __name__ == "__main__":
    main()
