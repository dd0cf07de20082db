#!/usr/bin/env python3
"""High-precision reference values for the fixture tests.

Evaluates every closed form directly with mpmath at 40 digits, sharing no
code with the Rust crates. Output is written as JSON and checked in under
crates/renyi-bet/tests/data/fixtures.json.
"""
import json
import sys

from mpmath import mp, mpf, log, sqrt, exp

mp.dps = 40


def renyi_bi(alpha, p, q):
    s = sum(pi ** alpha * qi ** (1 - alpha) for pi, qi in zip(p, q))
    return log(s) / (alpha - 1)


def kl(p, q):
    return sum(pi * log(pi / qi) for pi, qi in zip(p, q) if pi > 0)


def renyi_multi(alphas, pmfs):
    star = max(alphas)
    s = mpf(0)
    for x in range(len(pmfs[0])):
        term = mpf(1)
        for a, p in zip(alphas, pmfs):
            term *= p[x] ** a
        s += term
    return log(s) / (star - 1)


def renyi_cond(alphas, beta, conds, p_g):
    star = max(alphas)
    outer = mpf(0)
    for g, pg in enumerate(p_g):
        inner = mpf(0)
        for x in range(len(conds[0][g])):
            term = mpf(1)
            for a, c in zip(alphas, conds):
                px = c[g][x]
                term *= (px ** a) if px != 0 else (mpf(0) if a > 0 else mpf(1))
            inner += term
        outer += pg * inner ** (1 / beta)
    return beta / (star - 1) * log(outer)


def single_ice(p, b, o, r):
    s = sum(pi * (bi * oi) ** (1 - r) for pi, bi, oi in zip(p, b, o))
    return s ** (1 / (1 - r))


half = mpf(1) / 2
quarter = mpf(1) / 4
p = [mpf(3) / 4, quarter]
u = [half, half]

out = {}
out["renyi_bivariate_alpha2"] = renyi_bi(mpf(2), p, u)
out["kl_p_u"] = kl(p, u)
out["renyi_multivariate_half_quarter_quarter"] = renyi_multi([half, quarter, quarter], [p, u, u])
cond0 = [[mpf(2) / 3, mpf(1) / 3], [mpf(0), mpf(1)]]
cond1 = [u, u]
out["qubit_conditional"] = renyi_cond([half, half], half, [cond0, cond1], [mpf(3) / 4, quarter])
out["qubit_advantage_ratio"] = exp(out["qubit_conditional"])
out["tropical_p_u"] = log(mpf(3) / 2)
# d=1, R=2 optimum: b* proportional to p^(1/R)
norm = sqrt(p[0]) + sqrt(p[1])
out["optimal_bet_r2"] = [sqrt(p[0]) / norm, sqrt(p[1]) / norm]
out["optimal_log_ice_r2"] = log(single_ice(p, out["optimal_bet_r2"], [2, 2], 2))
out["ice_r2_b0634"] = single_ice(p, [mpf("0.634"), mpf("0.366")], [2, 2], 2)
# d=1, R=2, fair odds, b=(1/2,1/2): log ICE and the single penalty term.
# alpha = (1/2, 1/2), S_1 = 2, q^(1) = optimal bet, coefficient alpha_1/(alpha_0-1) = -1.
log_ice_half = log(single_ice(p, u, [2, 2], 2))
out["log_ice_r2_uniform_bet"] = log_ice_half
out["penalty_r2_uniform_bet"] = renyi_bi(mpf(2), out["optimal_bet_r2"], u)
# conditional optimum on j = [[0.3,0.2],[0.1,0.4]] (rows x, columns g), d=1, R=2, fair (2,2)
j = [[mpf("0.3"), mpf("0.2")], [mpf("0.1"), mpf("0.4")]]
pg = [j[0][0] + j[1][0], j[0][1] + j[1][1]]
condj = [[j[x][g] / pg[g] for x in range(2)] for g in range(2)]
out["conditional_optimum_j"] = renyi_cond([half, half], half, [condj, [u, u]], pg)
out["unconditional_optimum_j"] = renyi_multi([half, half], [[j[0][0] + j[0][1], j[1][0] + j[1][1]], u])


def plain(v):
    return [plain(w) for w in v] if isinstance(v, list) else float(v)


json.dump({k: plain(v) for k, v in out.items()}, sys.stdout, indent=2, sort_keys=True)
print()
