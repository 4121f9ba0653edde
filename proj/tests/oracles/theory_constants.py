"""Straight-line recomputation of the convergence constants for the regression tuple.

Written without reference to the C++ code; run once and the printed values are frozen into
configs/verify_theory.json and the unit tests.
"""
from mpmath import mp, mpf, sqrt, log

mp.dps = 50


def compute():
    L0, L1, L, R = mpf(1), mpf(1), mpf(2), mpf(1)
    T, delta, eta = mpf(10000), mpf("0.01"), mpf("0.01")
    beta1, beta2 = mpf("0.9"), mpf("0.95")
    f_gap, eps = mpf(1), mpf("1e-8")

    floor = 3 * L0 / (4 * L1)
    ratio = max(beta1 / sqrt(beta2), (1 - beta1) / sqrt(1 - beta2))
    sigma = max(sqrt(2 * R**2 * log(T / delta)), L * eta / (1 - beta1) * ratio, floor)
    G = max(floor,
            72 * L1 * f_gap,
            sqrt(72 * L1 * sigma**2 * eta * ((1 - beta1) * T + 1)),
            60 * sqrt(L1 * R**2 * sigma**2 * eta * sqrt(2 * T * log(1 / delta))))
    F = G**2 / (3 * (3 * L0 + 4 * L1 * G))
    C = sqrt(4 * L**2 * (G + sigma + eps) / eps**4)
    return {"sigma": sigma, "G": G, "F": F, "C": C}


if __name__ == "__main__":
    for name, value in compute().items():
        print(f"{name} {mp.nstr(value, 17)}")
