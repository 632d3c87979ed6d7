"""Scalar, high-precision evaluation of the three-head DAE layer on a fixed toy setting.

Independent of the C++ code path: plain loops over mpmath numbers. The printed values are
frozen into tests/dae_test.cpp.
"""
from mpmath import mp, mpf, exp, log

mp.dps = 40


def s(v):
    return 1 / (1 + exp(-v))


def affine(W, b, x):
    return [sum(mpf(W[i][j]) * x[j] for j in range(len(x))) + mpf(b[i]) for i in range(len(W))]


W_enc = [[0.5, -0.3], [0.8, 0.2]]
b_enc = [0.1, -0.1]
W_x = [[0.7, -0.4], [0.2, 0.9]]
o_x = [0.05, -0.05]
W_c = [[0.3, 0.1], [-0.2, 0.4], [0.6, -0.5]]
o_c = [0.0, 0.1, -0.1]
W_t = [[-0.3, 0.8], [0.5, 0.5]]
o_t = [0.2, -0.2]

x = [mpf("0.4"), mpf("0.9")]
x_tilde = [mpf("0.4"), mpf(0)]
c = [0, 1, 0]
t = [1, 0]
lam, beta, rho, sw = mpf("1.5"), mpf("1.5"), mpf("0.1"), mpf("0.1")

h = [s(v) for v in affine(W_enc, b_enc, x_tilde)]
rx = [s(v) for v in affine(W_x, o_x, h)]
rc = [s(v) for v in affine(W_c, o_c, h)]
rt = [s(v) for v in affine(W_t, o_t, h)]

sq = lambda a, b: sum((mpf(ai) - bi) ** 2 for ai, bi in zip(a, b))
kl = sum(rho * log(rho / hj) + (1 - rho) * log((1 - rho) / (1 - hj)) for hj in h)
plain = sq(x, rx)
full = plain + lam * sq(c, rc) + beta * sq(t, rt)
full_sparse = full + sw * kl

fmt = lambda v: mp.nstr(v, 20)
print("h =", [fmt(v) for v in h])
print("r_x =", [fmt(v) for v in rx])
print("r_c =", [fmt(v) for v in rc])
print("r_t =", [fmt(v) for v in rt])
print("plain loss =", fmt(plain))
print("three-head loss =", fmt(full))
print("three-head + sparsity loss =", fmt(full_sparse))
