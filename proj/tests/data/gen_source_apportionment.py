"""Golden files for the source-apportionment normalization test.

Independent of the C++ library: numpy SVD, Bro-Acar-Kolda sign flip,
row-sum internal normalization. Rerun with: python3 gen_source_apportionment.py
"""
import numpy as np

C = np.array([
    [0.40000, 0.01250, 0.00000], [0.00000, 0.08840, 0.01100], [0.00000, 0.22300, 0.00820],
    [0.40000, 0.00000, 0.03000], [0.01400, 0.01030, 0.00072], [0.01400, 0.02440, 0.01250],
    [0.00000, 0.00640, 0.00000], [0.00000, 0.06000, 0.02100], [0.00200, 0.00020, 0.05000],
    [0.00000, 0.00370, 0.20000]])
A = np.array([
    [3, 8, 19], [3, 8, 16], [5, 7, 12], [6, 49, 13], [6, 39, 7], [6, 9, 12], [6, 17, 18],
    [2, 6, 6], [4, 42, 7], [4, 49, 20], [4, 29, 14], [5, 44, 9], [5, 32, 12], [5, 9, 11],
    [6, 26, 8], [3, 8, 14], [2, 39, 11], [3, 6, 20], [4, 48, 15], [5, 37, 14]], dtype=float)


def signed_sum(a, x):
    p = a @ x
    return float(np.sum(np.sign(p) * p * p))


def sign_flip(scores, loads, data):
    scores, loads = scores.copy(), loads.copy()
    signs = []
    for f in range(scores.shape[1]):
        resid = data.copy()
        for g in range(scores.shape[1]):
            if g != f:
                resid -= np.outer(scores[:, g], loads[:, g])
        s1 = signed_sum(scores[:, f] / (scores[:, f] @ scores[:, f]), resid)
        s2 = signed_sum(loads[:, f] / (loads[:, f] @ loads[:, f]), resid.T)
        g1, g2 = (-1.0 if s1 < 0 else 1.0), (-1.0 if s2 < 0 else 1.0)
        if g1 != g2:
            if abs(s1) <= abs(s2):
                g1 = -g1
            else:
                g2 = -g2
        signs.append((g1, g2))
    for f, (g1, g2) in enumerate(signs):
        scores[:, f] *= g1
        loads[:, f] *= g2
    return scores, loads


R = C @ A.T
u, s, vt = np.linalg.svd(R, full_matrices=False)
X, V = sign_flip(u[:, :3] * s[:3], vt[:3].T, R)
X_in = X / X.sum(axis=1, keepdims=True)
T_A = A.T @ V
T_A_in = T_A / T_A.sum(axis=1, keepdims=True)

fmt = "%.17g"
np.savetxt("source_R.csv", R, delimiter=",", fmt=fmt)
np.savetxt("source_X_in.csv", X_in, delimiter=",", fmt=fmt)
np.savetxt("source_TA_in.csv", T_A_in, delimiter=",", fmt=fmt)
