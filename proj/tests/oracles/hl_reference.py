"""Reference Hosmer-Lemeshow values for the 40-row fixture in test_metrics.cpp.

Run with numpy + scipy; the printed numbers are pasted into the C++ test.
"""
import numpy as np
from scipy import stats

probs = np.array([
    0.02, 0.05, 0.07, 0.08, 0.10, 0.11, 0.13, 0.15, 0.17, 0.19,
    0.21, 0.22, 0.24, 0.26, 0.28, 0.30, 0.33, 0.35, 0.37, 0.40,
    0.42, 0.45, 0.47, 0.50, 0.52, 0.55, 0.58, 0.60, 0.63, 0.66,
    0.69, 0.72, 0.75, 0.78, 0.81, 0.84, 0.87, 0.90, 0.93, 0.97,
])
labels = np.array([
    0, 0, 0, 1, 0, 0, 0, 0, 1, 0,
    0, 0, 1, 0, 0, 1, 0, 0, 1, 0,
    1, 0, 0, 1, 1, 0, 1, 0, 1, 1,
    1, 0, 1, 1, 1, 1, 0, 1, 1, 1,
])

order = np.argsort(probs, kind="stable")
groups = np.array_split(order, 10)
chi2 = 0.0
for g in groups:
    e1 = probs[g].sum()
    o1 = labels[g].sum()
    e0 = len(g) - e1
    o0 = len(g) - o1
    chi2 += (o1 - e1) ** 2 / e1 + (o0 - e0) ** 2 / e0
print(repr(chi2), repr(stats.chi2.sf(chi2, 8)))
for x, k in [(15.507, 8), (3.0, 1), (0.5, 5), (40.0, 10), (7.3, 3.5)]:
    print(x, k, repr(stats.chi2.sf(x, k)))
