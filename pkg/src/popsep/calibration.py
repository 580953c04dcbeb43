"""Empirical calibration constants used by the verification suite.

These are not theorems: each threshold was measured over seeded Monte-Carlo
sweeps of normalized Bernoulli mixture models and then fixed with headroom.
"""

# Upper bound on operator_norm(X - E[X]) / sqrt(K) for a normalized n x K
# Bernoulli sample with n <= K (entries of the centered matrix span at most
# 1/2). Measured max over 200 seeded draws across model shapes: ~0.55.
NOISE_OPNORM_RATIO_MAX = 2.0

# Upper bound on sum_v ||Ahat_v - E_v||^2 / (k * K * sigma^2) for a rank-k
# approximation of a raw 0/1 sample. Measured max over 50 seeded instances
# at n in [60, 300], K in [400, 4000]: < 8. The assertion keeps 8x headroom.
RANK_K_ROW_ERROR_RATIO_MAX = 64.0
