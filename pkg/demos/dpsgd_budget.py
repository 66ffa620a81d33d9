"""Privacy budget of noisy SGD with Poisson-subsampled batches.

A training run takes T steps; each step samples every record with
probability p and adds Gaussian noise of scale sigma to the clipped sum.
"""

from dpacct.core import EpsDelta
from dpacct.gaussian import calibrate_sigma
from dpacct.subsample import dpsgd_account

p, steps, delta = 0.01, 1000, 1e-5

print("sigma   eps(rdp)  best alpha  eps(amplify+advanced)")
for sigma in (0.8, 1.0, 1.5, 2.0, 4.0):
    r = dpsgd_account(p, sigma, 1.0, steps, delta)
    print(f"{sigma:5.1f} {r.eps:9.3f} {r.alpha:11g} {r.naive_eps:22.3f}")

# The naive route treats each step as an (eps0, delta0) black box, amplifies
# it and composes.  It pays two tail bounds, which is why it is so much worse.

# For comparison: the noise one Gaussian release of the full dataset needs.
sigma = calibrate_sigma(1.0, EpsDelta(1.0, delta))
print(f"\none full-batch release at (1, {delta:g})-DP needs sigma = {sigma:.4f}")

# Longer training: the budget grows roughly like sqrt(T) at fixed sigma.
for t in (100, 1000, 10_000):
    print(f"T={t:6d}: eps = {dpsgd_account(p, 1.0, 1.0, t, delta, naive=False).eps:.3f}")
