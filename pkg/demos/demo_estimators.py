#!/usr/bin/env python3
"""Estimate one shape matrix three ways on a heavy-tailed dataset and show
what the one-step rank correction buys over its preliminary estimate."""

import numpy as np

from shapekit import (
    ComplexT,
    RngStream,
    VanDerWaerdenScore,
    frobenius,
    herm_sqrt,
    one_step_r_estimate,
    sample_ces,
    scm,
    toeplitz_scatter,
    tyler,
)

N = 8
L = 5 * N
TAIL = 2.0  # very heavy tails

scatter = toeplitz_scatter(0.8 * np.exp(2j * np.pi / 5.0), N)
target = N * scatter / np.trace(scatter).real
law = ComplexT.from_power(N, TAIL, 4.0)

stream = RngStream(seed=20)
data = sample_ces(herm_sqrt(scatter), law, stream, size=L)
print(f"dataset: L={L} observations in dimension N={N}, tail parameter {TAIL}")

score = VanDerWaerdenScore(N)

sample_cov = scm(data)
robust = tyler(data)
one_step = one_step_r_estimate(data, robust, score, stream)

print("\nestimate errors against the trace-normalized truth:")
for name, output in (
    ("sample covariance", sample_cov),
    ("tyler fixed point", robust),
    ("one-step rank update", one_step),
):
    err = frobenius(output.renormalized - target)
    print(f"  {name:22s} ||error||_F = {err:.4f}")

diag = one_step.diagnostics
print(f"\ntyler converged in {robust.diagnostics.iterations} iterations "
      f"(residual {robust.diagnostics.residual:.2e})")
print(f"one-step diagnostics: cross-information scale {diag.alpha:.4f}, "
      f"central-sequence norm {diag.central_norm:.4f}, "
      f"positive definite: {not diag.nonpd}")
print("top-left entries are pinned to one:",
      sample_cov.shape[0, 0], robust.shape[0, 0], one_step.shape[0, 0])
