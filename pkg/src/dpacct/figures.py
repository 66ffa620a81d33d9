"""Datasets for the two standard comparison plots.

``composition_curves`` compares composition bounds for ``k`` pure-DP
mechanisms; ``subsampling_curves`` compares Renyi bounds for a Poisson
subsampled zCDP mechanism.
"""

from __future__ import annotations

import math

from .accountants import zcdp_to_eps
from .composition import advanced_compose_pure, optimal_eps
from .gaussian import gaussian_eps
from .subsample import (subsampled_rdp_analytic_gaussian, subsampled_rdp_exact,
                        subsampled_rdp_large_alpha)

COMPOSITION_COLUMNS = ("k", "basic", "advanced", "optimal", "cdp", "gaussian")
SUBSAMPLING_COLUMNS = ("alpha", "unamplified", "exact", "analytic", "limit")


def composition_curves(eps0: float = 0.1, delta: float = 1e-6, k_max: int = 500):
    """Rows ``(k, basic, advanced, optimal, cdp, gaussian)`` for ``k = 1..k_max``.

    ``gaussian`` composes Gaussian noise with the variance of the Laplace noise
    giving ``eps0``-DP on a sensitivity-1 query, i.e. ``sigma^2 = 2/eps0^2``
    and ``rho = eps0^2/4`` per query.
    """
    rows = []
    rho_pure = eps0 * eps0 / 2
    rho_gauss = eps0 * eps0 / 4
    for k in range(1, k_max + 1):
        rows.append((
            k,
            k * eps0,
            advanced_compose_pure([eps0] * k, delta),
            optimal_eps(eps0, 0.0, k, delta),
            zcdp_to_eps(k * rho_pure, delta),
            gaussian_eps(k * rho_gauss, delta),
        ))
    return rows


def subsampling_curves(p: float = 0.05, rho: float = 0.5, alpha_max: int = 64):
    """Rows ``(alpha, unamplified, exact, analytic, limit)`` for integer ``alpha``."""
    exact = subsampled_rdp_exact(lambda k: k * rho, p, alpha_max)
    rows = []
    for a, e in zip(exact.orders, exact.eps_at):
        a = int(a)
        rows.append((a, rho * a, e, subsampled_rdp_analytic_gaussian(rho, p, a),
                     subsampled_rdp_large_alpha(rho * a, p, a)))
    return rows


def lower_envelope(p: float, rho: float, alpha: float) -> float:
    """``rho alpha - alpha/(alpha-1) log(1/p)``, below which no subsampled bound can go."""
    return rho * alpha - alpha / (alpha - 1) * math.log(1 / p)
