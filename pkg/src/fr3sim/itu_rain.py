"""ITU-R P.838-3 rain coefficients.

The recommendation defines k and alpha through Gaussian-sum regressions in
log10(f). The default coefficient tables are those regressions evaluated at
the recommendation's tabulation frequencies between 1 and 100 GHz; the
regression itself is kept as :func:`coefficients_exact` for cross-checks.
"""

import math

import numpy as np

# (a_j, b_j, c_j), m, c per quantity
_KH = ((-5.33980, -0.10008, 1.13098), (-0.35351, 1.26970, 0.45400),
       (-0.23789, 0.86036, 0.15354), (-0.94158, 0.64552, 0.16817)), -0.18961, 0.71147
_KV = ((-3.80595, 0.56934, 0.81061), (-3.44965, -0.22911, 0.51059),
       (-0.39902, 0.73042, 0.11899), (0.50167, 1.07319, 0.27195)), -0.16398, 0.63297
_AH = ((-0.14318, 1.82442, -0.55187), (0.29591, 0.77564, 0.19822),
       (0.32177, 0.63773, 0.13164), (-5.37610, -0.96230, 1.47828),
       (16.1721, -3.29980, 3.43990)), 0.67849, -1.95537
_AV = ((-0.07771, 2.33840, -0.76284), (0.56727, 0.95545, 0.54039),
       (-0.20238, 1.14520, 0.26809), (-48.2991, 0.791669, 0.116226),
       (48.5833, 0.791459, 0.116479)), -0.053739, 0.83433

_REGRESSIONS = {
    "horizontal": (_KH, _AH),
    "vertical": (_KV, _AV),
}


def _gauss_sum(coeffs, f_ghz):
    terms, m, c = coeffs
    x = math.log10(f_ghz)
    return sum(a * math.exp(-(((x - b) / cc) ** 2)) for a, b, cc in terms) + m * x + c


def coefficients_exact(f_ghz, polarization="horizontal"):
    """(k, alpha) straight from the regression."""
    k_coeffs, a_coeffs = _REGRESSIONS[polarization]
    return 10.0 ** _gauss_sum(k_coeffs, f_ghz), _gauss_sum(a_coeffs, f_ghz)


TABLE_FREQS_GHZ = tuple(
    [1.0 + 0.5 * i for i in range(11)] + [float(f) for f in range(7, 101)]
)


def default_table(polarization):
    """Rows of (freq_ghz, k, alpha)."""
    return tuple((f, *coefficients_exact(f, polarization)) for f in TABLE_FREQS_GHZ)


def interpolate(table, f_ghz):
    """Interpolate (k, alpha) at ``f_ghz``.

    k is interpolated in log-log, alpha linearly against log-frequency, as
    the recommendation prescribes for frequencies between tabulated points.
    """
    freqs = np.array([row[0] for row in table])
    k = np.array([row[1] for row in table])
    alpha = np.array([row[2] for row in table])
    lf = np.log10(f_ghz)
    lk = np.interp(lf, np.log10(freqs), np.log10(k))
    a = np.interp(lf, np.log10(freqs), alpha)
    return float(10.0 ** lk), float(a)
