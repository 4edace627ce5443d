"""Fresnel degree-of-polarization models and their numerical inversion.

The two reflection models relate the zenith angle of a surface normal to the
degree of linear polarization (DoP) observed through a rotating polarizer.
Diffuse-dominant reflection produces a DoP that grows monotonically with the
zenith angle; specular-dominant reflection produces a unimodal curve that
peaks at the Brewster angle and therefore inverts to two candidate zeniths.
"""

import math

import numpy as np

DEFAULT_REFRACTIVE_INDEX = 1.5

# Interval [0, pi/2] halved 90 times shrinks below float64 spacing, so the
# bisection results are exact to the last representable bit.
_BISECT_ITERS = 90
_GOLDEN_TOL = 1e-12
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

_peak_cache: dict[float, tuple[float, float]] = {}


def check_refractive_index(n) -> float:
    """Validate a refractive index (dimensionless, 1 < n <= 3)."""
    n = float(n)
    if not 1.0 < n <= 3.0:
        raise ValueError(f"refractive index must be in (1, 3], got {n}")
    return n


def _check_zenith(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0.0) or np.any(theta > np.pi / 2):
        raise ValueError("zenith angle outside [0, pi/2]")
    return theta


def _check_dop(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0.0) or np.any(rho > 1.0):
        raise ValueError("degree of polarization outside [0, 1]")
    return rho


def diffuse_dop(theta, n=DEFAULT_REFRACTIVE_INDEX):
    """DoP of diffuse-dominant reflection at zenith angle ``theta``.

    rho = (n - 1/n)^2 sin^2(t) /
          (2 + 2 n^2 - (n + 1/n)^2 sin^2(t) + 4 cos(t) sqrt(n^2 - sin^2(t)))

    Monotonically non-decreasing on [0, pi/2]; its maximum at grazing
    incidence is (n^2 - 1) / (n^2 + 1).
    """
    n = check_refractive_index(n)
    theta = _check_zenith(theta)
    s2 = np.sin(theta) ** 2
    num = (n - 1.0 / n) ** 2 * s2
    den = (2.0 + 2.0 * n * n
           - (n + 1.0 / n) ** 2 * s2
           + 4.0 * np.cos(theta) * np.sqrt(n * n - s2))
    out = num / den
    return out if out.ndim else float(out)


def specular_dop(theta, n=DEFAULT_REFRACTIVE_INDEX):
    """DoP of specular-dominant reflection at zenith angle ``theta``.

    rho = 2 sin^2(t) cos(t) sqrt(n^2 - sin^2(t)) /
          (n^2 - sin^2(t) - n^2 sin^2(t) + 2 sin^4(t))

    Unimodal on [0, pi/2]: rises from 0 to exactly 1 at the Brewster angle
    atan(n), then falls back to 0 at grazing incidence.
    """
    n = check_refractive_index(n)
    theta = _check_zenith(theta)
    s2 = np.sin(theta) ** 2
    num = 2.0 * s2 * np.cos(theta) * np.sqrt(n * n - s2)
    # The denominator is a quadratic in s = sin^2(t): 2 s^2 - (1 + n^2) s + n^2.
    # Over s in [0, 1] its minimum is min(1, n^2 - (1 + n^2)^2 / 8), which is
    # positive for every n in (1, 3], so the expression has no pole on the
    # domain; at t = pi/2 it evaluates directly to 0 / 1 = 0, matching the
    # one-sided limit.
    den = 2.0 * s2 * s2 - (1.0 + n * n) * s2 + n * n
    out = num / den
    return out if out.ndim else float(out)


def _golden_max(f, a, b, tol=_GOLDEN_TOL):
    """Locate the maximum of a unimodal ``f`` on [a, b] by golden-section."""
    h = b - a
    c = b - _INVPHI * h
    d = a + _INVPHI * h
    fc = f(c)
    fd = f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def specular_dop_peak(n=DEFAULT_REFRACTIVE_INDEX) -> tuple[float, float]:
    """Return (theta*, rho_s(theta*)), the argmax and peak of the specular DoP."""
    n = check_refractive_index(n)
    hit = _peak_cache.get(n)
    if hit is None:
        theta_star = _golden_max(lambda t: specular_dop(t, n), 0.0, np.pi / 2)
        hit = (theta_star, specular_dop(theta_star, n))
        _peak_cache[n] = hit
    return hit


def _bisect(f, target, lo, hi, increasing=True, iters=_BISECT_ITERS):
    """Vectorized bisection: find t in [lo, hi] with f(t) = target.

    ``f`` must be monotonic on [lo, hi] in the stated direction and bracket
    every target value.
    """
    target = np.asarray(target, dtype=float)
    lo = np.full(target.shape, lo, dtype=float)
    hi = np.full(target.shape, hi, dtype=float)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if increasing:
            go_right = f(mid) < target
        else:
            go_right = f(mid) > target
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    # Keep the bracket endpoint with the smaller residual so exactly
    # attainable targets (e.g. rho = 0 at a branch end) return exactly.
    take_lo = np.abs(f(lo) - target) <= np.abs(f(hi) - target)
    return np.where(take_lo, lo, hi)


def invert_diffuse_dop(rho, n=DEFAULT_REFRACTIVE_INDEX):
    """Zenith angle whose diffuse DoP equals ``rho``.

    Returns ``(theta, saturated)``. Values of ``rho`` above the model maximum
    clamp to pi/2 with the saturation flag set instead of raising: noisy
    pixels routinely overshoot the physical ceiling.
    """
    n = check_refractive_index(n)
    rho = _check_dop(rho)
    scalar = rho.ndim == 0
    rho = np.atleast_1d(rho)
    rho_max = diffuse_dop(np.pi / 2, n)
    saturated = rho > rho_max
    theta = _bisect(lambda t: diffuse_dop(t, n), np.minimum(rho, rho_max),
                    0.0, np.pi / 2)
    theta[saturated] = np.pi / 2
    if scalar:
        return float(theta[0]), bool(saturated[0])
    return theta, saturated


def invert_specular_dop(rho, n=DEFAULT_REFRACTIVE_INDEX):
    """The two zenith angles whose specular DoP equals ``rho``.

    Returns ``(theta_lo, theta_hi, saturated)`` with theta_lo on the rising
    branch [0, theta*] and theta_hi on the falling branch [theta*, pi/2].
    rho = 0 maps to the branch endpoints (0, pi/2); rho above the peak value
    clamps both angles to theta* with the saturation flag set.
    """
    n = check_refractive_index(n)
    rho = _check_dop(rho)
    scalar = rho.ndim == 0
    rho = np.atleast_1d(rho)
    theta_star, rho_peak = specular_dop_peak(n)
    saturated = rho > rho_peak
    target = np.minimum(rho, rho_peak)
    theta_lo = _bisect(lambda t: specular_dop(t, n), target,
                       0.0, theta_star, increasing=True)
    theta_hi = _bisect(lambda t: specular_dop(t, n), target,
                       theta_star, np.pi / 2, increasing=False)
    theta_lo[saturated] = theta_star
    theta_hi[saturated] = theta_star
    if scalar:
        return float(theta_lo[0]), float(theta_hi[0]), bool(saturated[0])
    return theta_lo, theta_hi, saturated
