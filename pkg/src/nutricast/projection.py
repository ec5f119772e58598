"""WGS 84 / Antarctic Polar Stereographic forward and inverse mapping.

Ellipsoidal polar stereographic, variant B: standard parallel 71 S,
central meridian 0, no false easting/northing, WGS 84 ellipsoid
(a = 6378137 m, 1/f = 298.257223563). The implied scale at the pole is
k0 = 0.97276901; grid north points along the Greenwich meridian and the
South Pole maps to (0, 0).

Forward, for latitude phi < 0 and longitude lam (radians):

    t   = tan(pi/4 + phi/2) / ((1 + e sin phi) / (1 - e sin phi))^(e/2)
    rho = a * m_F * t / t_F          (m_F, t_F evaluated at the 71 S parallel)
    x   = rho * sin(lam),  y = rho * cos(lam)

The inverse recovers phi by fixed-point iteration of the same relation,
converged to well below 1e-12 rad.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteInput, OutOfDomain

WGS84_A = 6378137.0
WGS84_INV_F = 298.257223563
STANDARD_PARALLEL = -71.0
CENTRAL_MERIDIAN = 0.0

_F = 1.0 / WGS84_INV_F
_E2 = _F * (2.0 - _F)
_E = np.sqrt(_E2)


def _t_south(phi):
    """Isometric-latitude factor for the south polar aspect."""
    s = _E * np.sin(phi)
    return np.tan(np.pi / 4.0 + phi / 2.0) / ((1.0 + s) / (1.0 - s)) ** (_E / 2.0)


_PHI_F = np.deg2rad(STANDARD_PARALLEL)
_T_F = _t_south(_PHI_F)
_M_F = np.cos(_PHI_F) / np.sqrt(1.0 - _E2 * np.sin(_PHI_F) ** 2)
_RHO_COEF = WGS84_A * _M_F / _T_F


@dataclass(frozen=True)
class ProjectedPoint:
    """Easting/northing in metres; (0, 0) is the South Pole."""

    x: float
    y: float


def project_many(lat, lon):
    """Vectorized forward projection of degree coordinates to metres.

    Raises OutOfDomain for non-finite inputs, latitudes outside [-90, 0)
    or longitudes outside [-180, 180].
    """
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    if not (np.all(np.isfinite(lat)) and np.all(np.isfinite(lon))):
        raise OutOfDomain("non-finite coordinate")
    if np.any(lat >= 0.0) or np.any(lat < -90.0):
        raise OutOfDomain("latitude must lie in [-90, 0) degrees")
    if np.any(np.abs(lon) > 180.0):
        raise OutOfDomain("longitude must lie in [-180, 180] degrees")
    rho = _RHO_COEF * _t_south(np.deg2rad(lat))
    theta = np.deg2rad(lon - CENTRAL_MERIDIAN)
    return rho * np.sin(theta), rho * np.cos(theta)


def project_aps(lat: float, lon: float) -> ProjectedPoint:
    """Forward-project one (lat, lon) in degrees."""
    x, y = project_many(lat, lon)
    return ProjectedPoint(float(x), float(y))


def inverse_aps(x: float, y: float) -> tuple[float, float]:
    """Invert the projection back to (latitude, longitude) in degrees.

    At the exact pole the longitude is indeterminate and 0 is returned by
    convention. Fixed-point iteration on the conformal relation is run to
    1e-15 rad, comfortably below the 1e-12 rad contract.
    """
    if not (np.isfinite(x) and np.isfinite(y)):
        raise NonFiniteInput("non-finite projected coordinate")
    rho = float(np.hypot(x, y))
    if rho < 1e-9:
        return -90.0, 0.0
    t = rho / _RHO_COEF
    phi = 2.0 * np.arctan(t) - np.pi / 2.0
    for _ in range(50):
        s = _E * np.sin(phi)
        phi_next = 2.0 * np.arctan(t * ((1.0 + s) / (1.0 - s)) ** (_E / 2.0)) - np.pi / 2.0
        if abs(phi_next - phi) < 1e-15:
            phi = phi_next
            break
        phi = phi_next
    lam = np.arctan2(x, y) + np.deg2rad(CENTRAL_MERIDIAN)
    return float(np.rad2deg(phi)), float(np.rad2deg(lam))


def inverse_many(x, y):
    """Vectorized inverse; returns (lat, lon) arrays in degrees."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lats = np.empty(x.shape, dtype=float)
    lons = np.empty(x.shape, dtype=float)
    for i in np.ndindex(x.shape):
        lats[i], lons[i] = inverse_aps(float(x[i]), float(y[i]))
    return lats, lons
