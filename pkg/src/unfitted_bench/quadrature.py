"""Reference quadrature rules.

Symmetric rules on the unit triangle (0,0)-(1,0)-(0,1) for polynomial
degrees up to 6, and Gauss-Legendre rules on the unit segment.  Weights
of the triangle rules are stored normalised to sum to one, so a rule
mapped to a physical triangle T uses weights ``w * |T|``.
"""

from __future__ import annotations

import numpy as np

__all__ = ["triangle_rule", "segment_rule", "map_to_triangle", "fan_triangulate"]


def _orbit3(a):
    return [(a, a), (1.0 - 2.0 * a, a), (a, 1.0 - 2.0 * a)]


def _orbit6(a, b):
    c = 1.0 - a - b
    return [(a, b), (b, a), (a, c), (c, a), (b, c), (c, b)]


def _build_rules():
    rules = {}
    rules[1] = (np.array([(1.0 / 3.0, 1.0 / 3.0)]), np.array([1.0]))

    pts = _orbit3(1.0 / 6.0)
    rules[2] = (np.array(pts), np.full(3, 1.0 / 3.0))

    # Dunavant degree 4, two three-point orbits.
    a1, w1 = 0.445948490915965, 0.223381589678011
    a2, w2 = 0.091576213509771, 0.109951743655322
    pts = _orbit3(a1) + _orbit3(a2)
    wts = np.array([w1] * 3 + [w2] * 3)
    rules[4] = (np.array(pts), wts)

    # Dunavant degree 6, two three-point orbits and one six-point orbit.
    a1, w1 = 0.063089014491502, 0.050844906370207
    a2, w2 = 0.249286745170910, 0.116786275726379
    a3, b3, w3 = 0.053145049844816, 0.310352451033785, 0.082851075618374
    pts = _orbit3(a1) + _orbit3(a2) + _orbit6(a3, b3)
    wts = np.array([w1] * 3 + [w2] * 3 + [w3] * 6)
    rules[6] = (np.array(pts), wts)

    # Tabulated weights carry ~1e-15 rounding; normalise so sums are exact.
    for deg, (p, w) in rules.items():
        rules[deg] = (p, w / w.sum())
    return rules


_TRIANGLE_RULES = _build_rules()


def triangle_rule(degree: int):
    """Return (points, weights) exact for polynomials up to ``degree``.

    Points are reference coordinates on the unit triangle, weights sum
    to one.  The smallest stored rule with sufficient exactness is
    selected.
    """
    for deg in sorted(_TRIANGLE_RULES):
        if deg >= degree:
            pts, wts = _TRIANGLE_RULES[deg]
            return pts.copy(), wts.copy()
    raise ValueError(f"no triangle rule of degree {degree} (max 6)")


def segment_rule(npoints: int):
    """Gauss-Legendre rule on [0, 1] with ``npoints`` points."""
    t, w = np.polynomial.legendre.leggauss(npoints)
    return 0.5 * (t + 1.0), 0.5 * w


def map_to_triangle(coords, degree: int):
    """Map a reference rule to the triangle with corner array ``coords``.

    Returns physical points and weights; weights sum to the triangle
    area (signed areas are rejected, corner order must be CCW).
    """
    pts, wts = triangle_rule(degree)
    v0 = coords[0]
    jac = np.stack([coords[1] - v0, coords[2] - v0], axis=1)
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    if det <= 0.0:
        raise ValueError("triangle corners must be counter-clockwise")
    phys = v0 + pts @ jac.T
    return phys, wts * (0.5 * det)


def fan_triangulate(polygon):
    """Split a convex polygon (ndarray (k, 2), k >= 3) into triangles."""
    tris = []
    for i in range(1, len(polygon) - 1):
        tris.append(np.array([polygon[0], polygon[i], polygon[i + 1]]))
    return tris
