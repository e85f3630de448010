"""! @package forms
One-form fields on the sphere and a finite-difference exterior derivative.

The derivative d eta(X1, X2) at x is approximated by the circulation of eta
around the image of the square [0, h]^2 under
s(t1, t2) = (x + t1 X1 + t2 X2) / |x + t1 X1 + t2 X2|, divided by h^2.
The edge integrals use Gauss-Legendre quadrature and the exact tangent of the
surface, so the only error is the O(h) curvature term of the square.
"""
import logging

import numpy as np
from numpy.polynomial.legendre import leggauss

from isorb.exceptions import SingularPoint, StepTooLarge
from isorb.jmap import TorusVector
from isorb.sphere import (
    SAMPLING_REGULAR_TOL,
    SpherePoint,
    TangentVector,
    real_inner,
)

QUADRATURE_NODES = 8

logger = logging.getLogger(__name__)


def _as_array(value):
    if isinstance(value, TorusVector):
        return value.as_array()
    return np.atleast_1d(np.asarray(value, dtype=float))


class OneFormField:
    """! @brief A real or t-valued one-form given by evaluator(x, X).

    domain_restriction optionally names the orbit stratum whose preimage the
    form is meant to be restricted to; it is informational for reports.
    """

    def __init__(self, evaluator, domain_restriction=None, name=""):
        self.evaluator = evaluator
        self.domain_restriction = domain_restriction
        self.name = name

    def __call__(self, x, X):
        return _as_array(self.evaluator(x, X))

    def linearity_residual(self, x, X, Y, s=1.7, t=-0.4):
        """max |eta(sX + tY) - s eta(X) - t eta(Y)|."""
        combined = X * s + Y * t
        return float(
            np.max(np.abs(self(x, combined) - s * self(x, X) - t * self(x, Y)))
        )

    def __repr__(self):
        return "OneFormField({})".format(
            self.name or getattr(self.evaluator, "__name__", "form")
        )


def _surface(x, X1, X2, t1, t2):
    """Surface point and its two coordinate tangents at (t1, t2)."""
    k = len(x.u)
    c = x.coords + t1 * X1.coords + t2 * X2.coords
    r = np.linalg.norm(c)
    c_hat = c / r
    point = SpherePoint(c_hat[:k], c_hat[k:])
    tangents = []
    for d in (X1.coords, X2.coords):
        t = (d - real_inner(d, c_hat) * c_hat) / r
        t = t - real_inner(t, c_hat) * c_hat
        tangents.append(TangentVector.from_coords(point, t))
    return point, tangents


def circulation(form, x, X1, X2, h, nodes=QUADRATURE_NODES):
    """! @brief Line integral of form around the boundary of s([0, h]^2),
    counterclockwise in (t1, t2).
    """
    ref_nodes, ref_weights = leggauss(nodes)
    taus = h * (ref_nodes + 1) / 2
    weights = h * ref_weights / 2
    # (start point, direction in (t1, t2), index of the moving coordinate)
    edges = (
        ((0.0, 0.0), 1.0, 0),
        ((h, 0.0), 1.0, 1),
        ((h, h), -1.0, 0),
        ((0.0, h), -1.0, 1),
    )
    total = None
    for start, sign, axis in edges:
        for tau, weight in zip(taus, weights):
            t = list(start)
            t[axis] += sign * tau
            point, tangents = _surface(x, X1, X2, t[0], t[1])
            if not point.is_regular(SAMPLING_REGULAR_TOL):
                raise StepTooLarge(h)
            try:
                value = form(point, tangents[axis])
            except SingularPoint:
                raise StepTooLarge(h)
            contribution = sign * weight * value
            total = contribution if total is None else total + contribution
    return total


def fd_exterior_derivative(form, x, X1, X2, h):
    """First-order approximation of d eta(X1, X2) at x."""
    if h <= 0:
        raise ValueError("Step must be positive, got {}".format(h))
    return circulation(form, x, X1, X2, h) / h ** 2


def richardson_exterior_derivative(form, x, X1, X2, h):
    """! @brief Second-order estimate 2 D(h/2) - D(h) of d eta(X1, X2)."""
    coarse = fd_exterior_derivative(form, x, X1, X2, h)
    fine = fd_exterior_derivative(form, x, X1, X2, h / 2)
    return 2 * fine - coarse
