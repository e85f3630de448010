"""! @package sphere
Points and tangent vectors on S^(2n+1) in C^(n-1) x C^2, the circle and torus
actions, the one-form kappa built from a j-map and the metrics Round, h0 and
h_kappa.

Inner products are real: <a, b> = re(sum a_i conj(b_i)).
"""
import logging
import math
from collections import OrderedDict

import numpy as np

from isorb.exceptions import (
    BasePointMismatch,
    DegenerateFrame,
    DimensionMismatch,
    InvalidSpaceParams,
    NotOnSphere,
    NotTangent,
    NotUnitScalar,
    SingularPoint,
)
from isorb.jmap import TorusVector

SPHERE_TOL = 1e-12
UNIT_TOL = 1e-12
REGULAR_TOL = 1e-10
SAMPLING_REGULAR_TOL = 1e-6
FRAME_TOL = 1e-8

S1 = "S1"
T2 = "T2"

logger = logging.getLogger(__name__)


def real_inner(a, b):
    return float(np.vdot(b, a).real)


class SpaceParams:
    """! @brief Dimension and weights (n, p, q) of O(p,q) = S^(2n+1)/S^1."""

    def __init__(self, n=4, p=1, q=1):
        for name, value in (("n", n), ("p", p), ("q", q)):
            if not isinstance(value, int) or isinstance(value, bool):
                raise InvalidSpaceParams("{} must be an integer, got {!r}".format(name, value))
        if n < 4:
            raise InvalidSpaceParams("n must be >= 4, got {}".format(n))
        if p < 1 or q < 1:
            raise InvalidSpaceParams("weights must be positive, got p={} q={}".format(p, q))
        if math.gcd(p, q) != 1:
            raise InvalidSpaceParams("p={} and q={} are not coprime".format(p, q))
        self.n = n
        self.p = p
        self.q = q

    @property
    def m(self):
        """Matrix size of the j-maps acting on the u-component."""
        return self.n - 1

    def return_JSON(self):
        dic = OrderedDict()
        dic["n"] = self.n
        dic["p"] = self.p
        dic["q"] = self.q
        return dic

    def __eq__(self, other):
        return isinstance(other, SpaceParams) and (self.n, self.p, self.q) == (
            other.n,
            other.p,
            other.q,
        )

    def __repr__(self):
        return "SpaceParams(n={}, p={}, q={})".format(self.n, self.p, self.q)


class SpherePoint:
    """! @brief Point (u, v) of the unit sphere, u in C^(n-1), v in C^2."""

    def __init__(self, u, v, tol=SPHERE_TOL):
        u = np.array(u, dtype=complex)
        v = np.array(v, dtype=complex)
        if u.ndim != 1 or v.shape != (2,):
            raise DimensionMismatch("u in C^k, v in C^2", (u.shape, v.shape), "sphere point")
        norm_sq = float(np.vdot(u, u).real + np.vdot(v, v).real)
        if abs(norm_sq - 1.0) > tol:
            raise NotOnSphere(norm_sq)
        u.setflags(write=False)
        v.setflags(write=False)
        self.u = u
        self.v = v

    @classmethod
    def normalized(cls, coords, k):
        """Projects a nonzero vector of C^(k+2) onto the sphere; k = len(u)."""
        coords = np.asarray(coords, dtype=complex)
        coords = coords / np.linalg.norm(coords)
        return cls(coords[:k], coords[k:])

    @property
    def coords(self):
        return np.concatenate([self.u, self.v])

    def u_norm_sq(self):
        return float(np.vdot(self.u, self.u).real)

    def v_abs_sq(self):
        return np.abs(self.v) ** 2

    def distance(self, other):
        return float(np.max(np.abs(self.coords - other.coords)))

    def require_regular(self, tol=REGULAR_TOL):
        """Raises SingularPoint unless u != 0, v1 != 0 and v2 != 0."""
        if math.sqrt(self.u_norm_sq()) <= tol:
            raise SingularPoint("|u|", math.sqrt(self.u_norm_sq()))
        for k in range(2):
            if abs(self.v[k]) <= tol:
                raise SingularPoint("|v{}|".format(k + 1), abs(self.v[k]))

    def is_regular(self, tol=REGULAR_TOL):
        try:
            self.require_regular(tol)
        except SingularPoint:
            return False
        return True

    def __repr__(self):
        return "SpherePoint(u={}, v={})".format(self.u, self.v)


class TangentVector:
    """! @brief Tangent vector (U, V) at a sphere point."""

    def __init__(self, base, U, V, tol=SPHERE_TOL):
        U = np.array(U, dtype=complex)
        V = np.array(V, dtype=complex)
        if U.shape != base.u.shape or V.shape != (2,):
            raise DimensionMismatch(
                (base.u.shape, (2,)), (U.shape, V.shape), "tangent vector"
            )
        radial = real_inner(np.concatenate([U, V]), base.coords)
        scale = max(1.0, float(np.linalg.norm(U)) + float(np.linalg.norm(V)))
        if abs(radial) > tol * scale:
            raise NotTangent(radial)
        U.setflags(write=False)
        V.setflags(write=False)
        self.base = base
        self.U = U
        self.V = V

    @classmethod
    def from_coords(cls, base, coords):
        k = len(base.u)
        return cls(base, coords[:k], coords[k:])

    @classmethod
    def zero(cls, base):
        return cls(base, np.zeros_like(base.u), np.zeros(2, dtype=complex))

    @property
    def coords(self):
        return np.concatenate([self.U, self.V])

    def real_coords(self):
        c = self.coords
        return np.concatenate([c.real, c.imag])

    def _check_base(self, other):
        d = self.base.distance(other.base)
        if d > SPHERE_TOL:
            raise BasePointMismatch(d)

    def __add__(self, other):
        self._check_base(other)
        return TangentVector(self.base, self.U + other.U, self.V + other.V)

    def __sub__(self, other):
        self._check_base(other)
        return TangentVector(self.base, self.U - other.U, self.V - other.V)

    def __mul__(self, s):
        return TangentVector(self.base, s * self.U, s * self.V)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def norm(self):
        return float(np.linalg.norm(self.coords))

    def __repr__(self):
        return "TangentVector(U={}, V={})".format(self.U, self.V)


class MetricSpec:
    """! @brief One of the metrics Round, H0 or HKappa(j)."""

    ROUND = "Round"
    H0 = "H0"
    HKAPPA = "HKappa"

    def __init__(self, kind, j=None):
        if kind not in (self.ROUND, self.H0, self.HKAPPA):
            raise ValueError("Unknown metric kind: {}".format(kind))
        if (kind == self.HKAPPA) != (j is not None):
            raise ValueError("HKappa needs a j-map, other metrics take none")
        self.kind = kind
        self.j = j

    @classmethod
    def round(cls):
        return cls(cls.ROUND)

    @classmethod
    def h0(cls):
        return cls(cls.H0)

    @classmethod
    def hkappa(cls, j):
        return cls(cls.HKAPPA, j)

    def __repr__(self):
        return "MetricSpec({})".format(self.kind)


def _check_unit(sigma):
    if abs(abs(sigma) - 1.0) > UNIT_TOL:
        raise NotUnitScalar(sigma)


def s1_act(params, sigma, x):
    _check_unit(sigma)
    k = len(x.u)
    return SpherePoint.normalized(
        np.concatenate([sigma ** params.p * x.u, sigma ** params.q * x.v]), k
    )


def s1_push(params, sigma, X):
    """Differential of the circle action: (U, V) -> (sigma^p U, sigma^q V)."""
    _check_unit(sigma)
    base = s1_act(params, sigma, X.base)
    return TangentVector(base, sigma ** params.p * X.U, sigma ** params.q * X.V)


def t2_act(sigma1, sigma2, x):
    _check_unit(sigma1)
    _check_unit(sigma2)
    k = len(x.u)
    return SpherePoint.normalized(
        np.concatenate([x.u, [sigma1 * x.v[0], sigma2 * x.v[1]]]), k
    )


def t2_push(sigma1, sigma2, X):
    base = t2_act(sigma1, sigma2, X.base)
    return TangentVector(base, X.U, [sigma1 * X.V[0], sigma2 * X.V[1]])


def fundamental_vector(z, x):
    """Generator (0, i z1 v1, i z2 v2) of the torus action along Z."""
    return TangentVector(
        x, np.zeros_like(x.u), [1j * z.z1 * x.v[0], 1j * z.z2 * x.v[1]]
    )


def s1_vertical(params, x):
    return TangentVector(x, 1j * params.p * x.u, 1j * params.q * x.v)


def s1_vertical_norm_sq(params, x):
    """p^2 |u|^2 + q^2 |v|^2."""
    return params.p ** 2 * x.u_norm_sq() + params.q ** 2 * float(np.sum(x.v_abs_sq()))


def kappa_eval(j, x, X):
    """! @brief kappa^k = |u|^2 <j_k u, U> - <U, iu> <j_k u, iu>."""
    if j.m != len(x.u):
        raise DimensionMismatch(len(x.u), j.m, "j-map acting on u")
    u = x.u
    iu = 1j * u
    u_sq = x.u_norm_sq()
    u_phase = real_inner(X.U, iu)
    values = []
    for jk in (j.j1.matrix, j.j2.matrix):
        jku = jk @ u
        values.append(u_sq * real_inner(jku, X.U) - u_phase * real_inner(jku, iu))
    return TorusVector(*values)


def kappa_star(j, X):
    """Fundamental vector of kappa(X) at the base point of X."""
    return fundamental_vector(kappa_eval(j, X.base, X), X.base)


def _h0(params, X, Y):
    w = s1_vertical(params, X.base).coords
    big_w = s1_vertical_norm_sq(params, X.base)
    xw = real_inner(X.coords, w)
    yw = real_inner(Y.coords, w)
    return real_inner(X.coords, Y.coords) - xw * yw / big_w + xw * yw / big_w ** 2


def metric_eval(params, spec, X, Y):
    """! @brief Evaluates a metric on two tangent vectors at one base point.

    h0 rescales the S^1-vertical part by (p^2 |u|^2 + q^2 |v|^2)^-1 so that
    s1_vertical has unit length; h_kappa(X, Y) = h0(X + kappa(X)*, Y + kappa(Y)*).
    """
    X._check_base(Y)
    if spec.kind == MetricSpec.ROUND:
        return real_inner(X.coords, Y.coords)
    if spec.kind == MetricSpec.H0:
        return _h0(params, X, Y)
    return _h0(params, X + kappa_star(spec.j, X), Y + kappa_star(spec.j, Y))


def metric_gram(params, spec, vectors):
    k = len(vectors)
    g = np.zeros((k, k))
    for a in range(k):
        for b in range(a, k):
            g[a, b] = g[b, a] = metric_eval(params, spec, vectors[a], vectors[b])
    return g


def vertical_vectors(params, group, x):
    if group == S1:
        return [s1_vertical(params, x)]
    if group == T2:
        return [
            fundamental_vector(TorusVector(1.0, 0.0), x),
            fundamental_vector(TorusVector(0.0, 1.0), x),
        ]
    raise ValueError("Unknown group: {}".format(group))


def horizontal_project(params, group, X):
    """! @brief Removes the Round-orthogonal projection onto the vertical span.

    The span may drop rank at non-regular points; least squares projects onto
    the span actually present.
    """
    verticals = vertical_vectors(params, group, X.base)
    a = np.array([v.real_coords() for v in verticals]).T
    x = X.real_coords()
    coef = np.linalg.lstsq(a, x, rcond=None)[0]
    r = x - a @ coef
    k = len(r) // 2
    return TangentVector.from_coords(X.base, r[:k] + 1j * r[k:])


def volume_ratio(params, spec, reference, x, frame):
    """! @brief det(Gram_spec(frame)) / det(Gram_reference(frame))."""
    dim = 2 * (len(x.u) + 2) - 1
    if len(frame) != dim:
        raise DimensionMismatch(dim, len(frame), "frame")
    round_gram = metric_gram(params, MetricSpec.round(), frame)
    scale = np.prod([max(v.norm(), 1e-300) ** 2 for v in frame])
    normalized_det = float(np.linalg.det(round_gram)) / scale
    if normalized_det < FRAME_TOL:
        raise DegenerateFrame(normalized_det, FRAME_TOL)
    sign_a, logdet_a = np.linalg.slogdet(metric_gram(params, spec, frame))
    sign_b, logdet_b = np.linalg.slogdet(metric_gram(params, reference, frame))
    return float(sign_a * sign_b * np.exp(logdet_a - logdet_b))


def volume_density_ratio(params, j, x, frame):
    """Volume density of h_kappa relative to h0; equal to 1 for every kappa."""
    return volume_ratio(params, MetricSpec.hkappa(j), MetricSpec.h0(), x, frame)


def s1_orbit_length(params, spec, x, nodes=64):
    """! @brief Metric length of the circle orbit through x.

    The speed is evaluated at equally spaced angles; the trapezoidal rule is
    spectrally accurate for this periodic integrand.
    """
    total = 0.0
    for k in range(nodes):
        sigma = np.exp(2j * math.pi * k / nodes)
        w = s1_vertical(params, s1_act(params, sigma, x))
        total += math.sqrt(metric_eval(params, spec, w, w))
    return 2 * math.pi * total / nodes


def random_point(params, rng):
    g = rng.normal(size=params.n + 1) + 1j * rng.normal(size=params.n + 1)
    return SpherePoint.normalized(g, params.n - 1)


def random_regular_point(params, rng, tol=SAMPLING_REGULAR_TOL):
    while True:
        x = random_point(params, rng)
        if x.is_regular(tol):
            return x


def random_tangent(x, rng):
    k = len(x.u) + 2
    g = rng.normal(size=k) + 1j * rng.normal(size=k)
    g = g - real_inner(g, x.coords) * x.coords
    return TangentVector.from_coords(x, g)


def random_frame(x, rng):
    """! @brief Random Round-orthonormal frame of the tangent space at x.

    Orthonormalizing keeps the Gram determinants well conditioned; the volume
    ratio does not depend on the frame.
    """
    vectors = [random_tangent(x, rng) for _ in range(2 * (len(x.u) + 2) - 1)]
    q, _ = np.linalg.qr(np.array([v.real_coords() for v in vectors]).T)
    k = len(x.u) + 2
    frame = []
    for column in q.T:
        c = column[:k] + 1j * column[k:]
        frame.append(TangentVector.from_coords(x, c - real_inner(c, x.coords) * x.coords))
    return frame
