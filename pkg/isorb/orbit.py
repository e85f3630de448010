"""! @package orbit
Closed-form geometry of the torus orbits in O(p,q): Gram matrices of the
torus fundamental fields, orbit areas and angles, the lattice L with its dual,
flat-torus Laplace spectra and the connection form of the torus bundle.

Every closed form comes with a numerical counterpart (quotient_gram,
fd_orbit_fields) computed from the sphere metrics directly.
"""
import logging
import math
from collections import OrderedDict
from fractions import Fraction
from itertools import product

import numpy as np

from isorb.exceptions import DomainError, NotPositiveDefinite, NotUnitScalar
from isorb.jmap import DihedralSymmetry, TorusVector
from isorb.sphere import (
    MetricSpec,
    SpherePoint,
    TangentVector,
    fundamental_vector,
    metric_gram,
    real_inner,
    s1_vertical,
    s1_vertical_norm_sq,
    t2_act,
)

SPECTRUM_OVERSHOOT = 1.1
FD_ORBIT_STEP = 1e-5

logger = logging.getLogger(__name__)


class OrbitGram:
    """! @brief Symmetric 2x2 Gram matrix of the torus fundamental fields."""

    def __init__(self, G):
        G = np.array(G, dtype=float)
        if G.shape != (2, 2):
            raise ValueError("Orbit Gram must be 2x2, got {}".format(G.shape))
        self.G = (G + G.T) / 2

    def det(self):
        return float(self.G[0, 0] * self.G[1, 1] - self.G[0, 1] * self.G[1, 0])

    def cos_angle(self):
        return float(self.G[0, 1] / math.sqrt(self.G[0, 0] * self.G[1, 1]))

    def angle(self):
        return math.acos(max(-1.0, min(1.0, self.cos_angle())))

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.G)[0])

    def scaled(self, s):
        return OrbitGram(s * self.G)

    def return_JSON(self):
        return self.G.tolist()


class OrbitStratum:
    """! @brief Orbit type O_{a,b}: |v1| = a, |v2| = b, |u| = c = sqrt(1 - a^2 - b^2)."""

    def __init__(self, a, b):
        a = float(a)
        b = float(b)
        if not (a > 0 and b > 0 and a * a + b * b < 1):
            raise DomainError(
                "Stratum needs a > 0, b > 0 and a^2 + b^2 < 1, got a={} b={}".format(a, b)
            )
        self.a = a
        self.b = b

    @property
    def c(self):
        return math.sqrt(1.0 - self.a ** 2 - self.b ** 2)

    @classmethod
    def of_point(cls, x):
        return cls(abs(x.v[0]), abs(x.v[1]))

    def sample_point(self, params, rng):
        """Random point with |v1| = a, |v2| = b and u uniform on the sphere of radius c."""
        k = params.n - 1
        g = rng.normal(size=k) + 1j * rng.normal(size=k)
        u = self.c * g / np.linalg.norm(g)
        phases = np.exp(2j * math.pi * rng.random(2))
        return SpherePoint.normalized(
            np.concatenate([u, [self.a * phases[0], self.b * phases[1]]]), k
        )

    def return_JSON(self):
        dic = OrderedDict()
        dic["a"] = self.a
        dic["b"] = self.b
        return dic

    def __repr__(self):
        return "OrbitStratum(a={!r}, b={!r})".format(self.a, self.b)


def _gram_from_moduli(params, a_sq, b_sq, u_sq):
    big_w = params.p ** 2 * u_sq + params.q ** 2 * (a_sq + b_sq)
    vv = np.array([a_sq, b_sq])
    return OrbitGram(np.diag(vv) - params.q ** 2 * np.outer(vv, vv) / big_w)


def orbit_gram(params, x):
    """! @brief G_jk = delta_jk |v_j|^2 - q^2 |v_j|^2 |v_k|^2 / (p^2 |u|^2 + q^2 |v|^2)."""
    x.require_regular()
    a_sq, b_sq = x.v_abs_sq()
    return _gram_from_moduli(params, float(a_sq), float(b_sq), x.u_norm_sq())


def stratum_gram(params, stratum):
    return _gram_from_moduli(
        params, stratum.a ** 2, stratum.b ** 2, stratum.c ** 2
    )


def general_orbit_product(params, x, A, B, sigma=(1.0, 1.0)):
    """! @brief Pull-back metric on the torus at (sigma1, sigma2), applied to A, B in t.

    Returns sum A_j B_j |v_j|^2 - q^2 (sum A_j |v_j|^2)(sum B_j |v_j|^2) / W.
    """
    for s in sigma:
        if abs(abs(s) - 1.0) > 1e-12:
            raise NotUnitScalar(s)
    y = t2_act(sigma[0], sigma[1], x)
    y.require_regular()
    vv = y.v_abs_sq()
    big_w = s1_vertical_norm_sq(params, y)
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    return float(
        np.sum(A * B * vv) - params.q ** 2 * np.dot(A, vv) * np.dot(B, vv) / big_w
    )


def orbit_area(params, x):
    return 4 * math.pi ** 2 / params.p * math.sqrt(orbit_gram(params, x).det())


def stratum_area(params, stratum):
    return 4 * math.pi ** 2 / params.p * math.sqrt(area_identity_value(params, stratum))


def area_identity_value(params, stratum):
    """a^2 b^2 (1 - q^2 (1 - c^2) / (p^2 c^2 + q^2 (1 - c^2))), which equals
    p^2 A^2 / (16 pi^4) for the orbit area A.
    """
    a, b, c = stratum.a, stratum.b, stratum.c
    rest = 1 - c ** 2
    return a ** 2 * b ** 2 * (
        1 - params.q ** 2 * rest / (params.p ** 2 * c ** 2 + params.q ** 2 * rest)
    )


def orbit_angle(params, a):
    """! @brief Angle between the two torus fields on the stratum |v1| = |v2| = a."""
    if not 0 < a < 1 / math.sqrt(2):
        raise DomainError("a must lie in (0, 1/sqrt(2)), got {}".format(a))
    p_sq, q_sq, a_sq = params.p ** 2, params.q ** 2, a ** 2
    return math.acos(-q_sq * a_sq / (p_sq * (1 - 2 * a_sq) + q_sq * a_sq))


class WeightLattice:
    """! @brief Lattice in t with basis vectors as columns and dual basis as rows.

    The dual basis satisfies dual_basis @ basis = identity. Lattices built by
    for_weight(p) additionally keep rational coordinates (basis / 2 pi and
    dual_basis * 2 pi) for exact pairing checks.
    """

    def __init__(self, basis, dual_basis=None):
        self.basis = np.array(basis, dtype=float)
        if dual_basis is None:
            dual_basis = np.linalg.inv(self.basis)
        self.dual_basis = np.array(dual_basis, dtype=float)
        self.p = None
        self._rational_basis = None
        self._rational_dual = None

    @classmethod
    def for_weight(cls, p):
        rational_basis = [[Fraction(1), Fraction(1, p)], [Fraction(0), Fraction(1, p)]]
        rational_dual = [[Fraction(1), Fraction(-1)], [Fraction(0), Fraction(p)]]
        basis = 2 * math.pi * np.array(rational_basis, dtype=float)
        dual = np.array(rational_dual, dtype=float) / (2 * math.pi)
        lattice = cls(basis, dual)
        lattice.p = p
        lattice._rational_basis = rational_basis
        lattice._rational_dual = rational_dual
        return lattice

    def pairing(self):
        return self.dual_basis @ self.basis

    def exact_pairing(self):
        """Pairing matrix in rational arithmetic (the 2 pi factors cancel)."""
        if self._rational_basis is None:
            raise ValueError("Exact pairing needs a lattice built by for_weight")
        d, b = self._rational_dual, self._rational_basis
        return [[sum(d[i][k] * b[k][j] for k in range(2)) for j in range(2)] for i in range(2)]

    def covolume(self):
        return abs(float(np.linalg.det(self.basis)))

    def contains(self, z, tol=1e-9):
        coeffs = self.dual_basis @ np.asarray(z, dtype=float)
        return bool(np.all(np.abs(coeffs - np.round(coeffs)) <= tol))

    def dual_vector(self, k):
        """Covector k1 * dual_1 + k2 * dual_2 in coordinates against Z1, Z2."""
        return np.asarray(k, dtype=float) @ self.dual_basis

    def return_JSON(self):
        dic = OrderedDict()
        if self.p is not None:
            dic["p"] = self.p
        dic["basis"] = self.basis.T.tolist()
        dic["dual_basis"] = self.dual_basis.tolist()
        return dic


def dual_lattice(params):
    return WeightLattice.for_weight(params.p)


def flat_torus_spectrum(G, lattice, cutoff):
    """! @brief Laplace eigenvalues <= cutoff of the flat torus t / L with metric G.

    Eigenvalues are 4 pi^2 l G^-1 l^T for l in the dual lattice, listed with
    multiplicity in ascending order. Integer coefficient vectors k are
    enumerated inside the ball bounding the ellipsoid {4 pi^2 k M k^T <= cutoff},
    M = D G^-1 D^T, enlarged by SPECTRUM_OVERSHOOT.
    """
    lam_min = G.min_eigenvalue()
    if lam_min <= 0:
        raise NotPositiveDefinite(lam_min)
    d = lattice.dual_basis
    M = d @ np.linalg.inv(G.G) @ d.T
    M = (M + M.T) / 2
    radius = SPECTRUM_OVERSHOOT * math.sqrt(
        max(cutoff, 0.0) / (4 * math.pi ** 2 * float(np.linalg.eigvalsh(M)[0]))
    )
    bound = int(math.ceil(radius))
    values = []
    for k in product(range(-bound, bound + 1), repeat=2):
        if k[0] ** 2 + k[1] ** 2 > radius ** 2:
            continue
        kk = np.array(k, dtype=float)
        value = 4 * math.pi ** 2 * float(kk @ M @ kk)
        if value <= cutoff * (1 + 1e-12):
            values.append(value)
    values.sort()
    logger.debug(
        "Enumerated {} dual lattice vectors up to radius {:.3f}".format(len(values), radius)
    )
    return values


def connection_form_eval(params, x, X):
    """! @brief omega^j(X) = -(q/p) <U, iu> / |u|^2 + <V_j, i v_j> / |v_j|^2."""
    x.require_regular()
    base = -params.q / params.p * real_inner(X.U, 1j * x.u) / x.u_norm_sq()
    values = []
    for k in range(2):
        values.append(
            base + (X.V[k] * np.conj(1j * x.v[k])).real / abs(x.v[k]) ** 2
        )
    return TorusVector(*values)


def torus_fields(x):
    return [
        fundamental_vector(TorusVector(1.0, 0.0), x),
        fundamental_vector(TorusVector(0.0, 1.0), x),
    ]


def quotient_gram(params, spec, x, fields=None):
    """! @brief Gram matrix of fields in the metric the circle quotient inherits
    from the given metric.

    Computed as the Schur complement of the S^1-vertical block, i.e. the Gram
    matrix of the parts of the fields orthogonal to the circle orbit.
    """
    if fields is None:
        fields = torus_fields(x)
    full = metric_gram(params, spec, [s1_vertical(params, x)] + list(fields))
    g_ww = full[0, 0]
    g_fw = full[1:, 0]
    return OrbitGram(full[1:, 1:] - np.outer(g_fw, g_fw) / g_ww)


def fd_orbit_fields(x, eps=FD_ORBIT_STEP):
    """! @brief Torus fundamental fields by central differences of the orbit map."""
    fields = []
    for k in range(2):
        plus = [1.0, 1.0]
        minus = [1.0, 1.0]
        plus[k] = np.exp(1j * eps)
        minus[k] = np.exp(-1j * eps)
        diff = (t2_act(*plus, x).coords - t2_act(*minus, x).coords) / (2 * eps)
        diff = diff - real_inner(diff, x.coords) * x.coords
        fields.append(TangentVector.from_coords(x, diff))
    return fields


def fd_orbit_gram(params, x):
    """Orbit Gram from numerically differentiated fields and the h0 quotient."""
    return quotient_gram(params, MetricSpec.h0(), x, fd_orbit_fields(x))


def lattice_symmetries(params):
    """! @brief Elements of the signed-swap group mapping L onto itself."""
    lattice = dual_lattice(params)
    b = lattice._rational_basis
    b_inv = lattice._rational_dual
    symmetries = []
    for psi in DihedralSymmetry.group():
        s = psi.matrix.tolist()
        moved = [
            [sum(s[i][k] * b[k][j] for k in range(2)) for j in range(2)] for i in range(2)
        ]
        coeffs = [
            [sum(b_inv[i][k] * moved[k][j] for k in range(2)) for j in range(2)]
            for i in range(2)
        ]
        if all(c.denominator == 1 for row in coeffs for c in row):
            symmetries.append(psi)
    return symmetries
