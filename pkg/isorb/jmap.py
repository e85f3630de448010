"""! @package jmap
Linear maps j: t = R^2 -> su(m), stored as the pair (j1, j2) = (j(Z1), j(Z2)).

Decides isospectrality and genericity, computes the trace-word invariants used
to certify non-equivalence, and constructs intertwiners A_Z in SU(m) with
j'_Z = A_Z j_Z A_Z^-1.
"""
import json
import logging
import math
from collections import OrderedDict
from functools import cmp_to_key
from itertools import product

import numpy as np
import scipy.linalg

from isorb.exceptions import (
    DegenerateAlignmentFailed,
    DimensionMismatch,
    NonRealResult,
    NotSkewHermitian,
    NotTraceless,
    SchemaError,
    SpectraDiffer,
)
from isorb.su_algebra import (
    DEFAULT_RANK_TOL,
    DEFAULT_TOL,
    SuElement,
    commutant_dimension,
    random_su,
    remove_determinant_phase,
    validate_su,
)
from isorb.utils import canonical_json, json_parser

DEFAULT_ISOSPECTRAL_TOL = 1e-8
CERTIFICATE_THRESHOLD = 1e-7
INVARIANT_DECIMALS = 9
INVARIANT_TIE_TOL = 1e-9

# Cyclic-word representatives of length 2..4 in the letters 1 = j1, 2 = j2.
# Length-1 words are omitted: their traces vanish on su(m).
TRACE_WORDS = (
    "11",
    "12",
    "22",
    "111",
    "112",
    "122",
    "222",
    "1111",
    "1112",
    "1122",
    "1212",
    "1222",
    "2222",
)

logger = logging.getLogger(__name__)


class TorusVector:
    """! @brief Element Z = z1 Z1 + z2 Z2 of the torus Lie algebra t."""

    def __init__(self, z1, z2):
        self.z1 = float(z1)
        self.z2 = float(z2)

    @classmethod
    def from_array(cls, z):
        return cls(z[0], z[1])

    def as_array(self):
        return np.array([self.z1, self.z2])

    def norm(self):
        return math.hypot(self.z1, self.z2)

    def __add__(self, other):
        return TorusVector(self.z1 + other.z1, self.z2 + other.z2)

    def __mul__(self, s):
        return TorusVector(s * self.z1, s * self.z2)

    __rmul__ = __mul__

    def __iter__(self):
        return iter((self.z1, self.z2))

    def __repr__(self):
        return "TorusVector({!r}, {!r})".format(self.z1, self.z2)


class DihedralSymmetry:
    """! @brief Element of the signed-swap group E of t.

    Stored as the integer matrix whose k-th column holds the coordinates of
    the image of Z_k; every column is one of +-Z1, +-Z2.
    """

    def __init__(self, matrix):
        m = np.array(matrix, dtype=int)
        if m.shape != (2, 2) or sorted(np.abs(m).sum(axis=0)) != [1, 1]:
            raise ValueError("Not a signed permutation matrix: {}".format(m.tolist()))
        if sorted(np.abs(m).sum(axis=1)) != [1, 1]:
            raise ValueError("Not a signed permutation matrix: {}".format(m.tolist()))
        m.setflags(write=False)
        self.matrix = m

    @classmethod
    def group(cls):
        """All eight elements, identity first."""
        elements = []
        for swap in (False, True):
            for s1, s2 in product((1, -1), repeat=2):
                if swap:
                    elements.append(cls([[0, s2], [s1, 0]]))
                else:
                    elements.append(cls([[s1, 0], [0, s2]]))
        return elements

    @property
    def images(self):
        return (
            TorusVector.from_array(self.matrix[:, 0]),
            TorusVector.from_array(self.matrix[:, 1]),
        )

    def apply(self, z):
        return TorusVector.from_array(self.matrix @ z.as_array())

    def compose(self, other):
        """Returns self o other."""
        return DihedralSymmetry(self.matrix @ other.matrix)

    def inverse(self):
        return DihedralSymmetry(self.matrix.T)

    def act_on(self, j):
        """Returns the map Z -> j(Psi(Z))."""
        m = self.matrix
        images = []
        for k in range(2):
            images.append(float(m[0, k]) * j.j1.matrix + float(m[1, k]) * j.j2.matrix)
        return JMap(images[0], images[1])

    def __eq__(self, other):
        return isinstance(other, DihedralSymmetry) and np.array_equal(
            self.matrix, other.matrix
        )

    def __hash__(self):
        return hash(self.matrix.tobytes())

    def __repr__(self):
        return "DihedralSymmetry({})".format(self.matrix.tolist())


class JMap:
    """! @brief Linear map t -> su(m) given by j1 = j(Z1), j2 = j(Z2), m >= 3."""

    def __init__(self, j1, j2):
        j1 = j1 if isinstance(j1, SuElement) else SuElement(j1)
        j2 = j2 if isinstance(j2, SuElement) else SuElement(j2)
        if j1.m != j2.m:
            raise DimensionMismatch(j1.m, j2.m, "j-map components")
        if j1.m < 3:
            raise DimensionMismatch("m >= 3", j1.m, "j-map")
        self.j1 = j1
        self.j2 = j2

    @property
    def m(self):
        return self.j1.m

    @classmethod
    def zero(cls, m):
        return cls(SuElement.zero(m), SuElement.zero(m))

    @classmethod
    def random(cls, m, rng, scale=1.0):
        return cls(random_su(m, rng, scale), random_su(m, rng, scale))

    def components(self):
        return (self.j1, self.j2)

    def conjugated(self, a):
        """Returns A j A^-1 applied to both components."""
        return JMap(self.j1.conjugated(a), self.j2.conjugated(a))

    def complex_conjugate(self):
        return JMap(self.j1.complex_conjugate(), self.j2.complex_conjugate())

    def scaled(self, s):
        return JMap(self.j1.scaled(s), self.j2.scaled(s))

    def return_JSON(self):
        dic = OrderedDict()
        dic["m"] = self.m
        dic["j1"] = _matrix_to_pairs(self.j1.matrix)
        dic["j2"] = _matrix_to_pairs(self.j2.matrix)
        return dic

    def __repr__(self):
        return "JMap(m={})".format(self.m)


def _matrix_to_pairs(matrix):
    return [[[float(z.real), float(z.imag)] for z in row] for row in matrix]


def _pairs_to_matrix(rows, m, field):
    if not isinstance(rows, list) or len(rows) != m:
        raise SchemaError(field, "expected {} rows".format(m))
    matrix = np.zeros((m, m), dtype=complex)
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != m:
            raise SchemaError(field, "row {} must have {} entries".format(r, m))
        for c, entry in enumerate(row):
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not all(
                    isinstance(x, (int, float)) and not isinstance(x, bool)
                    for x in entry
                )
            ):
                raise SchemaError(
                    field, "entry [{}][{}] must be a [re, im] number pair".format(r, c)
                )
            matrix[r, c] = complex(entry[0], entry[1])
    return matrix


def jmap_from_JSON(dic, tol=DEFAULT_TOL):
    """! @brief Builds a JMap from its JSON dictionary, validating the schema."""
    if not isinstance(dic, dict):
        raise SchemaError("<root>", "expected a JSON object")
    for key in ("m", "j1", "j2"):
        if key not in dic:
            raise SchemaError(key, "missing")
    m = dic["m"]
    if not isinstance(m, int) or isinstance(m, bool) or m < 3:
        raise SchemaError("m", "must be an integer >= 3")
    components = []
    for key in ("j1", "j2"):
        matrix = _pairs_to_matrix(dic[key], m, key)
        try:
            components.append(validate_su(matrix, tol))
        except (NotSkewHermitian, NotTraceless) as e:
            raise SchemaError(key, str(e).strip())
    return JMap(*components)


def jmap_to_string(j):
    return canonical_json(j.return_JSON())


def read_jmap(filename, tol=DEFAULT_TOL):
    try:
        dic = json_parser(filename)
    except json.JSONDecodeError as e:
        raise SchemaError("<root>", "not valid JSON: {}".format(e))
    return jmap_from_JSON(dic, tol)


def evaluate(j, z):
    """Returns j_Z = z1 j1 + z2 j2."""
    return SuElement(z.z1 * j.j1.matrix + z.z2 * j.j2.matrix)


def sample_directions(m):
    """m + 1 pairwise non-proportional unit directions (cos t_i, sin t_i),
    t_i = i pi / (m + 2).
    """
    return [
        TorusVector(math.cos(i * math.pi / (m + 2)), math.sin(i * math.pi / (m + 2)))
        for i in range(m + 1)
    ]


def _check_same_m(j, j2):
    if j.m != j2.m:
        raise DimensionMismatch(j.m, j2.m, "j-map pair")


def spectral_deviation(j, j2):
    """! @brief Largest deviation between sorted spectra of -i j_Z and -i j'_Z
    over the sample directions.

    Each coefficient of the characteristic polynomial of j_Z is homogeneous of
    degree <= m in (z1, z2), so agreement on m + 1 distinct lines implies
    agreement for every Z.
    """
    _check_same_m(j, j2)
    deviation = 0.0
    for z in sample_directions(j.m):
        d = np.max(np.abs(evaluate(j, z).eigenvalues() - evaluate(j2, z).eigenvalues()))
        deviation = max(deviation, float(d))
    return deviation


def is_isospectral_pair(j, j2, tol=DEFAULT_ISOSPECTRAL_TOL):
    return spectral_deviation(j, j2) <= tol


def is_generic(j, rank_tol=DEFAULT_RANK_TOL):
    """True iff no nonzero element of su(m) commutes with both j1 and j2."""
    return commutant_dimension([j.j1, j.j2], rank_tol) == 0


def trace_invariant(j):
    """! @brief tr((j1^2 + j2^2)^2), a real number."""
    s = j.j1.matrix @ j.j1.matrix + j.j2.matrix @ j.j2.matrix
    t = np.trace(s @ s)
    if abs(t.imag) > 1e-10 * max(1.0, abs(t.real)):
        raise NonRealResult(abs(t.imag), 1e-10)
    return float(t.real)


def _word_traces(j):
    letters = {"1": j.j1.matrix, "2": j.j2.matrix}
    traces = []
    for word in TRACE_WORDS:
        w = np.eye(j.m, dtype=complex)
        for letter in word:
            w = w @ letters[letter]
        traces.append(np.trace(w))
    return traces


def _raw_invariant_vector(j):
    values = [trace_invariant(j)]
    for t in _word_traces(j):
        values.extend([float(t.real), float(t.imag)])
    return values


def _tolerant_compare(a, b):
    """Lexicographic order; entries within INVARIANT_TIE_TOL (relative) compare equal."""
    for x, y in zip(a, b):
        if abs(x - y) > INVARIANT_TIE_TOL * max(1.0, abs(x), abs(y)):
            return -1 if x < y else 1
    return 0


def invariant_names():
    names = ["tr((j1^2+j2^2)^2)"]
    for word in TRACE_WORDS:
        label = "tr(" + " ".join("j" + letter for letter in word) + ")"
        names.extend(["re " + label, "im " + label])
    return names


class EquivalenceInvariants:
    """! @brief Trace-word values canonicalized over E and complex conjugation.

    The first entry is tr((j1^2+j2^2)^2), which is itself E- and Q-invariant;
    the remaining entries are the real and imaginary parts of the traces of
    TRACE_WORDS, taken from the lexicographically smallest vector among the
    16 images of j under E x {1, Q}, with near-ties treated as equal.
    """

    def __init__(self, values):
        self.names = invariant_names()
        self.values = np.array(values, dtype=float)

    def as_dict(self):
        return OrderedDict(zip(self.names, self.values.tolist()))


def equivalence_invariants(j):
    candidates = []
    for psi in DihedralSymmetry.group():
        moved = psi.act_on(j)
        candidates.append(_raw_invariant_vector(moved))
        candidates.append(_raw_invariant_vector(moved.complex_conjugate()))
    best = min(candidates, key=cmp_to_key(_tolerant_compare))
    # + 0.0 turns -0.0 into 0.0
    return EquivalenceInvariants(np.round(best, INVARIANT_DECIMALS) + 0.0)


class Inconclusive:
    kind = "inconclusive"

    def return_JSON(self):
        dic = OrderedDict()
        dic["outcome"] = self.kind
        return dic

    def __repr__(self):
        return "Inconclusive()"


class Inequivalent:
    """! @brief One-sided certificate: the two maps are not equivalent."""

    kind = "inequivalent"

    def __init__(self, name, value, other_value):
        self.name = name
        self.value = value
        self.other_value = other_value

    def return_JSON(self):
        dic = OrderedDict()
        dic["outcome"] = self.kind
        dic["witness"] = self.name
        dic["values"] = [self.value, self.other_value]
        return dic

    def __repr__(self):
        return "Inequivalent({}: {!r} != {!r})".format(
            self.name, self.value, self.other_value
        )


def non_equivalence_certificate(j, j2, threshold=CERTIFICATE_THRESHOLD):
    """! @brief Returns Inequivalent with the first differing canonical invariant,
    otherwise Inconclusive. Equivalence itself is never claimed.
    """
    _check_same_m(j, j2)
    a = equivalence_invariants(j)
    b = equivalence_invariants(j2)
    for name, x, y in zip(a.names, a.values, b.values):
        if abs(x - y) > threshold:
            return Inequivalent(name, float(x), float(y))
    return Inconclusive()


def nonisometry_verdict(j, j2, rank_tol=DEFAULT_RANK_TOL):
    """! @brief Sufficient condition for non-isometric induced metrics.

    Holds when the maps are certified inequivalent and at least one of them
    is generic.
    """
    certificate = non_equivalence_certificate(j, j2)
    generic = (is_generic(j, rank_tol), is_generic(j2, rank_tol))
    verdict = OrderedDict()
    verdict["certificate"] = certificate.return_JSON()
    verdict["generic"] = list(generic)
    verdict["non_isometric"] = certificate.kind == "inequivalent" and any(generic)
    return verdict


def _clusters(eigenvalues, tol):
    clusters = [[0]]
    for k in range(1, len(eigenvalues)):
        if eigenvalues[k] - eigenvalues[k - 1] <= tol:
            clusters[-1].append(k)
        else:
            clusters.append([k])
    return clusters


def find_intertwiner(j, j2, z, tol=DEFAULT_ISOSPECTRAL_TOL):
    """! @brief Returns A_Z in SU(m) with j'_Z = A_Z j_Z A_Z^-1.

    Eigenvectors of -i j_Z are mapped to those of -i j'_Z in sorted order.
    Inside each eigenvalue cluster (gaps <= tol) the two eigenbases are
    aligned by the unitary polar factor of their cross-Gram block, so that
    A_Z = I whenever j' = j. A numerically singular cross-Gram block leaves
    the cluster unaligned, which still maps eigenspace to eigenspace.
    """
    _check_same_m(j, j2)
    h = evaluate(j, z).hermitian()
    h2 = evaluate(j2, z).hermitian()
    w, v = np.linalg.eigh(h)
    w2, v2 = np.linalg.eigh(h2)
    deviation = float(np.max(np.abs(w - w2)))
    if deviation > tol:
        raise SpectraDiffer(deviation, tol)

    clusters = _clusters(w, tol)
    a = np.zeros((j.m, j.m), dtype=complex)
    for cluster in clusters:
        vc = v[:, cluster]
        v2c = v2[:, cluster]
        cross = vc.conj().T @ v2c
        if np.linalg.svd(cross, compute_uv=False)[-1] > 1e-8:
            rotation = scipy.linalg.polar(cross)[0].conj().T
        else:
            rotation = np.eye(len(cluster))
        a += v2c @ rotation @ vc.conj().T
    a = remove_determinant_phase(a)

    residual = float(np.max(np.abs(a @ h @ a.conj().T - h2)))
    if residual > 10 * tol:
        sizes = [len(c) for c in clusters]
        if max(sizes) > 1:
            raise DegenerateAlignmentFailed(residual, sizes)
        raise SpectraDiffer(residual, 10 * tol)
    logger.debug(
        "Intertwiner at Z=({:.4g}, {:.4g}): residual {:.3e}".format(z.z1, z.z2, residual)
    )
    return a
