"""! @package continuation
Generation of isospectral families of j-maps by numerical continuation.

Unknowns are the real coordinates of (j1, j2) against su_basis. The
constraint map collects the power sums tr((-i j_Z)^k), k = 2..m, at the
isospectrality sample directions. A step moves along a kernel direction of
the constraint Jacobian that is orthogonal to the trivial deformations
([X, j1], [X, j2]), and a Newton corrector returns to the constraint set.
"""
import logging

import numpy as np
import scipy.linalg

from isorb.exceptions import ContinuationDiverged, DimensionMismatch
from isorb.jmap import (
    DEFAULT_ISOSPECTRAL_TOL,
    JMap,
    non_equivalence_certificate,
    sample_directions,
    spectral_deviation,
)
from isorb.su_algebra import (
    DEFAULT_RANK_TOL,
    SuElement,
    from_coordinates,
    random_special_unitary,
    random_su,
    su_basis,
    su_dimension,
    to_coordinates,
)
from isorb.utils import seeded_rng

NEWTON_MAXIT = 50
NEWTON_TOL = 1e-8
NONTRIVIAL_TOL = 1e-6
DEFAULT_RETRIES = 3

logger = logging.getLogger(__name__)


class IsospectralFamily:
    """! @brief Ordered list of pairwise isospectral j-maps.

    trivial is True when the members are only conjugates of the first one,
    retries counts the restarts used before the family was found.
    """

    def __init__(self, members, trivial=False, retries=0):
        self.members = list(members)
        self.trivial = trivial
        self.retries = retries

    def __len__(self):
        return len(self.members)

    def __getitem__(self, index):
        return self.members[index]

    def __iter__(self):
        return iter(self.members)

    def __repr__(self):
        return "IsospectralFamily(len={}, trivial={})".format(
            len(self.members), self.trivial
        )


def jmap_to_vector(j):
    return np.concatenate([to_coordinates(j.j1), to_coordinates(j.j2)])


def vector_to_jmap(x, m):
    d = su_dimension(m)
    return JMap(from_coordinates(x[:d], m), from_coordinates(x[d:], m))


def _hermitian_at(j1, j2, z):
    return -1j * (z.z1 * j1 + z.z2 * j2)


def power_sums(j):
    """tr((-i j_Z)^k) for k = 2..m at every sample direction, flattened."""
    values = []
    for z in sample_directions(j.m):
        h = _hermitian_at(j.j1.matrix, j.j2.matrix, z)
        hk = h
        for _ in range(2, j.m + 1):
            hk = hk @ h
            values.append(np.trace(hk).real)
    return np.array(values)


def constraint_map(j, target):
    return power_sums(j) - target


def constraint_jacobian(j):
    """! @brief Jacobian of power_sums with respect to jmap_to_vector.

    d tr(H^k) = k tr(H^(k-1) dH) with dH = -i z_c B_a for the basis element
    B_a in component c.
    """
    m = j.m
    basis = su_basis(m)
    rows = []
    for z in sample_directions(m):
        h = _hermitian_at(j.j1.matrix, j.j2.matrix, z)
        powers = [np.eye(m, dtype=complex)]
        for _ in range(m - 1):
            powers.append(powers[-1] @ h)
        for k in range(2, m + 1):
            row = []
            for zc in (z.z1, z.z2):
                for b in basis:
                    row.append(k * np.trace(powers[k - 1] @ (-1j * zc * b)).real)
            rows.append(row)
    return np.array(rows)


def trivial_directions(j):
    """Coordinates of ([X, j1], [X, j2]) for X running through su_basis."""
    columns = []
    for b in su_basis(j.m):
        x = SuElement(b)
        columns.append(
            np.concatenate(
                [to_coordinates(x.commutator(j.j1)), to_coordinates(x.commutator(j.j2))]
            )
        )
    return np.array(columns).T


def nontrivial_kernel(j, rank_tol=DEFAULT_RANK_TOL):
    """! @brief Orthonormal basis of the Jacobian kernel modulo trivial deformations.

    Returns an array with one column per direction, possibly with zero columns.
    """
    kernel = scipy.linalg.null_space(constraint_jacobian(j), rcond=rank_tol)
    trivial = scipy.linalg.orth(trivial_directions(j), rcond=rank_tol)
    residual = kernel - trivial @ (trivial.T @ kernel)
    if residual.shape[1] == 0:
        return residual
    u, s, _ = np.linalg.svd(residual, full_matrices=False)
    return u[:, s > NONTRIVIAL_TOL]


def _fix_sign(d):
    k = int(np.argmax(np.abs(d)))
    return d if d[k] >= 0 else -d


def _choose_direction(directions, previous):
    if previous is not None:
        d = directions @ (directions.T @ previous)
        if np.linalg.norm(d) > NONTRIVIAL_TOL:
            return d / np.linalg.norm(d)
    return _fix_sign(directions[:, 0])


def newton_correct(x, m, target, step):
    """! @brief Minimum-norm Newton iteration back onto the constraint set."""
    scale = max(1.0, float(np.linalg.norm(target)))
    for it in range(NEWTON_MAXIT):
        j = vector_to_jmap(x, m)
        r = constraint_map(j, target)
        if np.linalg.norm(r) <= 1e-13 * scale:
            break
        dx = np.linalg.lstsq(constraint_jacobian(j), -r, rcond=None)[0]
        x = x + dx
        if np.linalg.norm(dx) <= 1e-15 * max(1.0, np.linalg.norm(x)):
            break
    j = vector_to_jmap(x, m)
    residual = float(np.linalg.norm(constraint_map(j, target)))
    logger.debug(
        "Newton corrector at step {}: {} iterations, residual {:.3e}".format(
            step, it + 1, residual
        )
    )
    if residual > NEWTON_TOL:
        raise ContinuationDiverged(step, residual)
    return j


def seed_jmap(seed, m, attempt=0):
    """! @brief Deterministic starting map for a given seed.

    Attempt 0 is a dense random pair; later attempts use a j1 with a doubly
    degenerate spectrum, conjugated by a random special unitary.
    """
    rng = seeded_rng(seed, "continuation-start-{}".format(attempt))
    if attempt == 0:
        return JMap.random(m, rng)
    d = np.ones(m)
    if m > 3:
        d[2:-1] += rng.normal(size=m - 3)
    d[-1] = -np.sum(d[:-1])
    a = random_special_unitary(m, rng)
    j1 = SuElement(a @ np.diag(1j * d) @ a.conj().T)
    return JMap(j1, random_su(m, rng))


def conjugation_orbit_family(start, steps, step_size, seed=0):
    """! @brief Family A_t j A_t^-1 with A_t = exp(t X) for a fixed X in su(m)."""
    rng = seeded_rng(seed, "conjugation-orbit")
    x = random_su(start.m, rng).matrix
    x = x / np.linalg.norm(x)
    members = [start]
    for k in range(1, steps + 1):
        a = scipy.linalg.expm(k * step_size * x)
        members.append(start.conjugated(a))
    return IsospectralFamily(members, trivial=True)


def continue_family(
    start, steps, step_size, rank_tol=DEFAULT_RANK_TOL, tol=DEFAULT_ISOSPECTRAL_TOL
):
    """! @brief Runs the continuation from start.

    Returns None when some member of the path, start included, has no
    nontrivial isospectral direction; a returned list always has steps + 1
    members.
    """
    m = start.m
    target = power_sums(start)
    members = [start]
    previous = None
    for step in range(1, steps + 1):
        current = members[-1]
        directions = nontrivial_kernel(current, rank_tol)
        if directions.shape[1] == 0:
            logger.info("No nontrivial direction at step {}".format(step))
            return None
        d = _choose_direction(directions, previous)
        predicted = jmap_to_vector(current) + step_size * d
        corrected = newton_correct(predicted, m, target, step)
        deviation = spectral_deviation(start, corrected)
        if deviation > tol:
            raise ContinuationDiverged(step, deviation)
        members.append(corrected)
        previous = d
    return members


def generate_isospectral_family(
    seed,
    m,
    steps,
    step_size,
    retries=DEFAULT_RETRIES,
    rank_tol=DEFAULT_RANK_TOL,
    tol=DEFAULT_ISOSPECTRAL_TOL,
):
    """! @brief Best-effort isospectral family of length steps + 1.

    Falls back to a conjugation-orbit family (trivial=True) if no starting
    point within the retry budget has a nontrivial isospectral direction.
    """
    if m < 3:
        raise DimensionMismatch("m >= 3", m, "isospectral family")
    if steps < 0:
        raise ValueError("steps must be non-negative, got {}".format(steps))

    if steps == 0:
        return IsospectralFamily([seed_jmap(seed, m)])

    for attempt in range(retries + 1):
        start = seed_jmap(seed, m, attempt)
        members = continue_family(start, steps, step_size, rank_tol, tol)
        if members is not None:
            family = IsospectralFamily(members, trivial=False, retries=attempt)
            _warn_if_inconclusive(family)
            return family
        logger.info(
            "Start {} has no nontrivial isospectral direction. Restarting.".format(
                attempt
            )
        )

    logger.warning(
        "No nontrivial family found after {} retries. Using conjugation orbit.".format(
            retries
        )
    )
    family = conjugation_orbit_family(seed_jmap(seed, m), steps, step_size, seed)
    family.retries = retries
    return family


def _warn_if_inconclusive(family):
    for member in family.members[1:]:
        if non_equivalence_certificate(family[0], member).kind == "inequivalent":
            return
    if len(family) > 1:
        logger.warning(
            "All members of the family are certified only as Inconclusive against the first."
        )
