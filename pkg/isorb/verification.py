"""! @package verification
Numerical verification of the hypotheses behind the isospectrality of the
metrics h_kappa and h_kappa' on O(p,q), and of the closed forms of the orbit
and curvature geometry.

Each check draws from its own random stream derived from the run seed and the
check name, and returns ReportEntry objects. verify_pair collects every check
into a VerificationReport; a failing check is an entry with passed = False,
never an exception.
"""
import datetime
import logging
import math
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from itertools import product

import numpy as np

from isorb._version import __VERSION__
from isorb.exceptions import (
    DegenerateAlignmentFailed,
    DimensionMismatch,
    DomainError,
    SpectraDiffer,
)
from isorb.forms import OneFormField, richardson_exterior_derivative
from isorb.jmap import (
    TorusVector,
    find_intertwiner,
    is_generic,
    nonisometry_verdict,
    sample_directions,
    spectral_deviation,
    trace_invariant,
)
from isorb.orbit import (
    OrbitStratum,
    connection_form_eval,
    dual_lattice,
    flat_torus_spectrum,
    orbit_gram,
    quotient_gram,
)
from isorb.sphere import (
    MetricSpec,
    SpherePoint,
    TangentVector,
    fundamental_vector,
    kappa_eval,
    metric_eval,
    random_frame,
    random_point,
    random_regular_point,
    random_tangent,
    real_inner,
    s1_push,
    s1_vertical,
    t2_push,
    volume_density_ratio,
)
from isorb.utils import canonical_json, seeded_rng

CLOSED_FORM_STRATUM_A = 0.4
INTERTWINER_RETRIES = 3
INTERTWINER_PERTURBATION = 1e-4
PERTURBATION_DIRECTION = TorusVector(0.6, 0.8)

logger = logging.getLogger(__name__)


class ReportEntry:
    """! @brief Outcome of one check: worst residual over all samples against a
    tolerance.
    """

    def __init__(
        self,
        name,
        anchor,
        group,
        sample_count,
        max_residual,
        tolerance,
        notes=None,
        details=None,
    ):
        self.name = name
        self.anchor = anchor
        self.group = group
        self.sample_count = int(sample_count)
        self.max_residual = float(max_residual)
        self.tolerance = float(tolerance)
        self.passed = bool(self.max_residual <= self.tolerance)
        self.notes = list(notes or [])
        self.details = OrderedDict(details or {})

    def return_JSON(self):
        dic = OrderedDict()
        dic["name"] = self.name
        dic["paper_anchor"] = self.anchor
        dic["sample_count"] = self.sample_count
        dic["max_residual"] = (
            self.max_residual if math.isfinite(self.max_residual) else None
        )
        dic["tolerance"] = self.tolerance
        dic["passed"] = self.passed
        if self.notes:
            dic["notes"] = self.notes
        if self.details:
            dic["details"] = self.details
        return dic

    def __repr__(self):
        return "ReportEntry({}, residual={:.3e}, passed={})".format(
            self.name, self.max_residual, self.passed
        )


class VerificationReport:
    """! @brief Checks plus run metadata; entries are kept sorted by name."""

    def __init__(self, metadata=None):
        self.metadata = OrderedDict(metadata or {})
        self.checks = []
        self.info = OrderedDict()

    def add(self, entry):
        self.checks.append(entry)
        self.checks.sort(key=lambda e: e.name)

    def extend(self, entries):
        for entry in entries:
            self.add(entry)

    @property
    def passed(self):
        return all(e.passed for e in self.checks)

    def groups(self):
        return sorted({e.group for e in self.checks})

    def failed(self):
        return [e for e in self.checks if not e.passed]

    def entry(self, name):
        for e in self.checks:
            if e.name == name:
                return e
        raise KeyError(name)

    def return_JSON(self):
        dic = OrderedDict()
        dic["metadata"] = self.metadata
        dic["checks"] = [e.return_JSON() for e in self.checks]
        dic["groups"] = self.groups()
        dic["info"] = self.info
        dic["passed"] = self.passed
        return dic

    def to_string(self):
        return canonical_json(self.return_JSON())


def _max_abs(values, current=0.0):
    return max(current, float(np.max(np.abs(values))))


def random_lift_tangent(x, rng):
    """! @brief Unit tangent vector to the preimage of the orbit type of x.

    Such vectors keep |u| and |v_j| fixed: <u, U> = 0 and V_j = t_j i v_j.
    """
    k = len(x.u)
    U = rng.normal(size=k) + 1j * rng.normal(size=k)
    U = U - real_inner(U, x.u) / x.u_norm_sq() * x.u
    V = 1j * rng.normal(size=2) * x.v
    X = TangentVector(x, U, V)
    return X * (1.0 / X.norm())


def dkappa_closed_form(j, x, X1, X2):
    """! @brief d kappa(X1, X2) for X1, X2 tangent to a preimage of an orbit type.

    2 |u|^2 <j_k U1h, U2h> - 2 <j_k u, iu> <iU1, U2> with
    Uh = U - (<U, iu> / |u|^2) iu.
    """
    u = x.u
    iu = 1j * u
    f = x.u_norm_sq()

    def horizontal(U):
        return U - real_inner(U, iu) / f * iu

    U1h = horizontal(X1.U)
    U2h = horizontal(X2.U)
    kahler = real_inner(1j * X1.U, X2.U)
    values = []
    for jk in (j.j1.matrix, j.j2.matrix):
        values.append(
            2 * f * real_inner(jk @ U1h, U2h) - 2 * real_inner(jk @ u, iu) * kahler
        )
    return np.array(values)


def curvature_closed_form(params, x, X1, X2):
    """-2 q / (p |u|^2) <iU1, U2>, the same in both torus components."""
    value = -2 * params.q / (params.p * x.u_norm_sq()) * real_inner(1j * X1.U, X2.U)
    return np.array([value, value])


def _require_diagonal_stratum(stratum):
    if abs(stratum.a - stratum.b) > 1e-12:
        raise DomainError("Closed forms need a stratum with a = b, got {}".format(stratum))


def check_dkappa_closed_form(
    j, params, stratum, samples, seed, h=1e-3, tol=1e-5, label="j"
):
    """! @brief Finite-difference d kappa against its closed form on P^-1(O_{a,a})."""
    _require_diagonal_stratum(stratum)
    name = "closed_forms.dkappa[{}]".format(label)
    rng = seeded_rng(seed, name)
    form = OneFormField(partial(kappa_eval, j), stratum, "kappa")
    residual = 0.0
    for _ in range(samples):
        x = stratum.sample_point(params, rng)
        X1 = random_lift_tangent(x, rng)
        X2 = random_lift_tangent(x, rng)
        fd = richardson_exterior_derivative(form, x, X1, X2, h)
        residual = _max_abs(fd - dkappa_closed_form(j, x, X1, X2), residual)
    return ReportEntry(
        name,
        "differential of kappa on the preimage of a diagonal orbit type",
        "closed_forms",
        samples,
        residual,
        tol,
        details={"a": stratum.a, "h": h},
    )


def _curvature_samples(params, stratum, samples, seed, h):
    _require_diagonal_stratum(stratum)
    rng = seeded_rng(seed, "closed_forms.curvature")
    form = OneFormField(partial(connection_form_eval, params), stratum, "omega0")
    computed = []
    expected = []
    for _ in range(samples):
        x = stratum.sample_point(params, rng)
        X1 = random_lift_tangent(x, rng)
        X2 = random_lift_tangent(x, rng)
        computed.append(richardson_exterior_derivative(form, x, X1, X2, h))
        expected.append(curvature_closed_form(params, x, X1, X2))
    return np.array(computed), np.array(expected)


def check_curvature_closed_form(params, stratum, samples, seed, h=1e-3, tol=1e-5):
    """! @brief Finite-difference d omega0 on P^-1(O_{a,a}) against
    -2 q / (p (1 - 2 a^2)) <iU1, U2>.
    """
    computed, expected = _curvature_samples(params, stratum, samples, seed, h)
    return ReportEntry(
        "closed_forms.curvature",
        "curvature of the torus connection restricted to a diagonal orbit type",
        "closed_forms",
        samples,
        _max_abs(computed - expected),
        tol,
        details={
            "a": stratum.a,
            "h": h,
            "max_abs_value": float(np.max(np.abs(computed))),
        },
    )


def check_kahler_components(params, stratum, samples, seed, h=1e-3, tol=1e-6):
    """Both torus components of the restricted curvature agree."""
    computed, _ = _curvature_samples(params, stratum, samples, seed, h)
    return ReportEntry(
        "closed_forms.curvature_components",
        "restricted curvature components are equal multiples of the Kaehler form",
        "closed_forms",
        samples,
        _max_abs(computed[:, 0] - computed[:, 1]),
        tol,
    )


def check_isospectrality(j, j2, tol):
    return ReportEntry(
        "isospectrality",
        "j_Z and j'_Z have equal spectra for every Z",
        "isospectrality",
        len(sample_directions(j.m)),
        spectral_deviation(j, j2),
        tol,
    )


def check_kappa_admissibility(j, params, samples, seed, tol, label="j"):
    """! @brief kappa vanishes on torus and circle generators and is invariant
    under both actions.
    """
    prefix = "admissibility.{}[" + label + "]"
    rng = seeded_rng(seed, prefix.format("kappa"))
    residuals = OrderedDict(
        [("t2_horizontal", 0.0), ("t2_invariant", 0.0), ("s1_horizontal", 0.0), ("s1_invariant", 0.0)]
    )
    for _ in range(samples):
        x = random_regular_point(params, rng)
        X = random_tangent(x, rng)
        base = kappa_eval(j, x, X).as_array()
        z = TorusVector(*rng.normal(size=2))
        residuals["t2_horizontal"] = _max_abs(
            kappa_eval(j, x, fundamental_vector(z, x)).as_array(),
            residuals["t2_horizontal"],
        )
        s1, s2 = np.exp(2j * math.pi * rng.random(2))
        pushed = t2_push(s1, s2, X)
        residuals["t2_invariant"] = _max_abs(
            kappa_eval(j, pushed.base, pushed).as_array() - base,
            residuals["t2_invariant"],
        )
        residuals["s1_horizontal"] = _max_abs(
            kappa_eval(j, x, s1_vertical(params, x)).as_array(),
            residuals["s1_horizontal"],
        )
        sigma = np.exp(2j * math.pi * rng.random())
        pushed = s1_push(params, sigma, X)
        residuals["s1_invariant"] = _max_abs(
            kappa_eval(j, pushed.base, pushed).as_array() - base,
            residuals["s1_invariant"],
        )
    anchors = {
        "t2_horizontal": "kappa vanishes on torus fundamental fields",
        "t2_invariant": "kappa is invariant under the torus action",
        "s1_horizontal": "kappa vanishes on the circle generator",
        "s1_invariant": "kappa is invariant under the circle action",
    }
    return [
        ReportEntry(
            prefix.format(key), anchors[key], "admissibility", samples, value, tol
        )
        for key, value in residuals.items()
    ]


def check_volume_preservation(j, params, samples, seed, tol, label="j"):
    name = "volume[{}]".format(label)
    rng = seeded_rng(seed, name)
    residual = 0.0
    for _ in range(samples):
        x = random_regular_point(params, rng)
        ratio = volume_density_ratio(params, j, x, random_frame(x, rng))
        residual = max(residual, abs(ratio - 1.0))
    return ReportEntry(
        name,
        "h_kappa and h0 have the same volume density",
        "volume",
        samples,
        residual,
        tol,
    )


def lattice_direction(params, mu):
    """Torus vector (mu(Z1), mu(Z2)) of the dual lattice element with coordinates mu."""
    return TorusVector(*dual_lattice(params).dual_vector(mu))


def mu_window(mu_range):
    """All nonzero integer pairs with |k1|, |k2| <= mu_range."""
    return [
        k
        for k in product(range(-mu_range, mu_range + 1), repeat=2)
        if k != (0, 0)
    ]


def _intertwiner_with_retries(j, j2, z, tol):
    notes = []
    for attempt in range(INTERTWINER_RETRIES + 1):
        try:
            return z, find_intertwiner(j, j2, z, tol), notes
        except DegenerateAlignmentFailed as e:
            logger.warning(
                "Eigenspace alignment failed at {}. Perturbing the direction.".format(z)
            )
            notes.append("alignment failed: {}".format(str(e).strip().splitlines()[-1]))
            if attempt == INTERTWINER_RETRIES:
                break
            z = z + PERTURBATION_DIRECTION * INTERTWINER_PERTURBATION
            notes.append("perturbed direction to ({!r}, {!r})".format(z.z1, z.z2))
    return z, None, notes


def _mu_kappa(j, z, x, X):
    return float(np.dot(kappa_eval(j, x, X).as_array(), z.as_array()))


def check_intertwining(j, j2, params, mu, samples, seed, tol):
    """! @brief mu o kappa = E_mu^* (mu o kappa') with E_mu = (A_Z, Id).

    Raises SpectraDiffer when the maps are not isospectral at Z.
    """
    name = "intertwining[{},{}]".format(*mu)
    anchor = "the isometry (A_Z, Id) carries mu o kappa' to mu o kappa"
    z, a, notes = _intertwiner_with_retries(j, j2, lattice_direction(params, mu), tol)
    if a is None:
        return ReportEntry(name, anchor, "intertwining", 0, float("inf"), tol, notes)
    rng = seeded_rng(seed, name)
    residual = 0.0
    for _ in range(samples):
        x = random_point(params, rng)
        X = random_tangent(x, rng)
        moved = SpherePoint(a @ x.u, x.v)
        moved_X = TangentVector(moved, a @ X.U, X.V)
        residual = max(
            residual, abs(_mu_kappa(j, z, x, X) - _mu_kappa(j2, z, moved, moved_X))
        )
    return ReportEntry(
        name,
        anchor,
        "intertwining",
        samples,
        residual,
        tol,
        notes,
        details={"Z": [z.z1, z.z2]},
    )


def _checked_intertwining(j, j2, params, mu, samples, seed, tol):
    try:
        return [check_intertwining(j, j2, params, mu, samples, seed, tol)]
    except SpectraDiffer as e:
        return [
            ReportEntry(
                "intertwining[{},{}]".format(*mu),
                "the isometry (A_Z, Id) carries mu o kappa' to mu o kappa",
                "intertwining",
                0,
                e.deviation,
                tol,
                ["spectra differ, no intertwiner exists"],
            )
        ]


def _random_vertical(params, x, rng):
    c = rng.normal(size=3)
    w = s1_vertical(params, x)
    z = fundamental_vector(TorusVector(c[1], c[2]), x)
    return w * c[0] + z


def check_vertical_metric(j, j2, params, samples, seed, gram_tol, spectrum_tol, cutoff):
    """! @brief The orbit geometry does not see kappa.

    Compares the quotient Gram matrices of the torus fields under h0, h_kappa
    and h_kappa' with the closed form, the resulting flat-torus spectra, and
    h_kappa with h0 on the span of the circle and torus generators.
    """
    rng = seeded_rng(seed, "vertical_metric")
    specs = OrderedDict(
        [("h0", MetricSpec.h0()), ("j", MetricSpec.hkappa(j)), ("j2", MetricSpec.hkappa(j2))]
    )
    gram_residuals = OrderedDict((key, 0.0) for key in specs)
    spectrum_residual = 0.0
    span_residual = 0.0
    lattice = dual_lattice(params)
    for _ in range(samples):
        x = random_regular_point(params, rng)
        closed = orbit_gram(params, x)
        spectra = []
        for key, spec in specs.items():
            g = quotient_gram(params, spec, x)
            gram_residuals[key] = _max_abs(g.G - closed.G, gram_residuals[key])
            spectra.append(flat_torus_spectrum(g, lattice, cutoff))
        for other in spectra[1:]:
            if len(other) != len(spectra[0]):
                spectrum_residual = float("inf")
            elif other:
                spectrum_residual = _max_abs(
                    np.array(other) - np.array(spectra[0]), spectrum_residual
                )
        X = _random_vertical(params, x, rng)
        Y = _random_vertical(params, x, rng)
        for spec in list(specs.values())[1:]:
            span_residual = max(
                span_residual,
                abs(metric_eval(params, spec, X, Y) - metric_eval(params, specs["h0"], X, Y)),
            )
    entries = [
        ReportEntry(
            "vertical_metric.orbit_gram[{}]".format(key),
            "quotient metric on the torus fields matches the closed-form orbit Gram",
            "vertical_metric",
            samples,
            value,
            gram_tol,
        )
        for key, value in gram_residuals.items()
    ]
    entries.append(
        ReportEntry(
            "vertical_metric.spectrum",
            "flat-torus spectra of the orbits agree under h0 and h_kappa",
            "vertical_metric",
            samples,
            spectrum_residual,
            spectrum_tol,
            details={"cutoff": cutoff},
        )
    )
    entries.append(
        ReportEntry(
            "vertical_metric.vertical_span",
            "h_kappa equals h0 on the span of the circle and torus generators",
            "vertical_metric",
            samples,
            span_residual,
            gram_tol,
        )
    )
    return entries


def build_metadata(params, config):
    dic = OrderedDict()
    dic["params"] = params.return_JSON()
    dic["seed"] = config.seed
    dic["timestamp"] = (
        datetime.datetime.now(datetime.timezone.utc).isoformat() if config.timestamp else None
    )
    dic["tool_version"] = __VERSION__
    dic["config"] = config.return_JSON()
    return dic


def pair_info(j, j2, rank_tol):
    info = OrderedDict()
    info["trace_invariant"] = [trace_invariant(j), trace_invariant(j2)]
    info["generic"] = [is_generic(j, rank_tol), is_generic(j2, rank_tol)]
    info["nonisometry"] = nonisometry_verdict(j, j2, rank_tol)
    return info


def _run_tasks(tasks, workers):
    if workers <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda task: task(), tasks))


def verify_pair(j, j2, params, config):
    """! @brief Runs every check on the pair (j, j2) and returns the report.

    Results are merged in a fixed order independent of config.workers.
    """
    for jj in (j, j2):
        if jj.m != params.m:
            raise DimensionMismatch(params.m, jj.m, "j-map for n = {}".format(params.n))
    tol = config.tolerance
    samples = config.samples
    seed = config.seed
    stratum = OrbitStratum(CLOSED_FORM_STRATUM_A, CLOSED_FORM_STRATUM_A)
    h = tol("fd_step")

    tasks = [lambda: [check_isospectrality(j, j2, tol("isospectral"))]]
    for label, jj in (("j", j), ("j2", j2)):
        tasks.append(
            partial(check_kappa_admissibility, jj, params, samples, seed, tol("algebraic"), label)
        )
        tasks.append(
            lambda jj=jj, label=label: [
                check_volume_preservation(jj, params, samples, seed, tol("volume"), label)
            ]
        )
        tasks.append(
            lambda jj=jj, label=label: [
                check_dkappa_closed_form(
                    jj, params, stratum, samples, seed, h, tol("closed_form"), label
                )
            ]
        )
    tasks.append(
        lambda: [
            check_curvature_closed_form(params, stratum, samples, seed, h, tol("closed_form")),
            check_kahler_components(params, stratum, samples, seed, h, tol("kahler_equality")),
        ]
    )
    for mu in mu_window(config.mu_range):
        tasks.append(
            partial(
                _checked_intertwining, j, j2, params, mu, samples, seed, tol("intertwining")
            )
        )
    tasks.append(
        partial(
            check_vertical_metric,
            j,
            j2,
            params,
            samples,
            seed,
            tol("gram"),
            tol("spectrum"),
            config.cutoff,
        )
    )

    report = VerificationReport(build_metadata(params, config))
    for entries in _run_tasks(tasks, config.workers):
        report.extend(entries)
    report.info.update(pair_info(j, j2, tol("rank")))

    for entry in report.failed():
        logger.debug("Check {} failed: residual {}".format(entry.name, entry.max_residual))
    logger.info(
        "Verification finished: {} of {} checks passed".format(
            len(report.checks) - len(report.failed()), len(report.checks)
        )
    )
    return report
