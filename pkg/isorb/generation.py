"""! @package generation
The commands behind the command line: family generation, pair verification,
orbit geometry and certificates. Each command returns its exit code:
0 on success, 1 on usage, input or domain errors and 2 when a verification
fails or the continuation diverges.
"""
import os
import json
import logging
import functools
from collections import OrderedDict
from itertools import combinations

from prettytable import PrettyTable

from isorb._version import __VERSION__
from isorb.continuation import (
    conjugation_orbit_family,
    generate_isospectral_family,
    seed_jmap,
)
from isorb.documentation import ReportDocumentation
from isorb.exceptions import (
    ContinuationDiverged,
    DimensionMismatch,
    DomainError,
    InvalidSpaceParams,
    NotOnSphere,
    NotPositiveDefinite,
    SchemaError,
    SingularPoint,
)
from isorb.jmap import (
    DEFAULT_ISOSPECTRAL_TOL,
    is_generic,
    jmap_to_string,
    non_equivalence_certificate,
    nonisometry_verdict,
    read_jmap,
    spectral_deviation,
    trace_invariant,
)
from isorb.orbit import (
    OrbitStratum,
    area_identity_value,
    dual_lattice,
    flat_torus_spectrum,
    orbit_angle,
    orbit_area,
    orbit_gram,
    stratum_area,
    stratum_gram,
)
from isorb.sphere import SpherePoint
from isorb.utils import canonical_json, json_parser, write_string_to_file
from isorb.verification import verify_pair

POINT_TOL = 1e-9

logger = logging.getLogger(__name__)

USER_ERRORS = (
    SchemaError,
    DimensionMismatch,
    DomainError,
    InvalidSpaceParams,
    NotOnSphere,
    NotPositiveDefinite,
    SingularPoint,
    OSError,
)


def exit_on_error(cmd):
    """Maps input and domain errors raised by a command to exit code 1"""

    @functools.wraps(cmd)
    def wrapper(*args, **kwargs):
        try:
            return cmd(*args, **kwargs)
        except USER_ERRORS as e:
            logger.error(str(e))
            return 1

    return wrapper


def _split_path(path):
    directory, filename = os.path.split(os.path.expanduser(path))
    return directory or ".", filename


def write_family(
    family, output_dir, seed, step_size, diverged=False, tol=DEFAULT_ISOSPECTRAL_TOL
):
    """Writes every member and the manifest; returns the manifest dictionary"""
    filenames = []
    for i, member in enumerate(family):
        filename = "jmap_{:03d}.json".format(i)
        write_string_to_file(jmap_to_string(member), filename, output_dir)
        filenames.append(filename)

    pairwise = []
    for i, k in combinations(range(len(family)), 2):
        deviation = spectral_deviation(family[i], family[k])
        pair = OrderedDict()
        pair["pair"] = [i, k]
        pair["isospectral"] = deviation <= tol
        pair["deviation"] = deviation
        pair["certificate"] = non_equivalence_certificate(
            family[i], family[k]
        ).return_JSON()
        pairwise.append(pair)

    manifest = OrderedDict()
    manifest["tool_version"] = __VERSION__
    manifest["seed"] = seed
    manifest["m"] = family[0].m
    manifest["steps"] = len(family) - 1
    manifest["step_size"] = step_size
    manifest["trivial"] = family.trivial
    manifest["retries"] = family.retries
    manifest["diverged"] = diverged
    manifest["isospectral_tolerance"] = tol
    manifest["members"] = filenames
    manifest["pairwise"] = pairwise
    write_string_to_file(canonical_json(manifest), "manifest.json", output_dir)
    return manifest


@exit_on_error
def cmd_generate(config, m, steps, step_size, output_dir="family"):
    """Generates an isospectral family and writes it with its manifest"""
    if m < 3:
        logger.error("m must be ≥ 3")
        return 1
    if steps < 0:
        logger.error("steps must be ≥ 0")
        return 1
    if step_size <= 0:
        logger.error("step size must be > 0")
        return 1

    logger.info(
        "Generating family: m={}, steps={}, step size={}, seed={}".format(
            m, steps, step_size, config.seed
        )
    )
    exit_code = 0
    diverged = False
    try:
        family = generate_isospectral_family(
            config.seed,
            m,
            steps,
            step_size,
            rank_tol=config.tolerance("rank"),
            tol=config.tolerance("isospectral"),
        )
    except ContinuationDiverged as e:
        logger.error(str(e))
        logger.warning("Writing the conjugation-orbit family instead")
        family = conjugation_orbit_family(
            seed_jmap(config.seed, m), steps, step_size, config.seed
        )
        exit_code = 2
        diverged = True

    manifest = write_family(
        family,
        output_dir,
        config.seed,
        step_size,
        diverged,
        config.tolerance("isospectral"),
    )
    table = PrettyTable()
    table.field_names = ["Pair", "Isospectral", "Deviation", "Certificate"]
    for pair in manifest["pairwise"]:
        table.add_row(
            [
                "{}-{}".format(*pair["pair"]),
                pair["isospectral"],
                "{:.2e}".format(pair["deviation"]),
                pair["certificate"]["outcome"],
            ]
        )
    logger.info("Family written to {} (trivial: {})".format(output_dir, family.trivial))
    if manifest["pairwise"]:
        logger.info(table.get_string())
    return exit_code


def report_table(report):
    table = PrettyTable()
    table.field_names = ["Check", "Samples", "Max residual", "Tolerance", "Passed"]
    table.align["Check"] = "l"
    for entry in report.checks:
        table.add_row(
            [
                entry.name,
                entry.sample_count,
                "{:.3e}".format(entry.max_residual),
                "{:.1e}".format(entry.tolerance),
                "yes" if entry.passed else "NO",
            ]
        )
    return table.get_string()


@exit_on_error
def cmd_verify(config, jmap_path_1, jmap_path_2, tex=False):
    """Verifies the hypotheses of the isospectrality theorem for a pair of j-maps"""
    j = read_jmap(jmap_path_1, config.tolerance("validation"))
    j2 = read_jmap(jmap_path_2, config.tolerance("validation"))
    logger.info("Verifying {} against {}...".format(jmap_path_1, jmap_path_2))

    report = verify_pair(j, j2, config.params, config)

    directory, filename = _split_path(config.output_path)
    write_string_to_file(report.to_string(), filename, directory)
    logger.info(report_table(report))
    logger.info("Report written to {}".format(os.path.join(directory, filename)))

    if tex:
        tex_name = os.path.splitext(filename)[0] + ".tex"
        doc = ReportDocumentation(report)
        write_string_to_file(doc.return_tex_documentation(), tex_name, directory)

    if report.passed:
        logger.info("All checks passed")
        return 0
    for entry in report.failed():
        logger.error("Check failed: {}".format(entry.name))
    return 2


def _parse_complex_list(values, field, length=None):
    if not isinstance(values, list) or (length is not None and len(values) != length):
        raise SchemaError(field, "expected a list of [re, im] pairs")
    out = []
    for entry in values:
        if not isinstance(entry, list) or len(entry) != 2:
            raise SchemaError(field, "expected [re, im] pairs")
        try:
            out.append(complex(float(entry[0]), float(entry[1])))
        except (TypeError, ValueError):
            raise SchemaError(field, "entries must be numbers")
    return out


def read_point(filename, params):
    """! @brief Reads {"u": [[re, im], ...], "v": [[re, im], [re, im]]}.

    Points off the sphere by up to POINT_TOL are renormalized with a warning.
    """
    try:
        dic = json_parser(filename)
    except json.JSONDecodeError as e:
        raise SchemaError("<root>", "not valid JSON: {}".format(e))
    if not isinstance(dic, dict):
        raise SchemaError("<root>", "expected a JSON object")
    for key in ("u", "v"):
        if key not in dic:
            raise SchemaError(key, "missing")
    u = _parse_complex_list(dic["u"], "u", params.n - 1)
    v = _parse_complex_list(dic["v"], "v", 2)
    try:
        return SpherePoint(u, v)
    except NotOnSphere:
        point = SpherePoint(u, v, tol=POINT_TOL)
        logger.warning("Point is slightly off the sphere. Renormalizing.")
        return SpherePoint.normalized(list(point.u) + list(point.v), len(u))


def orbit_summary(params, cutoff, point=None, stratum=None):
    """Orbit geometry of a point or of a stratum (a, b)"""
    dic = OrderedDict()
    dic["params"] = params.return_JSON()
    if point is not None:
        stratum = OrbitStratum.of_point(point)
        gram = orbit_gram(params, point)
        area = orbit_area(params, point)
        dic["point"] = OrderedDict(
            [
                ("u", [[z.real, z.imag] for z in point.u]),
                ("v", [[z.real, z.imag] for z in point.v]),
            ]
        )
    else:
        gram = stratum_gram(params, stratum)
        area = stratum_area(params, stratum)
    dic["stratum"] = stratum.return_JSON()
    dic["gram"] = gram.return_JSON()
    dic["area"] = area
    dic["area_identity"] = area_identity_value(params, stratum)
    if abs(stratum.a - stratum.b) <= 1e-12:
        dic["angle"] = orbit_angle(params, stratum.a)
    else:
        dic["angle"] = None
    dic["gram_angle"] = gram.angle()
    lattice = dual_lattice(params)
    dic["lattice"] = lattice.return_JSON()
    dic["cutoff"] = cutoff
    dic["spectrum"] = flat_torus_spectrum(gram, lattice, cutoff)
    return dic


@exit_on_error
def cmd_orbit(config, point_path=None, stratum=None):
    """Writes and prints the geometry of one torus orbit"""
    if (point_path is None) == (stratum is None):
        logger.error("Give either a point file or a stratum (a, b)")
        return 1
    params = config.params
    if point_path is not None:
        summary = orbit_summary(params, config.cutoff, point=read_point(point_path, params))
    else:
        summary = orbit_summary(params, config.cutoff, stratum=OrbitStratum(*stratum))

    table = PrettyTable()
    table.field_names = ["Quantity", "Value"]
    table.align = "l"
    table.add_row(["Gram", summary["gram"]])
    table.add_row(["Area", summary["area"]])
    table.add_row(["Angle", summary["angle"]])
    table.add_row(["Dual basis", summary["lattice"]["dual_basis"]])
    table.add_row(["Spectrum", summary["spectrum"]])
    logger.info(table.get_string())

    directory, filename = _split_path(config.output_path)
    write_string_to_file(canonical_json(summary), filename, directory)
    return 0


@exit_on_error
def cmd_certify(config, jmap_path_1, jmap_path_2):
    """Runs only the genericity and non-equivalence checks"""
    j = read_jmap(jmap_path_1, config.tolerance("validation"))
    j2 = read_jmap(jmap_path_2, config.tolerance("validation"))
    if j.m != j2.m:
        raise DimensionMismatch(j.m, j2.m, "j-map pair")
    rank_tol = config.tolerance("rank")

    result = OrderedDict()
    result["isospectral_deviation"] = spectral_deviation(j, j2)
    result["isospectral"] = result["isospectral_deviation"] <= config.tolerance(
        "isospectral"
    )
    result["trace_invariant"] = [trace_invariant(j), trace_invariant(j2)]
    result["generic"] = [is_generic(j, rank_tol), is_generic(j2, rank_tol)]
    result["nonisometry"] = nonisometry_verdict(j, j2, rank_tol)

    table = PrettyTable()
    table.field_names = ["", jmap_path_1, jmap_path_2]
    table.add_row(["trace invariant"] + result["trace_invariant"])
    table.add_row(["generic"] + result["generic"])
    logger.info(table.get_string())
    certificate = result["nonisometry"]["certificate"]
    if certificate["outcome"] == "inequivalent":
        logger.info(
            "Inequivalent: {} differs ({} vs {})".format(
                certificate["witness"], *certificate["values"]
            )
        )
    else:
        logger.info("Inconclusive: no invariant separates the maps")

    directory, filename = _split_path(config.output_path)
    write_string_to_file(canonical_json(result), filename, directory)
    return 0
