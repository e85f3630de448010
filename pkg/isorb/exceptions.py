"""! @package exceptions


"""


def error(msg):
    return "\nERROR:\n{}".format(msg)


class SchemaError(Exception):
    """! @brief Raised when an input JSON document does not match its schema."""

    def __init__(self, field, detail=""):
        self.field = field
        msg = "Malformed input in field '{}'".format(field)
        if detail:
            msg += ": " + detail
        super().__init__(error(msg))


class NotSkewHermitian(RuntimeError):
    """! @brief Raised when a matrix fails the X + X^H = 0 check."""

    def __init__(self, residual, tol):
        self.residual = residual
        msg = "Matrix is not skew-Hermitian: max |X + X^H| = {:.3e} > {:.3e}".format(
            residual, tol
        )
        super().__init__(error(msg))


class NotTraceless(RuntimeError):
    """! @brief Raised when a matrix has a trace above tolerance."""

    def __init__(self, residual, tol):
        self.residual = residual
        msg = "Matrix is not traceless: |tr X| = {:.3e} > {:.3e}".format(residual, tol)
        super().__init__(error(msg))


class DimensionMismatch(RuntimeError):
    """! @brief Raised when operands have incompatible dimensions."""

    def __init__(self, expected, got, what="matrix"):
        msg = "Dimension mismatch for {}: expected {}, got {}".format(
            what, expected, got
        )
        super().__init__(error(msg))


class SingularInput(RuntimeError):
    """! @brief Raised when a matrix that must be invertible is singular."""

    def __init__(self, sigma_min):
        self.sigma_min = sigma_min
        msg = "Matrix is numerically singular (smallest singular value {:.3e})".format(
            sigma_min
        )
        super().__init__(error(msg))


class NonRealResult(RuntimeError):
    """! @brief Raised when a quantity that must be real has an imaginary part."""

    def __init__(self, imag, tol):
        msg = "Expected a real result, imaginary residual {:.3e} > {:.3e}".format(
            imag, tol
        )
        super().__init__(error(msg))


class SpectraDiffer(RuntimeError):
    """! @brief Raised when two spectra that should agree do not."""

    def __init__(self, deviation, tol):
        self.deviation = deviation
        msg = "Sorted spectra differ by {:.3e} > {:.3e}".format(deviation, tol)
        super().__init__(error(msg))


class DegenerateAlignmentFailed(RuntimeError):
    """! @brief Raised when clustered eigenspaces could not be matched.

    The caller should retry with a slightly perturbed torus direction.
    """

    def __init__(self, residual, cluster_sizes):
        self.residual = residual
        msg = "Eigenspace alignment failed (residual {:.3e}, cluster sizes {})".format(
            residual, cluster_sizes
        )
        super().__init__(error(msg))


class ContinuationDiverged(RuntimeError):
    """! @brief Raised when the Newton corrector fails to return to the
    isospectral constraint set.
    """

    def __init__(self, step, residual):
        self.step = step
        self.residual = residual
        msg = "Continuation diverged at step {}: constraint residual {:.3e}".format(
            step, residual
        )
        super().__init__(error(msg))


class NotUnitScalar(RuntimeError):
    def __init__(self, value):
        msg = "Group element must have modulus 1, got |{}| = {:.15g}".format(
            value, abs(value)
        )
        super().__init__(error(msg))


class NotOnSphere(RuntimeError):
    def __init__(self, norm_sq):
        msg = "Point is not on the unit sphere: |u|^2 + |v|^2 = {:.15g}".format(norm_sq)
        super().__init__(error(msg))


class NotTangent(RuntimeError):
    def __init__(self, residual):
        msg = "Vector is not tangent to the sphere: re<X, x> = {:.3e}".format(residual)
        super().__init__(error(msg))


class BasePointMismatch(RuntimeError):
    """! @brief Raised when tangent vectors are combined at different base points."""

    def __init__(self, distance):
        msg = "Tangent vectors live at different base points (distance {:.3e})".format(
            distance
        )
        super().__init__(error(msg))


class DegenerateFrame(RuntimeError):
    def __init__(self, gram_det, tol):
        msg = "Frame does not span the tangent space: Gram determinant {:.3e} < {:.3e}".format(
            gram_det, tol
        )
        super().__init__(error(msg))


class SingularPoint(RuntimeError):
    """! @brief Raised when a closed form needs a regular point (u != 0 and
    v_1, v_2 != 0) but got a point on a singular stratum.
    """

    def __init__(self, component, value):
        msg = "Point is not regular: {} = {:.3e} is too small".format(component, value)
        super().__init__(error(msg))


class DomainError(RuntimeError):
    def __init__(self, msg):
        super().__init__(error(msg))


class NotPositiveDefinite(RuntimeError):
    def __init__(self, eigenvalue):
        msg = "Gram matrix is not positive definite (smallest eigenvalue {:.3e})".format(
            eigenvalue
        )
        super().__init__(error(msg))


class StepTooLarge(RuntimeError):
    """! @brief Raised when a finite-difference surface leaves the regular set."""

    def __init__(self, h):
        msg = "Finite-difference step h = {:.3e} leaves the regular stratum".format(h)
        super().__init__(error(msg))


class InvalidSpaceParams(RuntimeError):
    def __init__(self, msg):
        super().__init__(error("Invalid space parameters: " + msg))
