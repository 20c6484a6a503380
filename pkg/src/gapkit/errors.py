"""Exception hierarchy.

Hypothesis failures carry a witness that certifies the failure and, when raised
from the recovery pipeline, the partially filled report.
"""


class GapkitError(Exception):
    """Base class for all gapkit errors."""


class CompositeModulus(GapkitError, ValueError):
    def __init__(self, p):
        super().__init__(f"modulus {p} is not a prime below 2^61")
        self.modulus = p


class ZeroInverse(GapkitError, ZeroDivisionError):
    def __init__(self, p):
        super().__init__(f"0 has no inverse modulo {p}")
        self.modulus = p


class CapExceeded(GapkitError):
    def __init__(self, size, cap, what="enumeration"):
        super().__init__(f"{what} of size {size} exceeds the cap {cap}")
        self.size = size
        self.cap = cap
        self.what = what


class PreconditionError(GapkitError, ValueError):
    """Input violates a structural precondition (shape, rank, x_1 = 1, ...)."""


class AmbiguousDecomposition(GapkitError):
    """More than one bounded decomposition exists; ``solutions`` holds the first two."""

    def __init__(self, solutions):
        super().__init__(f"decomposition is not unique: {solutions[0]} and {solutions[1]}")
        self.solutions = tuple(solutions)


class NotSingular(GapkitError, ValueError):
    def __init__(self, det):
        super().__init__(f"matrix is invertible mod p (det = {det})")
        self.det = det


class OutOfRange(GapkitError, ValueError):
    pass


class NoRoot(GapkitError, ValueError):
    pass


class HypothesisFailure(GapkitError):
    """A recovery hypothesis does not hold; ``witness`` certifies it."""

    kind = "hypothesis"

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
        self.report = None

    def to_dict(self):
        return {"kind": self.kind, "message": str(self), "witness": _jsonable(self.witness)}


class NotIsolated(HypothesisFailure):
    kind = "NotIsolated"

    def __init__(self, witness, kappa):
        super().__init__(f"B is not {kappa}-isolated: {tuple(witness)} annihilates the generators",
                         tuple(witness))
        self.kappa = kappa


class NotProper(HypothesisFailure):
    kind = "NotProper"

    def __init__(self, which, witness, detail=""):
        msg = f"{which} is not proper"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg, witness)
        self.which = which


class NotContained(HypothesisFailure):
    kind = "NotContained"

    def __init__(self, i, j, message=None):
        super().__init__(message or f"product of generators ({i + 1}, {j + 1}) has no bounded "
                         "decomposition in B", (i + 1, j + 1))
        self.i = i
        self.j = j


class ProductNotContained(HypothesisFailure):
    kind = "ProductNotContained"

    def __init__(self, violation, side="AA'"):
        super().__init__(f"{side} is not contained in B: {violation}", violation)
        self.side = side


class SRepresentationNotFound(HypothesisFailure):
    kind = "SRepresentationNotFound"

    def __init__(self, j, k, cap):
        super().__init__(f"no representation of z_({j + 1},{k + 1}) with coefficients "
                         f"bounded by {cap}", (j + 1, k + 1))
        self.j = j
        self.k = k
        self.cap = cap


class NotInvertible(HypothesisFailure):
    kind = "NotInvertible"

    def __init__(self, which):
        super().__init__(f"{which} is not invertible mod p", which)
        self.which = which


class ContainmentFailed(GapkitError):
    pass


def _jsonable(obj):
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    return str(obj)
