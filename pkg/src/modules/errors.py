# modules/errors.py
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple


class ReedyError(Exception):
    """Base class for every error raised by the toolkit."""


# ---- input / validation ----

class ViolationKind(str, Enum):
    MISSING_IDENTITY = "MissingIdentity"
    NON_TOTAL_COMPOSITION = "NonTotalComposition"
    UNIT_LAW = "UnitLawViolation"
    ASSOCIATIVITY = "AssociativityViolation"
    DANGLING_REFERENCE = "DanglingReference"
    DUPLICATE_IDENTIFIER = "DuplicateIdentifier"
    BAD_DEGREE = "BadDegree"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    detail: str
    witness: Tuple[str, ...] = ()

    def __str__(self) -> str:
        w = f" {self.witness}" if self.witness else ""
        return f"{self.kind.value}: {self.detail}{w}"


class InvalidCategory(ReedyError):
    def __init__(self, violations: List[Violation]):
        self.violations = list(violations)
        first = str(self.violations[0]) if self.violations else "invalid category"
        more = f" (+{len(self.violations) - 1} more)" if len(self.violations) > 1 else ""
        super().__init__(first + more)

    def kinds(self) -> set:
        return {v.kind for v in self.violations}


class InvalidInput(ReedyError):
    """Wire-format problem: unreadable JSON, missing or unknown fields."""


class UnknownMorphism(ReedyError):
    pass


class UnknownObject(ReedyError):
    pass


class UnknownEntry(ReedyError):
    pass


class BoundsExceeded(ReedyError):
    pass


class SizeGuardExceeded(ReedyError):
    def __init__(self, limit: int, what: str = "search"):
        self.limit = limit
        super().__init__(f"{what} exceeded the size guard of {limit} candidate extensions")


# ---- preconditions ----

class NotBistratified(ReedyError):
    pass


class NotDiscreteBistratified(NotBistratified):
    pass


class NotAlmostReedy(ReedyError):
    pass


class NotFsReedy(ReedyError):
    pass


class NotAFunctor(ReedyError):
    pass


class NotFunctorial(NotAFunctor):
    pass


class NotNatural(ReedyError):
    pass


class InvalidProfunctor(ReedyError):
    pass


class InvalidBigluingData(ReedyError):
    pass


class NotACollage(ReedyError):
    def __init__(self, message: str, witness: Optional[Tuple[str, ...]] = None):
        self.witness = tuple(witness or ())
        super().__init__(message)


class FactorizationMismatch(ReedyError):
    pass


# ---- internal ----

class IterationGuardExceeded(ReedyError):
    pass


class InternalInvariantBroken(ReedyError):
    pass
