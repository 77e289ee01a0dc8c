"""Exception hierarchy. Every check failure carries the offending witness."""


class DoctrineError(Exception):
    def __init__(self, message="", witness=None):
        super().__init__(message)
        self.witness = witness


# order core
class ReflexivityViolation(DoctrineError):
    pass


class AntisymmetryViolation(DoctrineError):
    pass


class TransitivityViolation(DoctrineError):
    pass


class NotAHeytingAlgebra(DoctrineError):
    pass


class MeetsRequired(DoctrineError):
    pass


class NotMonotone(DoctrineError):
    pass


class NotAnAdjoint(DoctrineError):
    pass


# categories
class CompositionUndefined(DoctrineError):
    pass


class AssociativityViolation(DoctrineError):
    pass


class IdentityViolation(DoctrineError):
    pass


class ProductUMPViolation(DoctrineError):
    pass


class TerminalNotUnique(DoctrineError):
    pass


class FunctorLawViolation(DoctrineError):
    pass


class ProductsNotPreserved(DoctrineError):
    pass


class NaturalitySquareViolation(DoctrineError):
    pass


# doctrines
class ReindexIdentityViolation(DoctrineError):
    pass


class ReindexCompositionViolation(DoctrineError):
    pass


class PrerequisiteMissing(DoctrineError):
    pass


class NaturalityViolation(DoctrineError):
    pass


class PreservationViolation(DoctrineError):
    def __init__(self, message="", kind=None, witness=None):
        super().__init__(message, witness)
        self.kind = kind


class LaxInequalityViolation(DoctrineError):
    pass


# comonads and the Kleisli engine
class ComonadLawViolation(DoctrineError):
    pass


class TwoArrowInequalityViolation(DoctrineError):
    pass


class LazyBaseUnsupported(DoctrineError):
    pass


class CompositeMismatch(DoctrineError):
    pass


class UniquenessCounterexample(DoctrineError):
    pass


class EnumerationBudgetExceeded(DoctrineError):
    pass


# reader extension
class PrimaryRequired(DoctrineError):
    pass


class CoherenceViolation(DoctrineError):
    pass


class InternalInvariantViolation(DoctrineError):
    pass


class TransportWitnessFailure(DoctrineError):
    pass


class ConstantDoesNotSatisfyAxiom(DoctrineError):
    pass


class FullnessCounterexample(DoctrineError):
    pass


class DecompositionMismatch(DoctrineError):
    pass


# models
class ProbeTooLarge(DoctrineError):
    pass


class FixtureMismatch(DoctrineError):
    pass


class AtomCapExceeded(DoctrineError):
    pass


class IsoMismatch(DoctrineError):
    pass


# text format and CLI
class SpecSyntaxError(DoctrineError):
    def __init__(self, message, line=0, col=0):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class UnresolvedReference(DoctrineError):
    pass


class DuplicateName(DoctrineError):
    pass


class UsageError(DoctrineError):
    pass
