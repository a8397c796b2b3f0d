'''
Exception types raised by the systole lab.

Library code raises these; the command line front-end maps them onto exit
codes (see main.py).
'''


class SystoleLabError(Exception):
    '''Base class for every error raised by the package.'''


# Comparison functions
class NonPositiveSystole(SystoleLabError):
    pass


class InvalidProfile(SystoleLabError):
    pass


# Surfaces and meshes
class DegenerateLattice(SystoleLabError):
    pass


class NonPositiveWarp(SystoleLabError):
    pass


class InvalidMesh(SystoleLabError):
    pass


class DegenerateTriangle(SystoleLabError):
    pass


class EmptySelection(SystoleLabError):
    pass


class WrongClass(SystoleLabError):
    pass


class NonPositiveFactor(SystoleLabError):
    pass


class SeparatingLoop(SystoleLabError):
    pass


class NonSimpleLoop(SystoleLabError):
    pass


class OneSidedLoop(SystoleLabError):
    pass


class NonIncreasingRadii(SystoleLabError):
    pass


# Spectral solver
class SolverDivergence(SystoleLabError):
    pass


class EmptyInterior(SystoleLabError):
    pass


class ZeroVector(SystoleLabError):
    pass


class NegativeDensity(SystoleLabError):
    pass


class DisjointRegion(SystoleLabError):
    pass


# Loops and lengths
class PositiveChi(SystoleLabError):
    pass


class NotClosed(SystoleLabError):
    pass


class CapTooSmall(SystoleLabError):
    pass


class ModelMismatch(SystoleLabError):
    pass


class NoBoundary(SystoleLabError):
    pass


class NonSimpleCore(SystoleLabError):
    pass


# Lab verifiers
class NoValidCandidate(SystoleLabError):
    pass


class InvalidCurvatureBound(SystoleLabError):
    pass


class MissingCurvatureField(SystoleLabError):
    pass


class DeltaOutOfRange(SystoleLabError):
    pass


class FactorNotOneOnCore(SystoleLabError):
    pass


# Input files
class SchemaError(SystoleLabError):
    pass


class MissingInput(SystoleLabError):
    pass


SOLVER_ERRORS = (SolverDivergence, EmptyInterior, DegenerateTriangle)
INPUT_ERRORS = (SchemaError, MissingInput)
