"""Domain errors raised by wfseq.

Certification failures are reported, not raised: every ``check_*`` function
returns a report with ``passed`` set to False. The exceptions below signal
misuse (bad input, impossible geometry, an unsupported degree) or, in the
case of ``NoSolution``/``UnsolvedSystem``, an exact system with no answer.
"""


class WfseqError(RuntimeError):
    pass


# ratlin
class EmptyMatrix(WfseqError):
    pass


class NoSolution(WfseqError):
    pass


# splitgeom
class DegenerateSimplex(WfseqError):
    pass


class PointNotInterior(WfseqError):
    pass


class NotACTInternalEdge(WfseqError):
    pass


# pwpoly
class DegreeTooLow(WfseqError):
    pass


class IncompatibleKind(WfseqError):
    pass


class PointOutsideCell(WfseqError):
    pass


class DimensionMismatch(WfseqError):
    pass


# fespace
class InvalidSpec(WfseqError):
    pass


class NoFormula(WfseqError):
    pass


# derham
class HypothesisViolated(WfseqError):
    pass


# dofproj
class UnsupportedDegree(WfseqError):
    pass


class UnsolvedSystem(WfseqError):
    pass


# globalfe
class SegmentMissesFace(WfseqError):
    pass


class NotSingularEdge(WfseqError):
    pass


# cli
class ConfigError(WfseqError):
    pass
