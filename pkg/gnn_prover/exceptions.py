"""
Exceptions raised by ``gnn_prover``.

Every failure a caller can reasonably handle has its own class here,
and all of them derive from ``ProverError`` so batch drivers can catch
the whole family at once.

"""


class ProverError(Exception):
    """
    Base class for every error raised by this application.
    
    """
    pass


class TermError(ProverError):
    """
    Raised when a term cannot be constructed in the term bank.
    
    """
    pass


class ArityError(TermError):
    """
    Raised when a symbol is applied to the wrong number of arguments.
    
    """
    pass


class SortError(TermError):
    """
    Raised when an argument, equation side or substitution image has a
    sort other than the one required.
    
    """
    pass


class SubstitutionError(ProverError):
    """
    Raised when a substitution leaves a variable of a quantified
    expression unmapped, or maps it to a term which is not ground.
    
    """
    pass


class ParseError(ProverError):
    """
    Raised when problem text cannot be read. Carries the ``line`` and
    ``column`` (both 1-based) of the offending input, when known.
    
    """
    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            message = "%s (line %s, column %s)" % (message, line, column)
        super().__init__(message)


class UnsupportedConstruct(ParseError):
    """
    Raised when the input uses a construct outside the supported
    clausal fragment, such as a TPTP ``fof`` formula.
    
    """
    pass


class ResourceOut(ProverError):
    """
    Raised when the ground solver exceeds its decision budget.
    
    """
    pass


class SearchTimeout(ProverError):
    """
    Raised when a proof search runs past its wall-clock deadline.
    
    """
    pass


class GraphError(ProverError):
    """
    Raised when a proof-state graph does not fit the network it is fed
    to, or a variable has no candidate terms to score.
    
    """
    pass


class DatasetError(ProverError):
    """
    Raised when a transition dataset cannot be written or read, or
    when labels cannot be produced for a trace.
    
    """
    pass


class FormatVersionError(DatasetError):
    """
    Raised when a dataset header is missing, corrupted or written by an
    incompatible format version.
    
    """
    pass


class WeightsError(ProverError):
    """
    Base class for problems with serialized network weights.
    
    """
    pass


class WeightsFormatError(WeightsError):
    """
    Raised when a weights file is truncated, corrupted or has an
    unknown format version.
    
    """
    pass


class WeightsShapeError(WeightsError):
    """
    Raised when the tensors of a weights file disagree with the
    dimensions declared in its manifest.
    
    """
    pass


class AlreadyRegistered(ProverError):
    """
    Raised when a strategy name which is already registered is
    registered again.
    
    """
    pass


class NotRegistered(ProverError):
    """
    Raised when a strategy name which is not registered is looked up or
    unregistered.
    
    """
    pass
