class TradeNetError(Exception):
    """Base class for all exceptions raised by the tradenet package."""
    exit_code = 1

class ScenarioError(TradeNetError):
    """Exception raised when a scenario or its inputs fail to parse or validate."""
    exit_code = 2

    def __init__(self, message, line=None, token=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.token = token

class UnknownAgentError(ScenarioError):
    """Exception raised for an agent id that is not part of the market."""
    pass

class UnknownTradeError(ScenarioError):
    """Exception raised for a trade id that is not part of the market."""
    pass

class MissingPriceError(ScenarioError):
    """Exception raised when a price vector does not cover the trades it is applied to."""
    pass

class IncompleteOffersError(ScenarioError):
    """Exception raised when an offer profile misses an (agent, trade) incidence."""
    pass

class PreconditionError(ScenarioError):
    """Exception raised when an operation is called outside its stated preconditions."""
    pass

class EnumerationCapError(TradeNetError):
    """Exception raised when a brute-force enumeration would exceed its size cap."""
    exit_code = 2

class SchedulerError(TradeNetError):
    """Exception raised when a scripted schedule selects an ineligible agent."""
    exit_code = 2

class RoundCapReached(TradeNetError):
    """Exception raised by the CLI when a dynamics run stops at its round cap."""
    exit_code = 3

class VerificationError(TradeNetError):
    """Exception raised when a constructed result fails its verifier."""
    exit_code = 4

class NotEquilibriumError(VerificationError):
    """Exception raised when an arrangement is not a competitive equilibrium."""
    pass

class NotNashError(VerificationError):
    """Exception raised when an offer profile is not an (epsilon-tight) Nash equilibrium."""
    pass

class NotInCoreError(VerificationError):
    """Exception raised when an imputation or outcome lies outside the core."""
    pass

class NoEquilibriumError(VerificationError):
    """Exception raised when a market admits no competitive equilibrium."""
    pass

class EmptyCoreError(VerificationError):
    """Exception raised when the core of the market game is empty."""
    pass

class LinearProgramError(VerificationError):
    """Exception raised when a linear program is infeasible or unbounded."""
    pass

class InternalConsistencyError(VerificationError):
    """Exception raised when two computations of the same quantity disagree."""
    pass

class NoExtensionError(TradeNetError):
    """Exception raised when an epsilon-tight Nash equilibrium cannot be extended to an integral equilibrium."""
    exit_code = 5

    def __init__(self, message, at_tightness_bound=False):
        super().__init__(message)
        self.at_tightness_bound = at_tightness_bound
        if not at_tightness_bound:
            self.exit_code = VerificationError.exit_code
