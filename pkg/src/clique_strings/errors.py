"""Exception hierarchy shared by the simulator and the algorithms."""


class CliqueError(Exception):
    """Base class for every error raised by this package."""


class LedgerViolation(CliqueError):
    """A model constraint (bandwidth, load, aux budget) was violated."""


class LoadExceeded(LedgerViolation):
    def __init__(self, node, direction, words, cap):
        self.node = node
        self.direction = direction
        self.words = words
        self.cap = cap
        super().__init__(
            f"node {node} {direction} load {words} words exceeds cap {cap}")


class TargetOverloaded(LedgerViolation):
    def __init__(self, node, words, cap):
        self.node = node
        self.words = words
        self.cap = cap
        super().__init__(f"node {node} is target of {words} words (cap {cap})")


class DescriptorTooLarge(LedgerViolation):
    def __init__(self, node, words, cap):
        super().__init__(
            f"node {node} message descriptor needs {words} words (cap {cap})")


class WordOverflow(LedgerViolation):
    def __init__(self, value, limit):
        self.value = value
        self.limit = limit
        super().__init__(f"word value {value} does not fit below {limit}")


class BandwidthExceeded(LedgerViolation):
    def __init__(self, rnd, src, dst, words, cap):
        super().__init__(
            f"raw round {rnd}: {src}->{dst} carried {words} words (cap {cap})")


class AuxBudgetExceeded(LedgerViolation):
    def __init__(self, requested, cap):
        self.requested = requested
        self.cap = cap
        super().__init__(f"{requested} auxiliary nodes requested, cap {cap}")


class Unresolvable(CliqueError):
    def __init__(self, query, reason=""):
        self.query = query
        super().__init__(f"query {query!r} cannot be resolved: {reason}")


class IndexOutOfRange(CliqueError, IndexError):
    pass


class SizeClassViolation(CliqueError):
    pass


class PassBudgetExceeded(CliqueError):
    pass


class CompressionViolation(CliqueError):
    pass


class NoWitness(CliqueError):
    pass


class RecursionBudgetExceeded(CliqueError):
    pass


class VerificationFailed(CliqueError):
    pass
