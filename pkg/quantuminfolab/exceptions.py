class QuantumInfoLabException(Exception):
    """Base class of every error raised by quantuminfolab"""

    def __init__(self, message):
        super().__init__(message)


class DuplicateLabelException(QuantumInfoLabException):
    """Raised when a subsystem label is used twice in one registry"""

    def __init__(self, message):
        super().__init__(message)


class OverlappingLabelsException(DuplicateLabelException):
    """Raised when two label sets that must be disjoint share a label"""

    def __init__(self, message):
        super().__init__(message)


class DimensionOverflowException(QuantumInfoLabException):
    """Raised when a registry exceeds the configured total dimension"""

    def __init__(self, message):
        super().__init__(message)


class UnknownLabelException(QuantumInfoLabException):
    """Raised when a label is not part of the registry"""

    def __init__(self, message):
        super().__init__(message)


class DimensionMismatchException(QuantumInfoLabException):
    """Raised when operand dimensions do not fit together"""

    def __init__(self, message):
        super().__init__(message)


class InvalidStateException(QuantumInfoLabException):
    """Raised when a state or distribution violates its invariants"""

    def __init__(self, message):
        super().__init__(message)


class NonUnitaryException(QuantumInfoLabException):
    """Raised when a matrix fails the unitarity check"""

    def __init__(self, message):
        super().__init__(message)


class ChannelCompletenessException(QuantumInfoLabException):
    """Raised when Kraus operators do not sum to the identity"""

    def __init__(self, message):
        super().__init__(message)


class InvalidEnsembleException(QuantumInfoLabException):
    """Raised when an ensemble of pure states is malformed"""

    def __init__(self, message):
        super().__init__(message)


class PreconditionException(QuantumInfoLabException):
    """Raised when a protocol is started from a state it does not accept"""

    def __init__(self, message):
        super().__init__(message)


class ConfigurationException(QuantumInfoLabException):
    """Raised for invalid experiment, suite or command-line configuration"""

    def __init__(self, message):
        super().__init__(message)
