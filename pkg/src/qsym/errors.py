"""Exception hierarchy shared by every qsym module."""

from __future__ import annotations


class QsymError(Exception):
    """Base class; ``code`` is the machine-readable identifier used by the CLI."""

    code = "error"


class ExprSyntaxError(QsymError, ValueError):
    code = "syntax"

    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


class DomainError(QsymError, ValueError):
    code = "domain"


class UnboundSymbol(QsymError, KeyError):
    code = "unbound_symbol"

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"unbound symbol {self.name!r}"


class NumericError(QsymError, ArithmeticError):
    code = "numeric"


class ShapeError(QsymError, ValueError):
    code = "shape"


class IndexOutOfRange(QsymError, IndexError):
    code = "index_out_of_range"


class EmptyKeepSet(QsymError, ValueError):
    code = "empty_keep_set"


class NotNumeric(QsymError, TypeError):
    code = "not_numeric"


class SizeLimit(QsymError, ValueError):
    code = "size_limit"


class DuplicateWire(QsymError, ValueError):
    code = "duplicate_wire"


class WireOutOfRange(QsymError, IndexError):
    code = "wire_out_of_range"


class NotAPermutation(QsymError, ValueError):
    code = "not_a_permutation"


class GraphError(QsymError, ValueError):
    code = "graph"


class NonHermitianChoi(QsymError, ValueError):
    code = "non_hermitian_choi"


class NegativeEigenvalue(QsymError, ValueError):
    code = "negative_eigenvalue"

    def __init__(self, value: float):
        super().__init__(f"Choi eigenvalue {value:.3e} below -1e-9; map is not completely positive")
        self.value = value


class EntropyExhausted(QsymError, RuntimeError):
    code = "entropy_exhausted"


class SingularMarginal(QsymError, RuntimeError):
    code = "singular_marginal"


class UnsupportedGateForShift(QsymError, ValueError):
    code = "unsupported_gate_for_shift"

    def __init__(self, name: str):
        super().__init__(f"gate {name!r} is not a Pauli rotation; parameter-shift rule does not apply")
        self.name = name


class NonFiniteObjective(QsymError, ArithmeticError):
    code = "non_finite_objective"

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class CapabilityError(QsymError, ValueError):
    code = "capability"


class MissingClassicalBit(QsymError, KeyError):
    code = "missing_classical_bit"

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class DuplicateName(QsymError, ValueError):
    code = "duplicate_name"


class UnknownBackend(QsymError, KeyError):
    code = "unknown_backend"

    def __str__(self) -> str:  # KeyError would repr-quote the message
        return str(self.args[0]) if self.args else ""


class WidthMismatch(QsymError, ValueError):
    code = "width_mismatch"


class SchemaError(QsymError, ValueError):
    code = "schema"

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.detail = message


class IoError(QsymError, OSError):
    code = "io"
