"""Masked outsourcing of quadratic programs.

Problem and key documents are passed around as JSON text; vectors are numpy
arrays.
"""

from ._onlp import (
    BasisFailure,
    ConnectError,
    DomainError,
    Error,
    ParseError,
    ProtocolError,
    RemoteError,
    SingularMatrix,
    TimeoutError,
    __version__,
    decrypt,
    encrypt,
    generate,
    keygen,
    solve,
    submit,
    verify,
)

__all__ = [
    "BasisFailure",
    "ConnectError",
    "DomainError",
    "Error",
    "ParseError",
    "ProtocolError",
    "RemoteError",
    "SingularMatrix",
    "TimeoutError",
    "decrypt",
    "encrypt",
    "generate",
    "keygen",
    "solve",
    "submit",
    "verify",
]
