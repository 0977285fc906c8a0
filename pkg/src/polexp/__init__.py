"""PolExp growth of automorphisms of free products of free and free-abelian groups."""

from polexp.errors import (
    DimensionMismatch,
    ExponentMismatch,
    InconsistentPath,
    IndexOutOfRange,
    InvalidAutomorphism,
    LengthBudgetExceeded,
    NotCompletelySplit,
    NotUnimodular,
    ParseError,
    PeriodNotFound,
    PolexpError,
    SpecMismatch,
    StrataInvalid,
    TooShort,
)
from polexp.growth import GrowthType
from polexp.words import (
    AbelianSyllable,
    FreeLetter,
    GroupSpec,
    NormalWord,
    concat,
    conj_length,
    cyclic_reduce,
    invert,
    normalize,
    word_length,
)

__all__ = [
    "AbelianSyllable",
    "DimensionMismatch",
    "ExponentMismatch",
    "FreeLetter",
    "GroupSpec",
    "GrowthType",
    "InconsistentPath",
    "IndexOutOfRange",
    "InvalidAutomorphism",
    "LengthBudgetExceeded",
    "NormalWord",
    "NotCompletelySplit",
    "NotUnimodular",
    "ParseError",
    "PeriodNotFound",
    "PolexpError",
    "SpecMismatch",
    "StrataInvalid",
    "TooShort",
    "concat",
    "conj_length",
    "cyclic_reduce",
    "invert",
    "normalize",
    "word_length",
]
