"""Homomorphic self-repairing codes: field arithmetic, coding, repair,
resilience and bandwidth analytics, repair scheduling and file storage."""

from .codec import (
    CodeParameterError,
    CodeParams,
    Fragment,
    InconsistentFragments,
    ObjectData,
    RankDeficientError,
    RepairInfeasible,
    RepairPair,
    decode,
    encode,
    new_code,
    repair,
    repair_pairs,
    select_decoding_set,
)
from .galois import FieldElement, FieldError, FieldSpec, get_field
from .store import SlicePlan, decode_file, encode_file, plan_slices, repair_file

__version__ = "0.1.0"

__all__ = [
    "CodeParameterError",
    "CodeParams",
    "FieldElement",
    "FieldError",
    "FieldSpec",
    "Fragment",
    "InconsistentFragments",
    "ObjectData",
    "RankDeficientError",
    "RepairInfeasible",
    "RepairPair",
    "SlicePlan",
    "decode",
    "decode_file",
    "encode",
    "encode_file",
    "get_field",
    "new_code",
    "plan_slices",
    "repair",
    "repair_file",
    "repair_pairs",
    "select_decoding_set",
]
