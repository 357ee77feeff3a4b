"""Exact arithmetic for counting simultaneous embeddings of two quartic CM
fields into superspecial orders of a totally definite quaternion algebra."""

from .base_field import FieldElem, IdealL, real_quadratic_field
from .cm_field import CMField, IdealK, class_group, cm_field_from_json, cm_field_from_radicand, make_cm_field
from .errors import CMError, HypothesisViolation

__version__ = "0.1.0"

__all__ = ["FieldElem", "IdealL", "real_quadratic_field", "CMField", "IdealK", "class_group",
           "cm_field_from_json", "cm_field_from_radicand", "make_cm_field", "CMError",
           "HypothesisViolation", "__version__"]
