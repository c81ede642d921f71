"""Extended bicyclic semigroup: arithmetic, subsemiheaps and TRO numerics."""
from .semigroup import (
    DomainError, Element, RangeError, TripleCase, adjoint, derived_pair_neg,
    derived_pair_pos, idempotent_le, is_idempotent, product, translate, triple,
    triple_oracle,
)

__version__ = "0.1.0"
