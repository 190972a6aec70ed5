"""Group-generated quantum channels: Haagerup-type bounds, entropy, certificates."""

from .groups import (
    BudgetError,
    Cyclic,
    DirectPower,
    Exceeds,
    FiniteTable,
    Free,
    FreeProduct,
    GroupError,
    GroupSpec,
)
from .parse import SpecSyntaxError, parse_spec

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "Cyclic",
    "DirectPower",
    "Exceeds",
    "FiniteTable",
    "Free",
    "FreeProduct",
    "GroupError",
    "GroupSpec",
    "SpecSyntaxError",
    "parse_spec",
]
