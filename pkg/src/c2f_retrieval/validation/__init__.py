from c2f_retrieval.validation.schema import (
    StoreSchemaValidator,
    StoreValidationError,
)

__all__ = [
    "StoreSchemaValidator",
    "StoreValidationError",
]
