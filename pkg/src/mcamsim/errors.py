"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class DatasetError(ValueError):
    """A dataset or feature file could not be parsed or validated."""
