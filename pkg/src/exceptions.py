"""
Error hierarchy of the toolkit.

Every error carries a human readable `detail` and the process exit code the command line
maps it to:
- `InputError` (2):         malformed or inconsistent user input (models, laws, formulas,
                            features, bids, distributions, infeasible requests).
- `ConsistencyError` (3):   an internal invariant failed (a bug or numerical breakdown).
- `PropertyViolation` (4):  a verification command found a counterexample.
"""

from typing import Optional


class SocialLawError(Exception):
    exit_code: int = 3

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InputError(SocialLawError):
    exit_code = 2


class ModelValidationError(InputError):
    pass


class InvalidLawError(InputError):
    pass


class FormulaSyntaxError(InputError):
    def __init__(self, detail: str, position: Optional[int] = None):
        super().__init__(detail)
        self.position = position


class UnknownPropositionError(InputError):
    pass


class InvalidCoalitionError(InputError):
    pass


class FeatureError(InputError):
    pass


class DistributionDomainError(InputError):
    pass


class NonRegularDistributionError(InputError):
    pass


class InfeasibleAllocationError(InputError):
    pass


class GeneratorLimitError(InputError):
    pass


class BidProfileError(InputError):
    pass


class ConsistencyError(SocialLawError):
    exit_code = 3


class PropertyViolation(SocialLawError):
    exit_code = 4
