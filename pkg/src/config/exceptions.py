class InvalidConfigException(Exception):
    def __init__(self, message):
        super().__init__(message)


class DomainException(Exception):
    def __init__(self, message):
        super().__init__(message)


class DegenerateMetricException(Exception):
    def __init__(self, message):
        super().__init__(message)


class GeometryException(Exception):
    def __init__(self, message):
        super().__init__(message)


class UnsupportedFamilyException(Exception):
    def __init__(self, message):
        super().__init__(message)


class LinearSolveException(Exception):
    def __init__(self, message):
        super().__init__(message)


class ResonanceException(Exception):
    def __init__(self, message):
        super().__init__(message)


class DivergenceException(Exception):
    def __init__(self, message, residual_history=None, leaf_index=None):
        super().__init__(message)
        self.residual_history = list(residual_history) if residual_history else []
        self.leaf_index = leaf_index


class MatchingException(Exception):
    def __init__(self, message):
        super().__init__(message)


class FoliationException(Exception):
    def __init__(self, message, leaf_index=None):
        super().__init__(message)
        self.leaf_index = leaf_index


class EstimateUnavailableException(Exception):
    def __init__(self, message):
        super().__init__(message)


class ContinuationException(Exception):
    def __init__(self, message, leaf_index=None, s=None, report=None, residual_history=None):
        super().__init__(message)
        self.leaf_index = leaf_index
        self.s = s
        self.report = report
        self.residual_history = list(residual_history) if residual_history else []
