# errors.py

class HypLabError(ValueError):
    """
    Base class of every error raised by HypLab. Subclasses ValueError so that callers
    treating bad input generically keep working.
    """
    pass


class ModelMismatchError(HypLabError):
    pass


class ModelSpecError(HypLabError):
    pass


class EnumerationCapError(HypLabError):
    def __init__(self, predicted, cap):
        """
        Parameters:
        - predicted: Number of elements the enumeration would produce.
        - cap: The configured enumeration cap.
        """
        self.predicted = predicted
        self.cap = cap
        super().__init__(f"Enumeration refused: {predicted} elements predicted, cap is {cap}. "
                         f"Raise --cap or lower the radius.")


class DegenerateInputError(HypLabError):
    pass


class ResolutionError(HypLabError):
    def __init__(self, message, required_depth=None):
        self.required_depth = required_depth
        if required_depth is not None:
            message = f"{message} (required depth: {required_depth})"
        super().__init__(message)


class DivergenceError(HypLabError):
    pass


class PreconditionError(HypLabError):
    pass


class EstimateViolationError(HypLabError):
    pass


class UnsupportedApproachError(HypLabError):
    pass
