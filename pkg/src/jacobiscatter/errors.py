"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid user input (bad config field, inconsistent lengths, nonpositive weights)."""


class NumericalError(RuntimeError):
    """A computation broke down numerically (root finder, branch logic, solver)."""


class DirichletPoleError(NumericalError):
    """Evaluation requested at (or too close to) a zero of the q-step sine polynomial,
    where the Weyl functions have poles."""


class AmbiguousSheetError(NumericalError):
    """A real gap zero could not be assigned to a single sheet: both residuals are
    below tolerance or their ratio is too small."""

    def __init__(self, lam, residual_physical, residual_nonphysical):
        self.lam = lam
        self.residual_physical = residual_physical
        self.residual_nonphysical = residual_nonphysical
        super().__init__(
            f"sheet classification ambiguity at lambda={lam}: "
            f"residuals {residual_physical:.3e} (physical) vs "
            f"{residual_nonphysical:.3e} (nonphysical)"
        )


class StateCountError(NumericalError):
    """state count violation: located states disagree with the predicted total."""
