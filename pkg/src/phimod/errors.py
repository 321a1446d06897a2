"""Exception hierarchy. Every error carries a stable machine-readable code."""


class PhiModError(Exception):
    code = "error"
    # exit status used by the command line front end
    exit_status = 1

    def __init__(self, message="", **data):
        super().__init__(message)
        self.data = data

    def to_json(self):
        out = {"code": self.code, "message": str(self)}
        if self.data:
            out["data"] = {k: _plain(v) for k, v in self.data.items()}
        return out


def _plain(v):
    if isinstance(v, (int, str, float, bool)) or v is None:
        return v
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    return str(v)


class BadInput(PhiModError):
    code = "bad_input"
    exit_status = 2


class BadRange(PhiModError):
    code = "bad_range"


class FieldTooSmall(PhiModError):
    """A semilinear equation has no solution over the current finite field."""
    code = "field_too_small"


class PrecisionLoss(PhiModError):
    code = "precision_loss"


class HypothesisFailed(PhiModError):
    code = "hypothesis_failed"


class NotCrystalline(PhiModError):
    code = "not_crystalline"


class NotCrystallineSystem(PhiModError):
    code = "not_crystalline_system"


class NonConvergence(PhiModError):
    code = "non_convergence"


class IterationCap(PhiModError):
    code = "iteration_cap"


class AdmissibilityMismatch(PhiModError):
    code = "admissibility_mismatch"


class NotAMorphism(PhiModError):
    code = "not_a_morphism"


class InvalidObject(PhiModError):
    code = "invalid_object"


class ScopeError(PhiModError):
    code = "scope_error"


class UndefinedValuation(PhiModError):
    code = "undefined_valuation"


class NoProgress(PhiModError):
    code = "no_progress"
