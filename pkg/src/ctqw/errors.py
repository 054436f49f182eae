"""Typed failures raised by the walk computations.

Every error carries a short machine-readable ``code`` so the command line
can emit a structured record instead of a traceback.
"""

from __future__ import annotations


class CTQWError(Exception):
    code = "ctqw_error"

    def record(self) -> dict:
        return {"error": self.code, "message": str(self)}


class NonConvergence(CTQWError):
    code = "non_convergence"


class DegenerateStationaryPoint(CTQWError):
    """A root of the stationary-phase equation has vanishing curvature (a caustic)."""

    code = "caustic"


class SymmetryViolation(CTQWError):
    code = "symmetry_violation"


class NoStationaryPoints(CTQWError):
    code = "no_stationary_points"


class InvalidRegime(CTQWError):
    code = "invalid_regime"


class OutOfRegime(CTQWError):
    code = "out_of_regime"


class BoundaryPoint(CTQWError):
    code = "boundary_point"


class CoincidentFrequencies(CTQWError):
    code = "coincident_frequencies"

    def __init__(self, message: str, indices: tuple[int, int]):
        super().__init__(message)
        self.indices = indices

    def record(self) -> dict:
        rec = super().record()
        rec["indices"] = list(self.indices)
        return rec


class WindowTooSmall(CTQWError):
    code = "window_too_small"


class CancellationLoss(CTQWError):
    code = "cancellation_loss"


class ConfigError(CTQWError):
    code = "config_error"
