"""
Verification report aggregated by the runner and emitted as flat JSON.
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict


class CheckOutcome(BaseModel):
    """One consistency check: the measured value against its reference and tolerance."""

    model_config = ConfigDict(frozen=True)

    name: str
    value: float
    reference: float
    tolerance: float
    passed: bool


class VerificationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    q_norm: float
    q_band: float
    group_velocity_bound: float
    dual_sup: float
    v_emp: float
    v_emp_stderr: float
    kernel_proxy: float
    lyapunov_on_spectrum: Optional[float] = None
    covariance_max_dev: Optional[float] = None
    gap_count: int = 0
    checks: List[CheckOutcome] = []

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def metrics(self) -> Dict[str, float]:
        """Numeric summary, one entry per reported quantity, in a fixed order."""
        values: Dict[str, Any] = {
            "q_norm": self.q_norm,
            "q_band": self.q_band,
            "group_velocity_bound": self.group_velocity_bound,
            "dual_sup": self.dual_sup,
            "v_emp": self.v_emp,
            "v_emp_stderr": self.v_emp_stderr,
            "v_lower_bound": 2.0 * self.q_norm,
            "kernel_proxy": self.kernel_proxy,
            "lyapunov_on_spectrum": self.lyapunov_on_spectrum,
            "covariance_max_dev": self.covariance_max_dev,
            "gap_count": float(self.gap_count),
            "passed": float(self.passed),
        }
        return {key: float(value) for key, value in values.items() if value is not None}

    def flat(self) -> Dict[str, Any]:
        """Flat JSON: the metrics, then value, reference, tolerance and verdict per check."""
        payload: Dict[str, Any] = {"name": self.name}
        payload.update(self.metrics())
        payload["passed"] = self.passed
        for check in self.checks:
            payload[f"{check.name}_value"] = check.value
            payload[f"{check.name}_reference"] = check.reference
            payload[f"{check.name}_tolerance"] = check.tolerance
            payload[f"{check.name}_passed"] = check.passed
        return payload
