from typing import Any, Dict, Optional


class LambdaQException(Exception):
    def __init__(
        self,
        message: str,
        status_code: int = 400,
        exit_code: int = 1,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.status_code = status_code
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)

    @property
    def code(self) -> str:
        # CamelCase class name -> snake_case error code
        name = type(self).__name__
        return "".join(f"_{c.lower()}" if c.isupper() else c for c in name).lstrip("_")


class ValidationError(LambdaQException, ValueError):
    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message=message, status_code=400, exit_code=1, details=details)


class DomainError(LambdaQException, ValueError):
    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message=message, status_code=400, exit_code=1, details=details)


class NoDensityError(LambdaQException, ArithmeticError):
    def __init__(self, distribution: str, x: float):
        super().__init__(
            message=f"{distribution} has no density at x={x!r}",
            status_code=422,
            exit_code=1,
            details={"distribution": distribution, "x": x}
        )


class BracketError(LambdaQException, ValueError):
    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message=message, status_code=422, exit_code=1, details=details)


class CapabilityError(LambdaQException, TypeError):
    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message=message, status_code=422, exit_code=1, details=details)


class DegenerateError(LambdaQException, ValueError):
    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message=message, status_code=422, exit_code=1, details=details)


class DegeneratePortfolioError(LambdaQException, ArithmeticError):
    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message=message, status_code=422, exit_code=3, details=details)


class GradientUndefinedError(LambdaQException, ArithmeticError):
    def __init__(self, density: float, lambda_slope: float, rho: float):
        super().__init__(
            message=(
                f"lambda quantile gradient undefined: density {density:.6g} "
                f"does not exceed lambda slope {lambda_slope:.6g} at rho={rho:.6g}"
            ),
            status_code=422,
            exit_code=3,
            details={"density": density, "lambda_slope": lambda_slope, "rho": rho}
        )


class StalledLineSearchError(LambdaQException, ArithmeticError):
    def __init__(self, halvings: int, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=f"Armijo line search stalled after {halvings} halvings",
            status_code=422,
            exit_code=3,
            details=details
        )


class ScenarioNotFound(LambdaQException, LookupError):
    def __init__(self, resource_type: str, resource_id: str):
        super().__init__(
            message=f"{resource_type} with ID {resource_id} not found",
            status_code=404,
            exit_code=1,
            details={
                "resource_type": resource_type,
                "resource_id": resource_id
            }
        )
