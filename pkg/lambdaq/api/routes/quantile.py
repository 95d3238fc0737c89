import logging
import traceback

from fastapi import APIRouter, Depends, HTTPException

from lambdaq.api.deps import get_lambdaq_service
from lambdaq.core.config import settings
from lambdaq.core.exceptions import LambdaQException
from lambdaq.schemas.reports import QuantileResult
from lambdaq.schemas.requests import QuantileConfig
from lambdaq.services.runner import LambdaQService

logger = logging.getLogger(__name__)
quantile_router = APIRouter(prefix=f"{settings.API_V1_STR}/quantile", tags=["quantile"])


@quantile_router.post("", response_model=QuantileResult)
def compute_quantile(
    config: QuantileConfig,
    service: LambdaQService = Depends(get_lambdaq_service),
) -> QuantileResult:
    """Lambda quantile of a parametric law by Lambda-Newton-Bis."""
    try:
        result, _ = service.quantile(config)
        return result
    except LambdaQException:
        raise
    except Exception as e:
        logger.error(f"Unexpected error computing lambda quantile: {str(e)}")
        logger.error(traceback.format_exc())
        raise HTTPException(status_code=500, detail="An error occurred while computing the lambda quantile")
