import logging

from fastapi import APIRouter, Depends

from lambdaq.api.deps import get_lambdaq_service
from lambdaq.core.config import settings
from lambdaq.schemas.reports import EmpiricalResult
from lambdaq.schemas.requests import EmpiricalRequest
from lambdaq.services.runner import LambdaQService

logger = logging.getLogger(__name__)
empirical_router = APIRouter(prefix=f"{settings.API_V1_STR}/empirical", tags=["empirical"])


@empirical_router.post("", response_model=EmpiricalResult)
def compute_empirical(
    request: EmpiricalRequest,
    service: LambdaQService = Depends(get_lambdaq_service),
) -> EmpiricalResult:
    logger.info(f"Empirical lambda quantile over {len(request.samples)} samples")
    return service.empirical_inline(request)
