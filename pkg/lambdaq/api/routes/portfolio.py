import logging

from fastapi import APIRouter, Depends

from lambdaq.api.deps import get_lambdaq_service
from lambdaq.core.config import settings
from lambdaq.schemas.reports import OptimizeResult
from lambdaq.schemas.requests import OptimizeConfig
from lambdaq.services.runner import LambdaQService

logger = logging.getLogger(__name__)
portfolio_router = APIRouter(prefix=f"{settings.API_V1_STR}/optimize", tags=["portfolio"])


@portfolio_router.post("", response_model=OptimizeResult)
def optimize_portfolio(
    config: OptimizeConfig,
    service: LambdaQService = Depends(get_lambdaq_service),
) -> OptimizeResult:
    logger.info(f"Optimizing {len(config.w_init)} assets with the {config.method.name} method")
    result, _ = service.optimize(config)
    return result
