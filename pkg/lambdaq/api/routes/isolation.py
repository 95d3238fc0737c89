import logging

from fastapi import APIRouter, Depends

from lambdaq.api.deps import get_lambdaq_service
from lambdaq.core.config import settings
from lambdaq.schemas.reports import IsolateResult
from lambdaq.schemas.requests import IsolateConfig
from lambdaq.services.runner import LambdaQService

logger = logging.getLogger(__name__)
isolation_router = APIRouter(prefix=f"{settings.API_V1_STR}/isolate", tags=["isolation"])


@isolation_router.post("", response_model=IsolateResult)
def isolate_root(
    config: IsolateConfig,
    service: LambdaQService = Depends(get_lambdaq_service),
) -> IsolateResult:
    """Isolate the smallest crossing on a uniform grid, optionally solving inside the selected box."""
    result, _, _ = service.isolate(config)
    return result
