from .empirical import empirical_router
from .isolation import isolation_router
from .portfolio import portfolio_router
from .quantile import quantile_router

__all__ = [
    "empirical_router",
    "isolation_router",
    "portfolio_router",
    "quantile_router",
]
