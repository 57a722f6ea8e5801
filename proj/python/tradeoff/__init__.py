"""Risk/utility trade-off frontiers for one-period finite-state markets."""

from ._core import *  # noqa: F401,F403
from ._core import TradeoffError, __doc__  # noqa: F401
