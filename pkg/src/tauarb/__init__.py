"""Exact-rational toolkit for finite markets observed up to, or after, a random time."""

from .errors import (
    ArbitrageExists,
    InstanceTooLarge,
    InvariantBreach,
    ModelError,
    NotAdaptedError,
    NotHonestError,
    NotMartingaleError,
    NotPredictableError,
)
from .filtered_space import *  # noqa: F401,F403
from .random_time import *  # noqa: F401,F403
from .transfer import *  # noqa: F401,F403
from .arbitrage import *  # noqa: F401,F403
from .binomial_models import BinomialModel, first_model, second_model

__version__ = "0.1.0"
