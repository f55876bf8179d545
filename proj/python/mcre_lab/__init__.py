"""Python bindings for the mcre_lab C++ core."""

import json as _json

from ._mcre_lab import *  # noqa: F401,F403
from ._mcre_lab import __version__, toy_sponsored_search as _toy


def toy_sponsored_search(scenario=None):
    """Build the toy sponsored-search model from a scenario dict (defaults when None)."""
    return _toy(_json.dumps(scenario) if scenario is not None else "")
