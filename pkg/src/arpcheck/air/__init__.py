from .model import *  # noqa: F401,F403
from .model import AppModel, Method, Site
from .parser import (
    AirError, AirSyntaxError, InvariantError, ResolutionError, load_app,
    parse_app, validate,
)
from .printer import pretty_print

__all__ = [
    "AppModel", "Method", "Site", "AirError", "AirSyntaxError",
    "InvariantError", "ResolutionError", "load_app", "parse_app",
    "pretty_print", "validate",
]
