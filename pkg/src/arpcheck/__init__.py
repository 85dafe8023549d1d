"""Static detection of Android runtime-permission misuse in AIR programs."""

from .air import AppModel, load_app, parse_app, pretty_print
from .config import Config, load_config
from .detector import AnalysisResult, BugReport, analyze
from .permspec import MappingStore, load_store

__version__ = "0.1.0"

__all__ = [
    "AppModel", "load_app", "parse_app", "pretty_print", "Config",
    "load_config", "AnalysisResult", "BugReport", "analyze", "MappingStore",
    "load_store",
]
