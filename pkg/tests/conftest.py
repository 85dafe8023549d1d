import os

import pytest

from arpcheck.permspec import load_store

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CORPUS = os.path.join(ROOT, "corpus")
MAPPINGS = os.path.join(CORPUS, "mappings")
MANIFEST = os.path.join(CORPUS, "manifest.json")


@pytest.fixture(scope="session")
def store():
    return load_store(MAPPINGS)
