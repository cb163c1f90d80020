"""Shared fixtures."""
import sys
from pathlib import Path

import pytest
from hypothesis import settings

ROOT = Path(__file__).parent
sys.path.insert(0, str(ROOT))

from core.guardrails import GuardrailEngine  # noqa: E402
from frontend.lower import lower  # noqa: E402
from frontend.parser import parse  # noqa: E402
from seplogic.blocks import block_registry  # noqa: E402
from seplogic.terms import FreshNames  # noqa: E402

CORPUS = ROOT / "corpus"

settings.register_profile("default", deadline=None, print_blob=True)
settings.load_profile("default")


@pytest.fixture(autouse=True)
def fresh_blocks():
    """Every test starts from the built-in list block only."""
    block_registry.reset()
    yield
    block_registry.reset()


@pytest.fixture
def names():
    return FreshNames()


@pytest.fixture
def guardrails():
    return GuardrailEngine()


@pytest.fixture
def corpus_dir():
    return CORPUS


@pytest.fixture
def load_program():
    """Parses and lowers a corpus file by stem, or program text."""
    def load(name_or_text: str):
        if "(" in name_or_text:
            return lower(parse(name_or_text))
        return lower(parse((CORPUS / f"{name_or_text}.tl").read_text(encoding="utf-8")))
    return load
