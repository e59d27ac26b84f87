from pathlib import Path
from typing import List

import hypothesis
import numpy as np
import pytest
from loguru import logger

from src.language.interpreter import execute
from src.language.parser import parse

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=20)
hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False)
hypothesis.settings.load_profile("ci")

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def load_fixture(name: str):
    path = fixture_path(name)
    return parse(path.read_text(encoding="utf-8"), filename=str(path))


@pytest.fixture
def chessboard_program():
    return load_fixture("chessboard.sl")


@pytest.fixture
def chessboard(chessboard_program):
    root, _ = execute(chessboard_program)
    return root


@pytest.fixture
def log_messages() -> List[str]:
    """Loguru records emitted during the test, as ``LEVEL: message`` strings."""
    messages: List[str] = []
    handler_id = logger.add(lambda m: messages.append(f"{m.record['level'].name}: "
                                                      f"{m.record['message']}"),
                            level="DEBUG")
    yield messages
    logger.remove(handler_id)
