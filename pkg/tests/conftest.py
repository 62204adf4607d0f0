import sys
from pathlib import Path

import pytest

STUB = Path(__file__).with_name("stub_evaluator.py")


@pytest.fixture
def stub_cmd():
    """Builds an argv list that launches the loopback evaluator."""

    def build(*args: str) -> list[str]:
        return [sys.executable, str(STUB), *args]

    return build


@pytest.fixture
def feedback_table(tmp_path):
    values = [round(0.5 + 0.004 * ((7 * k) % 101), 6) for k in range(100)]
    path = tmp_path / "table.txt"
    path.write_text("\n".join(repr(v) for v in values) + "\n")
    return path, values
