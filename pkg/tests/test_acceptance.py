"""The acceptance gate: one test per criterion, each reporting its result line."""

import pytest

from ccsgames.acceptance import CRITERIA

LINES = []


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, len(CRITERIA) + 1)])
def test_criterion(criterion):
    result = criterion()
    LINES.append(result.line())
    print(result.line())
    assert result.ok, result.line()
