"""Every acceptance criterion at its stated tolerance, one line each."""

import pytest

from yamabe_lab import acceptance


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number, acceptance_lines):
    result = acceptance.run([str(number)])[0]
    line = result.line()
    print(line)
    acceptance_lines.append(line)
    assert result.passed, line
