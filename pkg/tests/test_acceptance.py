"""The fourteen acceptance criteria at their stated tolerances.

Each test prints one ``[PASS]``/``[FAIL]`` line (run with ``-s`` to see them live;
they are also echoed in the assertion message).  The checks live in
``attractor_lab.acceptance`` so that ``attractor-lab selftest`` runs the same code.
"""

import pytest

from attractor_lab.acceptance import CRITERIA


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    result = CRITERIA[number]()
    line = result.line()
    print(line)
    assert result.passed, line
