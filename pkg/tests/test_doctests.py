"""Run the usage examples embedded in module docstrings."""

import doctest

import pytest

from entrank import evaluator, reporter


@pytest.mark.parametrize("module", [evaluator, reporter], ids=lambda m: m.__name__)
def test_module_doctests(module):
    result = doctest.testmod(module, verbose=False)
    assert result.attempted > 0
    assert result.failed == 0
