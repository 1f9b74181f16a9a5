import pytest

from loopinvar import benchmarks
from loopinvar.frontend import parse_program
from loopinvar.recurrences import MomentContext

SQUARES = """
z = 0
while true:
  z = 1 - z
  x = 2*x + y^2 + z
  y = 2*y - y^2 + 2*z
end
"""

# squares without the initialisation of z (all three start symbolic)
SQUARES_FREE = """
while true:
  z = 1 - z
  x = 2*x + y^2 + z
  y = 2*y - y^2 + 2*z
end
"""

SQUARES_AND_CUBE = benchmarks.source("squares-and-cube")
MARKOV = benchmarks.source("non-lin-markov-1")

# y is defective; x only ever adds or subtracts y, but its second moment sees y^2
PROB_XY = """
while true:
  y = 4*y*(1 - y)
  x = x - y {1/2} x + y
end
"""


@pytest.fixture
def squares():
    return parse_program(SQUARES)


@pytest.fixture
def squares_ctx(squares):
    return MomentContext(squares)


@pytest.fixture
def markov_ctx():
    return MomentContext(parse_program(MARKOV))


def bench(name):
    return benchmarks.load(name)


def mono(ctx, **powers):
    return tuple(powers.get(v, 0) for v in ctx.variables)


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[number])
