import math
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=30, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("default")

PI = Fraction(1)


@pytest.fixture(scope="session")
def table_pi():
    from arcldp.rate import build_rate_table
    return build_rate_table(math.pi)


@pytest.fixture(scope="session")
def table_half_pi():
    from arcldp.rate import build_rate_table
    return build_rate_table(math.pi / 2)


@pytest.fixture(scope="session")
def lambda_pi(table_pi):
    from arcldp.rate import lambda_transform
    return lambda_transform(table_pi)


@pytest.fixture(scope="session")
def spec16():
    from arcldp.spectrum import eigenvalues
    return eigenvalues(16, PI, x_max=3.0)


@pytest.fixture(scope="session")
def spec64():
    from arcldp.spectrum import eigenvalues
    return eigenvalues(64, PI, x_max=3.0)


ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record a PASS/FAIL line for one acceptance criterion.

    Usage: ``rec = criterion(k, title)``; call ``rec.note(text)`` to attach
    measured values.  The outcome is taken from the test result.
    """

    class Recorder:
        def __call__(self, k, title):
            self.k, self.title, self.notes = k, title, []
            ACCEPTANCE[k] = self
            request.node.acceptance = self
            return self

        def note(self, text):
            self.notes.append(text)

    return Recorder()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    rec = getattr(item, "acceptance", None)
    if rec is not None and rep.when == "call":
        rec.status = "PASS" if rep.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        rec = ACCEPTANCE[k]
        status = getattr(rec, "status", "FAIL")
        detail = "; ".join(rec.notes)
        terminalreporter.write_line(f"{status} criterion {k}: {rec.title}" + (f" [{detail}]" if detail else ""))
