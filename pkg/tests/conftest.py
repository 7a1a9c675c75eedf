import pytest

from hp_robust import _pykernels

_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def acceptance_log(request):
    return request.config.stash.setdefault(_ACCEPTANCE, {})


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_ACCEPTANCE, None)
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(log):
        ok, detail = log[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


def _backends():
    out = [pytest.param(_pykernels, id="python")]
    try:
        from hp_robust import _kernels
    except ImportError:
        out.append(pytest.param(None, id="compiled", marks=pytest.mark.skip("extension not built")))
    else:
        out.append(pytest.param(_kernels, id="compiled"))
    return out


@pytest.fixture(params=_backends())
def backend(request):
    return request.param
