import contextlib
import os

import numpy as np
import pytest

SEED = int(os.environ.get("SPDKIT_SEED", "0"))

# (number, name) -> "PASS" / "FAIL" / "SKIP …", filled in by the acceptance
# tests and replayed as one line per criterion at the end of the run.
_ACCEPTANCE: dict[int, tuple[str, str]] = {}


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(SEED)


@pytest.fixture
def criterion():
    """Context manager recording one acceptance criterion's outcome."""

    @contextlib.contextmanager
    def record(num: int, name: str):
        try:
            yield
        except pytest.skip.Exception as exc:
            _ACCEPTANCE[num] = (name, f"SKIP — {exc}")
            print(f"CRITERION {num:2d} SKIP {name}: {exc}")
            raise
        except BaseException:
            _ACCEPTANCE[num] = (name, "FAIL")
            print(f"CRITERION {num:2d} FAIL {name}")
            raise
        _ACCEPTANCE[num] = (name, "PASS")
        print(f"CRITERION {num:2d} PASS {name}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        name, status = _ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {name}")
