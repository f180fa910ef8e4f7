import pytest

_CRITERIA: dict[str, list[tuple[str, bool, str]]] = {}
_TITLES: dict[str, str] = {}


class CriterionLog:
    """Collects sub-checks per acceptance criterion for the end-of-run summary."""

    def check(self, key: str, title: str, name: str, ok: bool, detail: str) -> bool:
        _TITLES.setdefault(key, title)
        _CRITERIA.setdefault(key, []).append((name, bool(ok), detail))
        return bool(ok)


@pytest.fixture(scope="session")
def criteria() -> CriterionLog:
    return CriterionLog()


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: int(k)):
        checks = _CRITERIA[key]
        ok = all(c[1] for c in checks)
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {_TITLES[key]}")
        for name, good, detail in checks:
            tr.write_line(f"        [{'ok' if good else 'FAILED'}] {name}: {detail}")
