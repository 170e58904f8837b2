import pytest


@pytest.fixture
def criterion(capsys):
    """Print one PASS/FAIL line per acceptance criterion, bypassing capture."""

    def report(label, ok, detail=""):
        with capsys.disabled():
            print(f"\n[acceptance] {label}: {'PASS' if ok else 'FAIL'} {detail}".rstrip(), flush=True)
        return ok

    return report
