import pytest

from warsketch.pfhe import PfheParams, auto_modulus, keygen


@pytest.fixture(scope="session")
def toy8():
    """n = 8, g = 2, q = 2**40: keys shared by the pfhe tests."""
    params = PfheParams.create(8, g=2, q=2**40)
    pk, sk = keygen(params, b"toy8")
    return params, pk, sk


def stream_params(n, k, N, g=2):
    return PfheParams.create(n, g, auto_modulus(n, k, N, g))


ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record(num: int, name: str, ok: bool, detail: str) -> None:
    ACCEPTANCE[num] = (name, ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        name, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num:2d} {name}: {detail}")
