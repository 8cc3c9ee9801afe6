"""Per-criterion verdicts, printed by the terminal-summary hook in conftest."""

RESULTS: dict[int, tuple[bool, str]] = {}


def record(number: int, ok: bool, detail: str) -> bool:
    RESULTS[number] = (bool(ok), detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
    return bool(ok)
