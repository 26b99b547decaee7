"""Collects one line per acceptance criterion for the terminal summary."""

LINES: dict = {}


def record(number: int, name: str, passed: bool, detail: str) -> None:
    LINES[number] = f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    print(LINES[number])
