"""Collects one (passed, name, detail) line per acceptance criterion."""

LINES: list[tuple[bool, str, str]] = []


def record(ok: bool, name: str, detail: str) -> None:
    LINES.append((bool(ok), name, detail))
