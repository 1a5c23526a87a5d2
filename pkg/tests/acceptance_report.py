LINES: list[str] = []


def report(n: int, name: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {n} [{name}]: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
    LINES.append(line)
    print(line)
