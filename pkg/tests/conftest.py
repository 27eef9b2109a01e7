import random

import pytest

from fragcheck import bundled_spec, load_spec

INT_FIELDS = ("a", "b")
ATOMS = (
    "db.a > 0", "db.a = 0", "db.b < 1", "db.a <= db.b", "db.b = -1",
    "db.f = true", "db.f = false", "db.a + db.b >= 2", "true", "false",
)
GUARDS = ("true", "db.a > 0", "db.b < 2", "db.f = true", "db.f = false", "db.a <> db.b", "db.a >= -1 && db.b <= 1")
SCRIPTS = (
    "", "db.a = db.a - 1", "db.a = db.a + 1", "db.b = db.a", "db.f = true", "db.f = false",
    "db.b = -db.b", "db.a = 0; db.b = db.b + 1",
)


@pytest.fixture(scope="session")
def purchase():
    return bundled_spec("purchase")


@pytest.fixture(scope="session")
def decrement():
    return bundled_spec("decrement")


def random_spec_doc(rng: random.Random, max_nodes=4, max_out=3) -> dict:
    """A single-fragment process over DB = {a, b: Integer, f: Bool}."""
    n = rng.randint(1, max_nodes)
    nodes = [{"id": f"N{i}", "labels": ["init"] if i == 0 else []} for i in range(n)]
    edges = []
    for i in range(n):
        for _ in range(rng.randint(0, max_out)):
            edges.append({
                "id": f"e{len(edges)}",
                "from": f"N{i}",
                "to": f"N{rng.randrange(n)}",
                "guard": rng.choice(GUARDS),
                "script": rng.choice(SCRIPTS),
            })
    return {
        "name": "random",
        "types": "DB = { a: Integer, b: Integer, f: Bool }",
        "fragments": [{"name": "M", "nodes": nodes, "edges": edges}],
    }


def random_db(rng: random.Random) -> dict:
    return {"a": rng.randint(-3, 3), "b": rng.randint(-3, 3), "f": rng.random() < 0.5}


def random_path(rng: random.Random, depth: int) -> str:
    """Random path formula text in negation normal form."""
    if depth == 0 or rng.random() < 0.2:
        atom = rng.choice(ATOMS)
        return f"~({atom})" if rng.random() < 0.3 else f"({atom})"
    kind = rng.choice(("and", "or", "X", "WX", "U", "R", "A", "E", "G", "F"))
    sub = lambda: random_path(rng, depth - 1)  # noqa: E731
    if kind == "and":
        return f"({sub()} && {sub()})"
    if kind == "or":
        return f"({sub()} || {sub()})"
    if kind in ("U", "R"):
        return f"({sub()} {kind} {sub()})"
    return f"({kind} {sub()})"


def random_query(rng: random.Random, depth: int = 4) -> str:
    return f"{rng.choice('AE')} {random_path(rng, depth - 1)}"


def random_instance(seed: int):
    rng = random.Random(seed)
    return load_spec(random_spec_doc(rng)), random_db(rng), random_query(rng), rng.randint(0, 5)


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion."""
    counts: dict[int, dict[str, int]] = {}
    for status in ("passed", "failed", "skipped", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid:
                continue
            if status == "passed" and rep.when != "call":
                continue
            n = int(nodeid.split("test_criterion_")[1].split("_")[0])
            key = "failed" if status == "error" else status
            counts.setdefault(n, {}).setdefault(key, 0)
            counts[n][key] += 1
    if not counts:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(counts):
        c = counts[n]
        word = "FAIL" if c.get("failed") else "PASS" if c.get("passed") else "SKIP"
        note = f" ({c['skipped']} optional check skipped)" if c.get("skipped") and word != "SKIP" else ""
        terminalreporter.write_line(f"criterion {n}: {word}{note}")
