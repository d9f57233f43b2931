from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    max_examples=60,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def partitions(n, largest=None):
    """All integer partitions of n as nonincreasing tuples."""
    if n == 0:
        yield ()
        return
    largest = largest if largest is not None else n
    for first in range(min(n, largest), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


def all_profiles(parts):
    """Dense tuples of every realizable deleted-matching profile."""
    r = len(parts)
    pairs = [(i, j) for i in range(r) for j in range(i + 1, r)]

    def rec(idx, room):
        if idx == len(pairs):
            yield ()
            return
        i, j = pairs[idx]
        cap = min(room[i], room[j])
        for m in range(cap + 1):
            room[i] -= m
            room[j] -= m
            for rest in rec(idx + 1, room):
                yield (m,) + rest
            room[i] += m
            room[j] += m

    yield from rec(0, list(parts))
