"""Seeded random expression text for parser and derivative checks."""

import random

from hypothesis import strategies as st


def _num(rng):
    return rng.choice(["0.5", "2", "3", "1.25", "0.1", "7", "1e-2", "4.5e1", ".75"])


def random_text(rng, depth=3):
    """Any grammar construct, including division, sqrt, constants and ^ chains."""
    if depth == 0 or rng.random() < 0.2:
        return rng.choice(["t", "c", "pi", _num(rng)])
    k = rng.randrange(8)
    a = random_text(rng, depth - 1)
    if k == 0:
        return f"{a} {rng.choice('+-*/')} {random_text(rng, depth - 1)}"
    if k == 1:
        return f"({a}) {rng.choice('+-*/')} ({random_text(rng, depth - 1)})"
    if k == 2:
        return f"-{a}"
    if k == 3:
        exp = rng.choice(["2", "3", "-1", "0.5", "2^2", "(-2)", "1.5^-1"])
        return f"({a})^{exp}"
    if k == 4:
        return f"{rng.choice(['sin', 'cos', 'exp', 'sqrt', 'tanh'])}({a})"
    if k == 5:
        return f"{a}*{random_text(rng, depth - 1)}"
    if k == 6:
        return f"({a})"
    return f"{a}-{random_text(rng, depth - 1)}"


def random_smooth(rng, depth=3):
    """Polynomial/trig expressions that are defined and moderate for |t| <= 2."""
    if depth == 0 or rng.random() < 0.25:
        return rng.choice(["t", "t", f"{rng.uniform(0.1, 2):.3f}", "pi"])
    k = rng.randrange(6)
    a = random_smooth(rng, depth - 1)
    if k == 0:
        return f"{a} + {random_smooth(rng, depth - 1)}"
    if k == 1:
        return f"({a}) - {random_smooth(rng, depth - 1)}"
    if k == 2:
        return f"({a})*({random_smooth(rng, depth - 1)})"
    if k == 3:
        return f"({a})^{rng.choice(['2', '3'])}"
    if k == 4:
        return f"{rng.choice(['sin', 'cos', 'tanh'])}({a})"
    return f"{rng.uniform(0.2, 1.5):.3f}*sin({rng.uniform(0.5, 2):.3f}*t + {a})"


def generated(seed, n, fn):
    rng = random.Random(seed)
    return [fn(rng) for _ in range(n)]


@st.composite
def expr_text(draw, depth=3):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_text(random.Random(seed), depth)
