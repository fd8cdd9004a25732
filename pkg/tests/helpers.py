"""Random, domain-safe expressions for property tests."""
import numpy as np

from nlsint.exprcore import parse

MODULI = (-1.0, -0.5, 0.0, 0.3, 0.5, 1.0)


def random_source(rng: np.random.Generator, depth: int = 3) -> str:
    """Expression text that is finite and smooth for x, t in [-1.5, 1.5]."""
    if depth == 0 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.4:
            return "x"
        if r < 0.7:
            return "t"
        return f"{rng.uniform(-2, 2):.3f}"
    a = random_source(rng, depth - 1)
    kind = rng.integers(0, 15)
    if kind in (0, 1):
        return f"({a} + {random_source(rng, depth - 1)})"
    if kind == 2:
        return f"({a} - {random_source(rng, depth - 1)})"
    if kind in (3, 4):
        return f"({a} * {random_source(rng, depth - 1)})"
    if kind == 5:
        return f"({a} / (2 + cos({random_source(rng, depth - 1)})))"
    if kind == 6:
        return f"tanh({a})^{rng.integers(2, 4)}"
    if kind == 7:
        return f"exp(tanh({a}))"
    if kind == 8:
        return f"{['sin', 'cos'][rng.integers(0, 2)]}({a})"
    if kind == 9:
        return f"sech({a})"
    if kind == 10:
        return f"sqrt(1 + ({a})^2)"
    if kind == 11:
        return f"log(2 + sin({a}))"
    if kind == 12:
        return f"tan(0.5*tanh({a}))"
    if kind == 13:
        return f"-{a}" if a[0] != "-" else a
    fname = ["sn", "cn", "dn"][rng.integers(0, 3)]
    return f"{fname}({a}, {MODULI[rng.integers(0, len(MODULI))]})"


def random_expr(rng, depth=3):
    return parse(random_source(rng, depth))


def elliptic_source(rng, depth=2) -> str:
    """Random expression guaranteed to contain a Jacobi function at m = -1."""
    fname = ["sn", "cn", "dn"][rng.integers(0, 3)]
    return f"{fname}({random_source(rng, depth)}, -1) * ({random_source(rng, depth)})"
