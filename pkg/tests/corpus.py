"""Random deterministic polynomial loops for cross-validating the solvability check."""

import random

NAMES = ("a", "b", "c", "d")


def random_monomial(rng, names, max_degree):
    degree = rng.choice([1, 1, 1, 2, 2, 3][: 2 + 2 * max_degree])
    degree = min(degree, max_degree)
    factors = [rng.choice(names) for _ in range(degree)]
    return "*".join(factors)


def random_program(rng: random.Random, max_vars: int = 4, max_degree: int = 3) -> str:
    n = rng.randint(1, max_vars)
    names = NAMES[:n]
    exprs = []
    for v in names:
        terms = []
        # keep most updates affine so both verdicts are common
        for _ in range(rng.randint(1, 3)):
            coeff = rng.choice([1, 2, -1, 3, "1/2"])
            deg = max_degree if rng.random() < 0.25 else 1
            terms.append(f"{coeff}*{random_monomial(rng, names, deg)}")
        if rng.random() < 0.3:
            terms.append(str(rng.randint(-2, 2)))
        exprs.append(" + ".join(terms))
    lines = ["while true:"]
    if rng.random() < 0.2 and n > 1:
        # a sequential variant: update the first variable separately
        lines.append(f"  {names[0]} = {exprs[0]}")
        if n > 1:
            lines.append(f"  ({', '.join(names[1:])}) = {', '.join(exprs[1:])}" if n > 2 else f"  {names[1]} = {exprs[1]}")
    elif n == 1:
        lines.append(f"  {names[0]} = {exprs[0]}")
    else:
        lines.append(f"  ({', '.join(names)}) = {', '.join(exprs)}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def corpus(count: int = 200, seed: int = 2023):
    rng = random.Random(seed)
    return [random_program(rng) for _ in range(count)]
