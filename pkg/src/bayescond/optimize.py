"""One-dimensional golden-section search."""

import math

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, lo, hi, tol=1e-6, max_iter=200):
    """Maximize a unimodal ``f`` on ``[lo, hi]``.

    Returns ``(x, f(x))``.  The bracket shrinks until it is narrower than
    ``tol``; the endpoints are also compared so a maximum at the bracket edge
    is not missed.
    """
    a, b = float(lo), float(hi)
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
    best = max([(f1, x1), (f2, x2), (f(lo), float(lo)), (f(hi), float(hi))],
               key=lambda t: t[0])
    return best[1], best[0]
