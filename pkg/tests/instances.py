"""Small eligible (K, K', p) instances with K and K' non-isomorphic, used by
the oracle comparisons. Each entry is (D, radicand of K, radicand of K', p)
with radicands given as (x, y, den) meaning x/den + (y/den) sqrt D."""
from conftest import cm

ORACLE = [
    (5, (-5, -1, 2), (-85, 34, 1), 19),
    (5, (-85, 34, 1), (-5, -1, 2), 19),
    (2, (-9, -2, 1), (-15, -8, 1), 3),
    (2, (-9, -2, 1), (-63, -40, 1), 19),
    (2, (-9, -2, 1), (-181, 126, 1), 37),
    (2, (-9, -2, 1), (-21, 10, 1), 3),
    (13, (-9, 1, 2), (-345, -95, 2), 19),
]


def fields(entry):
    D, r1, r2, p = entry
    return cm(D, *r1), cm(D, *r2), p


def label(entry):
    D, r1, r2, p = entry
    return f"D{D}-{r1[0]}{r1[1]:+d}-{r2[0]}{r2[1]:+d}-p{p}"
