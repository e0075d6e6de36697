import cmath

from hypothesis import given, settings
from hypothesis import strategies as st

from fiberpoles.cyclotomic import CyclotomicField

small = st.lists(st.integers(-3, 3), min_size=1, max_size=6)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 4, 5, 6, 12]), small, small)
def test_arithmetic_matches_embedding(order, a, b):
    K = CyclotomicField(order)
    z = cmath.exp(2j * cmath.pi / order)

    def elt(cs):
        out = K.zero()
        for i, c in enumerate(cs):
            out = out + K.zeta(i) * c
        return out

    def num(cs):
        return sum(c * z**i for i, c in enumerate(cs))

    x, y = elt(a), elt(b)
    assert abs(complex(x + y) - (num(a) + num(b))) < 1e-9
    assert abs(complex(x * y) - num(a) * num(b)) < 1e-9
    assert abs(complex(x.conjugate()) - num(a).conjugate()) < 1e-9
    assert (x - x).is_zero()


def test_zeta_has_exact_order():
    K = CyclotomicField(6)
    assert K.zeta(6) == K.one()
    assert not (K.zeta(3) - K.one()).is_zero()
